"""Monte Carlo calibration of the analytic moments and the phase estimator.

Prints a z-score table over the calibration grid, then runs the two-copy
estimator experiment for a coherent and a phase-diffused state.

    python3 scripts/mc_calibration.py [--samples 1000000] [--seed 20240501]
"""

import argparse
import itertools
import math
import sys
import time

from phasesqueeze.montecarlo import (
    SamplerConfig,
    StateSpec,
    calibrate_moments,
    mc_phase_estimator_experiment,
)
from phasesqueeze.opo import OpoCoupling, drive_from_gain

CONFIGS = {
    "A": (OpoCoupling(0.008, 0.937), 2.75),
    "B": (OpoCoupling(0.079, 0.871), 3.12),
}


def calibration_table(config: SamplerConfig) -> float:
    print(f"{'state':<22}{'quantity':<9}{'analytic':>12}{'empirical':>12}{'z':>8}")
    worst = 0.0
    for beta, sigma in itertools.product((2.0, 5.7), (0.0, 0.25, 0.5)):
        states = {"diffused": StateSpec.phase_diffused(beta, sigma)}
        for name, (coupling, gain) in CONFIGS.items():
            states[f"opo-{name}"] = StateSpec.opo_diffused(beta, sigma, coupling, drive_from_gain(gain))
        for label, state in states.items():
            tag = f"{label} b={beta:g} s={sigma:g}"
            for rec in calibrate_moments(state, config):
                worst = max(worst, abs(rec.z))
                print(f"{tag:<22}{rec.quantity:<9}{rec.analytic:12.6f}{rec.empirical:12.6f}{rec.z:8.2f}")
    return worst


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=20240501)
    parser.add_argument("--batches", type=int, default=1000)
    parser.add_argument("--batch-samples", type=int, default=10_000)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args(argv)

    start = time.perf_counter()
    worst = calibration_table(SamplerConfig(args.seed, args.samples))
    print(f"max |z| = {worst:.2f}")

    est_config = SamplerConfig(args.seed, args.batch_samples, args.batches)
    for label, state in (
        ("coherent beta=2", StateSpec.coherent(2.0)),
        ("diffused beta=2 sigma=pi/4", StateSpec.phase_diffused(2.0, math.pi / 4)),
    ):
        res = mc_phase_estimator_experiment(state, est_config, workers=args.workers)
        print(f"{label}: n*var = {res.scaled_variance:.4f} +/- {res.std_error:.4f}"
              f" (analytic {res.analytic:.5f}, z = {res.z:.2f})")
    print(f"elapsed {time.perf_counter() - start:.1f} s")
    return 0 if worst < 5.0 else 4


if __name__ == "__main__":
    sys.exit(run())
