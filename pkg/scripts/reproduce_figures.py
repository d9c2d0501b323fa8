"""Write every figure dataset as CSV and print a short summary of each.

    python3 scripts/reproduce_figures.py [--out results/]
"""

import argparse
import math
import sys
from pathlib import Path

from phasesqueeze.cli import FIGURES, main
from phasesqueeze.opo import OpoCoupling, drive_from_gain
from phasesqueeze.threshold import (
    SweepSpec,
    gain_ceiling,
    threshold_closed_form,
    threshold_sweep,
    variance_curves,
)


def summarize() -> None:
    a = threshold_closed_form(5.70, OpoCoupling(0.008, 0.937), drive_from_gain(2.75))
    b = threshold_closed_form(2.05, OpoCoupling(0.079, 0.871), drive_from_gain(3.12))
    print(f"configuration A: {a.classification.value}, sigma_th = {a.sigma_th_deg:.3f} deg")
    print(f"configuration B: {b.classification.value}")

    curves = variance_curves(2.05, OpoCoupling(0.079, 0.871), drive_from_gain(3.12),
                             (0.0, math.radians(30), math.radians(0.25)))
    ratio = curves.var_with_opo / curves.var_no_opo
    print(f"configuration B variance ratio on [0, 30] deg: {ratio.min():.3f} .. {ratio.max():.3f}")

    for label, coupling in (("top", OpoCoupling(0.01, 0.93)), ("bottom", OpoCoupling(0.08, 0.87))):
        rows = threshold_sweep(SweepSpec((1.1, 6.0, 0.05), (1.0, 2.0, 5.0), coupling))
        ceilings = {b: gain_ceiling(rows, b) for b in (1.0, 2.0, 5.0)}
        text = ", ".join(f"beta={b:g}: {g:.2f}" for b, g in ceilings.items())
        print(f"sweep {label}: gain ceiling {text}")


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results", help="output directory")
    args = parser.parse_args(argv)
    code = main(["reproduce", "all", "--out", args.out])
    if code:
        return code
    print(f"wrote {len(FIGURES)} datasets to {Path(args.out).resolve()}")
    summarize()
    return 0


if __name__ == "__main__":
    sys.exit(run())
