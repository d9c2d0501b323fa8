"""Phase-diffused coherent states through a degenerate OPO.

Closed-form Gaussian moments, the two-copy phase estimator, the phase-noise
threshold above which the OPO helps, and a seeded homodyne Monte Carlo.
"""

from .errors import ModelError
from .montecarlo import SamplerConfig, StateSpec, calibrate_moments, mc_phase_estimator_experiment
from .noise import (
    CoherentSignal,
    PhaseDiffusion,
    QuadratureMoments,
    coherent_moments,
    diffused_moments,
    estimate_phase,
    phase_variance_no_opo,
)
from .opo import (
    OpoCoupling,
    OpoDrive,
    OpoMirrorSpec,
    coupling_from_mirrors,
    drive_from_gain,
    opo_diffused_moments,
    opo_output_moments,
    phase_compression,
)
from .threshold import (
    Classification,
    SweepSpec,
    phase_variance_with_opo,
    threshold_bisection,
    threshold_closed_form,
    threshold_sweep,
    variance_curves,
)

__all__ = [
    "Classification",
    "CoherentSignal",
    "ModelError",
    "OpoCoupling",
    "OpoDrive",
    "OpoMirrorSpec",
    "PhaseDiffusion",
    "QuadratureMoments",
    "SamplerConfig",
    "StateSpec",
    "SweepSpec",
    "calibrate_moments",
    "coherent_moments",
    "coupling_from_mirrors",
    "diffused_moments",
    "drive_from_gain",
    "estimate_phase",
    "mc_phase_estimator_experiment",
    "opo_diffused_moments",
    "opo_output_moments",
    "phase_compression",
    "phase_variance_no_opo",
    "phase_variance_with_opo",
    "threshold_bisection",
    "threshold_closed_form",
    "threshold_sweep",
    "variance_curves",
]
