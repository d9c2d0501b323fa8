"""Seeded homodyne sampling used as a stochastic check on the analytic moments.

Randomness comes from Philox4x64, a counter-based generator.  Every draw is a
pure function of ``(seed, batch, channel, stream, sample index)``: the Philox
key is derived by hashing ``(seed, batch, channel, stream)`` through
:class:`numpy.random.SeedSequence`, and the sample index is the counter.  No
generator state is shared, so batches can run in any order or in parallel.

Normals are produced by inverse CDF from 53-bit uniforms on the open interval
(0, 1), which keeps the stream platform independent and free of rejection
loops.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import InsufficientSamples
from .noise import (
    CoherentSignal,
    PhaseDiffusion,
    QuadratureMoments,
    coherent_moments,
    diffused_moments,
    estimate_phase,
    wrap_angle,
)
from .opo import (
    OpoCoupling,
    OpoDrive,
    amplitude_gains,
    opo_diffused_moments,
    opo_output_moments,
    squeezing_variances,
)

STREAM_PHASE = 0
STREAM_QUADRATURE = 1
CHANNEL_X = 0
CHANNEL_Y = 1

KINDS = ("coherent", "diffused", "opo-output", "opo-diffused")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    n_samples: int
    n_batches: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.n_samples < 2:
            raise InsufficientSamples(f"n_samples must be >= 2, got {self.n_samples}")
        if self.n_batches < 1:
            raise ValueError(f"n_batches must be >= 1, got {self.n_batches}")


@dataclass(frozen=True)
class StateSpec:
    """A state to sample: coherent input, optional phase diffusion, optional OPO."""

    kind: str
    beta: float
    phi: float = 0.0
    sigma: float = 0.0
    coupling: OpoCoupling | None = None
    drive: OpoDrive | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.has_opo and (self.coupling is None or self.drive is None):
            raise ValueError(f"{self.kind} needs coupling and drive")

    @property
    def has_opo(self) -> bool:
        return self.kind.startswith("opo")

    @property
    def diffused(self) -> bool:
        return self.kind.endswith("diffused")

    @classmethod
    def coherent(cls, beta, phi=0.0):
        return cls("coherent", beta, phi)

    @classmethod
    def phase_diffused(cls, beta, sigma, phi=0.0):
        return cls("diffused", beta, phi, sigma)

    @classmethod
    def opo_output(cls, beta, coupling, drive, phi=0.0):
        return cls("opo-output", beta, phi, 0.0, coupling, drive)

    @classmethod
    def opo_diffused(cls, beta, sigma, coupling, drive, phi=0.0):
        return cls("opo-diffused", beta, phi, sigma, coupling, drive)


def analytic_moments(state: StateSpec) -> QuadratureMoments:
    signal = CoherentSignal(state.beta, state.phi)
    if state.kind == "coherent":
        return coherent_moments(signal)
    if state.kind == "diffused":
        return diffused_moments(signal, PhaseDiffusion(state.sigma))
    if state.kind == "opo-output":
        return opo_output_moments(signal, state.coupling, state.drive)
    if state.phi != 0.0:
        raise ValueError("analytic OPO moments of a diffused state need phi = 0")
    return opo_diffused_moments(state.beta, PhaseDiffusion(state.sigma), state.coupling, state.drive)


def _key(seed: int, batch: int, channel: int, stream: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(batch, channel, stream))
    return ss.generate_state(2, np.uint64)


def uniforms(seed: int, n: int, *, batch: int = 0, channel: int = 0, stream: int = 0) -> np.ndarray:
    """``n`` uniforms on (0, 1) at counter positions ``0 .. n-1`` of the keyed stream."""
    raw = np.random.Philox(key=_key(seed, batch, channel, stream)).random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, n: int, *, batch: int = 0, channel: int = 0, stream: int = 0) -> np.ndarray:
    return ndtri(uniforms(seed, n, batch=batch, channel=channel, stream=stream))


def sample_quadrature(
    state: StateSpec,
    angle: float,
    config: SamplerConfig,
    *,
    batch: int = 0,
    channel: int = 0,
) -> np.ndarray:
    """Homodyne samples of ``x_theta = x cos(theta) + y sin(theta)``.

    Each shot draws its own phase from the diffusion kernel (if any), then a
    Gaussian outcome around the conditional mean with the conditional variance.
    The OPO output has no x-y covariance for the fixed pump phase.
    """
    n = config.n_samples
    if state.diffused:
        z_phase = normals(config.seed, n, batch=batch, channel=channel, stream=STREAM_PHASE)
        phases = state.phi + state.sigma * z_phase
    else:
        phases = np.full(n, float(state.phi))
    amp = 2.0 * state.beta
    if state.has_opo:
        gx, gy = amplitude_gains(state.coupling, state.drive)
        var_x, var_y = squeezing_variances(state.coupling.eta_esc, state.drive.d)
    else:
        gx = gy = var_x = var_y = 1.0
    c, s = math.cos(angle), math.sin(angle)
    mean_theta = gx * amp * np.cos(phases) * c + gy * amp * np.sin(phases) * s
    std_theta = math.sqrt(var_x * c * c + var_y * s * s)
    z = normals(config.seed, n, batch=batch, channel=channel, stream=STREAM_QUADRATURE)
    return mean_theta + std_theta * z


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean and unbiased variance with their standard errors.

    ``std_error_variance`` is the Gaussian-theory value ``var * sqrt(2/(n-1))``.
    Phase mixtures are not Gaussian, so ``std_error_variance_kurtosis`` gives
    the version built from the sample fourth central moment as well.
    """

    mean: float
    variance: float
    std_error_mean: float
    std_error_variance: float
    n: int
    fourth_central_moment: float

    @property
    def std_error_variance_kurtosis(self) -> float:
        n, v, m4 = self.n, self.variance, self.fourth_central_moment
        return math.sqrt(max(m4 - v * v * (n - 3) / (n - 1), 0.0) / n)

    @property
    def std_error_variance_conservative(self) -> float:
        return max(self.std_error_variance, self.std_error_variance_kurtosis)


def estimate_moments(samples) -> MomentEstimate:
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 2:
        raise InsufficientSamples(f"need at least 2 samples, got {n}")
    mean = float(np.mean(x))
    dev = x - mean
    variance = float(np.sum(dev * dev) / (n - 1))
    m4 = float(np.mean(dev**4))
    return MomentEstimate(
        mean=mean,
        variance=variance,
        std_error_mean=math.sqrt(variance / n),
        std_error_variance=variance * math.sqrt(2.0 / (n - 1)),
        n=n,
        fourth_central_moment=m4,
    )


@dataclass(frozen=True)
class CalibrationRecord:
    quantity: str
    analytic: float
    empirical: float
    std_error: float

    @property
    def z(self) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.empirical == self.analytic else math.inf
        return (self.empirical - self.analytic) / self.std_error

    def as_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "analytic": self.analytic,
            "empirical": self.empirical,
            "std_error": self.std_error,
            "z": self.z,
        }


def calibrate_moments(state: StateSpec, config: SamplerConfig) -> list[CalibrationRecord]:
    """Compare sampled x and y means/variances with the analytic moments.

    x and y are drawn on independent channels.  Variance z-scores use the
    larger of the Gaussian and fourth-moment standard errors.
    """
    m = analytic_moments(state)
    out = []
    for name, angle, channel, mean, var in (
        ("x", 0.0, CHANNEL_X, m.mean_x, m.var_x),
        ("y", 0.5 * math.pi, CHANNEL_Y, m.mean_y, m.var_y),
    ):
        est = estimate_moments(sample_quadrature(state, angle, config, channel=channel))
        out.append(CalibrationRecord(f"mean_{name}", mean, est.mean, est.std_error_mean))
        out.append(
            CalibrationRecord(
                f"var_{name}", var, est.variance, est.std_error_variance_conservative
            )
        )
    return out


@dataclass
class PhaseEstimatorResult:
    """Two-copy estimator experiment: ``n_samples * var(phi_hat)`` over batches.

    ``std_error`` is the standard error of that scaled variance, computed from
    the fourth central moment of the per-batch estimates so it covers the
    combined x- and y-channel fluctuations without a Gaussian assumption.
    """

    n_samples: int
    n_batches: int
    scaled_variance: float
    std_error: float
    analytic: float
    phi_hats: np.ndarray = field(repr=False)

    @property
    def z(self) -> float:
        return (self.scaled_variance - self.analytic) / self.std_error


def _batch_phase(state: StateSpec, config: SamplerConfig, batch: int) -> float:
    xs = sample_quadrature(state, 0.0, config, batch=batch, channel=CHANNEL_X)
    ys = sample_quadrature(state, 0.5 * math.pi, config, batch=batch, channel=CHANNEL_Y)
    return math.atan2(float(np.mean(ys)), float(np.mean(xs)))


def mc_phase_estimator_experiment(
    state: StateSpec, config: SamplerConfig, workers: int = 1
) -> PhaseEstimatorResult:
    """Empirical single-shot estimator variance from repeated two-copy estimates.

    Per batch, ``n_samples`` x-samples and ``n_samples`` independent y-samples
    give one ``phi_hat = atan2(mean_y, mean_x)``.  The spread of ``phi_hat``
    across batches, times ``n_samples``, converges to the first-order
    propagated variance once ``n_samples`` is large (about 1e4 and up).
    """
    if config.n_batches < 100:
        raise InsufficientSamples(f"n_batches must be >= 100, got {config.n_batches}")
    batches = range(config.n_batches)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            phi_hats = np.array(list(pool.map(lambda b: _batch_phase(state, config, b), batches)))
    else:
        phi_hats = np.array([_batch_phase(state, config, b) for b in batches])
    center = math.atan2(float(np.mean(np.sin(phi_hats))), float(np.mean(np.cos(phi_hats))))
    dev = np.array([wrap_angle(p - center) for p in phi_hats])
    est = estimate_moments(dev)
    n = config.n_samples
    return PhaseEstimatorResult(
        n_samples=n,
        n_batches=config.n_batches,
        scaled_variance=n * est.variance,
        std_error=n * est.std_error_variance_kurtosis,
        analytic=estimate_phase(analytic_moments(state)).variance,
        phi_hats=phi_hats,
    )
