"""Phase-estimator variance with and without the OPO, and the noise threshold.

The OPO helps when it lowers the estimator variance.  Writing ``u = exp(sigma^2)``
the advantage ``V_no_opo - V_opo`` has the sign of ``u^2 D - N`` with

    N = 2 beta^2 (alpha_x^2 - alpha_y^2)
    D = alpha_x^2 + 2 beta^2 (alpha_x^2 - alpha_y^2 - 2 Sigma_y^2)

so there is at most one crossing, at ``sigma_th = sqrt(ln(N/D) / 2)``.
:func:`threshold_bisection` finds the same crossing by scanning the advantage
directly and serves as the oracle for :func:`threshold_closed_form`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MultipleCrossings, NonPositiveAmplitude, OutOfModelRange
from .noise import MAX_SIGMA_SQ, phase_variance_no_opo
from .opo import OpoCoupling, OpoDrive, alphas, drive_from_gain, squeezing_variances

DEFAULT_SIGMA_GRID = (1e-4, 2.0, 1e-3)
SIGMA_PROBE = 0.5
BISECTION_TOL = 1e-10
# |advantage| below this fraction of the no-OPO variance counts as zero
NEUTRAL_RTOL = 1e-12


class Classification(str, enum.Enum):
    THRESHOLD = "Threshold"
    ALWAYS_BENEFICIAL = "AlwaysBeneficial"
    NEVER_BENEFICIAL = "NeverBeneficial"
    # advantage vanishes identically: unpumped, lossless cavity
    NEUTRAL = "Neutral"


@dataclass(frozen=True)
class ThresholdResult:
    classification: Classification
    method: str
    sigma_th: float | None = None

    def __post_init__(self):
        if self.classification is Classification.THRESHOLD:
            if self.sigma_th is None or not self.sigma_th > 0.0:
                raise ValueError("a Threshold result needs sigma_th > 0")
        elif self.sigma_th is not None:
            raise ValueError(f"{self.classification.value} carries no sigma_th")

    @property
    def sigma_th_deg(self) -> float | None:
        return None if self.sigma_th is None else math.degrees(self.sigma_th)


def sigma_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive, evenly spaced grid ``lo, lo+step, ..., hi``."""
    if step <= 0.0:
        raise ValueError(f"step must be > 0, got {step}")
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def phase_variance_with_opo(
    beta: float, sigma: float, coupling: OpoCoupling, drive: OpoDrive
) -> float:
    """``[Sigma_y^2 + alpha_y^2 e^{-s} sinh(s)] / (alpha_x^2 e^{-s})``, ``s = sigma^2``."""
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    s2 = sigma * sigma
    if s2 > MAX_SIGMA_SQ:
        raise OutOfModelRange(f"sigma**2 = {s2:g} exceeds {MAX_SIGMA_SQ}")
    ax, ay = alphas(beta, coupling, drive)
    _, sy2 = squeezing_variances(coupling.eta_esc, drive.d)
    return (sy2 * math.exp(s2) + ay * ay * math.sinh(s2)) / (ax * ax)


def variance_advantage(
    beta: float, sigma: float, coupling: OpoCoupling, drive: OpoDrive
) -> float:
    """Positive when routing the signal through the OPO lowers the estimator variance."""
    return phase_variance_no_opo(beta, sigma) - phase_variance_with_opo(
        beta, sigma, coupling, drive
    )


def _curves(beta, coupling, drive, sigmas):
    s2 = np.asarray(sigmas, dtype=float) ** 2
    if np.any(s2 > MAX_SIGMA_SQ):
        raise OutOfModelRange(f"sigma**2 exceeds {MAX_SIGMA_SQ} on the grid")
    b4 = 4.0 * beta * beta
    no_opo = (np.cosh(s2) + (1.0 + b4) * np.sinh(s2)) / b4
    ax, ay = alphas(beta, coupling, drive)
    _, sy2 = squeezing_variances(coupling.eta_esc, drive.d)
    with_opo = (sy2 * np.exp(s2) + ay * ay * np.sinh(s2)) / (ax * ax)
    return no_opo, with_opo


def _classify_by_probe(beta, coupling, drive, method) -> ThresholdResult:
    adv = variance_advantage(beta, SIGMA_PROBE, coupling, drive)
    scale = phase_variance_no_opo(beta, SIGMA_PROBE)
    if abs(adv) <= NEUTRAL_RTOL * scale:
        return ThresholdResult(Classification.NEUTRAL, method)
    if adv > 0.0:
        return ThresholdResult(Classification.ALWAYS_BENEFICIAL, method)
    return ThresholdResult(Classification.NEVER_BENEFICIAL, method)


def threshold_ratio(beta: float, coupling: OpoCoupling, drive: OpoDrive) -> tuple[float, float]:
    """Numerator and denominator ``(N, D)`` of ``exp(2 sigma_th^2) = N / D``."""
    ax, ay = alphas(beta, coupling, drive)
    _, sy2 = squeezing_variances(coupling.eta_esc, drive.d)
    b2 = beta * beta
    diff = ax * ax - ay * ay
    return 2.0 * b2 * diff, ax * ax + 2.0 * b2 * (diff - 2.0 * sy2)


def threshold_closed_form(
    beta: float, coupling: OpoCoupling, drive: OpoDrive
) -> ThresholdResult:
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    method = "closed_form"
    if drive.d == 0.0:
        # alpha_x == alpha_y, N == 0: no crossing, only the sign is meaningful
        return _classify_by_probe(beta, coupling, drive, method)
    num, den = threshold_ratio(beta, coupling, drive)
    if den <= 0.0:
        return _classify_by_probe(beta, coupling, drive, method)
    rho = num / den
    if rho <= 1.0:
        return _classify_by_probe(beta, coupling, drive, method)
    return ThresholdResult(Classification.THRESHOLD, method, math.sqrt(0.5 * math.log(rho)))


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_bisection(
    beta: float,
    coupling: OpoCoupling,
    drive: OpoDrive,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
) -> ThresholdResult:
    """Scan the advantage on a sigma grid and bisect the single sign change."""
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    method = "bisection"
    sigmas = sigma_grid(*grid)
    no_opo, with_opo = _curves(beta, coupling, drive, sigmas)
    adv = no_opo - with_opo
    if np.all(np.abs(adv) <= NEUTRAL_RTOL * no_opo):
        return ThresholdResult(Classification.NEUTRAL, method)
    sign = np.sign(adv)
    # exact zeros on the grid are attached to the preceding sign
    for i in range(1, len(sign)):
        if sign[i] == 0.0:
            sign[i] = sign[i - 1]
    changes = np.flatnonzero(sign[1:] != sign[:-1])
    if len(changes) == 0:
        if sign[-1] > 0:
            return ThresholdResult(Classification.ALWAYS_BENEFICIAL, method)
        return ThresholdResult(Classification.NEVER_BENEFICIAL, method)
    if len(changes) > 1:
        raise MultipleCrossings(
            f"{len(changes)} sign changes of the variance advantage at sigma = "
            + ", ".join(f"{sigmas[i]:.6g}" for i in changes)
        )
    i = int(changes[0])
    root = _bisect(
        lambda s: variance_advantage(beta, s, coupling, drive),
        float(sigmas[i]),
        float(sigmas[i + 1]),
        BISECTION_TOL,
    )
    return ThresholdResult(Classification.THRESHOLD, method, root)


def results_agree(
    closed: ThresholdResult,
    bisected: ThresholdResult,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
    atol: float = 1e-8,
) -> bool:
    """Whether the two methods agree, given that the scan only sees ``grid``.

    A closed-form threshold below the first grid point looks like
    AlwaysBeneficial to the scan, and one beyond the last like NeverBeneficial.
    """
    lo, hi = grid[0], grid[1]
    c = closed.classification
    if c is Classification.THRESHOLD:
        if closed.sigma_th < lo:
            c = Classification.ALWAYS_BENEFICIAL
        elif closed.sigma_th > hi:
            c = Classification.NEVER_BENEFICIAL
        elif bisected.classification is Classification.THRESHOLD:
            return abs(closed.sigma_th - bisected.sigma_th) <= atol
    return c is bisected.classification


@dataclass(frozen=True)
class SweepSpec:
    gain_range: tuple[float, float, float]
    beta_list: tuple[float, ...]
    coupling: OpoCoupling
    sigma_grid: tuple[float, float, float] = DEFAULT_SIGMA_GRID

    def __post_init__(self):
        g_min, g_max, step = self.gain_range
        if g_min < 1.0:
            raise ValueError(f"G_min must be >= 1, got {g_min}")
        if step <= 0.0 or g_max < g_min:
            raise ValueError(f"invalid gain range {self.gain_range}")
        if not self.beta_list or any(not b > 0.0 for b in self.beta_list):
            raise ValueError(f"all beta must be > 0, got {self.beta_list}")
        object.__setattr__(self, "beta_list", tuple(float(b) for b in self.beta_list))

    def gains(self) -> np.ndarray:
        return sigma_grid(*self.gain_range)


@dataclass(frozen=True)
class SweepRow:
    gain: float
    beta: float
    eta_in: float
    eta_esc: float
    classification: Classification
    sigma_th: float
    always_beneficial: bool
    methods_agree: bool

    @property
    def sigma_th_deg(self) -> float:
        return math.degrees(self.sigma_th)


def threshold_row(
    gain: float,
    beta: float,
    coupling: OpoCoupling,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
) -> SweepRow:
    """One sweep row; ``sigma_th`` is 0 unless a threshold exists."""
    drive = drive_from_gain(gain)
    closed = threshold_closed_form(beta, coupling, drive)
    bisected = threshold_bisection(beta, coupling, drive, grid)
    agree = results_agree(closed, bisected, grid)
    if not agree:
        raise AssertionError(
            f"closed form {closed} and bisection {bisected} disagree at G={gain}, beta={beta}"
        )
    return SweepRow(
        gain=float(gain),
        beta=float(beta),
        eta_in=coupling.eta_in,
        eta_esc=coupling.eta_esc,
        classification=closed.classification,
        sigma_th=closed.sigma_th or 0.0,
        always_beneficial=closed.classification is Classification.ALWAYS_BENEFICIAL,
        methods_agree=agree,
    )


def threshold_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Threshold for every (G, beta) pair, ordered by gain then beta."""
    rows = [
        threshold_row(float(g), b, spec.coupling, spec.sigma_grid)
        for g in spec.gains()
        for b in spec.beta_list
    ]
    rows.sort(key=lambda r: (r.gain, r.beta))
    return rows


def gain_ceiling(rows: Sequence[SweepRow], beta: float) -> float | None:
    """Smallest tested gain from which every larger tested gain is AlwaysBeneficial.

    Returns None if the largest tested gain is not AlwaysBeneficial.
    """
    mine = sorted((r for r in rows if r.beta == beta), key=lambda r: r.gain)
    ceiling = None
    for r in reversed(mine):
        if not r.always_beneficial:
            break
        ceiling = r.gain
    return ceiling


@dataclass
class VarianceCurves:
    sigma: np.ndarray
    var_no_opo: np.ndarray
    var_with_opo: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def sigma_deg(self) -> np.ndarray:
        return np.degrees(self.sigma)

    def crossings(self) -> list[float]:
        """Sigma values (radians) where the curves cross, by linear interpolation."""
        adv = self.var_no_opo - self.var_with_opo
        out = []
        for i in np.flatnonzero(np.sign(adv[1:]) != np.sign(adv[:-1])):
            a0, a1 = adv[i], adv[i + 1]
            s0, s1 = self.sigma[i], self.sigma[i + 1]
            out.append(float(s0 - a0 * (s1 - s0) / (a1 - a0)))
        return out


def variance_curves(
    beta: float,
    coupling: OpoCoupling,
    drive: OpoDrive,
    grid: Sequence[float],
) -> VarianceCurves:
    """Estimator variance against sigma, without and with the OPO (radians grid)."""
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    sigmas = sigma_grid(*grid)
    no_opo, with_opo = _curves(beta, coupling, drive, sigmas)
    return VarianceCurves(
        sigma=sigmas,
        var_no_opo=no_opo,
        var_with_opo=with_opo,
        meta={"beta": beta, "eta_in": coupling.eta_in, "eta_esc": coupling.eta_esc, "d": drive.d},
    )
