"""Coherent signals, Gaussian phase diffusion and the two-quadrature phase estimator.

Quadratures follow ``x = a + a^dagger``, ``y = i(a^dagger - a)`` so the vacuum
has unit variance in both.  A coherent state ``|beta e^{i phi}>`` then has
``<x> = 2 beta cos(phi)``, ``<y> = 2 beta sin(phi)``.

Phase diffusion replaces the definite phase with a Gaussian mixture of width
``sigma``.  Only first and second moments of the mixture are modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveAmplitude, OutOfModelRange, ZeroMeanVector

# mean_x**2 + mean_y**2 below this means the phase is undefined
ZERO_MEAN_FLOOR = 1e-24
# exp/cosh/sinh of sigma**2 overflow past ~709
MAX_SIGMA_SQ = 700.0


def wrap_angle(phi: float) -> float:
    """Map an angle onto (-pi, pi]."""
    r = math.remainder(phi, 2.0 * math.pi)
    if r == -math.pi:
        return math.pi
    return r


@dataclass(frozen=True)
class CoherentSignal:
    beta: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.beta >= 0.0:
            raise NonPositiveAmplitude(f"beta must be >= 0, got {self.beta}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "phi", wrap_angle(float(self.phi)))


@dataclass(frozen=True)
class PhaseDiffusion:
    """Gaussian phase kernel of standard deviation ``sigma`` (radians)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True)
class QuadratureMoments:
    """Means and (co)variances of the x and y quadratures.

    ``cov_xy`` is zero for every state in the canonical frame; it only becomes
    non-zero when a diffused state is rotated to a general mean phase.
    """

    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    cov_xy: float = 0.0

    def __post_init__(self):
        if not (self.var_x > 0.0 and self.var_y > 0.0):
            raise ValueError(
                f"variances must be positive, got ({self.var_x}, {self.var_y})"
            )

    def rotated(self, angle: float) -> "QuadratureMoments":
        """Moments of the state rotated by ``angle`` in phase space."""
        c, s = math.cos(angle), math.sin(angle)
        vx, vy, cxy = self.var_x, self.var_y, self.cov_xy
        return QuadratureMoments(
            mean_x=c * self.mean_x - s * self.mean_y,
            mean_y=s * self.mean_x + c * self.mean_y,
            var_x=c * c * vx + s * s * vy - 2.0 * s * c * cxy,
            var_y=s * s * vx + c * c * vy + 2.0 * s * c * cxy,
            cov_xy=s * c * (vx - vy) + (c * c - s * s) * cxy,
        )

    def uncertainty_product(self) -> float:
        return self.var_x * self.var_y - self.cov_xy**2

    def as_dict(self) -> dict:
        return {
            "mean_x": self.mean_x,
            "mean_y": self.mean_y,
            "var_x": self.var_x,
            "var_y": self.var_y,
            "cov_xy": self.cov_xy,
        }


@dataclass(frozen=True)
class PhaseEstimate:
    phi_hat: float
    variance: float


def coherent_moments(signal: CoherentSignal) -> QuadratureMoments:
    a = 2.0 * signal.beta
    return QuadratureMoments(
        mean_x=a * math.cos(signal.phi),
        mean_y=a * math.sin(signal.phi),
        var_x=1.0,
        var_y=1.0,
    )


def _check_sigma(sigma: float) -> float:
    s2 = sigma * sigma
    if s2 > MAX_SIGMA_SQ:
        raise OutOfModelRange(f"sigma**2 = {s2:g} exceeds {MAX_SIGMA_SQ}")
    return s2


def diffused_moments(signal: CoherentSignal, noise: PhaseDiffusion) -> QuadratureMoments:
    """Moments of a coherent state after Gaussian phase diffusion.

    Computed in the frame where the signal mean lies on the x axis, then
    rotated back to ``signal.phi``.  The mean shrinks by ``exp(-sigma**2 / 2)``,
    the average of ``cos(phi)`` over the kernel.
    """
    b2 = signal.beta**2
    s2 = noise.sigma**2
    # 1 - exp(-s2) and 1 - exp(-2 s2) via expm1 to keep small-sigma precision
    one_minus_e1 = -math.expm1(-s2)
    one_minus_e2 = -math.expm1(-2.0 * s2)
    canonical = QuadratureMoments(
        mean_x=2.0 * signal.beta * math.exp(-0.5 * s2),
        mean_y=0.0,
        var_x=1.0 + 2.0 * b2 * one_minus_e1**2,
        var_y=1.0 + 2.0 * b2 * one_minus_e2,
    )
    if signal.phi == 0.0:
        return canonical
    return canonical.rotated(signal.phi)


def estimate_phase(moments: QuadratureMoments) -> PhaseEstimate:
    """Phase estimate ``atan2(<y>, <x>)`` and its first-order propagated variance.

    With zero covariance this is ``(<y>^2 var[x] + <x>^2 var[y]) / r^4``; the
    covariance term keeps the result invariant under phase-space rotations.
    """
    mx, my = moments.mean_x, moments.mean_y
    r2 = mx * mx + my * my
    if r2 < ZERO_MEAN_FLOOR:
        raise ZeroMeanVector(f"|<(x, y)>|^2 = {r2:g} is below {ZERO_MEAN_FLOOR:g}")
    num = my * my * moments.var_x + mx * mx * moments.var_y - 2.0 * mx * my * moments.cov_xy
    return PhaseEstimate(phi_hat=wrap_angle(math.atan2(my, mx)), variance=num / (r2 * r2))


def coherent_phase_variance(beta: float) -> float:
    """Shot-noise-limited estimator variance ``1 / (4 beta^2)``."""
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    return 1.0 / (4.0 * beta * beta)


def phase_variance_no_opo(beta: float, sigma: float) -> float:
    """``[cosh(s) + (1 + 4 beta^2) sinh(s)] / (4 beta^2)`` with ``s = sigma^2``."""
    if not beta > 0.0:
        raise NonPositiveAmplitude(f"beta must be > 0, got {beta}")
    s2 = _check_sigma(sigma)
    b4 = 4.0 * beta * beta
    return (math.cosh(s2) + (1.0 + b4) * math.sinh(s2)) / b4
