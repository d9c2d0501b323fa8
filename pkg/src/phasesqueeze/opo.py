"""Degenerate OPO below threshold acting on quadrature moments.

The pump phase is fixed so that the x quadrature is amplified by ``1/(1-d)``
and y de-amplified by ``1/(1+d)``; the cavity transmits the signal amplitude
with factor ``sqrt(4 eta_in eta_esc)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AtOrAboveThreshold, GainBelowUnity, OutOfModelRange, ZeroLossCavity
from .noise import MAX_SIGMA_SQ, CoherentSignal, PhaseDiffusion, QuadratureMoments

# slack for eta_in + eta_esc <= 1 when the pair comes from a float division
_ETA_SUM_SLACK = 1e-12


@dataclass(frozen=True)
class OpoMirrorSpec:
    """Power reflectivities of the couplers and single-pass crystal loss."""

    r_ic: float
    r_oc: float
    delta_cr: float = 0.0

    def __post_init__(self):
        for name in ("r_ic", "r_oc", "delta_cr"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    @property
    def total_loss(self) -> float:
        return (1.0 - self.r_ic) + (1.0 - self.r_oc) + 2.0 * self.delta_cr


@dataclass(frozen=True)
class OpoCoupling:
    eta_in: float
    eta_esc: float

    def __post_init__(self):
        if not (0.0 < self.eta_in < 1.0 and 0.0 < self.eta_esc < 1.0):
            raise ValueError(
                f"eta_in, eta_esc must lie in (0, 1), got ({self.eta_in}, {self.eta_esc})"
            )
        if self.eta_in + self.eta_esc > 1.0 + _ETA_SUM_SLACK:
            raise ValueError(
                f"eta_in + eta_esc must be <= 1, got {self.eta_in + self.eta_esc}"
            )


@dataclass(frozen=True)
class OpoDrive:
    """Pump amplitude ratio ``d = sqrt(P / P_th)``."""

    d: float

    def __post_init__(self):
        if self.d >= 1.0:
            raise AtOrAboveThreshold(f"d = {self.d} is at or above oscillation threshold")
        if not self.d >= 0.0:
            raise ValueError(f"d must be >= 0, got {self.d}")
        object.__setattr__(self, "d", float(self.d))

    @classmethod
    def from_gain(cls, gain: float) -> "OpoDrive":
        return drive_from_gain(gain)

    @property
    def gain(self) -> float:
        return gain_from_drive(self)


def coupling_from_mirrors(spec: OpoMirrorSpec) -> OpoCoupling:
    """Input/escape efficiencies from mirror reflectivities.

    Loss rates are taken proportional to the power lost per pass, so
    ``gamma_ic = 1 - R_ic``, ``gamma_oc = 1 - R_oc`` and ``gamma_cr = delta``;
    the common round-trip-time factor cancels in the ratios.
    """
    gamma = spec.total_loss
    if gamma <= 0.0:
        raise ZeroLossCavity("cavity has no loss; efficiencies are undefined")
    return OpoCoupling(eta_in=(1.0 - spec.r_ic) / gamma, eta_esc=(1.0 - spec.r_oc) / gamma)


def gain_from_drive(drive: OpoDrive) -> float:
    return 1.0 / (1.0 - drive.d) ** 2


def drive_from_gain(gain: float) -> OpoDrive:
    if not gain >= 1.0:
        raise GainBelowUnity(f"gain must be >= 1, got {gain}")
    return OpoDrive(1.0 - 1.0 / math.sqrt(gain))


def cavity_transmissivity(coupling: OpoCoupling) -> float:
    """On-resonance power transmission ``4 eta_in eta_esc`` of the unpumped cavity."""
    return 4.0 * coupling.eta_in * coupling.eta_esc


def squeezing_variances(eta_esc: float, d: float) -> tuple[float, float]:
    """Output quadrature variances (amplified x, squeezed y) for a vacuum-noise input.

    Takes bare floats so the boundary ``eta_esc = 1`` can be probed.
    """
    if d >= 1.0:
        raise AtOrAboveThreshold(f"d = {d} is at or above oscillation threshold")
    var_x = 1.0 + eta_esc * 4.0 * d / (1.0 - d) ** 2
    var_y = 1.0 - eta_esc * 4.0 * d / (1.0 + d) ** 2
    return var_x, var_y


def amplitude_gains(coupling: OpoCoupling, drive: OpoDrive) -> tuple[float, float]:
    """Field gains applied to the x and y means."""
    t = math.sqrt(cavity_transmissivity(coupling))
    return t / (1.0 - drive.d), t / (1.0 + drive.d)


def alphas(beta: float, coupling: OpoCoupling, drive: OpoDrive) -> tuple[float, float]:
    """Output means ``(alpha_x, alpha_y)`` for a real input amplitude ``beta``."""
    gx, gy = amplitude_gains(coupling, drive)
    return 2.0 * beta * gx, 2.0 * beta * gy


def opo_output_moments(
    signal: CoherentSignal, coupling: OpoCoupling, drive: OpoDrive
) -> QuadratureMoments:
    gx, gy = amplitude_gains(coupling, drive)
    var_x, var_y = squeezing_variances(coupling.eta_esc, drive.d)
    a = 2.0 * signal.beta
    return QuadratureMoments(
        mean_x=gx * a * math.cos(signal.phi),
        mean_y=gy * a * math.sin(signal.phi),
        var_x=var_x,
        var_y=var_y,
    )


def phase_compression(theta0: float, drive: OpoDrive) -> float:
    """Mean phase after the OPO for an input at phase ``theta0``.

    ``tan(theta_d) = (1-d)/(1+d) tan(theta0)``, continued to all quadrants by
    taking ``atan2`` of the transformed means, so the quadrant of ``theta0`` is
    kept.  The amplitude drops out.
    """
    k = (1.0 - drive.d) / (1.0 + drive.d)
    return math.atan2(k * math.sin(theta0), math.cos(theta0))


def opo_diffused_moments(
    beta: float, noise: PhaseDiffusion, coupling: OpoCoupling, drive: OpoDrive
) -> QuadratureMoments:
    """Moments of a phase-diffused coherent state (input phase 0) after the OPO.

    The output is the kernel average of the conditional Gaussian outputs, so
    each variance is the squeezed noise plus the spread of the conditional
    mean (law of total variance).
    """
    s2 = noise.sigma**2
    if s2 > MAX_SIGMA_SQ:
        raise OutOfModelRange(f"sigma**2 = {s2:g} exceeds {MAX_SIGMA_SQ}")
    ax, ay = alphas(beta, coupling, drive)
    sx2, sy2 = squeezing_variances(coupling.eta_esc, drive.d)
    e = math.exp(-s2)
    # cosh(s2) - 1 == 2 sinh(s2/2)**2, exact for small s2
    return QuadratureMoments(
        mean_x=ax * math.exp(-0.5 * s2),
        mean_y=0.0,
        var_x=sx2 + ax * ax * e * 2.0 * math.sinh(0.5 * s2) ** 2,
        var_y=sy2 + ay * ay * e * math.sinh(s2),
    )
