import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasesqueeze.errors import AtOrAboveThreshold, GainBelowUnity, OutOfModelRange, ZeroLossCavity
from phasesqueeze.noise import (
    CoherentSignal,
    PhaseDiffusion,
    coherent_moments,
    diffused_moments,
)
from phasesqueeze.opo import (
    OpoCoupling,
    OpoDrive,
    OpoMirrorSpec,
    cavity_transmissivity,
    coupling_from_mirrors,
    drive_from_gain,
    gain_from_drive,
    opo_diffused_moments,
    opo_output_moments,
    phase_compression,
    squeezing_variances,
)

from conftest import FIG2_COUPLING, FIG2_D, IDENTITY
from oracles import opo_diffused_oracle

ds = st.floats(min_value=0.0, max_value=0.99)
etas = st.floats(min_value=0.01, max_value=1.0)


def moments_tuple(m):
    return (m.mean_x, m.mean_y, m.var_x, m.var_y)


class TestMirrors:
    def test_config_b_published_efficiencies(self):
        c = coupling_from_mirrors(OpoMirrorSpec(0.9925, 0.917, 2.42e-3))
        assert c.eta_in == pytest.approx(0.0787, abs=5e-5)
        assert c.eta_esc == pytest.approx(0.8706, abs=5e-5)

    def test_config_a_mirror_derived(self):
        c = coupling_from_mirrors(OpoMirrorSpec(0.999, 0.917, 2.42e-3))
        # (1 - 0.999) / (0.001 + 0.083 + 0.00484)
        assert c.eta_in == pytest.approx(0.001 / 0.08884, rel=1e-12)
        assert c.eta_in == pytest.approx(0.01126, abs=5e-6)
        assert c.eta_esc == pytest.approx(0.083 / 0.08884, rel=1e-12)

    @given(st.floats(min_value=1e-6, max_value=0.9))
    def test_symmetric_lossless(self, x):
        c = coupling_from_mirrors(OpoMirrorSpec(1 - x, 1 - x, 0.0))
        assert c.eta_in == pytest.approx(0.5)
        assert c.eta_esc == pytest.approx(0.5)

    def test_lossless_cavity_rejected(self):
        with pytest.raises(ZeroLossCavity):
            coupling_from_mirrors(_perfect_cavity())

    @pytest.mark.parametrize("bad", [(1.0, 0.9, 0.0), (0.9, -0.1, 0.0), (0.9, 0.9, 1.0)])
    def test_mirror_ranges(self, bad):
        with pytest.raises(ValueError):
            OpoMirrorSpec(*bad)


def _perfect_cavity():
    # the type forbids R = 1, so a lossless cavity can only be forged
    spec = OpoMirrorSpec(0.5, 0.5, 0.0)
    object.__setattr__(spec, "r_ic", 1.0)
    object.__setattr__(spec, "r_oc", 1.0)
    return spec


class TestCoupling:
    @pytest.mark.parametrize("bad", [(0.0, 0.5), (0.5, 0.0), (0.6, 0.6), (1.0, 0.5)])
    def test_invariants(self, bad):
        with pytest.raises(ValueError):
            OpoCoupling(*bad)

    def test_transmissivity_config_a(self):
        t = cavity_transmissivity(OpoCoupling(0.008, 0.937))
        assert t == pytest.approx(0.02998, abs=1e-5)
        assert abs(t - 0.029) / 0.029 < 0.035

    def test_transmissivity_config_b(self):
        t = cavity_transmissivity(OpoCoupling(0.079, 0.871))
        assert t == pytest.approx(0.2752, abs=1e-4)
        assert abs(t - 0.26) / 0.26 < 0.06

    def test_transmissivity_lossless(self):
        assert cavity_transmissivity(IDENTITY) == 1.0

    @given(st.floats(0.01, 0.98), st.floats(0.01, 0.98), st.floats(0.01, 5.0))
    def test_transmissivity_is_unpumped_power_gain(self, ein, eesc, beta):
        if ein + eesc > 1:
            return
        c = OpoCoupling(ein, eesc)
        m = opo_output_moments(CoherentSignal(beta), c, OpoDrive(0.0))
        assert (m.mean_x / (2 * beta)) ** 2 == pytest.approx(cavity_transmissivity(c), rel=1e-12)


class TestGain:
    def test_pump_off(self):
        assert gain_from_drive(OpoDrive(0.0)) == 1.0

    def test_illustration_gain(self):
        assert drive_from_gain(2.78).d == pytest.approx(0.4002, abs=5e-5)
        assert OpoDrive(0.40).gain == pytest.approx(2.78, abs=5e-3)

    def test_config_a_gain(self):
        assert drive_from_gain(2.75).d == pytest.approx(1 - 1 / math.sqrt(2.75), rel=1e-15)
        assert drive_from_gain(2.75).d == pytest.approx(0.39698, abs=5e-6)

    @given(st.floats(min_value=1.0, max_value=1e6))
    def test_round_trip_gain(self, g):
        assert gain_from_drive(drive_from_gain(g)) == pytest.approx(g, rel=1e-12)

    @given(st.floats(min_value=0.0, max_value=0.99))
    def test_round_trip_drive(self, d):
        assert drive_from_gain(gain_from_drive(OpoDrive(d))).d == pytest.approx(d, abs=1e-14)

    def test_errors(self):
        with pytest.raises(GainBelowUnity):
            drive_from_gain(0.9)
        with pytest.raises(AtOrAboveThreshold):
            OpoDrive(1.0)
        with pytest.raises(ValueError):
            OpoDrive(-0.1)


class TestOutputMoments:
    def test_illustration_tuple(self):
        m = opo_output_moments(CoherentSignal(2.0, math.pi / 4), FIG2_COUPLING, OpoDrive(FIG2_D))
        assert moments_tuple(m) == pytest.approx((2.4873, 1.0660, 4.8667, 0.28980), abs=1e-4)

    @given(st.floats(0.0, 5.0), st.floats(-math.pi, math.pi))
    def test_identity_channel(self, beta, phi):
        s = CoherentSignal(beta, phi)
        got = moments_tuple(opo_output_moments(s, IDENTITY, OpoDrive(0.0)))
        assert got == pytest.approx(moments_tuple(coherent_moments(s)), abs=1e-12)

    def test_squeezed_vacuum(self):
        m = opo_output_moments(CoherentSignal(0.0), OpoCoupling(0.1, 0.87), OpoDrive(0.4))
        assert moments_tuple(m) == pytest.approx((0, 0, 4.8667, 0.28980), abs=1e-4)

    @given(st.floats(0.1, 5.0), st.floats(0.05, 1.5), ds)
    def test_mean_anisotropy(self, beta, phi, d):
        m = opo_output_moments(CoherentSignal(beta, phi), FIG2_COUPLING, OpoDrive(d))
        gx = m.mean_x / (2 * beta * math.cos(phi))
        gy = m.mean_y / (2 * beta * math.sin(phi))
        assert gx / gy == pytest.approx((1 + d) / (1 - d), rel=1e-12)
        assert gx / gy == pytest.approx(math.sqrt(OpoDrive(d).gain) * (1 + d), rel=1e-12)


class TestSqueezing:
    @given(etas, ds)
    def test_bounds(self, eta, d):
        sx, sy = squeezing_variances(eta, d)
        assert sx >= 1.0
        assert sy <= 1.0
        assert sy > 1.0 - eta

    @given(etas, ds)
    def test_uncertainty_product_identity(self, eta, d):
        sx, sy = squeezing_variances(eta, d)
        expected = 1 + eta * (1 - eta) * 16 * d * d / (1 - d * d) ** 2
        assert sx * sy == pytest.approx(expected, rel=1e-12)
        assert sx * sy >= 1.0 - 1e-12

    @pytest.mark.parametrize("eta", [0.5, 0.87, 0.937, 1.0])
    def test_minimum_uncertainty_cases(self, eta):
        sx, sy = squeezing_variances(eta, 0.0)
        assert sx * sy == 1.0
        sx, sy = squeezing_variances(1.0, 0.6)
        assert sx * sy == pytest.approx(1.0, rel=1e-12)

    def test_above_threshold(self):
        with pytest.raises(AtOrAboveThreshold):
            squeezing_variances(0.9, 1.0)


class TestPhaseCompression:
    def test_published_value(self):
        got = math.degrees(phase_compression(math.radians(40), drive_from_gain(3.1)))
        assert got == pytest.approx(18.41, abs=0.05)

    def test_fixed_point(self):
        assert phase_compression(0.0, OpoDrive(0.7)) == 0.0

    def test_pump_off(self):
        assert phase_compression(math.radians(40), OpoDrive(0.0)) == pytest.approx(math.radians(40))

    @given(st.floats(-1.57, 1.57), ds)
    def test_contracts(self, theta, d):
        out = phase_compression(theta, OpoDrive(d))
        assert abs(out) <= abs(theta) + 1e-15
        if d > 1e-3 and abs(theta) > 1e-3:
            assert abs(out) < abs(theta)

    @given(st.floats(1.58, 3.14), ds)
    def test_back_half_plane_compresses_toward_pi(self, theta, d):
        for t in (theta, -theta):
            out = phase_compression(t, OpoDrive(d))
            assert math.cos(out) < 0
            assert math.copysign(1, out) == math.copysign(1, t)
            assert math.pi - abs(out) <= math.pi - abs(t) + 1e-15

    @given(st.floats(-1.5, 1.5), st.floats(1e-3, 0.05), st.floats(0.0, 0.95))
    def test_monotone_in_theta(self, theta, dt, d):
        drv = OpoDrive(d)
        assert phase_compression(theta + dt, drv) > phase_compression(theta, drv)

    @given(st.floats(0.01, 1.5), st.floats(0.0, 0.9), st.floats(1e-3, 0.05))
    def test_monotone_in_d(self, theta, d, dd):
        assert phase_compression(theta, OpoDrive(d + dd)) < phase_compression(theta, OpoDrive(d))

    @given(st.floats(0.1, 8.0), st.floats(-1.4, 1.4), ds)
    def test_independent_of_amplitude_and_matches_means(self, beta, theta, d):
        m = opo_output_moments(CoherentSignal(beta, theta), FIG2_COUPLING, OpoDrive(d))
        assert math.atan2(m.mean_y, m.mean_x) == pytest.approx(
            phase_compression(theta, OpoDrive(d)), abs=1e-12
        )


class TestOpoDiffused:
    def test_zero_noise_matches_output(self):
        args = (FIG2_COUPLING, OpoDrive(FIG2_D))
        a = opo_diffused_moments(2.0, PhaseDiffusion(0.0), *args)
        b = opo_output_moments(CoherentSignal(2.0), *args)
        assert moments_tuple(a) == pytest.approx(moments_tuple(b), rel=1e-15)

    def test_illustration_values(self):
        m = opo_diffused_moments(2.0, PhaseDiffusion(math.pi / 4), FIG2_COUPLING, OpoDrive(FIG2_D))
        # alpha_x = 3.5175, e^{-sigma^2/2} = 0.73461; variances frozen from the quadrature oracle
        assert m.mean_x == pytest.approx(2.5840, abs=1e-4)
        assert m.mean_y == 0.0
        assert m.var_x == pytest.approx(6.1778, abs=1e-4)
        assert m.var_y == pytest.approx(1.0952, abs=1e-4)

    @given(st.floats(0.1, 6.0), st.floats(0.0, 2.0))
    def test_identity_reduces_to_diffused(self, beta, sigma):
        a = opo_diffused_moments(beta, PhaseDiffusion(sigma), IDENTITY, OpoDrive(0.0))
        b = diffused_moments(CoherentSignal(beta), PhaseDiffusion(sigma))
        assert moments_tuple(a) == pytest.approx(moments_tuple(b), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("beta", [0.5, 2.0, 5.7])
    @pytest.mark.parametrize("sigma", [0.05, 0.3, 0.8])
    @pytest.mark.parametrize("params", [(0.008, 0.937, 0.39698), (0.079, 0.871, 0.43386), (0.01, 0.93, 0.8)])
    def test_against_quadrature(self, beta, sigma, params):
        ein, eesc, d = params
        m = opo_diffused_moments(beta, PhaseDiffusion(sigma), OpoCoupling(ein, eesc), OpoDrive(d))
        assert moments_tuple(m) == pytest.approx(
            opo_diffused_oracle(beta, sigma, ein, eesc, d), abs=1e-8
        )

    def test_overflow_guard(self):
        with pytest.raises(OutOfModelRange):
            opo_diffused_moments(1.0, PhaseDiffusion(30.0), FIG2_COUPLING, OpoDrive(0.3))
