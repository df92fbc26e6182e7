import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowlight.vibration import (
    C1_NORMALIZED,
    VibrationParams,
    check_lambda,
    cycle_energy,
    cycle_energy_raw,
    displacement,
    epsilon_s,
    lambda_to_params,
    repulsive_energy,
    stimulation_energy_raw,
    velocity,
)

lams = st.floats(min_value=1.001, max_value=2.0)
unit = st.floats(min_value=0.0, max_value=1.0)
positive_unit = st.floats(min_value=1e-6, max_value=1.0)


class TestKinematics:
    def test_displacement_at_zero_is_c1(self):
        p = VibrationParams(c1=0.7, c2=1.3, beta=2.0)
        assert displacement(0.0, p) == pytest.approx(0.7)

    def test_displacement_constant_term_decays(self):
        p = VibrationParams(c1=1.0, c2=0.0, beta=1.0)
        assert displacement(1.0, p) == pytest.approx(0.367879, abs=1e-6)

    def test_displacement_linear_term(self):
        p = VibrationParams(c1=0.0, c2=2.0, beta=0.5)
        assert displacement(2.0, p) == pytest.approx(1.471518, abs=1e-6)

    def test_velocity_at_zero(self):
        p = VibrationParams(c1=0.5, c2=2.0, beta=1.5)
        assert velocity(0.0, p) == pytest.approx(2.0 - 1.5 * 0.5)

    def test_velocity_example(self):
        p = VibrationParams(c1=0.5, c2=2.0, beta=1.0)
        assert velocity(1.0, p) == pytest.approx(-0.183940, abs=1e-6)

    def test_velocity_decays(self):
        p = VibrationParams(c1=1.0, c2=1.0, beta=1.0)
        assert abs(velocity(60.0, p)) < 1e-20

    def test_velocity_matches_finite_difference(self):
        p = VibrationParams(c1=0.3, c2=1.7, k=2.0, m=0.5)
        t = np.linspace(0.0, 10.0, 201)
        h = 1e-6
        # one-sided at t=0 would lose accuracy, so shift the first sample inward
        t = np.maximum(t, h)
        fd = (displacement(t + h, p) - displacement(t - h, p)) / (2 * h)
        assert np.max(np.abs(fd - velocity(t, p))) < 1e-6

    def test_undefined_damping_without_stimulus(self):
        p = VibrationParams(c1=1.0, c2=1.0, k=1.0, m=0.0)
        assert p.beta is None
        with pytest.raises(ValueError):
            displacement(1.0, p)
        with pytest.raises(ValueError):
            p.omega0


class TestParams:
    @pytest.mark.parametrize("kw", [dict(k=0.0), dict(k=-1.0), dict(c2=-0.1), dict(m=-1.0)])
    def test_invalid(self, kw):
        base = dict(c1=1.0, c2=1.0, k=1.0, m=1.0)
        base.update(kw)
        with pytest.raises(ValueError):
            VibrationParams(**base)

    @given(k=st.floats(1e-3, 1e3), m=st.floats(1e-3, 1e3))
    def test_critical_damping(self, k, m):
        p = VibrationParams(c1=0.1, c2=0.2, k=k, m=m)
        assert p.beta ** 2 * p.m == pytest.approx(k, rel=1e-12)

    def test_with_stimulus_recomputes_beta(self):
        p = lambda_to_params(2.0).with_stimulus(0.25)
        assert p.m == 0.25
        assert p.beta == pytest.approx(math.sqrt(p.k / 0.25))


class TestEnergies:
    def test_repulsive(self):
        assert repulsive_energy(VibrationParams(c1=0.0, c2=1.0)) == 0.0
        assert repulsive_energy(VibrationParams(c1=1.0, c2=1.0, k=2.0)) == pytest.approx(1.0)
        assert repulsive_energy(lambda_to_params(2.0)) == pytest.approx(1.0, rel=1e-14)

    def test_stimulation_raw(self):
        assert stimulation_energy_raw(VibrationParams(c1=1.0, c2=1.0, k=4.0, m=0.0)) == 0.0
        assert stimulation_energy_raw(lambda_to_params(2.0, m=1.0)) == pytest.approx(1.0, rel=1e-14)
        assert stimulation_energy_raw(VibrationParams(c1=1.0, c2=1.0, k=4.0, m=1.0)) == pytest.approx(1.5)

    def test_cycle_raw(self):
        assert cycle_energy_raw(VibrationParams(c1=1.0, c2=0.0, k=3.0, m=1.0)) == 0.0
        assert cycle_energy_raw(lambda_to_params(2.0, m=1.0)) == pytest.approx(2.0, rel=1e-13)
        p = VibrationParams(c1=1.0, c2=2.0, k=math.pi ** 2, m=0.0)
        assert cycle_energy_raw(p) == pytest.approx(math.pi, rel=1e-14)

    @settings(max_examples=300)
    @given(c1=st.floats(0, 2), c2=st.floats(0, 2), k=st.floats(0.01, 100), m=st.floats(1e-3, 1))
    def test_energy_balance(self, c1, c2, k, m):
        # eps_s - eps_r = -M v(0)^2 / 2 at critical damping
        p = VibrationParams(c1=c1, c2=c2, k=k, m=m)
        lhs = stimulation_energy_raw(p) - repulsive_energy(p)
        rhs = -0.5 * m * velocity(0.0, p) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12 * (1 + k * c1 * c1))

    @settings(max_examples=300)
    @given(c1=st.floats(0.01, 2), c2=st.floats(0.01, 2), k=st.floats(0.01, 100),
           m=st.floats(1e-3, 1))
    def test_cycle_is_frequency_times_stimulation(self, c1, c2, k, m):
        p = VibrationParams(c1=c1, c2=c2, k=k, m=m)
        expected = p.omega0 / (2 * math.pi) * stimulation_energy_raw(p)
        assert cycle_energy_raw(p) == pytest.approx(expected, rel=1e-12, abs=1e-15)


class TestLambda:
    @pytest.mark.parametrize("lam", [1.0, 0.5, 2.0001, float("nan")])
    def test_domain(self, lam):
        with pytest.raises(ValueError):
            check_lambda(lam)

    def test_lambda_two(self):
        p = lambda_to_params(2.0)
        assert p.c1 == pytest.approx(0.1125395, abs=1e-7)
        assert p.c2 == pytest.approx(math.sqrt(2))
        assert p.k == pytest.approx(16 * math.pi ** 2)

    def test_lambda_one_and_a_half(self):
        p = lambda_to_params(1.5)
        assert p.c2 == pytest.approx(1.0)
        assert p.k == pytest.approx(18 * math.pi ** 2)

    def test_stiffness_diverges_near_one(self):
        assert lambda_to_params(1.0 + 1e-9).k > 1e10

    def test_epsilon_s_examples(self):
        assert epsilon_s(1.3, 1.0) == pytest.approx(1.0)
        assert epsilon_s(1.3, 0.0) == 0.0
        assert epsilon_s(2.0, 0.25) == pytest.approx(0.75)

    def test_cycle_energy_examples(self):
        assert cycle_energy(2.0, 1.0) == pytest.approx(2.0)
        assert cycle_energy(2.0, 0.0) == pytest.approx(4.0)
        assert cycle_energy(2.0, 0.25) == pytest.approx(3.0)

    def test_vectorized(self):
        i = np.array([0.0, 0.25, 1.0])
        np.testing.assert_allclose(cycle_energy(2.0, i), [4.0, 3.0, 2.0])

    @settings(max_examples=300)
    @given(lam=lams, i=unit)
    def test_epsilon_s_matches_raw(self, lam, i):
        raw = stimulation_energy_raw(lambda_to_params(lam, m=i))
        assert epsilon_s(lam, i) == pytest.approx(raw, rel=1e-12, abs=1e-14)

    @settings(max_examples=300)
    @given(lam=lams, i=unit)
    def test_cycle_energy_matches_raw(self, lam, i):
        raw = cycle_energy_raw(lambda_to_params(lam, m=i))
        assert cycle_energy(lam, i) == pytest.approx(
            2 * math.sqrt(2) * math.pi * C1_NORMALIZED * raw, rel=1e-12)

    @given(lam=lams, i=unit)
    def test_epsilon_s_above_identity(self, lam, i):
        assert epsilon_s(lam, i) >= i - 1e-15

    @given(lam=lams, i=positive_unit)
    def test_epsilon_s_strict_on_open_interval(self, lam, i):
        if i < 1 - 1e-9:
            assert epsilon_s(lam, i) > i

    @given(lam=lams, i1=unit, i2=unit)
    def test_cycle_energy_non_increasing(self, lam, i1, i2):
        lo, hi = sorted((i1, i2))
        assert cycle_energy(lam, lo) >= cycle_energy(lam, hi)

    @given(lam=lams, i=unit)
    def test_cycle_energy_positive(self, lam, i):
        assert cycle_energy(lam, i) > 0
