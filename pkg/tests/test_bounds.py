import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densub.bounds import (
    bernstein_radius,
    check_adversarial_conditions,
    check_balanced_conditions,
    check_random_conditions,
    concentration_trial,
)
from densub.errors import InputError
from densub.model import AdversarialBudget, PlantedModelSpec, contiguous_partition


def make_spec(p11, pbg, m, M):
    part = contiguous_partition([m, M - m])
    probs = np.array([[p11, pbg], [pbg, pbg]])
    return PlantedModelSpec(part, [p.copy() for p in part], probs)


class TestBernstein:
    def test_variance_regime(self):
        # rho(1-rho)k log t = 0.25 * 100 * 4 = 100 -> sqrt = 10 > log t = 4
        assert bernstein_radius(0.5, 100, np.e**4) == pytest.approx(60.0)

    def test_log_regime(self):
        # k = 0 forces the additive log term
        assert bernstein_radius(0.5, 0, np.e**4) == pytest.approx(24.0)

    def test_degenerate_rho(self):
        assert bernstein_radius(0.0, 50, np.e) == pytest.approx(6.0)

    def test_validation(self):
        with pytest.raises(InputError):
            bernstein_radius(1.5, 10, 10.0)
        with pytest.raises(InputError):
            bernstein_radius(0.5, -1, 10.0)
        with pytest.raises(InputError):
            bernstein_radius(0.5, 10, 1.0)

    @given(
        rho=st.floats(0.05, 0.95),
        k=st.integers(1, 10**6),
        t=st.floats(1.5, 1e9),
    )
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_k(self, rho, k, t):
        assert bernstein_radius(rho, k + 1, t) >= bernstein_radius(rho, k, t)

    @given(rho=st.floats(0.05, 0.95), k=st.integers(0, 10**6), t=st.floats(1.5, 1e8))
    @settings(max_examples=100, deadline=None)
    def test_positive(self, rho, k, t):
        assert bernstein_radius(rho, k, t) > 0


class TestRandomConditions:
    def test_strong_gap_passes(self):
        spec = make_spec(0.95, 0.05, m=60, M=200)
        rep = check_random_conditions(spec, c1=0.5)
        assert rep.passed, str(rep)
        assert rep.conditions["gap"][0] > 0

    def test_no_gap_fails(self):
        spec = make_spec(0.30, 0.25, m=10, M=200)
        rep = check_random_conditions(spec)
        assert not rep.conditions["gap"][1]

    def test_planted_block_must_be_smallest(self):
        part_big = contiguous_partition([150, 50])
        probs = np.array([[0.9, 0.1], [0.1, 0.1]])
        spec = PlantedModelSpec(part_big, [p.copy() for p in part_big], probs)
        rep = check_random_conditions(spec)
        assert not rep.conditions["size_min_area"][1]

    def test_polylog_floor(self):
        spec = make_spec(1.0, 0.0, m=3, M=1000)
        rep = check_random_conditions(spec)
        assert not rep.conditions["size_polylog"][1]

    def test_report_text(self):
        spec = make_spec(0.95, 0.05, m=60, M=200)
        text = str(check_random_conditions(spec, c1=0.5))
        assert "gap = " in text and "overall = pass" in text


class TestBalancedConditions:
    def test_one_sided_proxy_smaller_than_min_ratio(self):
        # at pbg = 0.1 the one-sided ratio 1/9 is the min ratio too; at 0.9 they differ
        spec = make_spec(0.95, 0.1, m=60, M=200)
        rep = check_balanced_conditions(spec, c=0.5)
        assert rep.details["sigma_star_sq"] == pytest.approx(0.1 / 0.9)
        assert rep.passed, str(rep)

    def test_gap_fail(self):
        spec = make_spec(0.26, 0.25, m=60, M=200)
        rep = check_balanced_conditions(spec)
        assert not rep.conditions["gap"][1]


class TestAdversarialConditions:
    def test_pass(self):
        b = AdversarialBudget(delta=0.3, delta_tilde=0.9, r1=10, r2=10, r3=10, rbar11=10)
        rep = check_adversarial_conditions(b, 80, 80)
        assert rep.passed
        assert rep.conditions["gap"][0] == pytest.approx(0.5)

    def test_margin_fail(self):
        b = AdversarialBudget(delta=0.5, delta_tilde=0.7, r1=0, r2=0, r3=0, rbar11=0)
        rep = check_adversarial_conditions(b, 80, 80)
        assert not rep.conditions["gap"][1]

    def test_cap_fail(self):
        b = AdversarialBudget(delta=0.1, delta_tilde=0.9, r1=10**6, r2=0, r3=0, rbar11=0)
        rep = check_adversarial_conditions(b, 10, 10, c=1.0)
        assert not rep.conditions["size_caps"][1]


class TestConcentrationTrial:
    def test_zero_probability_gives_zero_norm(self):
        norm, threshold, ok = concentration_trial(50, [30], [0.0], c=1.0, seed=0)
        assert norm == 0.0 and ok

    def test_typical_instance_passes_with_safe_constant(self):
        norm, threshold, ok = concentration_trial(100, [200, 200], [0.3, 0.2], c=6.0, seed=1)
        assert ok
        assert norm < threshold

    def test_probability_validation(self):
        with pytest.raises(InputError):
            concentration_trial(10, [5], [0.7], c=1.0)

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            concentration_trial(10, [5, 5], [0.3], c=1.0)

    def test_deterministic(self):
        a = concentration_trial(40, [60], [0.25], c=1.0, seed=7)
        b = concentration_trial(40, [60], [0.25], c=1.0, seed=7)
        assert a == b
