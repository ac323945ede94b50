import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from gsbm_lab.generator import ModelParams
from gsbm_lab.geometry import unit_ball_volume
from gsbm_lab.theory import (
    InfeasibleParameters,
    Regime,
    ch_divergence_plus,
    ch_divergence_t,
    chi_upper_bounds,
    classify_regime,
    delta_bound,
    occupancy_gamma,
    profile_intensities,
    practical_chi,
    rho_coefficient,
    solve_parameters,
    threshold_curve,
)

vec = st.lists(st.floats(0, 20), min_size=4, max_size=4)


class TestDivergence:
    @settings(max_examples=200, deadline=None)
    @given(x=vec, y=vec, t=st.floats(0, 1))
    def test_nonnegative_and_mirror(self, x, y, t):
        assume(1 - (1 - t) == t)  # the mirror must be evaluated at exactly 1 - t
        v = ch_divergence_t(x, y, t)
        assert v >= -1e-9
        assert v == pytest.approx(ch_divergence_t(y, x, 1 - t), abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(x=vec, t=st.floats(0, 1))
    def test_zero_on_diagonal(self, x, t):
        assert ch_divergence_t(x, x, t) == pytest.approx(0.0, abs=1e-9)

    def test_positive_off_diagonal(self):
        assert ch_divergence_t([1, 2, 3, 4], [1, 2, 3, 5], 0.5) > 0

    def test_endpoints(self):
        x, y = profile_intensities(2.0, 0.9, 0.1, 1)
        assert ch_divergence_t(x, y, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert ch_divergence_t(x, y, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_half_closed_form(self):
        x, y = profile_intensities(1.0, 0.9, 0.1, 2)
        assert ch_divergence_t(x, y, 0.5) == pytest.approx(math.pi * 0.4)

    def test_bad_t(self):
        with pytest.raises(ValueError):
            ch_divergence_t([1, 1, 1, 1], [1, 1, 1, 1], 1.5)

    def test_plus_example(self):
        # lambda * nu_d = 4
        x, y = profile_intensities(2.0, 0.9, 0.1, 1)
        value, t = ch_divergence_plus(x, y)
        assert value == pytest.approx(1.6, abs=1e-9)
        assert t == pytest.approx(0.5, abs=1e-6)
        assert ch_divergence_plus(x, x) == (0.0, 0.5)

    @settings(max_examples=60, deadline=None)
    @given(x=vec, y=vec)
    def test_plus_against_scipy(self, x, y):
        value, t = ch_divergence_plus(x, y)
        res = minimize_scalar(lambda s: -ch_divergence_t(x, y, s), bounds=(0, 1), method="bounded",
                              options={"xatol": 1e-12})
        best = max(-res.fun, ch_divergence_t(x, y, 0), ch_divergence_t(x, y, 1))
        assert value >= best - 1e-9
        assert value == pytest.approx(ch_divergence_plus(y, x)[0], abs=1e-9)


class TestRegime:
    def test_examples(self):
        assert classify_regime(ModelParams(2, 100, 0.9, 0.1, 1)) is Regime.ACHIEVABLE
        assert classify_regime(ModelParams(0.5, 100, 0.9, 0.1, 1)) is Regime.IMPOSSIBLE_SPARSE_D1
        assert classify_regime(ModelParams(5, 100, 0.4, 0.4, 2)) is Regime.IMPOSSIBLE_DIVERGENCE
        assert classify_regime(ModelParams(1.05, 100, 0.9, 0.1, 1)) is Regime.IMPOSSIBLE_DIVERGENCE

    def test_boundary(self):
        lam = 1 / (math.pi * 0.4)
        assert classify_regime(ModelParams(lam, 100, 0.9, 0.1, 2)) is Regime.BOUNDARY
        # d = 1, lambda = 1 exactly with a strong signal
        assert classify_regime(ModelParams(1.0, 100, 1.0, 0.0, 1)) is Regime.BOUNDARY

    @settings(max_examples=200, deadline=None)
    @given(lam=st.floats(0.01, 20), a=st.floats(0, 1), b=st.floats(0, 1), d=st.integers(1, 4))
    def test_symmetric(self, lam, a, b, d):
        assert classify_regime(ModelParams(lam, 100, a, b, d)) is classify_regime(ModelParams(lam, 100, b, a, d))

    def test_threshold(self):
        assert threshold_curve(0.9, 0.1, 1).lambda_star == pytest.approx(1.25)
        assert threshold_curve(0.9, 0.1, 2).lambda_star == pytest.approx(1 / (math.pi * 0.4))
        assert threshold_curve(0.99, 0.9, 1).effective == threshold_curve(0.99, 0.9, 1).lambda_star > 1
        assert threshold_curve(1.0, 0.0, 1).effective == 1.0
        assert math.isinf(threshold_curve(0.3, 0.3, 2).lambda_star)


class TestSolver:
    def test_chi_second_clause(self):
        assert chi_upper_bounds(3.0, 1)[1] == pytest.approx(1 / 3)

    def test_chi_first_clause_limit(self):
        for d in (1, 2, 3):
            first = chi_upper_bounds(1e15, d)[0]
            nu = unit_ball_volume(d)
            # nu (1 - 3 sqrt(d) chi^(1/d) / 2)^d = nu / 2
            target = ((1 - 0.5 ** (1 / d)) * 2 / (3 * math.sqrt(d))) ** d
            assert first == pytest.approx(target, rel=1e-6)
            assert nu * (1 - 3 * math.sqrt(d) * first ** (1 / d) / 2) ** d == pytest.approx(nu / 2, rel=1e-6)

    def test_rho(self):
        assert rho_coefficient(0.9, 0.1) == pytest.approx(4 * math.log(9))

    def test_gamma_root(self):
        for mass in (1.5, 3.0, 10.0):
            g = occupancy_gamma(mass)
            assert 0 < g < mass
            assert g * (math.log(g) - math.log(mass)) + mass - g == pytest.approx((1 + mass) / 2, abs=1e-9)
        with pytest.raises(InfeasibleParameters):
            occupancy_gamma(0.9)

    @pytest.mark.parametrize(
        "lam,a,b,d",
        [(3, 0.9, 0.1, 1), (2, 0.9, 0.1, 1), (1, 0.9, 0.1, 2), (5, 0.7, 0.3, 2), (1, 0.95, 0.05, 3), (3, 0.1, 0.9, 1)],
    )
    def test_self_consistency(self, lam, a, b, d):
        p = ModelParams(lam, 1e5, a, b, d)
        dp = solve_parameters(p)
        nu = unit_ball_volume(d)
        chi = dp.chi
        assert nu * (1 - 3 * math.sqrt(d) * chi ** (1 / d) / 2) ** d >= (nu + 1 / lam) / 2
        base = 1.0 if d == 1 else nu
        assert 0 < chi < (base - 1 / lam) / 2
        assert 0 < dp.delta < delta_bound(lam, d, chi)[0]
        assert dp.delta < dp.eta / dp.kappa
        assert dp.M == pytest.approx(5 / ((a - b) ** 2 * dp.delta))
        assert dp.rho == pytest.approx(2 * (abs(math.log(a / b)) + abs(math.log((1 - a) / (1 - b)))))
        assert dp.kappa == pytest.approx(nu * (1 + math.sqrt(d) * chi ** (1 / d)) ** d / chi)
        assert dp.R_d == pytest.approx(1 - math.sqrt(d) * chi ** (1 / d) / 2)
        assert dp.K <= nu * dp.R_d**d / chi - 1 + 1e-9
        assert dp.eta == pytest.approx((dp.ch_value - 1) / dp.rho)

    def test_infeasible(self):
        with pytest.raises(InfeasibleParameters):
            solve_parameters(ModelParams(1.05, 1e5, 0.9, 0.1, 1))
        with pytest.raises(InfeasibleParameters):
            solve_parameters(ModelParams(0.5, 1e5, 0.9, 0.1, 1))

    def test_practical_chi(self):
        assert practical_chi(ModelParams(3.0, 1e5, 0.9, 0.1, 1)) == 0.5
        chi = practical_chi(ModelParams(1.0, 1e5, 0.9, 0.1, 2))
        assert 0 < chi <= 1 / 8


def test_profile_argmax_grid():
    for lam in (0.5, 2.0, 7.0):
        for d in (1, 2, 3):
            for a in np.linspace(0.05, 0.95, 5):
                for b in np.linspace(0.02, 0.98, 5):
                    x, y = profile_intensities(lam, a, b, d)
                    if np.array_equal(x, y):
                        continue
                    value, t = ch_divergence_plus(x, y)
                    assert abs(t - 0.5) <= 1e-6
                    closed = lam * unit_ball_volume(d) * (1 - math.sqrt(a * b) - math.sqrt((1 - a) * (1 - b)))
                    assert abs(value - closed) <= 1e-9
