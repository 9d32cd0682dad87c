import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    brute_force_leq_fraction,
    monte_carlo_prob_leq,
)
from dp_expr.dp_core import (
    BaseDistribution,
    QuadratureSpec,
    continuous_base,
    empirical_cdf,
    eval_cdf,
    eval_cdf_left,
    integrate_unit_interval,
    lognormal_base,
    normal_base,
    posterior_predictive_cdf,
    prob_leq,
    prob_leq_weak_limit,
    uniform_base,
)
from dp_expr.errors import (
    EmptyWeakPrior,
    InputError,
    MissingQuantile,
    QuadratureFailure,
)


class TestPosteriorPredictiveCdf:
    def test_single_sample_zero_concentration_is_empirical(self):
        f = posterior_predictive_cdf([5.0], 0.0)
        assert f.base_weight == 0.0
        assert f.atoms == [(5.0, 1.0)]

    def test_mixture_weights(self):
        f = posterior_predictive_cdf([1.0, 1.0, 3.0], 1.0,
                                     uniform_base(0, 4))
        assert f.base_weight == pytest.approx(0.25, abs=0)
        assert f.atoms == [(1.0, 0.5), (3.0, 0.25)]

    def test_no_samples_returns_prior(self):
        f = posterior_predictive_cdf([], 2.0, uniform_base(0, 4))
        assert f.base_weight == 1.0
        assert f.atoms == []

    def test_empty_weak_prior_rejected(self):
        with pytest.raises(EmptyWeakPrior):
            posterior_predictive_cdf([], 0.0)

    def test_nonfinite_samples_rejected(self):
        with pytest.raises(InputError):
            posterior_predictive_cdf([1.0, float("nan")], 0.0)

    def test_mass_conservation(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            samples = rng.choice([1.0, 2.0, 2.5], size=rng.integers(1, 12))
            c = float(rng.choice([0.0, 0.3, 2.0]))
            base = uniform_base(0, 5) if c > 0 else None
            f = posterior_predictive_cdf(samples, c, base)
            assert abs(f.base_weight + f.masses.sum() - 1.0) <= 1e-12


class TestEvalCdf:
    def test_empirical_at_point(self):
        f = empirical_cdf([1.0, 2.0, 3.0])
        assert eval_cdf(f, 2.0) == pytest.approx(2 / 3, abs=0)

    def test_right_continuity(self):
        f = empirical_cdf([1.0, 2.0, 3.0])
        just_below = float(np.nextafter(2.0, 1.0))
        assert eval_cdf(f, just_below) == pytest.approx(1 / 3, abs=0)

    def test_mixture_value(self):
        f = posterior_predictive_cdf([1.0, 1.0, 3.0], 1.0,
                                     uniform_base(0, 4))
        assert eval_cdf(f, 2.0) == pytest.approx(0.625, abs=1e-15)

    def test_left_limit_at_atom(self):
        f = empirical_cdf([1.0, 2.0, 3.0])
        assert eval_cdf_left(f, 2.0) == pytest.approx(1 / 3, abs=0)

    def test_left_limit_continuous_base_equals_cdf(self):
        f = posterior_predictive_cdf([], 1.0, normal_base(0, 1))
        for t in (-1.3, 0.0, 2.7):
            assert eval_cdf_left(f, t) == eval_cdf(f, t)

    def test_left_limit_of_pure_atom(self):
        f = empirical_cdf([2.0])
        assert eval_cdf_left(f, 2.0) == 0.0

    def test_monotone_and_limits(self):
        f = posterior_predictive_cdf([0.5, 1.5, 1.5, 4.0], 0.7,
                                     normal_base(1.0, 2.0))
        grid = np.linspace(-15, 20, 400)
        vals = eval_cdf(f, grid)
        assert np.all(np.diff(vals) >= -1e-15)
        assert eval_cdf(f, -1e6) <= 1e-9
        assert eval_cdf(f, 1e6) >= 1 - 1e-9


class TestWeakLimit:
    def test_simple(self):
        assert prob_leq_weak_limit([1.0], [2.0]) == 1.0

    def test_tie_counts_as_leq(self):
        assert prob_leq_weak_limit([2.0], [2.0]) == 1.0

    def test_half(self):
        assert prob_leq_weak_limit([1.0, 4.0], [2.0, 3.0]) == \
            brute_force_leq_fraction([1.0, 4.0], [2.0, 3.0]) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(EmptyWeakPrior):
            prob_leq_weak_limit([], [1.0])

    def test_matches_brute_force_with_ties(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            m, n = rng.integers(1, 15, size=2)
            grid = rng.uniform(0, 5, size=4)
            x = rng.choice(grid, size=m)
            y = rng.choice(grid, size=n)
            assert prob_leq_weak_limit(x, y) == \
                brute_force_leq_fraction(list(x), list(y))

    def test_no_tie_complement(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x = rng.permutation(np.arange(1.0, 12.0))[:5]
            y = rng.permutation(np.arange(12.5, 20.5))[
                :4] - rng.uniform(0, 11)
            if np.intersect1d(x, y).size:
                continue
            total = prob_leq_weak_limit(x, y) + prob_leq_weak_limit(y, x)
            assert total == pytest.approx(1.0, abs=1e-12)


class TestProbLeq:
    def test_fully_separated_empirical(self):
        f = empirical_cdf([1.0, 2.0])
        g = empirical_cdf([3.0, 4.0])
        assert prob_leq(f, g) == 1.0

    def test_prior_symmetry_closed_form(self):
        base = uniform_base(0, 1)
        f = posterior_predictive_cdf([], 1.0, base)
        g = posterior_predictive_cdf([], 1.0, base)
        assert prob_leq(f, g) == 0.5

    def test_mixed_example(self):
        # 0.5*ecdf([1,3])(2) + 0.5*(0.5*(1-G0(1)) + 0.5*(1-G0(3)))
        # = 0.25 + 0.5*(0.5*0.75 + 0.5*0.25) = 0.5 with G0 = uniform(0,4)
        f = empirical_cdf([1.0, 3.0])
        g = posterior_predictive_cdf([2.0], 1.0, uniform_base(0, 4))
        assert prob_leq(f, g) == pytest.approx(0.5, abs=1e-12)

    def test_mixed_example_against_monte_carlo(self):
        f = posterior_predictive_cdf([1.0, 3.0], 0.5, uniform_base(0, 4))
        g = posterior_predictive_cdf([2.0], 1.0, uniform_base(0, 4))
        exact = prob_leq(f, g)
        estimate = monte_carlo_prob_leq(f, g, draws=10**6, seed=42)
        se = math.sqrt(exact * (1 - exact) / 10**6)
        assert abs(estimate - exact) <= 4 * se

    def test_atomic_path_equals_weak_limit_exactly(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            m, n = rng.integers(1, 25, size=2)
            grid = rng.uniform(0, 3, size=5)
            x = rng.choice(grid, size=m)
            y = rng.choice(grid, size=n)
            f = empirical_cdf(x)
            g = empirical_cdf(y)
            assert prob_leq(f, g) == prob_leq_weak_limit(x, y)

    def test_tiny_concentration_converges_to_weak_limit(self):
        rng = np.random.default_rng(33)
        base_f = normal_base(0.0, 1.5)
        base_g = lognormal_base(0.0, 0.5)
        for _ in range(20):
            m, n = rng.integers(1, 51, size=2)
            x = rng.lognormal(0, 1, size=m)
            y = rng.lognormal(0.3, 1, size=n)
            f = posterior_predictive_cdf(x, 1e-12, base_f)
            g = posterior_predictive_cdf(y, 1e-12, base_g)
            assert abs(prob_leq(f, g) - prob_leq_weak_limit(x, y)) <= 1e-6

    def test_missing_quantile_raises(self):
        no_quantile = continuous_base(lambda t: np.clip(t, 0, 1),
                                      quantile=None, label="unit-ramp")
        f = posterior_predictive_cdf([0.5], 1.0, uniform_base(0, 1))
        g = posterior_predictive_cdf([0.5], 1.0, no_quantile)
        with pytest.raises(MissingQuantile):
            prob_leq(f, g)

    def test_rank_transform_invariance_weak(self):
        rng = np.random.default_rng(8)
        x = rng.uniform(0.2, 4.0, size=9)
        y = rng.uniform(0.2, 4.0, size=7)
        before = prob_leq_weak_limit(x, y)
        after = prob_leq_weak_limit(np.exp(x), np.exp(y))
        assert before == after


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0.1, max_value=9.9), min_size=1,
                max_size=12),
       st.lists(st.floats(min_value=0.1, max_value=9.9), min_size=1,
                max_size=12))
def test_weak_limit_in_unit_interval_and_matches_oracle(x, y):
    got = prob_leq_weak_limit(x, y)
    assert 0.0 <= got <= 1.0
    assert got == brute_force_leq_fraction(x, y)


class TestQuadrature:
    def test_identical_uniform_bases_distinct_objects(self):
        f = posterior_predictive_cdf([], 1.0, uniform_base(0, 1))
        g = posterior_predictive_cdf([], 1.0, uniform_base(0, 1))
        assert prob_leq(f, g) == pytest.approx(0.5, abs=1e-7)

    def test_normal_vs_shifted_normal(self):
        # closed form: P(X <= Y) = Phi(delta / sqrt(2)) for unit normals
        from scipy.stats import norm
        delta = 0.8
        f = posterior_predictive_cdf([], 1.0, normal_base(0, 1))
        g = posterior_predictive_cdf([], 1.0, normal_base(delta, 1))
        expected = float(norm.cdf(delta / math.sqrt(2)))
        assert prob_leq(f, g) == pytest.approx(expected, abs=1e-8)

    def test_polynomial_integrand_is_near_exact(self):
        got = integrate_unit_interval(lambda u: u**3)
        assert got == pytest.approx(0.25, abs=1e-14)

    def test_budget_exhaustion_raises(self):
        def nasty(u):
            return np.sin(1.0 / (u + 1e-12))
        with pytest.raises(QuadratureFailure):
            integrate_unit_interval(
                nasty, QuadratureSpec(tolerance=1e-13, max_evals=400))

    def test_steep_ramp_converges(self):
        # integral of min(u/eps, 1) du = 1 - eps/2
        eps = 1e-5
        got = integrate_unit_interval(
            lambda u: np.minimum(u / eps, 1.0),
            QuadratureSpec(tolerance=1e-10, max_evals=100_000))
        assert got == pytest.approx(1 - eps / 2, abs=1e-9)


class TestBaseDistribution:
    def test_grid_check_accepts_scipy_bases(self):
        grid = np.linspace(-50, 50, 500)
        normal_base(0, 1).check_on_grid(grid)
        uniform_base(-2, 3).check_on_grid(grid)
        lognormal_base(0, 1).check_on_grid(np.linspace(1e-6, 100, 500))

    def test_grid_check_rejects_decreasing(self):
        broken = continuous_base(lambda t: 1.0 - np.clip(t, 0, 1),
                                 label="decreasing")
        with pytest.raises(InputError):
            broken.check_on_grid(np.linspace(-1, 2, 50))

    def test_bad_parameters_rejected(self):
        with pytest.raises(InputError):
            normal_base(0, 0)
        with pytest.raises(InputError):
            uniform_base(3, 3)
        with pytest.raises(InputError):
            lognormal_base(0, -1)


def _increasing_maps():
    return [np.exp,
            lambda v: v**3,
            lambda v: np.piecewise(
                v, [v < 1.0, v >= 1.0], [lambda a: 0.5 * a,
                                         lambda a: 2.0 * a - 1.5])]


def test_monte_carlo_cross_check_mixed_configs():
    rng = np.random.default_rng(77)
    for trial in range(4):
        c = float(rng.choice([0.5, 2.0, 10.0]))
        d = float(rng.choice([0.5, 2.0, 10.0]))
        m, n = rng.integers(1, 16, size=2)
        f = posterior_predictive_cdf(rng.lognormal(0, 0.7, m), c,
                                     lognormal_base(0, 1))
        g = posterior_predictive_cdf(rng.lognormal(0.4, 0.7, n), d,
                                     lognormal_base(0.4, 1))
        exact = prob_leq(f, g)
        draws = 10**6
        estimate = monte_carlo_prob_leq(f, g, draws, seed=1000 + trial)
        se = math.sqrt(max(exact * (1 - exact), 1e-12) / draws)
        assert abs(estimate - exact) <= 4 * se
