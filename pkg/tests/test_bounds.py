import itertools
import math

import numpy as np
import pytest

from fairnb.bounds import (
    delta_tilde,
    delta_tilde_extremum,
    discrimination_bound,
    divergence_bound_delta,
    divergence_bound_fair_point,
    divergence_score,
    extremal_extension,
)
from fairnb.errors import (
    InvalidIntervalError,
    InvalidPatternError,
    UndefinedQueryError,
)

from conftest import (
    A,
    EMPTY,
    extensions_of,
    golden_section_divergence,
    random_model,
    random_pattern,
)


def grid_extremum(alpha, beta, l, u, direction, step=1e-5):
    gammas = np.arange(l, u + step, step)
    gammas = np.clip(gammas, l, u)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = alpha * gammas / (alpha * gammas + beta * (1.0 - gammas)) - gammas
    vals = np.nan_to_num(vals, nan=0.0)
    return float(vals.min() if direction == "min" else vals.max())


class TestDeltaTilde:
    def test_equal_arguments_vanish(self):
        for alpha in (0.1, 0.5, 0.9):
            for gamma in (0.0, 0.3, 1.0):
                assert delta_tilde(alpha, alpha, gamma) == 0.0

    def test_degenerate_shapes(self):
        """With beta = 0 the restriction is 1 - gamma; with alpha = 0 it is
        -gamma."""
        assert delta_tilde(0.3, 0.0, 0.25) == pytest.approx(0.75)
        assert delta_tilde(0.0, 0.3, 0.25) == pytest.approx(-0.25)

    def test_both_zero_is_undefined(self):
        with pytest.raises(UndefinedQueryError):
            delta_tilde(0.0, 0.0, 0.5)

    def test_fig1_identity_with_discrimination_score(self, fig1):
        gamma = fig1.posterior(A([(1, 1)]))
        assert delta_tilde(0.2, 0.5, gamma) == pytest.approx(-0.225, abs=1e-3)

    def test_identity_on_random_patterns(self):
        """delta_tilde(P(x|d), P(x|dbar), P(d|y)) equals the score, 1e-12."""
        rng = np.random.default_rng(201)
        for _ in range(200):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            alpha = math.exp(sum(math.log(m.cpts[v][1, val]) for v, val in x.items))
            beta = math.exp(sum(math.log(m.cpts[v][0, val]) for v, val in x.items))
            gamma = m.posterior(y)
            assert delta_tilde(alpha, beta, gamma) == pytest.approx(
                m.discrimination_score(x, y), abs=1e-12
            )


class TestDeltaTildeExtremum:
    def test_closed_form_example(self):
        """alpha=0.2, beta=0.5 over [0,1]: minimum (2*sqrt(0.1)-0.7)/0.3 at
        (0.5-sqrt(0.1))/0.3, confirmed by grid search."""
        res = delta_tilde_extremum(0.2, 0.5, 0.0, 1.0, "min")
        assert res.value == pytest.approx((2 * math.sqrt(0.1) - 0.7) / 0.3, abs=1e-12)
        assert res.gamma_opt == pytest.approx((0.5 - math.sqrt(0.1)) / 0.3, abs=1e-12)
        assert not res.clamped
        assert res.value == pytest.approx(grid_extremum(0.2, 0.5, 0.0, 1.0, "min"), abs=1e-4)

    def test_equal_arguments(self):
        res = delta_tilde_extremum(0.4, 0.4, 0.2, 0.9, "max")
        assert res.value == 0.0
        assert not res.clamped

    def test_clamped_interval(self):
        """alpha=0.8, beta=0.5 concave: the interior maximum sits below 0.9,
        forcing evaluation at the left endpoint."""
        res = delta_tilde_extremum(0.8, 0.5, 0.9, 1.0, "max")
        assert res.clamped
        assert res.gamma_opt == 0.9
        assert res.value == pytest.approx(delta_tilde(0.8, 0.5, 0.9), abs=1e-15)

    def test_invalid_interval(self):
        with pytest.raises(InvalidIntervalError):
            delta_tilde_extremum(0.2, 0.5, 0.7, 0.3, "min")

    def test_matches_grid_search(self):
        rng = np.random.default_rng(202)
        for _ in range(300):
            alpha, beta = rng.uniform(0.0, 1.0, size=2)
            if alpha == beta == 0.0:
                continue
            l, u = sorted(rng.uniform(0.0, 1.0, size=2))
            for direction in ("min", "max"):
                got = delta_tilde_extremum(alpha, beta, l, u, direction).value
                want = grid_extremum(alpha, beta, l, u, direction)
                assert got == pytest.approx(want, abs=1e-4), (alpha, beta, l, u, direction)


class TestExtremalExtension:
    def test_fig1_max_takes_positive_values(self, fig1):
        """Ratios 1.6, 7, 2.67 are all maximized by the second value."""
        ext = extremal_extension(fig1, EMPTY, [0, 1, 2], "max")
        assert ext == A([(0, 1), (1, 1), (2, 1)])

    def test_empty_free_set(self, fig1):
        assert extremal_extension(fig1, A([(1, 1)]), [], "max") == EMPTY

    def test_fig1_min_with_context(self, fig1):
        ext = extremal_extension(fig1, A([(1, 1)]), [0], "min")
        assert ext == A([(0, 0)])

    def test_rejects_overlap(self, fig1):
        with pytest.raises(InvalidPatternError):
            extremal_extension(fig1, A([(0, 1)]), [0], "max")

    def test_attains_enumeration_optimum(self):
        """Lemma-style oracle: the per-variable rule matches exhaustive
        enumeration of completions, 1000 random instances."""
        rng = np.random.default_rng(203)
        for _ in range(1000):
            m = random_model(rng, max_features=8, max_card=2, min_features=2)
            F = m.schema.n_features
            n_fixed = int(rng.integers(0, F))
            fixed_vars = rng.choice(F, size=n_fixed, replace=False)
            fixed = A([(int(v), int(rng.integers(2))) for v in fixed_vars])
            free = [v for v in range(F) if v not in fixed.vars]
            direction = "max" if rng.random() < 0.5 else "min"
            ext = extremal_extension(m, fixed, free, direction)
            got = m.posterior(fixed.union(ext))
            best = None
            for combo in itertools.product(*[range(2)] * len(free)):
                p = m.posterior(fixed.union(A(list(zip(free, combo)))))
                best = p if best is None else (max(best, p) if direction == "max" else min(best, p))
            assert got == pytest.approx(best, abs=1e-12)


class TestDiscriminationBound:
    def test_fully_bound_pattern_collapses(self, fig1):
        x = A([(0, 0)])
        y = A([(1, 1), (2, 0)])
        bound = discrimination_bound(fig1, x, y, ())
        score = fig1.discrimination_score(x, y)
        assert bound.lower == pytest.approx(score, abs=1e-12)
        assert bound.upper == pytest.approx(score, abs=1e-12)

    def test_fully_bound_via_exclusion(self, fig1):
        bound = discrimination_bound(fig1, A([(0, 0)]), A([(1, 1)]), (2,))
        score = fig1.discrimination_score(A([(0, 0)]), A([(1, 1)]))
        assert bound.lower == pytest.approx(score, abs=1e-12)
        assert bound.upper == pytest.approx(score, abs=1e-12)

    def test_fig1_contains_worked_scores(self, fig1):
        """The root bound for x=xbar must contain -0.109, -0.225, -0.167."""
        bound = discrimination_bound(fig1, A([(0, 0)]), EMPTY, ())
        assert bound.upper >= -0.109 - 1e-3
        assert bound.lower <= -0.225 + 1e-3

    def test_contains_all_extension_scores(self):
        rng = np.random.default_rng(204)
        for _ in range(200):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            free = [v for v in range(m.schema.n_features) if v not in x.vars | y.vars]
            excluded = tuple(v for v in free if rng.random() < 0.3)
            bound = discrimination_bound(m, x, y, excluded)
            for xs, ys in extensions_of(m, x, y, excluded):
                s = m.discrimination_score(xs, ys)
                assert bound.lower - 1e-9 <= s <= bound.upper + 1e-9


class TestDivergenceScore:
    def test_fair_pattern_scores_zero(self, fig1):
        assert divergence_score(fig1, A([(0, 1)]), EMPTY, 0.1) == 0.0

    def test_delta_one_scores_zero_everywhere(self):
        rng = np.random.default_rng(205)
        for _ in range(30):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            assert divergence_score(m, x, y, 1.0) == 0.0

    def test_matches_golden_section(self, fig1):
        got = divergence_score(fig1, A([(0, 0)]), A([(1, 1)]), 0.1)
        want = golden_section_divergence(fig1, A([(0, 0)]), A([(1, 1)]), 0.1)
        assert got == pytest.approx(want, abs=1e-10)
        assert got > 0.0

    def test_matches_golden_section_randomized(self):
        rng = np.random.default_rng(206)
        for _ in range(100):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            delta = float(rng.uniform(0.0, 0.3))
            got = divergence_score(m, x, y, delta)
            want = golden_section_divergence(m, x, y, delta)
            assert got == pytest.approx(want, abs=1e-8)

    def test_nonnegative_and_monotone_in_delta(self):
        rng = np.random.default_rng(207)
        for _ in range(50):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            deltas = sorted(rng.uniform(0.0, 0.6, size=4))
            scores = [divergence_score(m, x, y, d) for d in deltas]
            assert all(s >= 0.0 for s in scores)
            for lo_d, hi_d in zip(scores, scores[1:]):
                assert hi_d <= lo_d + 1e-12

    def test_delta_zero_is_allowed(self, fig1):
        """Exact parity: the closed form stays well defined at delta = 0."""
        got = divergence_score(fig1, A([(0, 0)]), A([(1, 1)]), 0.0)
        want = golden_section_divergence(fig1, A([(0, 0)]), A([(1, 1)]), 0.0)
        assert got == pytest.approx(want, abs=1e-10)

    def test_convexity_witness(self):
        """g evaluated at the closed-form minimizer never exceeds g at random
        feasible points."""
        rng = np.random.default_rng(208)
        for _ in range(20):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            delta = float(rng.uniform(0.0, 0.2))
            score = m.discrimination_score(x, y)
            if abs(score) <= delta:
                continue
            got = divergence_score(m, x, y, delta)
            xy = x.union(y)
            a = m.joint_probability(1, xy)
            b = m.joint_probability(0, xy)
            p_y = m.joint_probability(1, y) + m.joint_probability(0, y)
            inv_span = (p_y - (a + b)) / ((a + b) * p_y)
            r1 = (delta - score) / inv_span
            r2 = (-delta - score) / inv_span
            lo, hi = sorted((r1, r2))
            lo = max(lo, -a * (1 - 1e-9))
            hi = min(hi, b * (1 - 1e-9))
            for r in rng.uniform(lo, hi, size=100):
                g = a * math.log(a / (a + r)) + b * math.log(b / (b - r))
                assert got <= g + 1e-10


class TestDivergenceBounds:
    def test_fair_point_bound_nonnegative_trivial(self, fig1):
        x = A([(0, 1)])
        y = A([(1, 1), (2, 1)])
        assert divergence_bound_fair_point(fig1, x, y) >= 0.0

    def test_fig1_fair_point_dominates_inner_pattern(self, fig1):
        bound = divergence_bound_fair_point(fig1, A([(0, 0)]), EMPTY)
        inner = divergence_score(fig1, A([(0, 0)]), A([(1, 1)]), 0.1)
        assert bound >= inner

    def test_delta_bound_zero_when_bound_within_delta(self, fig1):
        """No extension can discriminate at delta close to 1, so the bound
        collapses to zero."""
        assert divergence_bound_delta(fig1, A([(0, 1)]), EMPTY, (), 0.99) == 0.0

    def test_fully_bound_pattern_dominates_its_own_score(self):
        rng = np.random.default_rng(209)
        for _ in range(50):
            m = random_model(rng)
            sens = sorted(m.schema.sensitive)
            x = A([(v, int(rng.integers(m.schema.cardinality(v)))) for v in sens])
            y = A([
                (v, int(rng.integers(m.schema.cardinality(v))))
                for v in range(m.schema.n_features)
                if v not in x.vars
            ])
            delta = float(rng.uniform(0.0, 0.3))
            score = divergence_score(m, x, y, delta)
            assert divergence_bound_delta(m, x, y, (), delta) >= score - 1e-9
            assert divergence_bound_fair_point(m, x, y) >= score - 1e-9

    def test_bounds_dominate_every_extension(self):
        rng = np.random.default_rng(210)
        for _ in range(150):
            m = random_model(rng)
            x, y = random_pattern(rng, m)
            free = [v for v in range(m.schema.n_features) if v not in x.vars | y.vars]
            excluded = tuple(v for v in free if rng.random() < 0.3)
            delta = float(rng.uniform(0.0, 0.3))
            b_delta = divergence_bound_delta(m, x, y, excluded, delta)
            b_fair = divergence_bound_fair_point(m, x, y)
            for xs, ys in extensions_of(m, x, y, excluded):
                d = divergence_score(m, xs, ys, delta)
                assert b_delta >= d - 1e-9
                assert b_fair >= d - 1e-9
