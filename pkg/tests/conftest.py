import math

import numpy as np
import pytest

from fairnb.model import Assignment, Feature, NaiveBayesModel, Schema

A = Assignment.from_pairs
EMPTY = Assignment()


def make_fig1() -> NaiveBayesModel:
    """The worked-example network: binary decision with prior 0.2, one
    sensitive feature X (0.8 / 0.5) and two others Y1 (0.7 / 0.1),
    Y2 (0.8 / 0.3); second value of each domain is the 'positive' one."""
    schema = Schema(
        features=(
            Feature("X", ("x~", "x")),
            Feature("Y1", ("y1~", "y1")),
            Feature("Y2", ("y2~", "y2")),
        ),
        sensitive=frozenset({0}),
        decision_name="D",
        decision_values=("-", "+"),
    )
    return NaiveBayesModel(
        schema=schema,
        prior=0.2,
        cpts=(
            np.array([[0.5, 0.5], [0.2, 0.8]]),
            np.array([[0.9, 0.1], [0.3, 0.7]]),
            np.array([[0.7, 0.3], [0.2, 0.8]]),
        ),
    )


@pytest.fixture
def fig1() -> NaiveBayesModel:
    return make_fig1()


def random_model(rng, max_features=5, max_card=3, min_features=2) -> NaiveBayesModel:
    """Random interior-parameter model with a random sensitive subset."""
    n = int(rng.integers(min_features, max_features + 1))
    n_sens = int(rng.integers(1, n + 1))
    sensitive = frozenset(rng.choice(n, size=n_sens, replace=False).tolist())
    features, cpts = [], []
    for i in range(n):
        card = int(rng.integers(2, max_card + 1))
        features.append(Feature(f"Z{i}", tuple(f"v{j}" for j in range(card))))
        p = rng.dirichlet(np.ones(card) * 1.5, size=2)
        p = np.clip(p, 1e-3, None)
        p /= p.sum(axis=1, keepdims=True)
        cpts.append(p)
    return NaiveBayesModel(
        schema=Schema(tuple(features), sensitive),
        prior=float(rng.uniform(0.05, 0.95)),
        cpts=tuple(cpts),
    )


def random_pattern(rng, model, allow_empty_y=True):
    """A random valid (x, y) with nonempty x."""
    schema = model.schema
    sens = sorted(schema.sensitive)
    x_vars = rng.choice(sens, size=int(rng.integers(1, len(sens) + 1)), replace=False)
    x = A([(int(v), int(rng.integers(schema.cardinality(int(v))))) for v in x_vars])
    rest = [v for v in range(schema.n_features) if v not in x.vars]
    y_pairs = []
    for v in rest:
        if rng.random() < (0.5 if allow_empty_y else 0.7):
            y_pairs.append((v, int(rng.integers(schema.cardinality(v)))))
    return x, A(y_pairs)


def extensions_of(model, x, y, excluded=()):
    """Every valid pattern (x + x', y + y') over the non-excluded unbound
    variables, by exhaustive enumeration."""
    schema = model.schema
    free = [
        v
        for v in range(schema.n_features)
        if v not in x.vars and v not in y.vars and v not in excluded
    ]
    out = []

    def rec(i, x_items, y_items):
        if i == len(free):
            out.append((A(x_items), A(y_items)))
            return
        var = free[i]
        rec(i + 1, x_items, y_items)
        for val in range(schema.cardinality(var)):
            if var in schema.sensitive:
                rec(i + 1, x_items + [(var, val)], y_items)
            rec(i + 1, x_items, y_items + [(var, val)])

    rec(0, list(x.items), list(y.items))
    return [(xs, ys) for xs, ys in out if xs]


def golden_section_divergence(model, x, y, delta, tol=1e-12) -> float:
    """Independent oracle: minimize the KL objective g(r) over the feasible
    r interval by golden-section search."""
    xy = x.union(y)
    a = model.joint_probability(1, xy)
    b = model.joint_probability(0, xy)
    mass = a + b
    p_y = model.joint_probability(1, y) + model.joint_probability(0, y)
    score = model.discrimination_score(x, y)
    if abs(score) <= delta:
        return 0.0
    inv_span = (p_y - mass) / (mass * p_y)
    r1 = (delta - score) / inv_span
    r2 = (-delta - score) / inv_span
    lo, hi = sorted((r1, r2))
    lo = max(lo, -a * (1.0 - 1e-12))
    hi = min(hi, b * (1.0 - 1e-12))

    def g(r):
        return a * math.log(a / (a + r)) + b * math.log(b / (b - r))

    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - phi * (hi - lo)
    d = lo + phi * (hi - lo)
    for _ in range(300):
        if g(c) < g(d):
            hi = d
        else:
            lo = c
        c = hi - phi * (hi - lo)
        d = lo + phi * (hi - lo)
        if hi - lo < tol:
            break
    return g(0.5 * (lo + hi))
