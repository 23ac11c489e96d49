"""Score functions and admissible bounds that drive branch-and-bound pruning.

Everything here is a pure function of an immutable model. The central object
is the relaxation

    dt(alpha, beta, gamma) = alpha*gamma / (alpha*gamma + beta*(1-gamma)) - gamma,

which equals the discrimination score when evaluated at alpha = P(x|d),
beta = P(x|d-bar), gamma = P(d|y). It depends on (alpha, beta) only through
h = log(alpha/beta), which lets every bound be computed from sums of
per-feature log likelihood ratios:

    dt           = expit(h + logit(gamma)) - gamma
    argopt gamma = expit(-h/2)
    opt value    = tanh(h/4)

The miner recomputes the same quantities incrementally; the ``*_core``
functions below take plain scalars so both paths share one implementation
of the formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

from .errors import (
    DegeneratePatternError,
    InvalidIntervalError,
    InvalidPatternError,
    UndefinedQueryError,
)
from .model import Assignment, NaiveBayesModel, _check_evidence, expit

BOUND_ATOL = 1e-12

Direction = Literal["min", "max"]


def logit(p: float) -> float:
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def log_sigmoid(t: float) -> float:
    """log(expit(t)), stable for large |t|."""
    if t >= 0:
        return -math.log1p(math.exp(-t))
    return t - math.log1p(math.exp(t))


@dataclass(frozen=True)
class DeltaTildeExtremum:
    gamma_opt: float
    value: float
    clamped: bool


@dataclass(frozen=True)
class ScoreBound:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise ValueError(f"bound inverted: [{self.lower}, {self.upper}]")

    def abs_upper(self) -> float:
        """Upper bound on |score| over the covered extensions."""
        return max(abs(self.lower), abs(self.upper))


# --- the relaxation and its extrema, parameterized by h = log(alpha/beta) ---


def _dt_from_h(h: float, gamma: float) -> float:
    if h == math.inf:  # beta = 0: dt restricted to 1 - gamma
        return 1.0 - gamma
    if h == -math.inf:  # alpha = 0: dt restricted to -gamma
        return -gamma
    if gamma <= 0.0 or gamma >= 1.0:
        return 0.0
    return expit(h + logit(gamma)) - gamma


def _extremum_from_h(h: float, l: float, u: float, direction: Direction) -> DeltaTildeExtremum:
    if h == 0.0:
        return DeltaTildeExtremum(gamma_opt=l, value=0.0, clamped=False)
    if math.isinf(h):
        # both degenerate shapes (1-gamma and -gamma) decrease in gamma
        g = l if direction == "max" else u
        return DeltaTildeExtremum(gamma_opt=g, value=_dt_from_h(h, g), clamped=False)
    interior_is_min = h < 0.0  # alpha < beta: convex with an interior minimum
    if (direction == "min") == interior_is_min:
        g = expit(-h / 2.0)
        if g < l:
            return DeltaTildeExtremum(l, _dt_from_h(h, l), clamped=True)
        if g > u:
            return DeltaTildeExtremum(u, _dt_from_h(h, u), clamped=True)
        return DeltaTildeExtremum(g, math.tanh(h / 4.0), clamped=False)
    # opposite direction: convexity/concavity puts the optimum at an endpoint
    vl, vu = _dt_from_h(h, l), _dt_from_h(h, u)
    if direction == "max":
        return DeltaTildeExtremum(*((l, vl) if vl >= vu else (u, vu)), clamped=False)
    return DeltaTildeExtremum(*((l, vl) if vl <= vu else (u, vu)), clamped=False)


def _h_from_probs(alpha: float, beta: float) -> float:
    if alpha < 0 or alpha > 1 or beta < 0 or beta > 1:
        raise ValueError("alpha and beta must be probabilities")
    if alpha == 0.0 and beta == 0.0:
        raise UndefinedQueryError("alpha = beta = 0: the conditional is ill-defined")
    if alpha == beta:
        return 0.0
    if alpha == 0.0:
        return -math.inf
    if beta == 0.0:
        return math.inf
    return math.log(alpha) - math.log(beta)


def delta_tilde(alpha: float, beta: float, gamma: float) -> float:
    """The relaxation dt(alpha, beta, gamma); equals the discrimination
    score at (P(x|d), P(x|d-bar), P(d|y))."""
    if gamma < 0 or gamma > 1:
        raise ValueError("gamma must be a probability")
    return _dt_from_h(_h_from_probs(alpha, beta), gamma)


def delta_tilde_extremum(
    alpha: float, beta: float, l: float, u: float, direction: Direction
) -> DeltaTildeExtremum:
    """Extremum of dt(alpha, beta, .) over gamma in [l, u].

    For alpha < beta the map is convex with interior minimum at
    expit(-h/2); for alpha > beta concave with interior maximum. When the
    requested direction disagrees with the curvature the optimum sits at an
    interval endpoint.
    """
    if not 0.0 <= l <= u <= 1.0:
        raise InvalidIntervalError(f"invalid interval [{l}, {u}]")
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    return _extremum_from_h(_h_from_probs(alpha, beta), l, u, direction)


# --- extremal extensions (per-variable likelihood-ratio rule) ----------------


def extremal_extension(
    model: NaiveBayesModel,
    fixed: Assignment,
    free: Iterable[int],
    direction: Direction,
) -> Assignment:
    """Completion of ``free`` extremizing P(d | fixed + completion).

    Each variable is chosen independently by its likelihood ratio
    P(v|d)/P(v|d-bar); ties break toward the lowest value index.
    """
    free = sorted(set(free))
    _check_evidence(model.schema, fixed)
    overlap = set(free) & fixed.vars
    if overlap:
        raise InvalidPatternError(f"free variables {sorted(overlap)} already fixed")
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    pairs = []
    for var in free:
        ratios = model._log_ratio[var]
        val = int(ratios.argmax() if direction == "max" else ratios.argmin())
        pairs.append((var, val))
    return Assignment.from_pairs(pairs)


# --- per-node quantities shared by the bound formulas ------------------------


@dataclass(frozen=True)
class NodeQuantities:
    """Scalars a bound needs at a search node (x, y, excluded).

    Log-odds values include the prior; h_* are sums of log likelihood
    ratios. Completion ranges follow the extension semantics: gamma_[lu]
    range over extensions of y by non-excluded free variables, while the
    ``*_full`` log-odds range over *complete* assignments (excluded
    variables included, and for ``lo_y_*_full`` also the x variables).
    """

    a: float  # P(d, x, y)
    b: float  # P(d-bar, x, y)
    alpha_x: float  # P(x | d)
    beta_x: float  # P(x | d-bar)
    alpha_lo: float  # min over sensitive free extensions of P(x x' | d)
    beta_lo: float
    h_up: float  # log ratio of the max-posterior sensitive extension of x
    h_lo: float
    gamma_l: float  # range of P(d | y y') over free extensions
    gamma_u: float
    lo_xy_max: float  # log-odds range over complete extensions of xy
    lo_xy_min: float
    lo_y_max_full: float  # log-odds range over complete assignments consistent with y
    lo_y_min_full: float
    has_candidate: bool  # False when x is empty and no free sensitive variable exists


def node_quantities(
    model: NaiveBayesModel,
    x: Assignment,
    y: Assignment,
    excluded: Iterable[int] = (),
) -> NodeQuantities:
    schema = model.schema
    _check_evidence(schema, x)
    _check_evidence(schema, y)
    if x.vars & y.vars:
        raise InvalidPatternError("x and y overlap")
    if x.vars - schema.sensitive:
        raise InvalidPatternError("x binds non-sensitive variables")
    excluded = frozenset(excluded)
    if excluded & (x.vars | y.vars):
        raise InvalidPatternError("excluded set overlaps the pattern")

    la_x = lb_x = 0.0
    x_rmax = x_rmin = 0.0
    for var, val in x.items:
        la_x += model._logp[var][1, val]
        lb_x += model._logp[var][0, val]
        r = model._log_ratio[var]
        x_rmax += float(r.max())
        x_rmin += float(r.min())

    ly1 = model.log_joint(1, y)
    ly0 = model.log_joint(0, y)
    lo_y = ly1 - ly0

    free = [
        v
        for v in range(schema.n_features)
        if v not in x.vars and v not in y.vars and v not in excluded
    ]
    r_free_max = r_free_min = 0.0
    rs_max = rs_min = 0.0
    u1 = u0 = 0.0
    any_free_sens = False
    for var in free:
        r = model._log_ratio[var]
        rmax, rmin = float(r.max()), float(r.min())
        r_free_max += rmax
        r_free_min += rmin
        if var in schema.sensitive:
            any_free_sens = True
            rs_max += rmax
            rs_min += rmin
            u1 += float(model._logp[var][1].min())
            u0 += float(model._logp[var][0].min())
    r_excl_max = r_excl_min = 0.0
    for var in excluded:
        r = model._log_ratio[var]
        r_excl_max += float(r.max())
        r_excl_min += float(r.min())

    h_x = la_x - lb_x
    lo_xy = lo_y + h_x
    return NodeQuantities(
        a=math.exp(ly1 + la_x),
        b=math.exp(ly0 + lb_x),
        alpha_x=math.exp(la_x),
        beta_x=math.exp(lb_x),
        alpha_lo=math.exp(la_x + u1),
        beta_lo=math.exp(lb_x + u0),
        h_up=h_x + rs_max,
        h_lo=h_x + rs_min,
        gamma_l=expit(lo_y + r_free_min),
        gamma_u=expit(lo_y + r_free_max),
        lo_xy_max=lo_xy + r_free_max + r_excl_max,
        lo_xy_min=lo_xy + r_free_min + r_excl_min,
        lo_y_max_full=lo_y + r_free_max + r_excl_max + x_rmax,
        lo_y_min_full=lo_y + r_free_min + r_excl_min + x_rmin,
        has_candidate=bool(x) or any_free_sens,
    )


# --- discrimination bound (valid for every extension of the node) ------------


def disc_bound_core(h_up: float, h_lo: float, gamma_l: float, gamma_u: float) -> ScoreBound:
    ub = _extremum_from_h(h_up, gamma_l, gamma_u, "max").value
    lb = _extremum_from_h(h_lo, gamma_l, gamma_u, "min").value
    return ScoreBound(lower=lb, upper=ub)


def discrimination_bound(
    model: NaiveBayesModel,
    x: Assignment,
    y: Assignment,
    excluded: Iterable[int] = (),
) -> ScoreBound:
    """[lower, upper] valid for the score of every pattern (x x', y y')
    where x' extends over unbound non-excluded sensitive variables and y'
    over the remaining unbound non-excluded variables."""
    q = node_quantities(model, x, y, excluded)
    if not q.has_candidate:
        return ScoreBound(0.0, 0.0)
    return disc_bound_core(q.h_up, q.h_lo, q.gamma_l, q.gamma_u)


# --- divergence score ---------------------------------------------------------


def divergence_score(model: NaiveBayesModel, x: Assignment, y: Assignment, delta: float) -> float:
    """Minimum KL divergence to a distribution fair on (x, y) and equal to
    the model elsewhere; exactly 0 when the pattern is already within delta.
    """
    from .model import check_pattern

    check_pattern(model.schema, x, y)
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must be in [0, 1]")
    lxy1 = model.log_joint(1, x.union(y))
    lxy0 = model.log_joint(0, x.union(y))
    a = math.exp(lxy1)
    b = math.exp(lxy0)
    mass = a + b
    p_y = math.exp(model.log_joint(1, y)) + math.exp(model.log_joint(0, y))
    score = expit(lxy1 - lxy0) - expit(model.log_odds(y))
    if abs(score) <= delta:
        return 0.0
    if p_y - mass <= 0.0:
        raise DegeneratePatternError("P(xy) = P(y): x is implied by y")
    inv_span = (p_y - mass) / (mass * p_y)  # = 1/P(xy) - 1/P(y)
    target = delta if score > delta else -delta
    r = (target - score) / inv_span
    return _g_of_r(a, b, r)


def _g_of_r(a: float, b: float, r: float) -> float:
    """KL objective g(r) = a log(a/(a+r)) + b log(b/(b-r))."""
    ar = a + r
    br = b - r
    if ar <= 0.0 or br <= 0.0:
        return math.inf
    return max(a * (math.log(a) - math.log(ar)) + b * (math.log(b) - math.log(br)), 0.0)


# --- divergence bounds --------------------------------------------------------


def fair_point_core(
    a: float,
    b: float,
    lo_xy_max: float,
    lo_xy_min: float,
    lo_y_max_full: float,
    lo_y_min_full: float,
) -> float:
    # a * log(max P(d|z in xy) / min P(d|z in y)) + b * log-ratio of the d-bar side
    term_d = a * (log_sigmoid(lo_xy_max) - log_sigmoid(lo_y_min_full))
    term_nd = b * (log_sigmoid(-lo_xy_min) - log_sigmoid(-lo_y_max_full))
    return max(term_d + term_nd, 0.0)


def divergence_bound_fair_point(model: NaiveBayesModel, x: Assignment, y: Assignment) -> float:
    """Upper bound on the divergence score of every extension of (x, y),
    built from the always-feasible fair repair point."""
    q = node_quantities(model, x, y)
    return fair_point_core(q.a, q.b, q.lo_xy_max, q.lo_xy_min, q.lo_y_max_full, q.lo_y_min_full)


def divergence_delta_core(q: NodeQuantities, delta: float) -> float:
    bound = disc_bound_core(q.h_up, q.h_lo, q.gamma_l, q.gamma_u)
    c_up = delta - bound.upper
    c_lo = -delta - bound.lower

    q_d_max = expit(q.lo_xy_max)
    q_d_min = expit(q.lo_xy_min)
    mass_max = max(
        q.gamma_l * q.alpha_x + (1.0 - q.gamma_l) * q.beta_x,
        q.gamma_u * q.alpha_x + (1.0 - q.gamma_u) * q.beta_x,
    )
    mass_min = min(
        q.gamma_l * q.alpha_lo + (1.0 - q.gamma_l) * q.beta_lo,
        q.gamma_u * q.alpha_lo + (1.0 - q.gamma_u) * q.beta_lo,
    )

    def case_bound(c: float) -> float:
        if c >= 0.0:
            # the corresponding violation direction is already impossible
            return 0.0
        den = q_d_min * (1.0 - mass_max) + c
        if den <= 0.0:
            return math.inf
        num = q_d_max * (1.0 - mass_min)
        return q.a * math.log(num / den)

    def case_bound_neg(c: float) -> float:
        if c <= 0.0:
            return 0.0
        den = (1.0 - q_d_max) * (1.0 - mass_max) - c
        if den <= 0.0:
            return math.inf
        num = (1.0 - q_d_min) * (1.0 - mass_min)
        return q.b * math.log(num / den)

    return max(case_bound(c_up), case_bound_neg(c_lo), 0.0)


def divergence_bound_delta(
    model: NaiveBayesModel,
    x: Assignment,
    y: Assignment,
    excluded: Iterable[int],
    delta: float,
) -> float:
    """Upper bound on the divergence score of every extension, built from
    the discrimination bounds and the three sign cases of the shifted KL
    objective. Returns 0 when the discrimination bound already fits in
    [-delta, delta] (no extension can discriminate)."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must be in [0, 1]")
    q = node_quantities(model, x, y, excluded)
    if not q.has_candidate:
        return 0.0
    return divergence_delta_core(q, delta)
