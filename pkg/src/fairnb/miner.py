"""Branch-and-bound search for discrimination patterns.

The search walks variables in a fixed global order; at each node the
branching variable is either bound into the sensitive part x, bound into
the context part y, or skipped (skipping implements the excluded set: a
variable passed over at its depth stays unbound in the whole subtree).
Every candidate pattern is therefore scored exactly once, and subtrees are
cut whenever the admissible bounds from :mod:`fairnb.bounds` show no
improving pattern can live below.

Counting convention for reports: ``nodes_visited`` is the number of
candidate patterns whose score was actually computed, so
``nodes_visited / search_space_size`` is the explored fraction of the
pattern space. ``nodes_pruned`` counts subtrees cut by a bound check.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Literal

from .bounds import (
    NodeQuantities,
    _g_of_r,
    disc_bound_core,
    divergence_delta_core,
    fair_point_core,
)
from .errors import SearchSpaceCapError
from .model import Assignment, NaiveBayesModel, Schema, expit

QUALIFY_TOL = 1e-12

Ranking = Literal["discrimination", "divergence"]
RANKINGS = ("discrimination", "divergence")


def is_discriminating(score: float, delta: float) -> bool:
    """Def.-2 membership with the strict-inequality tolerance used everywhere."""
    return abs(score) > delta + QUALIFY_TOL


def search_space_size(schema: Schema) -> int:
    """Number of candidate patterns: every variable is unbound, in x (if
    sensitive) or in y, minus the combinations with empty x."""
    with_x = 1
    without_x = 1
    for i, feature in enumerate(schema.features):
        card = feature.cardinality
        without_x *= 1 + card
        with_x *= 1 + 2 * card if i in schema.sensitive else 1 + card
    return with_x - without_x


@dataclass(frozen=True)
class Pattern:
    x: Assignment
    y: Assignment
    delta: float
    divergence: float
    mass: float

    @property
    def canonical_key(self) -> tuple:
        return (self.x.items, self.y.items)

    def describe(self, schema: Schema) -> dict:
        return {
            "x": schema.describe(self.x),
            "y": schema.describe(self.y),
            "delta": self.delta,
            "divergence": self.divergence,
            "mass": self.mass,
        }


def ranking_score(pattern: Pattern, ranking: Ranking) -> float:
    return abs(pattern.delta) if ranking == "discrimination" else pattern.divergence


@dataclass(frozen=True)
class MiningReport:
    patterns: tuple[Pattern, ...]
    nodes_visited: int
    nodes_pruned: int
    search_space_size: int
    certified_fair: bool
    delta: float
    k: int | None
    ranking: Ranking | None
    variable_order: tuple[str, ...]

    def __post_init__(self):
        if self.certified_fair and self.patterns:
            raise ValueError("certified_fair with a nonempty pattern list")
        if self.nodes_visited > self.search_space_size:
            raise ValueError("visited more candidates than the space contains")

    @property
    def explored_fraction(self) -> float:
        return self.nodes_visited / self.search_space_size if self.search_space_size else 0.0

    def to_json_dict(self, schema: Schema) -> dict:
        return {
            "delta": self.delta,
            "k": self.k,
            "ranking": self.ranking,
            "certified_fair": self.certified_fair,
            "nodes_visited": self.nodes_visited,
            "nodes_pruned": self.nodes_pruned,
            "search_space_size": self.search_space_size,
            "explored_fraction": self.explored_fraction,
            "variable_order": list(self.variable_order),
            "patterns": [p.describe(schema) for p in self.patterns],
        }

    def to_json(self, schema: Schema) -> str:
        return json.dumps(self.to_json_dict(schema), indent=2, sort_keys=True) + "\n"

    def patterns_csv(self) -> str:
        """(mass, delta, divergence) triples for scatter-style plots."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mass", "delta", "divergence"])
        for p in self.patterns:
            writer.writerow([repr(p.mass), repr(p.delta), repr(p.divergence)])
        return buf.getvalue()


def branching_order(model: NaiveBayesModel) -> list[int]:
    """Fixed global order: descending likelihood-ratio spread
    (max_v P(v|d)/P(v|d-bar)) / (min_v ...); large spreads tighten the
    relaxation bounds fastest. Ties break on the feature index."""
    spreads = []
    for i in range(model.schema.n_features):
        r = model._log_ratio[i]
        spreads.append((-(float(r.max()) - float(r.min())), i))
    return [i for _, i in sorted(spreads)]


class _Search:
    def __init__(self, model: NaiveBayesModel, delta: float, mode: str,
                 k: int | None = None, ranking: Ranking | None = None):
        if not 0.0 <= delta <= 1.0:
            raise ValueError("delta must be in [0, 1]")
        self.model = model
        self.delta = delta
        self.mode = mode  # "all" | "topk" | "verify"
        self.k = k
        self.ranking = ranking
        self.schema = model.schema
        self.order = branching_order(model)
        n = len(self.order)

        self.cards = [self.schema.cardinality(v) for v in self.order]
        self.is_sens = [v in self.schema.sensitive for v in self.order]
        self.logp1 = [model._logp[v][1] for v in self.order]
        self.logp0 = [model._logp[v][0] for v in self.order]
        rmax = [float(model._log_ratio[v].max()) for v in self.order]
        rmin = [float(model._log_ratio[v].min()) for v in self.order]
        self.rmax, self.rmin = rmax, rmin

        # suffix sums over positions >= i
        def suffix(vals):
            out = [0.0] * (n + 1)
            for i in range(n - 1, -1, -1):
                out[i] = out[i + 1] + vals[i]
            return out

        self.R_max = suffix(rmax)
        self.R_min = suffix(rmin)
        self.RS_max = suffix([r if s else 0.0 for r, s in zip(rmax, self.is_sens)])
        self.RS_min = suffix([r if s else 0.0 for r, s in zip(rmin, self.is_sens)])
        self.U1 = suffix([float(lp.min()) if s else 0.0 for lp, s in zip(self.logp1, self.is_sens)])
        self.U0 = suffix([float(lp.min()) if s else 0.0 for lp, s in zip(self.logp0, self.is_sens)])
        any_sens = [False] * (n + 1)
        for i in range(n - 1, -1, -1):
            any_sens[i] = any_sens[i + 1] or self.is_sens[i]
        self.any_sens_at = any_sens

        self.visited = 0
        self.pruned = 0
        self.found: list[Pattern] = []          # mode "all"
        self.best: list[tuple[tuple, Pattern]] = []  # mode "topk", sorted best-first
        self.witness: Pattern | None = None     # mode "verify"
        self.stop = False

    # -- scoring and bookkeeping ------------------------------------------

    def _divergence(self, score: float, a: float, b: float, ly1: float, ly0: float) -> float:
        if abs(score) <= self.delta:
            return 0.0
        mass = a + b
        p_y = math.exp(ly1) + math.exp(ly0)
        if p_y - mass <= 0.0:
            return 0.0  # degenerate: x implied by y; unreachable with interior parameters
        inv_span = (p_y - mass) / (mass * p_y)
        target = self.delta if score > self.delta else -self.delta
        return _g_of_r(a, b, (target - score) / inv_span)

    def _record(self, x_items: tuple, y_items: tuple, score: float,
                a: float, b: float, ly1: float, ly0: float) -> None:
        div = self._divergence(score, a, b, ly1, ly0)
        pattern = Pattern(
            x=Assignment(x_items), y=Assignment(y_items),
            delta=score, divergence=div, mass=a + b,
        )
        if self.mode == "all":
            self.found.append(pattern)
            return
        if self.mode == "verify":
            self.witness = pattern
            self.stop = True
            return
        key = (-ranking_score(pattern, self.ranking), pattern.canonical_key)
        entry = (key, pattern)
        if len(self.best) < self.k:
            bisect.insort(self.best, entry)
        elif key < self.best[-1][0]:
            self.best.pop()
            bisect.insort(self.best, entry)

    def _threshold(self) -> float:
        """Current |score| a subtree must be able to beat to stay alive."""
        if self.mode == "topk" and self.ranking == "discrimination" and len(self.best) == self.k:
            return max(self.delta, -self.best[-1][0][0])
        return self.delta

    def _keep(self, i, la, lb, ly1, ly0, ermax, ermin, xrmax, xrmin, has_x) -> bool:
        """Admissible may-contain-improving-pattern test for the subtree."""
        if not (has_x or self.any_sens_at[i]):
            return False
        lo_y = ly1 - ly0
        h_x = la - lb
        gamma_l = expit(lo_y + self.R_min[i])
        gamma_u = expit(lo_y + self.R_max[i])
        h_up = h_x + self.RS_max[i]
        h_lo = h_x + self.RS_min[i]
        bound = disc_bound_core(h_up, h_lo, gamma_l, gamma_u)
        aub = bound.abs_upper()
        if aub <= self.delta + QUALIFY_TOL:
            return False
        if self.mode != "topk" or len(self.best) < self.k:
            return True
        worst = -self.best[-1][0][0]
        if self.ranking == "discrimination":
            return aub >= worst
        q = NodeQuantities(
            a=math.exp(ly1 + la), b=math.exp(ly0 + lb),
            alpha_x=math.exp(la), beta_x=math.exp(lb),
            alpha_lo=math.exp(la + self.U1[i]), beta_lo=math.exp(lb + self.U0[i]),
            h_up=h_up, h_lo=h_lo, gamma_l=gamma_l, gamma_u=gamma_u,
            lo_xy_max=lo_y + h_x + self.R_max[i] + ermax,
            lo_xy_min=lo_y + h_x + self.R_min[i] + ermin,
            lo_y_max_full=lo_y + self.R_max[i] + ermax + xrmax,
            lo_y_min_full=lo_y + self.R_min[i] + ermin + xrmin,
            has_candidate=True,
        )
        div_ub = min(
            fair_point_core(q.a, q.b, q.lo_xy_max, q.lo_xy_min,
                            q.lo_y_max_full, q.lo_y_min_full),
            divergence_delta_core(q, self.delta),
        )
        return div_ub >= worst

    # -- recursion -----------------------------------------------------------

    def run(self):
        self._rec(0, 0.0, 0.0,
                  self.model._log_prior[1], self.model._log_prior[0],
                  0.0, 0.0, 0.0, 0.0, (), ())

    def _rec(self, i, la, lb, ly1, ly0, ermax, ermin, xrmax, xrmin, x_items, y_items):
        if i >= len(self.order) or self.stop:
            return
        var = self.order[i]
        has_x = bool(x_items)
        for val in range(self.cards[i]):
            if self.stop:
                return
            l1 = float(self.logp1[i][val])
            l0 = float(self.logp0[i][val])
            if self.is_sens[i]:
                la2, lb2 = la + l1, lb + l0
                x2 = x_items + ((var, val),)
                score = expit((ly1 + la2) - (ly0 + lb2)) - expit(ly1 - ly0)
                self.visited += 1
                if is_discriminating(score, self.delta):
                    self._record(x2, y_items, score,
                                 math.exp(ly1 + la2), math.exp(ly0 + lb2), ly1, ly0)
                    if self.stop:
                        return
                if self._keep(i + 1, la2, lb2, ly1, ly0, ermax, ermin,
                              xrmax + self.rmax[i], xrmin + self.rmin[i], True):
                    self._rec(i + 1, la2, lb2, ly1, ly0, ermax, ermin,
                              xrmax + self.rmax[i], xrmin + self.rmin[i], x2, y_items)
                else:
                    self.pruned += 1
            ly1b, ly0b = ly1 + l1, ly0 + l0
            y2 = y_items + ((var, val),)
            if has_x:
                score = expit((ly1b + la) - (ly0b + lb)) - expit(ly1b - ly0b)
                self.visited += 1
                if is_discriminating(score, self.delta):
                    self._record(x_items, y2, score,
                                 math.exp(ly1b + la), math.exp(ly0b + lb), ly1b, ly0b)
                    if self.stop:
                        return
            if self._keep(i + 1, la, lb, ly1b, ly0b, ermax, ermin, xrmax, xrmin, has_x):
                self._rec(i + 1, la, lb, ly1b, ly0b, ermax, ermin,
                          xrmax, xrmin, x_items, y2)
            else:
                self.pruned += 1
        # skip the variable: excluded from the whole subtree
        ermax2, ermin2 = ermax + self.rmax[i], ermin + self.rmin[i]
        if self._keep(i + 1, la, lb, ly1, ly0, ermax2, ermin2, xrmax, xrmin, has_x):
            self._rec(i + 1, la, lb, ly1, ly0, ermax2, ermin2, xrmax, xrmin, x_items, y_items)
        else:
            self.pruned += 1

    # -- result assembly ------------------------------------------------------

    def report(self) -> MiningReport:
        if self.mode == "all":
            patterns = tuple(sorted(
                self.found, key=lambda p: (-abs(p.delta), p.canonical_key)))
        elif self.mode == "topk":
            patterns = tuple(p for _, p in self.best)
        else:
            patterns = (self.witness,) if self.witness is not None else ()
        return MiningReport(
            patterns=patterns,
            nodes_visited=self.visited,
            nodes_pruned=self.pruned,
            search_space_size=search_space_size(self.schema),
            certified_fair=not patterns,
            delta=self.delta,
            k=self.k,
            ranking=self.ranking,
            variable_order=tuple(self.schema.features[v].name for v in self.order),
        )


def mine_all(model: NaiveBayesModel, delta: float) -> MiningReport:
    """All patterns with |score| > delta, or a fairness certificate."""
    search = _Search(model, delta, mode="all")
    search.run()
    return search.report()


def mine_topk(model: NaiveBayesModel, delta: float, k: int, ranking: Ranking) -> MiningReport:
    """The k best discriminating patterns under the chosen ranking."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if ranking not in RANKINGS:
        raise ValueError(f"unknown ranking {ranking!r}")
    search = _Search(model, delta, mode="topk", k=k, ranking=ranking)
    search.run()
    return search.report()


def verify_fair(model: NaiveBayesModel, delta: float) -> tuple[bool, Pattern | None]:
    """Certify delta-fairness, or return the first witness pattern found."""
    search = _Search(model, delta, mode="verify", k=1, ranking="discrimination")
    search.run()
    return (search.witness is None, search.witness)


def brute_force_patterns(
    model: NaiveBayesModel, delta: float, cap: int = 10_000_000
) -> list[Pattern]:
    """Exhaustively score every candidate pattern (testing oracle).

    Returns all patterns (not only discriminating ones) in canonical
    enumeration order; divergence is computed at the given delta.
    """
    size = search_space_size(model.schema)
    if size > cap:
        raise SearchSpaceCapError(
            f"pattern space has {size} candidates, above the cap of {cap}"
        )
    schema = model.schema
    out: list[Pattern] = []

    def rec(i, la, lb, ly1, ly0, x_items, y_items):
        if i == schema.n_features:
            if x_items:
                score = expit((ly1 + la) - (ly0 + lb)) - expit(ly1 - ly0)
                a = math.exp(ly1 + la)
                b = math.exp(ly0 + lb)
                if abs(score) > delta:
                    mass = a + b
                    p_y = math.exp(ly1) + math.exp(ly0)
                    inv_span = (p_y - mass) / (mass * p_y)
                    target = delta if score > delta else -delta
                    div = _g_of_r(a, b, (target - score) / inv_span)
                else:
                    div = 0.0
                out.append(Pattern(
                    x=Assignment(x_items), y=Assignment(y_items),
                    delta=score, divergence=div, mass=a + b,
                ))
            return
        rec(i + 1, la, lb, ly1, ly0, x_items, y_items)
        for val in range(schema.cardinality(i)):
            l1 = float(model._logp[i][1, val])
            l0 = float(model._logp[i][0, val])
            if i in schema.sensitive:
                rec(i + 1, la + l1, lb + l0, ly1, ly0, x_items + ((i, val),), y_items)
            rec(i + 1, la, lb, ly1 + l1, ly0 + l0, x_items, y_items + ((i, val),))

    rec(0, 0.0, 0.0, model._log_prior[1], model._log_prior[0], (), ())
    return out
