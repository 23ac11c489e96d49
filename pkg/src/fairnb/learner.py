"""Fairness-constrained maximum-likelihood learning.

A pattern (x, y) is non-discriminating at threshold delta iff two signomial
inequalities over the model parameters hold; ``compile_constraint`` builds
them from the likelihood-ratio monomials

    r_x = prod theta_{x|d-bar} / prod theta_{x|d},
    r_y = (theta_dbar * prod theta_{y|d-bar}) / (theta_d * prod theta_{y|d}).

``learn_fair`` runs the cutting-plane loop: solve the constrained ML
program, mine the worst remaining patterns under the updated parameters,
add their constraints, and repeat until the miner certifies fairness.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, SufficientStatistics, counts as dataset_counts, fit
from .errors import MustSmoothError, SolverError, UnsupportedThresholdError
from .miner import Pattern, Ranking, brute_force_patterns, is_discriminating, mine_topk
from .model import Assignment, NaiveBayesModel, Schema, log_likelihood
from .spsolver import (
    Monomial,
    Signomial,
    SignomialProgram,
    Solution,
    SolverConfig,
    solve,
)

PRIOR_POS = "p(+)"
PRIOR_NEG = "p(-)"


def param_name(schema: Schema, var: int, val: int, decision: int) -> str:
    feature = schema.features[var]
    sign = "+" if decision == 1 else "-"
    return f"p({feature.name}={feature.values[val]}|{sign})"


def param_names(schema: Schema) -> list[str]:
    names = [PRIOR_POS, PRIOR_NEG]
    for var in range(schema.n_features):
        for decision in (1, 0):
            for val in range(schema.cardinality(var)):
                names.append(param_name(schema, var, val, decision))
    return names


def params_from_model(model: NaiveBayesModel) -> dict[str, float]:
    values = {PRIOR_POS: model.prior, PRIOR_NEG: 1.0 - model.prior}
    for var in range(model.schema.n_features):
        for decision in (1, 0):
            for val in range(model.schema.cardinality(var)):
                values[param_name(model.schema, var, val, decision)] = float(
                    model.cpts[var][decision, val]
                )
    return values


def model_from_params(schema: Schema, values: dict[str, float]) -> NaiveBayesModel:
    """Rebuild a model from solver output, renormalizing away residual
    feasibility slack (<= solver eps_feas) so the constructor invariants hold."""
    pd, pn = values[PRIOR_POS], values[PRIOR_NEG]
    cpts = []
    for var in range(schema.n_features):
        rows = []
        for decision in (0, 1):
            row = np.array([
                values[param_name(schema, var, val, decision)]
                for val in range(schema.cardinality(var))
            ])
            rows.append(row / row.sum())
        cpts.append(np.array(rows))
    return NaiveBayesModel(schema=schema, prior=pd / (pd + pn), cpts=tuple(cpts))


# --- constraint compilation ----------------------------------------------------


@dataclass(frozen=True)
class FairnessConstraint:
    x: Assignment
    y: Assignment
    delta: float
    inequalities: tuple[Signomial, Signomial]

    @property
    def key(self) -> tuple:
        return (self.x.items, self.y.items)


def _merge(*exponent_maps: dict[str, float]) -> dict[str, float]:
    out: dict[str, float] = {}
    for exps in exponent_maps:
        for var, e in exps.items():
            out[var] = out.get(var, 0.0) + e
    return {v: e for v, e in out.items() if e != 0.0}


def compile_constraint(
    schema: Schema, x: Assignment, y: Assignment, delta: float
) -> FairnessConstraint:
    """The two signomial inequalities equivalent to |score(x, y)| <= delta."""
    from .model import check_pattern

    check_pattern(schema, x, y)
    if delta <= 0.0:
        raise UnsupportedThresholdError(
            "delta = 0 is not expressible: the 1/delta coefficients are unbounded"
        )
    if delta >= 1.0:
        raise ValueError("delta must be strictly below 1 (the constraint is vacuous)")

    r_x: dict[str, float] = {}
    for var, val in x.items:
        r_x = _merge(r_x, {
            param_name(schema, var, val, 0): 1.0,
            param_name(schema, var, val, 1): -1.0,
        })
    r_y: dict[str, float] = {PRIOR_NEG: 1.0, PRIOR_POS: -1.0}
    for var, val in y.items:
        r_y = _merge(r_y, {
            param_name(schema, var, val, 0): 1.0,
            param_name(schema, var, val, 1): -1.0,
        })

    lo = (1.0 - delta) / delta
    hi = (1.0 + delta) / delta
    rxy = _merge(r_x, r_y)
    rxyy = _merge(r_x, r_y, r_y)
    first = Signomial(((lo, rxy), (-hi, dict(r_y)), (-1.0, rxyy)))
    second = Signomial(((-hi, rxy), (lo, dict(r_y)), (-1.0, rxyy)))
    return FairnessConstraint(x=x, y=y, delta=delta, inequalities=(first, second))


# --- program assembly ----------------------------------------------------------


def _sum_to_one_pair(names: list[str]) -> list[Signomial]:
    return [
        Signomial(tuple((1.0, {n: 1.0}) for n in names)),
        Signomial(((2.0, {}),) + tuple((-1.0, {n: 1.0}) for n in names)),
    ]


def build_program(
    counts: SufficientStatistics,
    constraints: list[FairnessConstraint] = (),
    alpha: float = 0.0,
) -> SignomialProgram:
    """Maximum-likelihood signomial program: a monomial objective with
    exponents -(n_i + alpha), sum-to-one pairs per CPT column, and the
    compiled fairness inequalities."""
    schema = counts.schema
    exponents: dict[str, float] = {}
    dec = np.asarray(counts.decision_counts, dtype=float) + alpha
    if np.any(dec <= 0.0):
        raise MustSmoothError("zero decision counts: set alpha > 0")
    exponents[PRIOR_NEG] = -float(dec[0])
    exponents[PRIOR_POS] = -float(dec[1])
    for var in range(schema.n_features):
        table = np.asarray(counts.feature_counts[var], dtype=float) + alpha
        if np.any(table <= 0.0):
            raise MustSmoothError(
                f"zero counts for feature {schema.features[var].name!r}: set alpha > 0"
            )
        for decision in (0, 1):
            for val in range(schema.cardinality(var)):
                exponents[param_name(schema, var, val, decision)] = -float(
                    table[decision, val]
                )

    inequalities = _sum_to_one_pair([PRIOR_POS, PRIOR_NEG])
    for var in range(schema.n_features):
        for decision in (1, 0):
            inequalities += _sum_to_one_pair([
                param_name(schema, var, val, decision)
                for val in range(schema.cardinality(var))
            ])
    for constraint in constraints:
        inequalities += list(constraint.inequalities)

    return SignomialProgram(
        objective=Monomial(1.0, exponents),
        inequality_constraints=inequalities,
        equality_constraints=[],
        variables={name: (None, 1.0) for name in param_names(schema)},
    )


# --- independence baseline ------------------------------------------------------


def independent_baseline(counts: SufficientStatistics, alpha: float = 0.0) -> NaiveBayesModel:
    """Max-likelihood parameters with every sensitive feature forced
    independent of the decision (its CPT rows become the smoothed marginal)."""
    schema = counts.schema
    base = fit(counts, alpha)
    cpts = list(base.cpts)
    for var in sorted(schema.sensitive):
        table = np.asarray(counts.feature_counts[var], dtype=float)
        marginal = table.sum(axis=0) + alpha
        if np.any(marginal <= 0.0):
            raise MustSmoothError(
                f"zero marginal counts for {schema.features[var].name!r}: set alpha > 0"
            )
        marginal = marginal / marginal.sum()
        cpts[var] = np.array([marginal, marginal])
    return NaiveBayesModel(schema=schema, prior=base.prior, cpts=tuple(cpts))


# --- cutting-plane loop ----------------------------------------------------------


@dataclass
class LearnConfig:
    alpha: float = 1.0
    max_outer_iterations: int = 100
    solver: SolverConfig = field(default_factory=SolverConfig)
    track_remaining: bool = False  # brute-force priced; small schemas only
    remaining_cap: int = 1_000_000


@dataclass
class LearnReport:
    model: NaiveBayesModel
    iterations: int
    constraints_added: int
    log_likelihood_trace: list[float]
    remaining_patterns_trace: list[int] | None
    fair: bool
    constraint_patterns: tuple[tuple, ...]
    wall_times: list[float] = field(default_factory=list)  # not serialized

    def to_json_dict(self) -> dict:
        schema = self.model.schema
        return {
            "fair": self.fair,
            "iterations": self.iterations,
            "constraints_added": self.constraints_added,
            "log_likelihood_trace": self.log_likelihood_trace,
            "remaining_patterns_trace": self.remaining_patterns_trace,
            "constraint_patterns": [
                {
                    "x": schema.describe(Assignment(x_items)),
                    "y": schema.describe(Assignment(y_items)),
                }
                for x_items, y_items in self.constraint_patterns
            ],
            "model": self.model.to_json_dict(),
        }


def _count_remaining(model: NaiveBayesModel, delta: float, cap: int) -> int:
    patterns = brute_force_patterns(model, delta, cap=cap)
    return sum(1 for p in patterns if is_discriminating(p.delta, delta))


def learn_fair(
    dataset: Dataset,
    delta: float,
    k: int = 1,
    ranking: Ranking = "discrimination",
    config: LearnConfig | None = None,
) -> LearnReport:
    """Alternate constrained ML solving and pattern mining until the miner
    finds no discrimination pattern. Constraints accumulate and are never
    removed; solves warm-start at the previous parameters."""
    cfg = config or LearnConfig()
    if delta <= 0.0:
        raise UnsupportedThresholdError("learning requires delta > 0")
    if delta >= 1.0:
        raise ValueError("delta must be strictly below 1")
    cnt = dataset_counts(dataset)
    schema = dataset.schema
    model = fit(cnt, cfg.alpha)

    constraints: list[FairnessConstraint] = []
    seen: set[tuple] = set()
    ll_trace = [log_likelihood(model, cnt)]
    remaining = [_count_remaining(model, delta, cfg.remaining_cap)] if cfg.track_remaining else None
    wall: list[float] = []
    eps_feas = cfg.solver.eps_feas
    fair = False
    iterations = 0

    for _ in range(cfg.max_outer_iterations):
        start = time.perf_counter()
        iterations += 1
        report = mine_topk(model, delta, k, ranking)
        if not report.patterns:
            fair = True
            wall.append(time.perf_counter() - start)
            break
        fresh = [p for p in report.patterns if p.canonical_key not in seen]
        if not fresh:
            # numerical tie at the feasibility boundary: re-solve tighter
            eps_feas *= 0.1
        for p in fresh:
            seen.add(p.canonical_key)
            constraints.append(compile_constraint(schema, p.x, p.y, delta))

        program = build_program(cnt, constraints, alpha=cfg.alpha)
        solver_cfg = SolverConfig(
            eps_feas=eps_feas,
            eps_step=cfg.solver.eps_step,
            max_outer=cfg.solver.max_outer,
            trust_radius=cfg.solver.trust_radius,
        )
        solution = solve(program, params_from_model(model), solver_cfg)
        if solution.status == "infeasible-at-tolerance" or (
            solution.max_violation > 10.0 * max(eps_feas, cfg.solver.eps_feas)
        ):
            active = [c.key for c in constraints]
            raise SolverError(
                f"constrained ML solve failed ({solution.status}, violation "
                f"{solution.max_violation:.2e}) with constraints {active}"
            )
        model = model_from_params(schema, solution.values)
        ll_trace.append(log_likelihood(model, cnt))
        if remaining is not None:
            remaining.append(_count_remaining(model, delta, cfg.remaining_cap))
        wall.append(time.perf_counter() - start)

    return LearnReport(
        model=model,
        iterations=iterations,
        constraints_added=len(constraints),
        log_likelihood_trace=ll_trace,
        remaining_patterns_trace=remaining,
        fair=fair,
        constraint_patterns=tuple(c.key for c in constraints),
        wall_times=wall,
    )
