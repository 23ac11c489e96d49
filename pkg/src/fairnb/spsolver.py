"""Local solver for signomial programs: minimize a monomial subject to
signomial <= 1 and monomial = 1 constraints over positive variables.

Method: successive convexification in log-space. With u = log x, monomials
are affine and posynomials become log-sum-exp. Each signomial constraint
p(x) - q(x) <= 1 is condensed by replacing the posynomial 1 + q(x) with its
arithmetic-geometric-mean monomial at the current iterate, giving a
geometric program solved by damped Newton on a log-barrier with a
decreasing barrier parameter (mu: 1.0, x0.2 per stage). A trust box on the
log variables keeps the condensation honest; steps are accepted only when
the true program improves.

Sum-to-one idiom: a pair (h <= 1, 2 - h <= 1) encodes the posynomial
equality h = 1, on which every feasible point is active, so a barrier has
no strict interior there. The solver detects such pairs and carries them as
equality rows of the Newton KKT system (condensed to affine in log-space),
re-projecting simplex groups after every outer step. Because the condensed
subproblems are otherwise affine in log-space, the inner objective also
carries the multiplier-weighted curvature of those equalities; this leaves
fixpoints unchanged and restores Newton-like convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInitError, ProgramSchemaError


# --- expression types ---------------------------------------------------------


def _clean_exponents(exponents: Mapping[str, float]) -> dict[str, float]:
    return {v: float(e) for v, e in exponents.items() if float(e) != 0.0}


@dataclass(frozen=True)
class Monomial:
    """c * x1^a1 * ... with c > 0."""

    coefficient: float
    exponents: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.coefficient > 0.0 and math.isfinite(self.coefficient)):
            raise ValueError(f"monomial coefficient must be positive, got {self.coefficient}")
        object.__setattr__(self, "exponents", _clean_exponents(self.exponents))

    def log_value(self, values: Mapping[str, float]) -> float:
        total = math.log(self.coefficient)
        for var, exp in self.exponents.items():
            total += exp * math.log(_lookup(values, var))
        return total

    def as_signomial(self) -> "Signomial":
        return Signomial(((self.coefficient, dict(self.exponents)),))


@dataclass(frozen=True)
class Signomial:
    """Sum of signed monomial terms: ((coefficient, exponents), ...)."""

    terms: tuple[tuple[float, dict[str, float]], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a signomial needs at least one term")
        cleaned = []
        for coef, exps in self.terms:
            coef = float(coef)
            if coef == 0.0 or not math.isfinite(coef):
                raise ValueError(f"signomial coefficient must be finite nonzero, got {coef}")
            cleaned.append((coef, _clean_exponents(exps)))
        object.__setattr__(self, "terms", tuple(cleaned))

    def value(self, values: Mapping[str, float]) -> float:
        total = 0.0
        for coef, exps in self.terms:
            log_mag = math.log(abs(coef))
            for var, exp in exps.items():
                log_mag += exp * math.log(_lookup(values, var))
            total += math.copysign(math.exp(log_mag), coef)
        return total

    def variables(self) -> set[str]:
        out: set[str] = set()
        for _, exps in self.terms:
            out.update(exps)
        return out


def _lookup(values: Mapping[str, float], var: str) -> float:
    try:
        value = values[var]
    except KeyError:
        raise ProgramSchemaError(f"no value for variable {var!r}") from None
    if not value > 0.0:
        raise ValueError(f"variable {var!r} must be positive, got {value}")
    return value


def evaluate(expr: Monomial | Signomial, values: Mapping[str, float]) -> float:
    """Evaluate a monomial or signomial at a positive point (log-space per
    term; enormous monomials may overflow to inf)."""
    if isinstance(expr, Monomial):
        return math.exp(expr.log_value(values))
    return expr.value(values)


@dataclass
class SignomialProgram:
    """minimize objective, s.t. each inequality <= 1 and each equality = 1.

    ``variables`` maps every variable name to optional (lower, upper) box
    bounds; use None for an unbounded side. All variables are positive.
    """

    objective: Monomial
    inequality_constraints: list[Signomial] = field(default_factory=list)
    equality_constraints: list[Monomial] = field(default_factory=list)
    variables: dict[str, tuple[float | None, float | None]] = field(default_factory=dict)

    def __post_init__(self):
        declared = set(self.variables)
        used = set(self.objective.exponents)
        for s in self.inequality_constraints:
            used |= s.variables()
        for m in self.equality_constraints:
            used |= set(m.exponents)
        undeclared = used - declared
        if undeclared:
            raise ProgramSchemaError(f"undeclared variables: {sorted(undeclared)}")

    def dump(self) -> str:
        """Plain-text form, one line per constraint, for cross-checking."""

        def fmt_terms(terms):
            parts = []
            for coef, exps in terms:
                body = "*".join(f"{v}^{e:g}" for v, e in sorted(exps.items()))
                parts.append(f"{coef:+g}" + (f"*{body}" if body else ""))
            return " ".join(parts)

        lines = [f"min {fmt_terms([(self.objective.coefficient, self.objective.exponents)])}"]
        for s in self.inequality_constraints:
            lines.append(f"{fmt_terms(s.terms)} <= 1")
        for m in self.equality_constraints:
            lines.append(f"{fmt_terms([(m.coefficient, m.exponents)])} == 1")
        for v, (lb, ub) in sorted(self.variables.items()):
            lines.append(f"var {v} in ({lb if lb is not None else 0}, {ub if ub is not None else 'inf'})")
        return "\n".join(lines) + "\n"


@dataclass
class SolverConfig:
    eps_feas: float = 1e-6
    eps_step: float = 1e-8
    max_outer: int = 200
    trust_radius: float = 1.0


@dataclass
class Solution:
    values: dict[str, float]
    objective: float
    objective_log: float
    max_violation: float
    iterations: int
    status: str  # converged | iteration-limit | infeasible-at-tolerance
    objective_log_trace: list[float] = field(default_factory=list)


# --- condensed constraint pieces (functions of the step d = u - u0) -----------


class _AffineCon:
    """g(z) = g @ z + g0 <= 0."""

    __slots__ = ("g", "g0")

    def __init__(self, g: np.ndarray, g0: float):
        self.g = g
        self.g0 = g0

    def value(self, z):
        return float(self.g @ z + self.g0)

    def grad(self, z):
        return self.g

    def hess(self, z):
        return None


class _LseCon:
    """g(z) = log sum exp(b + A z) - (g @ z + g0) <= 0."""

    __slots__ = ("A", "b", "g", "g0")

    def __init__(self, A: np.ndarray, b: np.ndarray, g: np.ndarray, g0: float):
        self.A = A
        self.b = b
        self.g = g
        self.g0 = g0

    def _softmax(self, z):
        e = self.b + self.A @ z
        m = e.max()
        w = np.exp(e - m)
        s = w.sum()
        return w / s, m + math.log(s)

    def value(self, z):
        _, lse = self._softmax(z)
        return float(lse - (self.g @ z + self.g0))

    def grad(self, z):
        w, _ = self._softmax(z)
        return self.A.T @ w - self.g

    def hess(self, z):
        w, _ = self._softmax(z)
        Aw = self.A.T * w
        mean = self.A.T @ w
        return Aw @ self.A - np.outer(mean, mean)


# --- canonical program --------------------------------------------------------


def _term_key(terms) -> tuple:
    return tuple(sorted((coef, tuple(sorted(exps.items()))) for coef, exps in terms))


@dataclass
class _Canonical:
    names: list[str]
    c_obj: np.ndarray          # objective exponents (unscaled)
    obj_logcoef: float
    posy_eqs: list[tuple[np.ndarray, np.ndarray]]  # (log coefs, exponent matrix), h = 1
    simplex_groups: list[np.ndarray]               # posy-eqs that are plain variable sums
    mono_eqs: list[tuple[np.ndarray, float]]       # a @ u + b = 0
    ineqs: list[tuple[str, tuple]]                 # ("posy", (logc, A)) | ("sig", pos, neg)
    box_rows: list[tuple[np.ndarray, float]]       # g @ u + g0 <= 0


def _matrix(terms, index: dict[str, int], absval=False):
    logc = np.empty(len(terms))
    A = np.zeros((len(terms), len(index)))
    for k, (coef, exps) in enumerate(terms):
        logc[k] = math.log(abs(coef) if absval else coef)
        for var, exp in exps.items():
            A[k, index[var]] = exp
    return logc, A


def _canonicalize(program: SignomialProgram) -> _Canonical:
    names = list(program.variables)
    index = {v: i for i, v in enumerate(names)}
    n = len(names)

    c_obj = np.zeros(n)
    for var, exp in program.objective.exponents.items():
        c_obj[index[var]] = exp

    posynomials = {}  # term key -> list position, for pair detection
    anti = []  # (position, K, abs-term payload)
    others = []
    for pos, s in enumerate(program.inequality_constraints):
        positive = [(c, e) for c, e in s.terms if c > 0]
        negative = [(-c, e) for c, e in s.terms if c < 0]
        if not negative:
            posynomials.setdefault(_term_key(s.terms), []).append(pos)
        elif len(positive) == 1 and not positive[0][1] and positive[0][0] == 2.0:
            anti.append((pos, negative))
        else:
            others.append(pos)

    paired_posy: set[int] = set()
    paired_anti: set[int] = set()
    posy_eq_terms = []
    for pos, payload in anti:
        key = _term_key(payload)
        stack = posynomials.get(key)
        if stack:
            partner = stack.pop()
            paired_posy.add(partner)
            paired_anti.add(pos)
            posy_eq_terms.append(payload)
        else:
            others.append(pos)

    posy_eqs = []
    simplex_groups = []
    for terms in posy_eq_terms:
        logc, A = _matrix(terms, index)
        posy_eqs.append((logc, A))
        is_simplex = all(
            coef == 1.0 and len(exps) == 1 and next(iter(exps.values())) == 1.0
            for coef, exps in terms
        )
        if is_simplex:
            cols = [index[next(iter(exps))] for _, exps in terms]
            if len(set(cols)) == len(cols):
                simplex_groups.append(np.array(cols, dtype=int))

    ineqs = []
    for key, stack in posynomials.items():
        for pos in stack:
            if pos in paired_posy:
                continue
            s = program.inequality_constraints[pos]
            ineqs.append(("posy", _matrix(s.terms, index)))
    for pos in sorted(others + [p for p, _ in anti if p not in paired_anti]):
        s = program.inequality_constraints[pos]
        positive = [(c, e) for c, e in s.terms if c > 0]
        negative = [(-c, e) for c, e in s.terms if c < 0]
        if not positive:
            continue  # -q(x) <= 1 holds for every positive x
        ineqs.append(("sig", _matrix(positive, index), _matrix(negative, index)))

    mono_eqs = []
    for m in program.equality_constraints:
        a = np.zeros(n)
        for var, exp in m.exponents.items():
            a[index[var]] = exp
        mono_eqs.append((a, math.log(m.coefficient)))

    box_rows = []
    for var, (lb, ub) in program.variables.items():
        i = index[var]
        if ub is not None:
            row = np.zeros(n)
            row[i] = 1.0
            box_rows.append((row, -math.log(ub)))
        if lb is not None and lb > 0.0:
            row = np.zeros(n)
            row[i] = -1.0
            box_rows.append((row, math.log(lb)))

    return _Canonical(
        names=names,
        c_obj=c_obj,
        obj_logcoef=math.log(program.objective.coefficient),
        posy_eqs=posy_eqs,
        simplex_groups=simplex_groups,
        mono_eqs=mono_eqs,
        ineqs=ineqs,
        box_rows=box_rows,
    )


# --- true-program metrics -----------------------------------------------------


def _true_violation(program: SignomialProgram, values: dict[str, float]) -> float:
    worst = 0.0
    for s in program.inequality_constraints:
        worst = max(worst, s.value(values) - 1.0)
    for m in program.equality_constraints:
        worst = max(worst, abs(math.exp(m.log_value(values)) - 1.0))
    for var, (lb, ub) in program.variables.items():
        x = values[var]
        if ub is not None:
            worst = max(worst, x - ub)
        if lb is not None:
            worst = max(worst, lb - x)
    return worst


# --- inner equality-constrained barrier Newton --------------------------------


class _ConstraintSet:
    """Affine rows batched into one matrix, plus any log-sum-exp pieces."""

    def __init__(self, G: np.ndarray, h: np.ndarray, lse: Sequence[_LseCon]):
        self.G = G
        self.h = h
        self.lse = list(lse)

    @classmethod
    def from_cons(cls, cons, n):
        rows, offs, lse = [], [], []
        for con in cons:
            if isinstance(con, _AffineCon):
                rows.append(con.g)
                offs.append(con.g0)
            else:
                lse.append(con)
        G = np.array(rows) if rows else np.zeros((0, n))
        return cls(G, np.array(offs), lse)

    def __len__(self):
        return self.G.shape[0] + len(self.lse)

    def values(self, z):
        vals = self.G @ z + self.h
        if self.lse:
            vals = np.concatenate([vals, [con.value(z) for con in self.lse]])
        return vals

    def strictly_feasible(self, z, margin=0.0):
        return bool(np.all(self.values(z) < -margin))

    def barrier_terms(self, z, vals):
        """(gradient, Hessian) of -sum log(-g_i) at z."""
        na = self.G.shape[0]
        va = vals[:na]
        grad = self.G.T @ (-1.0 / va)
        scaled = self.G / va[:, None]
        H = scaled.T @ scaled
        for con, v in zip(self.lse, vals[na:]):
            g = con.grad(z)
            grad += g / (-v)
            H += np.outer(g, g) / (v * v) + con.hess(z) / (-v)
        return grad, H


def _newton_barrier(c, Q, conset: _ConstraintSet, A_eq, b_eq, z0, *,
                    mu_init=1.0, mu_factor=0.2, gap_tol=1e-9, early_exit=None):
    """min c@z + 0.5 z'Qz - mu * sum log(-g_i(z)) s.t. A_eq z = b_eq,
    following the central path as mu shrinks (x0.2 per stage).

    Returns (z, eq_multipliers). ``early_exit`` may stop the stage loop
    once a goal is reached (used by phase 1).
    """
    z = z0.copy()
    n = z.size
    m_eq = A_eq.shape[0]
    mu = mu_init
    n_cons = max(len(conset), 1)
    mu_min = gap_tol / n_cons
    nu_out = np.zeros(m_eq)
    eye = np.eye(n)

    def phi(zz):
        vv = conset.values(zz)
        if np.any(vv >= 0.0):
            return math.inf
        return float(c @ zz + 0.5 * zz @ Q @ zz - mu * np.log(-vv).sum())

    while True:  # barrier stages
        for _ in range(40):  # damped Newton, warm-started on the path
            vals = conset.values(z)
            if np.any(vals >= 0.0):  # lost interiority: bail to caller
                return z, nu_out
            bgrad, bH = conset.barrier_terms(z, vals)
            grad = c + Q @ z + mu * bgrad
            H = Q + mu * bH
            kkt = np.zeros((n + m_eq, n + m_eq))
            kkt[:n, :n] = H
            if m_eq:
                kkt[:n, n:] = A_eq.T
                kkt[n:, :n] = A_eq
            rhs = np.concatenate([-grad, b_eq - A_eq @ z])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                kkt[:n, :n] += 1e-10 * eye
                sol = np.linalg.solve(kkt, rhs)
            step = sol[:n]
            nu_out = sol[n:]
            decrement = float(-grad @ step)
            eq_res = float(np.linalg.norm(b_eq - A_eq @ z)) if m_eq else 0.0
            base = phi(z)
            if decrement / 2.0 <= 1e-12 * (1.0 + abs(base)) and eq_res <= 1e-12:
                break
            alpha = 1.0
            improved = False
            for _ in range(40):
                trial = phi(z + alpha * step)
                if trial <= base - 0.25 * alpha * decrement + 1e-14 * (1.0 + abs(base)):
                    improved = True
                    break
                alpha *= 0.5
            if not improved:
                break
            z = z + alpha * step
        if early_exit is not None and early_exit(z):
            return z, nu_out
        if mu <= mu_min:
            return z, nu_out
        mu = max(mu * mu_factor, mu_min)


# --- the outer successive-condensation loop ------------------------------------


def _condense_posy_eq(logc, A, u0):
    """AGM weights at u0: returns (row, rhs, weights, value at u0)."""
    e = logc + A @ u0
    m = e.max()
    w = np.exp(e - m)
    w /= w.sum()
    row = A.T @ w
    val0 = m + math.log(np.exp(e - m).sum())
    # condensed equality: row @ (u - u0) = -val0
    return row, val0, w


def _build_inner(canon: _Canonical, u0: np.ndarray, trust: float):
    """Condense everything at u0; constraint pieces act on z = u - u0."""
    n = u0.size
    rows, rhs = [], []
    curvature = []
    for logc, A in canon.posy_eqs:
        row, val0, w = _condense_posy_eq(logc, A, u0)
        rows.append(row)
        rhs.append(-val0)
        Aw = A.T * w
        mean = A.T @ w
        curvature.append(Aw @ A - np.outer(mean, mean))
    for a, b in canon.mono_eqs:
        rows.append(a)
        rhs.append(-(a @ u0 + b))
    A_eq = np.array(rows) if rows else np.zeros((0, n))
    b_eq = np.array(rhs) if rhs else np.zeros(0)

    cons: list = []
    for kind, *payload in canon.ineqs:
        if kind == "posy":
            logc, A = payload[0]
            if len(logc) == 1:  # single monomial <= 1 is affine in log-space
                cons.append(_AffineCon(A[0].copy(), float(logc[0] + A[0] @ u0)))
            else:
                cons.append(_LseCon(A, logc + A @ u0, np.zeros(n), 0.0))
        else:
            (plogc, pA), (nlogc, nA) = payload
            # denominator posynomial 1 + q condensed to a monomial at u0
            den_logc = np.concatenate([[0.0], nlogc])
            den_A = np.vstack([np.zeros(n), nA])
            e = den_logc + den_A @ u0
            m = e.max()
            w = np.exp(e - m)
            w /= w.sum()
            den_row = den_A.T @ w
            den_val0 = m + math.log(np.exp(e - m).sum())
            if len(plogc) == 1:  # monomial / condensed-monomial: affine
                cons.append(_AffineCon(
                    pA[0] - den_row, float(plogc[0] + pA[0] @ u0 - den_val0)
                ))
            else:
                cons.append(_LseCon(pA, plogc + pA @ u0, den_row, den_val0))
    for g, g0 in canon.box_rows:
        cons.append(_AffineCon(g, g0 + g @ u0))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cons.append(_AffineCon(e, -trust))
        cons.append(_AffineCon(-e, -trust))
    return cons, A_eq, b_eq, curvature


def _project_simplex(canon: _Canonical, x: np.ndarray) -> np.ndarray:
    out = x.copy()
    for cols in canon.simplex_groups:
        s = out[cols].sum()
        if s > 0.0:
            out[cols] /= s
    return out


def solve(
    program: SignomialProgram,
    init: Mapping[str, float],
    config: SolverConfig | None = None,
) -> Solution:
    """Find a locally optimal point of the program from a positive start.

    The start must satisfy equality constraints loosely (1e-3); simplex
    groups are projected exactly before the loop. Feasible starts yield a
    nonincreasing objective trace.
    """
    config = config or SolverConfig()
    canon = _canonicalize(program)
    n = len(canon.names)
    x = np.empty(n)
    for i, name in enumerate(canon.names):
        if name not in init:
            raise InvalidInitError(f"init missing variable {name!r}")
        v = float(init[name])
        if not (v > 0.0 and math.isfinite(v)):
            raise InvalidInitError(f"init for {name!r} must be strictly positive, got {v}")
        x[i] = v
    x = _project_simplex(canon, x)
    values = dict(zip(canon.names, x))
    for logc, A in canon.posy_eqs:
        u = np.log(x)
        e = logc + A @ u
        res = abs(math.expm1(float(np.logaddexp.reduce(e))))
        if res > 1e-3:
            raise InvalidInitError(f"init violates an equality constraint by {res:.2e}")
    for a, b in canon.mono_eqs:
        res = abs(math.expm1(float(a @ np.log(x) + b)))
        if res > 1e-3:
            raise InvalidInitError(f"init violates an equality constraint by {res:.2e}")

    obj_scale = max(1.0, float(np.abs(canon.c_obj).max())) if canon.c_obj.size else 1.0
    c_s = canon.c_obj / obj_scale

    def log_obj(xx):
        return canon.obj_logcoef + float(canon.c_obj @ np.log(xx))

    viol = _true_violation(program, values)
    trace = [log_obj(x)]
    trust = config.trust_radius
    nu_est: np.ndarray | None = None
    status = "iteration-limit"
    iterations = 0

    for outer in range(config.max_outer):
        iterations = outer + 1
        u0 = np.log(x)
        cons, A_eq, b_eq, curvature = _build_inner(canon, u0, trust)
        n_peq = len(canon.posy_eqs)
        if A_eq.shape[0]:
            if nu_est is None or nu_est.size != A_eq.shape[0]:
                nu_est, *_ = np.linalg.lstsq(A_eq.T, -c_s, rcond=None)
            lagr = sum(
                abs(float(nu_est[j])) * curvature[j] for j in range(n_peq)
            ) if n_peq else np.zeros((n, n))
        else:
            lagr = np.zeros((n, n))
        Q = np.asarray(lagr) + 1e-9 * np.eye(n)

        conset = _ConstraintSet.from_cons(cons, n)
        z0 = np.zeros(n)
        if A_eq.shape[0] and float(np.linalg.norm(b_eq)) > 1e-12:
            z0, *_ = np.linalg.lstsq(A_eq, b_eq, rcond=None)
        interior = conset.strictly_feasible(z0, margin=1e-12)
        restoration_only = False
        if not interior:
            z0, interior = _phase1(conset, A_eq, b_eq, z0, n)
            restoration_only = not interior

        if restoration_only:
            z = z0  # best condensed-violation point inside the trust box
        else:
            z, nu = _newton_barrier(c_s, Q, conset, A_eq, b_eq, z0)
            if A_eq.shape[0]:
                nu_est = nu

        cand = _project_simplex(canon, np.exp(u0 + z))
        cand_values = dict(zip(canon.names, cand))
        cand_viol = _true_violation(program, cand_values)
        cand_obj = log_obj(cand)

        accept = False
        if viol > config.eps_feas:
            accept = cand_viol < viol - 1e-12 or cand_viol <= config.eps_feas
        else:
            accept = cand_viol <= config.eps_feas and cand_obj <= trace[-1] + 1e-12
        if accept:
            step = float(np.abs(np.log(cand) - u0).max())
            x = cand
            values = cand_values
            viol = cand_viol
            trace.append(cand_obj)
            trust = min(config.trust_radius, trust * 1.5)
            if step <= config.eps_step and viol <= config.eps_feas:
                status = "converged"
                break
        else:
            trust *= 0.5
            if trust < 1e-10:
                if viol <= config.eps_feas:
                    status = "converged"
                else:
                    status = "infeasible-at-tolerance"
                break

    lo = log_obj(x)
    return Solution(
        values=dict(zip(canon.names, (float(v) for v in x))),
        objective=math.exp(lo) if lo < 700 else math.inf,
        objective_log=lo,
        max_violation=viol,
        iterations=iterations,
        status=status,
        objective_log_trace=trace,
    )


def _phase1(conset: _ConstraintSet, A_eq, b_eq, z0, n):
    """Minimize the max condensed-constraint violation inside the trust box.

    Returns (point, strictly_feasible). Axis rows (trust box, variable
    bounds) already satisfied at z0 stay hard; every other inequality is
    relaxed by a shared slack s that is then minimized.
    """
    vals0 = conset.values(z0)
    s0 = float(vals0.max()) + 1.0

    na = conset.G.shape[0]
    absG = np.abs(conset.G)
    axis = ((absG > 0).sum(axis=1) == 1) & (absG.max(axis=1, initial=0.0) == 1.0)
    hard = axis & (vals0[:na] < -1e-12)
    slack_col = np.where(hard, 0.0, -1.0)
    G_ext = np.hstack([conset.G, slack_col[:, None]])
    h_ext = conset.h.copy()
    # keep s bounded below so the barrier problem stays well-posed
    bound = np.zeros(n + 1)
    bound[n] = -1.0
    G_ext = np.vstack([G_ext, bound])
    h_ext = np.concatenate([h_ext, [-(abs(s0) + 10.0)]])
    lse_ext = [
        _LseCon(
            np.hstack([con.A, np.zeros((con.A.shape[0], 1))]),
            con.b,
            np.concatenate([con.g, [1.0]]),
            con.g0,
        )
        for con in conset.lse
    ]
    ext = _ConstraintSet(G_ext, h_ext, lse_ext)
    ext0 = np.concatenate([z0, [s0]])
    A_ext = np.hstack([A_eq, np.zeros((A_eq.shape[0], 1))]) if A_eq.shape[0] else np.zeros((0, n + 1))
    c_ext = np.zeros(n + 1)
    c_ext[n] = 1.0
    Q_ext = 1e-9 * np.eye(n + 1)

    def early(zz):
        return zz[n] < -1e-9

    z, _ = _newton_barrier(
        c_ext, Q_ext, ext, A_ext, b_eq, ext0, gap_tol=1e-9, early_exit=early
    )
    d = z[:n]
    return d, conset.strictly_feasible(d)
