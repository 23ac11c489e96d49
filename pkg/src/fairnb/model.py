"""Naive Bayes model over a binary decision and categorical features.

The decision variable D is binary; every feature Z gets one conditional
distribution per decision value. All probabilistic queries are answered in
log-space and exponentiated once at the end, so products over many features
cannot underflow. Parameters are required to be strictly inside (0, 1);
models fitted from data are Laplace-smoothed upstream, so this is not a
practical restriction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionError, InvalidPatternError, InvalidQueryError

PROB_ATOL = 1e-9  # tolerance for sum-to-one checks at construction


def expit(t: float) -> float:
    """Numerically stable logistic 1 / (1 + exp(-t))."""
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


@dataclass(frozen=True)
class Feature:
    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError(f"feature {self.name!r} needs at least 2 values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"feature {self.name!r} has duplicate value labels")

    @property
    def cardinality(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Schema:
    """Variable layout: features indexed 0..F-1, plus the binary decision.

    ``sensitive`` holds feature indices; the decision variable is separate
    and can never be sensitive or appear in an evidence assignment.
    """

    features: tuple[Feature, ...]
    sensitive: frozenset[int]
    decision_name: str = "D"
    decision_values: tuple[str, str] = ("0", "1")  # (negative, positive)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "sensitive", frozenset(self.sensitive))
        names = [f.name for f in self.features] + [self.decision_name]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if not all(0 <= i < len(self.features) for i in self.sensitive):
            raise ValueError("sensitive indices out of range")
        if len(self.decision_values) != 2 or self.decision_values[0] == self.decision_values[1]:
            raise ValueError("decision variable must have two distinct values")

    @property
    def n_features(self) -> int:
        return len(self.features)

    def cardinality(self, var: int) -> int:
        return self.features[var].cardinality

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise InvalidQueryError(f"unknown variable {name!r}")

    def assignment(self, bindings: Mapping[str, str]) -> "Assignment":
        """Build an Assignment from {name: value label} pairs."""
        pairs = []
        for name, label in bindings.items():
            if name == self.decision_name:
                raise InvalidQueryError("the decision variable cannot appear in evidence")
            var = self.index(name)
            try:
                val = self.features[var].values.index(label)
            except ValueError:
                raise InvalidQueryError(
                    f"value {label!r} not in the domain of {name!r}"
                ) from None
            pairs.append((var, val))
        return Assignment.from_pairs(pairs)

    def describe(self, assignment: "Assignment") -> dict[str, str]:
        """Inverse of :meth:`assignment`: {name: value label}."""
        return {
            self.features[var].name: self.features[var].values[val]
            for var, val in assignment.items
        }

    def to_json_dict(self) -> dict:
        return {
            "decision": {
                "name": self.decision_name,
                "negative": self.decision_values[0],
                "positive": self.decision_values[1],
            },
            "features": [
                {"name": f.name, "values": list(f.values), "sensitive": i in self.sensitive}
                for i, f in enumerate(self.features)
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Schema":
        features = tuple(
            Feature(name=f["name"], values=tuple(f["values"])) for f in doc["features"]
        )
        sensitive = frozenset(i for i, f in enumerate(doc["features"]) if f.get("sensitive"))
        dec = doc["decision"]
        return cls(
            features=features,
            sensitive=sensitive,
            decision_name=dec["name"],
            decision_values=(dec["negative"], dec["positive"]),
        )


@dataclass(frozen=True, order=True)
class Assignment:
    """Immutable partial assignment: sorted (feature index, value index) pairs."""

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted(self.items))
        vars_ = [v for v, _ in items]
        if len(set(vars_)) != len(vars_):
            raise InvalidPatternError(f"variable bound twice in {items}")
        object.__setattr__(self, "items", items)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "Assignment":
        return cls(tuple(pairs))

    @property
    def vars(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.items)

    def get(self, var: int) -> int | None:
        for v, val in self.items:
            if v == var:
                return val
        return None

    def union(self, other: "Assignment") -> "Assignment":
        return Assignment(self.items + other.items)

    def __len__(self) -> int:
        return len(self.items)

    def __bool__(self) -> bool:
        return bool(self.items)


EMPTY = Assignment()


def _check_evidence(schema: Schema, evidence: Assignment) -> None:
    for var, val in evidence.items:
        if not 0 <= var < schema.n_features:
            raise InvalidQueryError(f"variable index {var} out of range")
        if not 0 <= val < schema.cardinality(var):
            raise InvalidQueryError(
                f"value index {val} out of domain of {schema.features[var].name!r}"
            )


def check_pattern(schema: Schema, x: Assignment, y: Assignment) -> None:
    """Validate the structural preconditions of a pattern (x, y)."""
    _check_evidence(schema, x)
    _check_evidence(schema, y)
    if not x:
        raise InvalidPatternError("x must bind at least one sensitive variable")
    if x.vars & y.vars:
        raise InvalidPatternError(f"x and y overlap on variables {sorted(x.vars & y.vars)}")
    nonsens = x.vars - schema.sensitive
    if nonsens:
        raise InvalidPatternError(f"x binds non-sensitive variables {sorted(nonsens)}")


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """Parameters of the network: decision prior and one CPT per feature.

    ``cpts[f]`` has shape (2, cardinality); row 1 conditions on the positive
    decision, row 0 on the negative one. Rows must sum to one (1e-9) and all
    entries must lie strictly in (0, 1).
    """

    schema: Schema
    prior: float
    cpts: tuple[np.ndarray, ...]
    _logp: tuple[np.ndarray, ...] = field(init=False, repr=False)
    _log_prior: np.ndarray = field(init=False, repr=False)
    _log_ratio: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.prior < 1.0:
            raise ValueError(f"prior must be in (0, 1), got {self.prior}")
        if len(self.cpts) != self.schema.n_features:
            raise DimensionError(
                f"{len(self.cpts)} CPTs for {self.schema.n_features} features"
            )
        frozen = []
        for i, cpt in enumerate(self.cpts):
            arr = np.asarray(cpt, dtype=float).copy()
            if arr.shape != (2, self.schema.cardinality(i)):
                raise DimensionError(
                    f"CPT shape {arr.shape} for feature {self.schema.features[i].name!r}"
                )
            if np.any(arr <= 0.0) or np.any(arr >= 1.0):
                raise ValueError(
                    f"parameters of {self.schema.features[i].name!r} must be in (0, 1)"
                )
            sums = arr.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > PROB_ATOL):
                raise ValueError(
                    f"CPT rows of {self.schema.features[i].name!r} must sum to 1, got {sums}"
                )
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "cpts", tuple(frozen))
        logp = tuple(np.log(a) for a in self.cpts)
        object.__setattr__(self, "_logp", logp)
        object.__setattr__(
            self, "_log_prior", np.array([math.log(1.0 - self.prior), math.log(self.prior)])
        )
        object.__setattr__(self, "_log_ratio", tuple(lp[1] - lp[0] for lp in logp))

    # --- queries -----------------------------------------------------------

    def log_joint(self, decision_value: int, evidence: Assignment) -> float:
        """log P(decision_value, evidence) with unobserved features marginalized."""
        if decision_value not in (0, 1):
            raise InvalidQueryError("decision value must be 0 or 1")
        _check_evidence(self.schema, evidence)
        total = self._log_prior[decision_value]
        for var, val in evidence.items:
            total += self._logp[var][decision_value, val]
        return total

    def joint_probability(self, decision_value: int, evidence: Assignment) -> float:
        return math.exp(self.log_joint(decision_value, evidence))

    def log_odds(self, evidence: Assignment) -> float:
        """log P(d, evidence) - log P(d-bar, evidence)."""
        _check_evidence(self.schema, evidence)
        total = self._log_prior[1] - self._log_prior[0]
        for var, val in evidence.items:
            total += self._log_ratio[var][val]
        return total

    def posterior(self, evidence: Assignment) -> float:
        """P(d | evidence); unbound features are marginalized out."""
        return expit(self.log_odds(evidence))

    def discrimination_score(self, x: Assignment, y: Assignment) -> float:
        """P(d | xy) - P(d | y) for a pattern with sensitive part x."""
        check_pattern(self.schema, x, y)
        return self.posterior(x.union(y)) - self.posterior(y)

    # --- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "schema": self.schema.to_json_dict(),
            "prior": self.prior,
            "cpts": [
                {"given_negative": list(c[0]), "given_positive": list(c[1])}
                for c in self.cpts
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NaiveBayesModel":
        schema = Schema.from_json_dict(doc["schema"])
        cpts = tuple(
            np.array([c["given_negative"], c["given_positive"]], dtype=float)
            for c in doc["cpts"]
        )
        return cls(schema=schema, prior=float(doc["prior"]), cpts=cpts)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "NaiveBayesModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def log_likelihood(model: NaiveBayesModel, counts) -> float:
    """Sum of n_i * log(theta_i) over every model parameter.

    ``counts`` must expose decision_counts (length-2) and feature_counts
    (one (2, cardinality) table per feature), as produced by
    :func:`fairnb.data.counts`.
    """
    dec = np.asarray(counts.decision_counts, dtype=float)
    if dec.shape != (2,):
        raise DimensionError(f"decision counts shape {dec.shape}")
    if len(counts.feature_counts) != model.schema.n_features:
        raise DimensionError(
            f"{len(counts.feature_counts)} count tables for "
            f"{model.schema.n_features} features"
        )
    total = float(dec @ model._log_prior)
    for i, table in enumerate(counts.feature_counts):
        arr = np.asarray(table, dtype=float)
        if arr.shape != model.cpts[i].shape:
            raise DimensionError(
                f"count table shape {arr.shape} for feature "
                f"{model.schema.features[i].name!r}"
            )
        total += float(np.sum(arr * model._logp[i]))
    return total
