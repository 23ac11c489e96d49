"""Dataset ingestion, sufficient statistics, and evaluation.

CSV ingestion follows the usual preprocessing for these benchmarks: rows
with missing cells are dropped and counted, columns whose values are all
distinct (identifiers) or constant are removed, exact duplicate columns are
removed, and numeric columns are discretized with equal-frequency bins.
Everything is deterministic: the same file and config produce the same
Dataset, bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError, InvalidFoldsError, MustSmoothError
from .model import Feature, NaiveBayesModel, Schema

DEFAULT_MISSING_TOKENS = ("", "?", "NA", "N/A")


@dataclass(frozen=True, eq=False)
class Dataset:
    schema: Schema
    features: np.ndarray  # (N, F) value indices
    decisions: np.ndarray  # (N,) in {0, 1}
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.int64)
        y = np.asarray(self.decisions, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != self.schema.n_features:
            raise IngestionError(f"feature matrix shape {X.shape} does not match schema")
        if y.shape != (X.shape[0],):
            raise IngestionError("decision vector length mismatch")
        if X.shape[0] == 0:
            raise IngestionError("empty dataset")
        for f in range(self.schema.n_features):
            if X[:, f].min() < 0 or X[:, f].max() >= self.schema.cardinality(f):
                raise IngestionError(
                    f"value index out of domain for {self.schema.features[f].name!r}"
                )
        if not np.isin(y, (0, 1)).all():
            raise IngestionError("decisions must be 0/1")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "decisions", y)

    def __len__(self) -> int:
        return self.features.shape[0]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            features=self.features[idx].copy(),
            decisions=self.decisions[idx].copy(),
            provenance={**self.provenance, "subset_of": self.fingerprint()},
        )

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.schema.to_json_dict(), sort_keys=True).encode())
        h.update(self.features.tobytes())
        h.update(self.decisions.tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class SufficientStatistics:
    """Raw counts: decision_counts[b] and feature_counts[f][b, v]."""

    schema: Schema
    decision_counts: np.ndarray  # (2,)
    feature_counts: tuple[np.ndarray, ...]  # (2, cardinality) per feature
    total: float

    def __post_init__(self):
        dec = np.asarray(self.decision_counts, dtype=float)
        if dec.shape != (2,) or np.any(dec < 0):
            raise IngestionError("decision counts must be two nonnegative numbers")
        tables = []
        for f, t in enumerate(self.feature_counts):
            arr = np.asarray(t, dtype=float)
            if arr.shape != (2, self.schema.cardinality(f)):
                raise IngestionError(
                    f"count table shape {arr.shape} for {self.schema.features[f].name!r}"
                )
            if not np.allclose(arr.sum(axis=1), dec, atol=1e-6):
                raise IngestionError(
                    f"counts of {self.schema.features[f].name!r} do not marginalize "
                    "to the decision counts"
                )
            arr.setflags(write=False)
            tables.append(arr)
        if abs(float(dec.sum()) - self.total) > 1e-6:
            raise IngestionError("decision counts do not sum to the total")
        dec.setflags(write=False)
        object.__setattr__(self, "decision_counts", dec)
        object.__setattr__(self, "feature_counts", tuple(tables))


def counts(dataset: Dataset) -> SufficientStatistics:
    y = dataset.decisions
    dec = np.array([float(np.sum(y == 0)), float(np.sum(y == 1))])
    tables = []
    for f in range(dataset.schema.n_features):
        card = dataset.schema.cardinality(f)
        col = dataset.features[:, f]
        table = np.zeros((2, card))
        for b in (0, 1):
            table[b] = np.bincount(col[y == b], minlength=card)
        tables.append(table)
    return SufficientStatistics(
        schema=dataset.schema,
        decision_counts=dec,
        feature_counts=tuple(tables),
        total=float(len(dataset)),
    )


def fit(stats: SufficientStatistics, alpha: float = 0.0) -> NaiveBayesModel:
    """Laplace-smoothed estimates: (n + alpha) / (n_b + alpha * |dom|)."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    dec = np.asarray(stats.decision_counts, dtype=float) + alpha
    if np.any(dec <= 0.0):
        raise MustSmoothError("zero decision counts: use alpha > 0")
    prior = float(dec[1] / dec.sum())
    cpts = []
    for f, table in enumerate(stats.feature_counts):
        smoothed = np.asarray(table, dtype=float) + alpha
        if np.any(smoothed <= 0.0):
            raise MustSmoothError(
                f"zero counts for feature {stats.schema.features[f].name!r}: use alpha > 0"
            )
        cpts.append(smoothed / smoothed.sum(axis=1, keepdims=True))
    return NaiveBayesModel(schema=stats.schema, prior=prior, cpts=tuple(cpts))


def sample(model: NaiveBayesModel, n: int, seed: int) -> Dataset:
    """Draw n complete rows from the model (fixed-seed, reproducible)."""
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < model.prior).astype(np.int64)
    X = np.empty((n, model.schema.n_features), dtype=np.int64)
    for f in range(model.schema.n_features):
        cum = np.cumsum(model.cpts[f], axis=1)
        r = rng.random(n)
        X[:, f] = (r[:, None] < cum[y]).argmax(axis=1)
    return Dataset(
        schema=model.schema,
        features=X,
        decisions=y,
        provenance={"source": "sampled", "seed": seed, "n": n},
    )


# --- CSV ingestion ---------------------------------------------------------------


def _load_schema_config(schema_config) -> dict:
    if isinstance(schema_config, (str, bytes)) or hasattr(schema_config, "__fspath__"):
        try:
            with open(schema_config, encoding="utf-8") as fh:
                schema_config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read schema config: {exc}") from exc
    if not isinstance(schema_config, dict):
        raise IngestionError("schema config must be a JSON object")
    if "decision" not in schema_config or "column" not in schema_config["decision"]:
        raise IngestionError("schema config needs decision.column")
    return schema_config


def load_csv(path, schema_config) -> Dataset:
    """Read an RFC-4180 CSV with a header row into a Dataset.

    ``schema_config`` (dict or JSON file) fields:
      decision: {column, positive}   required
      sensitive: [column, ...]       required (may be empty)
      numeric: {column: {bins: k}}   equal-frequency binning, default 2 bins
      missing: [token, ...]          cells treated as missing
      drop_columns: [column, ...]    removed before any processing
    """
    config = _load_schema_config(schema_config)
    decision_col = config["decision"]["column"]
    positive = str(config["decision"].get("positive", "1"))
    sensitive_cols = list(config.get("sensitive", []))
    numeric = dict(config.get("numeric", {}))
    missing = tuple(str(t) for t in config.get("missing", DEFAULT_MISSING_TOKENS))
    drops = set(config.get("drop_columns", []))

    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestionError(f"{path}: empty file") from None
            raw_rows = [row for row in reader if row]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc

    header = [h.strip() for h in header]
    if len(set(header)) != len(header):
        raise IngestionError("duplicate column names in header")
    for col in [decision_col, *sensitive_cols, *numeric, *drops]:
        if col not in header:
            raise IngestionError(f"unknown column {col!r}")
    if decision_col in drops or decision_col in sensitive_cols:
        raise IngestionError("the decision column cannot be sensitive or dropped")

    keep = [c for c in header if c not in drops]
    col_of = {c: header.index(c) for c in keep}
    bad_width = sum(1 for row in raw_rows if len(row) != len(header))
    rows = [row for row in raw_rows if len(row) == len(header)]

    kept_rows = []
    dropped_missing = 0
    for row in rows:
        cells = [row[col_of[c]].strip() for c in keep]
        if any(cell in missing for cell in cells):
            dropped_missing += 1
            continue
        kept_rows.append(cells)
    if not kept_rows:
        raise IngestionError("no usable rows after dropping missing values")

    columns = {c: [r[i] for r in kept_rows] for i, c in enumerate(keep)}
    dropped_columns: dict[str, str] = {}
    bin_edges: dict[str, list[float]] = {}

    for col, rule in sorted(numeric.items()):
        if col in drops:
            continue
        bins = int(rule.get("bins", 2)) if isinstance(rule, dict) else int(rule)
        if bins < 2:
            raise IngestionError(f"numeric column {col!r} needs at least 2 bins")
        try:
            vals = np.array([float(v) for v in columns[col]])
        except ValueError as exc:
            raise IngestionError(f"unparseable numeric value in {col!r}: {exc}") from exc
        edges = np.unique(np.quantile(vals, [j / bins for j in range(1, bins)]))
        idx = np.searchsorted(edges, vals, side="right")
        width = len(str(len(edges)))
        columns[col] = [f"bin{int(i):0{width}d}" for i in idx]
        bin_edges[col] = [float(e) for e in edges]

    # identifier-like, constant, and exact-duplicate columns are removed
    seen_sequences: dict[tuple, str] = {}
    final_cols = []
    n_rows = len(kept_rows)
    for col in keep:
        values = columns[col]
        distinct = len(set(values))
        if col == decision_col:
            final_cols.append(col)
            continue
        if distinct == n_rows and distinct > 2:
            dropped_columns[col] = "all values distinct"
            continue
        if distinct < 2:
            dropped_columns[col] = "constant"
            continue
        sig = tuple(values)
        if sig in seen_sequences:
            dropped_columns[col] = f"duplicate of {seen_sequences[sig]!r}"
            continue
        seen_sequences[sig] = col
        final_cols.append(col)

    for col in sensitive_cols:
        if col in dropped_columns:
            raise IngestionError(
                f"sensitive column {col!r} was dropped ({dropped_columns[col]})"
            )

    dec_values = sorted(set(columns[decision_col]))
    if len(dec_values) != 2:
        raise IngestionError(
            f"decision column {decision_col!r} has {len(dec_values)} distinct values, need 2"
        )
    if positive not in dec_values:
        raise IngestionError(
            f"positive label {positive!r} not among decision values {dec_values}"
        )
    negative = dec_values[0] if dec_values[1] == positive else dec_values[1]

    feature_cols = [c for c in final_cols if c != decision_col]
    features = []
    value_index = {}
    for col in feature_cols:
        domain = tuple(sorted(set(columns[col])))
        features.append(Feature(name=col, values=domain))
        value_index[col] = {v: i for i, v in enumerate(domain)}
    schema = Schema(
        features=tuple(features),
        sensitive=frozenset(feature_cols.index(c) for c in sensitive_cols),
        decision_name=decision_col,
        decision_values=(negative, positive),
    )

    X = np.empty((n_rows, len(feature_cols)), dtype=np.int64)
    for j, col in enumerate(feature_cols):
        lut = value_index[col]
        X[:, j] = [lut[v] for v in columns[col]]
    y = np.array([1 if v == positive else 0 for v in columns[decision_col]], dtype=np.int64)

    provenance = {
        "source": str(path),
        "rows_loaded": len(raw_rows),
        "rows_dropped_missing": dropped_missing,
        "rows_dropped_malformed": bad_width,
        "dropped_columns": dropped_columns,
        "numeric_bins": bin_edges,
    }
    return Dataset(schema=schema, features=X, decisions=y, provenance=provenance)


# --- evaluation --------------------------------------------------------------------


def predictions(model: NaiveBayesModel, dataset: Dataset) -> np.ndarray:
    """Predict the positive decision iff the posterior given the full row
    exceeds 0.5 (exact ties go to the negative class)."""
    if dataset.schema.n_features != model.schema.n_features:
        raise IngestionError("dataset does not match the model schema")
    lo = np.full(len(dataset), float(model._log_prior[1] - model._log_prior[0]))
    for f in range(model.schema.n_features):
        lo += model._log_ratio[f][dataset.features[:, f]]
    return (lo > 0.0).astype(np.int64)


def accuracy(model: NaiveBayesModel, dataset: Dataset) -> float:
    return float(np.mean(predictions(model, dataset) == dataset.decisions))


@dataclass(frozen=True)
class CVReport:
    fold_accuracies: tuple[float, ...]
    folds: int
    seed: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    def to_json_dict(self) -> dict:
        return {
            "folds": self.folds,
            "seed": self.seed,
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean,
        }


def fold_assignment(dataset: Dataset, folds: int, seed: int) -> np.ndarray:
    """Stratified fold labels: per-class shuffled, dealt cyclically so fold
    sizes differ by at most one overall and per class."""
    if folds < 2 or folds > len(dataset):
        raise InvalidFoldsError(f"cannot split {len(dataset)} rows into {folds} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(dataset), dtype=np.int64)
    pointer = 0
    for label in (0, 1):
        idx = np.flatnonzero(dataset.decisions == label)
        rng.shuffle(idx)
        for i in idx:
            assignment[i] = pointer % folds
            pointer += 1
    return assignment


def cross_validate(dataset: Dataset, folds: int, trainer=None, seed: int = 2020) -> CVReport:
    """K-fold accuracy with stratified folds; ``trainer`` maps a training
    Dataset to a model (default: Laplace-smoothed maximum likelihood)."""
    if trainer is None:
        trainer = lambda ds: fit(counts(ds), alpha=1.0)  # noqa: E731
    assignment = fold_assignment(dataset, folds, seed)
    accs = []
    for fold in range(folds):
        train = dataset.subset(np.flatnonzero(assignment != fold))
        test = dataset.subset(np.flatnonzero(assignment == fold))
        accs.append(accuracy(trainer(train), test))
    return CVReport(fold_accuracies=tuple(accs), folds=folds, seed=seed)
