import numpy as np
import pytest

from fairnb.data import (
    Dataset,
    accuracy,
    counts,
    cross_validate,
    fit,
    fold_assignment,
    load_csv,
    sample,
)
from fairnb.errors import IngestionError, InvalidFoldsError, MustSmoothError
from fairnb.model import Feature, NaiveBayesModel, Schema


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n")
    return path


BASE_CONFIG = {
    "decision": {"column": "hired", "positive": "yes"},
    "sensitive": ["gender"],
}


class TestLoadCsv:
    def test_three_row_toy_file(self, tmp_path):
        p = write_csv(
            tmp_path / "toy.csv",
            ["gender", "degree", "hired"],
            [["f", "cs", "yes"], ["m", "cs", "no"], ["f", "ee", "yes"]],
        )
        ds = load_csv(p, BASE_CONFIG)
        assert len(ds) == 3
        assert ds.schema.decision_values == ("no", "yes")
        assert [f.name for f in ds.schema.features] == ["gender", "degree"]
        assert ds.schema.sensitive == {0}

    def test_unique_column_dropped_and_logged(self, tmp_path):
        p = write_csv(
            tmp_path / "ids.csv",
            ["name", "gender", "hired"],
            [["alice", "f", "yes"], ["bela", "m", "no"], ["chris", "f", "yes"], ["dana", "m", "no"]],
        )
        ds = load_csv(p, BASE_CONFIG)
        assert [f.name for f in ds.schema.features] == ["gender"]
        assert ds.provenance["dropped_columns"]["name"] == "all values distinct"

    def test_constant_and_duplicate_columns_dropped(self, tmp_path):
        p = write_csv(
            tmp_path / "dups.csv",
            ["gender", "gcopy", "fixed", "hired"],
            [["f", "f", "x", "yes"], ["m", "m", "x", "no"], ["f", "f", "x", "no"]],
        )
        ds = load_csv(p, BASE_CONFIG)
        assert [f.name for f in ds.schema.features] == ["gender"]
        assert ds.provenance["dropped_columns"]["gcopy"] == "duplicate of 'gender'"
        assert ds.provenance["dropped_columns"]["fixed"] == "constant"

    def test_missing_rows_dropped_and_counted(self, tmp_path):
        p = write_csv(
            tmp_path / "missing.csv",
            ["gender", "degree", "hired"],
            [["f", "cs", "yes"], ["", "cs", "no"], ["m", "?", "no"], ["m", "ee", "no"]],
        )
        ds = load_csv(p, BASE_CONFIG)
        assert len(ds) == 2
        assert ds.provenance["rows_dropped_missing"] == 2

    def test_numeric_equal_frequency_binning(self, tmp_path):
        p = write_csv(
            tmp_path / "age.csv",
            ["gender", "age", "hired"],
            [["f", "21", "yes"], ["m", "30", "no"], ["f", "45", "yes"],
             ["m", "52", "no"], ["f", "28", "no"], ["m", "60", "yes"]],
        )
        config = dict(BASE_CONFIG, numeric={"age": {"bins": 2}})
        ds = load_csv(p, config)
        age = ds.schema.features[[f.name for f in ds.schema.features].index("age")]
        assert age.values == ("bin0", "bin1")
        # equal-frequency split: 3 rows below the median cut, 3 above
        col = ds.features[:, 1]
        assert int(np.sum(col == 0)) == 3
        assert "age" in ds.provenance["numeric_bins"]

    def test_errors_are_descriptive(self, tmp_path):
        p = write_csv(tmp_path / "t.csv", ["a", "hired"], [["x", "yes"], ["y", "no"]])
        with pytest.raises(IngestionError, match="unknown column"):
            load_csv(p, {"decision": {"column": "hired", "positive": "yes"}, "sensitive": ["nope"]})
        with pytest.raises(IngestionError, match="cannot read"):
            load_csv(tmp_path / "absent.csv", BASE_CONFIG)
        three = write_csv(
            tmp_path / "three.csv", ["gender", "hired"],
            [["f", "yes"], ["m", "no"], ["f", "maybe"], ["m", "yes"]],
        )
        with pytest.raises(IngestionError, match="distinct values"):
            load_csv(three, BASE_CONFIG)

    def test_schema_config_from_file(self, tmp_path):
        import json

        p = write_csv(tmp_path / "t.csv", ["gender", "hired"], [["f", "yes"], ["m", "no"]])
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(BASE_CONFIG))
        ds = load_csv(p, cfg)
        assert len(ds) == 2

    def test_deterministic_fingerprint(self, tmp_path):
        p = write_csv(
            tmp_path / "t.csv",
            ["gender", "degree", "hired"],
            [["f", "cs", "yes"], ["m", "ee", "no"], ["f", "ee", "yes"]],
        )
        a = load_csv(p, BASE_CONFIG)
        b = load_csv(p, BASE_CONFIG)
        assert a.fingerprint() == b.fingerprint()


class TestCountsAndFit:
    def test_frequency_estimate(self):
        schema = Schema((Feature("Z", ("0", "1")),), frozenset())
        ds = Dataset(schema, np.array([[0], [0], [0], [1]]), np.array([1, 1, 1, 1]))
        # decision all-positive: prior needs smoothing, feature is (3,1) given d
        with pytest.raises(MustSmoothError):
            fit(counts(ds))
        ds2 = Dataset(schema, np.array([[0], [0], [0], [1], [0], [1]]),
                      np.array([1, 1, 1, 1, 0, 0]))
        m = fit(counts(ds2))
        np.testing.assert_allclose(m.cpts[0][1], [0.75, 0.25])

    def test_laplace_formula(self):
        """Counts (0, 4) with alpha=1 give (1/6, 5/6)."""
        schema = Schema((Feature("Z", ("0", "1")),), frozenset())
        ds = Dataset(
            schema,
            np.array([[1], [1], [1], [1], [0], [1]]),
            np.array([1, 1, 1, 1, 0, 0]),
        )
        m = fit(counts(ds), alpha=1.0)
        np.testing.assert_allclose(m.cpts[0][1], [1 / 6, 5 / 6])

    def test_counts_invariants(self, fig1):
        ds = sample(fig1, 500, seed=21)
        stats = counts(ds)
        assert stats.total == 500
        for table in stats.feature_counts:
            np.testing.assert_allclose(table.sum(axis=1), stats.decision_counts)

    def test_recovers_generator_parameters(self, fig1):
        """Law of large numbers at a fixed seed: fitted parameters land
        within 0.01 of the generating CPTs."""
        ds = sample(fig1, 100_000, seed=22)
        m = fit(counts(ds), alpha=1.0)
        assert m.prior == pytest.approx(0.2, abs=0.01)
        for got, want in zip(m.cpts, fig1.cpts):
            np.testing.assert_allclose(got, want, atol=0.01)

    def test_fit_rows_sum_to_one_exactly(self):
        rng = np.random.default_rng(505)
        schema = Schema((Feature("Z", tuple("abc")),), frozenset())
        ds = Dataset(
            schema,
            rng.integers(0, 3, size=(50, 1)),
            rng.integers(0, 2, size=50),
        )
        m = fit(counts(ds), alpha=0.5)
        np.testing.assert_array_equal(m.cpts[0].sum(axis=1), [1.0, 1.0])


class TestAccuracy:
    def test_prior_only_model(self):
        """A model that ignores evidence predicts the majority class: on 90%
        positive data with prior 0.9 the accuracy is exactly 0.9."""
        schema = Schema((Feature("Z", ("0", "1")),), frozenset())
        m = NaiveBayesModel(schema, 0.9, (np.array([[0.5, 0.5], [0.5, 0.5]]),))
        X = np.zeros((100, 1), dtype=int)
        y = np.array([1] * 90 + [0] * 10)
        assert accuracy(m, Dataset(schema, X, y)) == pytest.approx(0.9)

    def test_tie_predicts_negative(self):
        schema = Schema((Feature("Z", ("0", "1")),), frozenset())
        m = NaiveBayesModel(schema, 0.5, (np.array([[0.5, 0.5], [0.5, 0.5]]),))
        ds = Dataset(schema, np.array([[0], [1]]), np.array([0, 1]))
        # posterior exactly 0.5 everywhere: both rows predicted negative
        assert accuracy(m, ds) == pytest.approx(0.5)

    def test_bounded(self, fig1):
        ds = sample(fig1, 200, seed=23)
        assert 0.0 <= accuracy(fig1, ds) <= 1.0


class TestCrossValidate:
    def test_fold_sizes_differ_by_at_most_one(self, fig1):
        ds = sample(fig1, 103, seed=24)
        assignment = fold_assignment(ds, 10, seed=2020)
        sizes = np.bincount(assignment, minlength=10)
        assert sizes.max() - sizes.min() <= 1

    def test_folds_are_stratified(self, fig1):
        ds = sample(fig1, 400, seed=25)
        assignment = fold_assignment(ds, 4, seed=2020)
        pos_rate = ds.decisions.mean()
        for fold in range(4):
            fold_rate = ds.decisions[assignment == fold].mean()
            assert fold_rate == pytest.approx(pos_rate, abs=0.05)

    def test_deterministic_given_seed(self, fig1):
        ds = sample(fig1, 200, seed=26)
        a = cross_validate(ds, 5, seed=2020)
        b = cross_validate(ds, 5, seed=2020)
        assert a == b
        assert a.seed == 2020

    def test_reasonable_accuracy_on_generated_data(self, fig1):
        ds = sample(fig1, 2000, seed=27)
        report = cross_validate(ds, 10)
        assert 0.5 < report.mean <= 1.0
        assert len(report.fold_accuracies) == 10

    def test_invalid_folds(self, fig1):
        ds = sample(fig1, 20, seed=28)
        with pytest.raises(InvalidFoldsError):
            cross_validate(ds, 1)
        with pytest.raises(InvalidFoldsError):
            cross_validate(ds, 21)
