"""Command-line front end.

Exit codes are frozen for scripting: 0 success (for ``verify``: the model is
fair), 1 ``verify`` found a witness pattern, 2 usage errors, 3 ingestion
errors, 4 solver failure. All errors are emitted as single-line JSON on
stderr. Outputs are byte-identical across repeated runs with the same seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import data as data_mod
from .errors import FairNBError, IngestionError, SolverError
from .learner import LearnConfig, independent_baseline, learn_fair
from .miner import brute_force_patterns, mine_all, mine_topk, ranking_score, verify_fair
from .model import NaiveBayesModel, log_likelihood
from .spsolver import SolverConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message)
        raise SystemExit(2)


def _emit_error(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def _dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(out_path: str | None, text: str) -> None:
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_model(path: str) -> NaiveBayesModel:
    try:
        return NaiveBayesModel.load(path)
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise IngestionError(f"cannot load model {path!r}: {exc}") from exc


def _load_dataset(args) -> data_mod.Dataset:
    return data_mod.load_csv(args.data, args.schema)


def build_parser() -> _Parser:
    parser = _Parser(prog="fairnb", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_fit = sub.add_parser("fit", help="learn smoothed ML parameters and write model JSON")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--schema", required=True)
    p_fit.add_argument("--alpha", type=float, default=1.0)
    p_fit.add_argument("--out", default="-")

    p_verify = sub.add_parser("verify", help="exit 0 iff the model is delta-fair")
    p_verify.add_argument("--model", required=True)
    p_verify.add_argument("--delta", type=float, required=True)

    p_mine = sub.add_parser("mine", help="mine discrimination patterns")
    p_mine.add_argument("--model", required=True)
    p_mine.add_argument("--delta", type=float, required=True)
    p_mine.add_argument("--k", type=int, default=None,
                        help="top-k patterns; omit for exhaustive mining")
    p_mine.add_argument("--ranking", choices=("discrimination", "divergence"),
                        default="discrimination")
    p_mine.add_argument("--out", default="-")
    p_mine.add_argument("--format", choices=("json", "csv"), default="json")

    p_learn = sub.add_parser("learn", help="cutting-plane fair parameter learning")
    p_learn.add_argument("--data", required=True)
    p_learn.add_argument("--schema", required=True)
    p_learn.add_argument("--delta", type=float, required=True)
    p_learn.add_argument("--k", type=int, default=1)
    p_learn.add_argument("--ranking", choices=("discrimination", "divergence"),
                         default="discrimination")
    p_learn.add_argument("--alpha", type=float, default=1.0)
    p_learn.add_argument("--max-iterations", type=int, default=100)
    p_learn.add_argument("--out", default="-", help="LearnReport JSON path")
    p_learn.add_argument("--model", default=None, help="also write the final model here")

    p_eval = sub.add_parser("eval", help="accuracy / log-likelihood table")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--schema", required=True)
    p_eval.add_argument("--model", default=None, help="evaluate this model too")
    p_eval.add_argument("--alpha", type=float, default=1.0)
    p_eval.add_argument("--folds", type=int, default=None)
    p_eval.add_argument("--delta", type=float, default=None,
                        help="also cross-validate the delta-fair learner")
    p_eval.add_argument("--k", type=int, default=1)
    p_eval.add_argument("--ranking", choices=("discrimination", "divergence"),
                        default="discrimination")
    p_eval.add_argument("--seed", type=int, default=2020)
    p_eval.add_argument("--out", default="-")

    p_scatter = sub.add_parser("scatter", help="(mass, |delta|, divergence) CSV of all patterns")
    p_scatter.add_argument("--model", required=True)
    p_scatter.add_argument("--delta", type=float, required=True)
    p_scatter.add_argument("--k", type=int, default=10, help="top-k highlight flags")
    p_scatter.add_argument("--cap", type=int, default=10_000_000)
    p_scatter.add_argument("--out", default="-")
    return parser


def _cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    model = data_mod.fit(data_mod.counts(dataset), alpha=args.alpha)
    _write(args.out, _dump_json(model.to_json_dict()))
    return 0


def _cmd_verify(args) -> int:
    model = _load_model(args.model)
    fair, witness = verify_fair(model, args.delta)
    if fair:
        return 0
    sys.stdout.write(_dump_json(witness.describe(model.schema)))
    return 1


def _cmd_mine(args) -> int:
    model = _load_model(args.model)
    if args.k is None:
        report = mine_all(model, args.delta)
    else:
        report = mine_topk(model, args.delta, args.k, args.ranking)
    if args.format == "csv":
        _write(args.out, report.patterns_csv())
    else:
        _write(args.out, report.to_json(model.schema))
    return 0


def _cmd_learn(args) -> int:
    dataset = _load_dataset(args)
    config = LearnConfig(
        alpha=args.alpha,
        max_outer_iterations=args.max_iterations,
        solver=SolverConfig(),
    )
    report = learn_fair(dataset, args.delta, args.k, args.ranking, config)
    _write(args.out, _dump_json(report.to_json_dict()))
    if args.model:
        report.model.save(args.model)
    return 0


def _cmd_eval(args) -> int:
    dataset = _load_dataset(args)
    cnt = data_mod.counts(dataset)
    ml = data_mod.fit(cnt, alpha=args.alpha)
    independent = independent_baseline(cnt, alpha=args.alpha)
    doc: dict = {
        "n_rows": len(dataset),
        "alpha": args.alpha,
        "log_likelihood": {
            "unconstrained": log_likelihood(ml, cnt),
            "independent": log_likelihood(independent, cnt),
        },
        "accuracy": {
            "unconstrained": data_mod.accuracy(ml, dataset),
            "independent": data_mod.accuracy(independent, dataset),
        },
    }
    if args.model:
        model = _load_model(args.model)
        doc["log_likelihood"]["model"] = log_likelihood(model, cnt)
        doc["accuracy"]["model"] = data_mod.accuracy(model, dataset)
    if args.folds:
        cv: dict = {
            "unconstrained": data_mod.cross_validate(
                dataset, args.folds, seed=args.seed
            ).to_json_dict()
        }
        if args.delta is not None:
            config = LearnConfig(alpha=args.alpha, solver=SolverConfig())

            def fair_trainer(train):
                return learn_fair(train, args.delta, args.k, args.ranking, config).model

            cv["fair"] = data_mod.cross_validate(
                dataset, args.folds, trainer=fair_trainer, seed=args.seed
            ).to_json_dict()
        doc["cv"] = cv
    _write(args.out, _dump_json(doc))
    return 0


def _cmd_scatter(args) -> int:
    model = _load_model(args.model)
    patterns = brute_force_patterns(model, args.delta, cap=args.cap)
    by_disc = sorted(patterns, key=lambda p: (-ranking_score(p, "discrimination"), p.canonical_key))
    by_div = sorted(patterns, key=lambda p: (-ranking_score(p, "divergence"), p.canonical_key))
    top_disc = {p.canonical_key for p in by_disc[: args.k]}
    top_div = {p.canonical_key for p in by_div[: args.k]}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mass", "abs_delta", "divergence", "top_discrimination", "top_divergence", "x", "y"])

    def render(assignment):
        described = model.schema.describe(assignment)
        return ";".join(f"{k}={v}" for k, v in sorted(described.items()))

    for p in patterns:
        writer.writerow([
            repr(p.mass), repr(abs(p.delta)), repr(p.divergence),
            int(p.canonical_key in top_disc), int(p.canonical_key in top_div),
            render(p.x), render(p.y),
        ])
    _write(args.out, buf.getvalue())
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "verify": _cmd_verify,
    "mine": _cmd_mine,
    "learn": _cmd_learn,
    "eval": _cmd_eval,
    "scatter": _cmd_scatter,
}


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.subcommand](args)
    except IngestionError as exc:
        _emit_error("ingestion", str(exc))
        return 3
    except SolverError as exc:
        _emit_error("solver", str(exc))
        return 4
    except (FairNBError, ValueError) as exc:
        _emit_error("usage", str(exc))
        return 2
    except Exception as exc:  # unexpected: keep exit codes 0..4 meaningful
        _emit_error("internal", f"{type(exc).__name__}: {exc}")
        return 70


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
