"""Command-line front door: train, predict, evaluate, and tune.

Exit codes: 0 on success, 1 on data or model errors, 2 on bad flags or a
malformed candidate file. Logs go to standard error; data goes to files
or standard output, so commands compose in shell pipelines. Every flag
can also be supplied via a JSON config file (``--config run.json``) with
flag > config > default precedence; the effective configuration is echoed
to the run log.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional

from .corpus import Dataset, load_tsv
from .ensemble import train_ensemble
from .features import FeatureSpec, Preprocessing, parse_spec_list
from .metrics import confusion, error_report, random_predictions, score
from .model_store import file_digest, load, save
from .svm import TrainConfig
from .tuning import (
    DEFAULT_C_GRID,
    GridResult,
    ablate_features,
    full_feature_grid,
    grid_search_c,
    powerset_candidates,
    search_combinations,
)

log = logging.getLogger("lidc")


class FlagError(Exception):
    """Bad flag or config value; maps to exit code 2."""


_TRAIN_DEFAULTS = {
    "features": "char:2,char:3,char:4",
    "c": 1.0,
    "loss": "squared_hinge",
    "tol": 1e-4,
    "max_epochs": 1000,
    "seed": 0,
    "threads": None,
    "lowercase": False,
    "strip_punctuation": False,
    "skip_mode": "upto",
    "min_df": 1,
    "bias": True,
    "bias_scale": 1.0,
}


def _add_train_flags(p: argparse.ArgumentParser, with_features_default: bool = True):
    p.add_argument(
        "--features",
        help="comma-separated feature specs (char:N, word:N, skip:K)"
        + (" [default: char:2,char:3,char:4]" if with_features_default else ""),
    )
    p.add_argument("--c", type=float, help="SVM regularization parameter C [default: 1.0]")
    p.add_argument("--loss", choices=["squared_hinge", "hinge"], help="SVM loss [default: squared_hinge]")
    p.add_argument("--tol", type=float, help="solver stopping tolerance [default: 1e-4]")
    p.add_argument("--max-epochs", type=int, help="solver epoch cap [default: 1000]")
    p.add_argument("--min-df", type=int, help="drop terms seen in fewer documents [default: 1]")
    p.add_argument(
        "--lowercase",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="lowercase text before feature extraction [default: off]",
    )
    p.add_argument(
        "--strip-punctuation",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="replace punctuation with spaces before feature extraction [default: off]",
    )
    p.add_argument("--skip-mode", choices=["upto", "exact"], help="skip-bigram gap convention [default: upto]")
    p.add_argument(
        "--bias",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="fit a bias term as an appended constant feature [default: on]",
    )
    p.add_argument("--bias-scale", type=float, help="value of the appended bias feature [default: 1.0]")
    p.add_argument("--seed", type=int, help="seed for epoch shuffling and baselines [default: 0]")
    p.add_argument("--threads", type=int, help="worker threads (falls back to LIDC_THREADS, then all cores)")
    p.add_argument("--config", help="JSON config file; flags override its values")


def _add_tune_io_flags(p: argparse.ArgumentParser):
    p.add_argument("--train", help="training corpus TSV (text<TAB>label per line)")
    p.add_argument("--dev", help="development corpus TSV to rank configurations on")
    p.add_argument("--out-tsv", help="write the result table as TSV here (default: stdout)")
    p.add_argument("--out-json", help="also write the result table as JSON here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lidc",
        description="Similar-language identification: TF-IDF n-gram features, "
        "linear SVMs, hard-voting ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an ensemble and write a model file")
    p_train.add_argument("--train", help="training corpus TSV (text<TAB>label per line)")
    p_train.add_argument("--out", help="model file to write (.json or .json.gz)")
    _add_train_flags(p_train)
    p_train.set_defaults(func=_cmd_train, defaults={**_TRAIN_DEFAULTS, "train": None, "out": None})

    p_pred = sub.add_parser("predict", help="label texts with a trained model")
    p_pred.add_argument("--model", help="model file from 'lidc train'")
    p_pred.add_argument("--input", help="input file, one text per line")
    p_pred.add_argument("--out", help="output TSV text<TAB>label (default: stdout)")
    p_pred.add_argument("--config", help="JSON config file; flags override its values")
    p_pred.set_defaults(
        func=_cmd_predict,
        defaults={"model": None, "input": None, "out": None},
    )

    p_eval = sub.add_parser("evaluate", help="score a model (or a random baseline) on labeled data")
    p_eval.add_argument("--model", help="model file (not needed with --baseline)")
    p_eval.add_argument("--test", help="labeled test corpus TSV")
    p_eval.add_argument("--report", help="write the score report JSON here (default: stdout)")
    p_eval.add_argument("--confusion", help="write the confusion matrix CSV here")
    p_eval.add_argument("--confusion-svg", help="write the confusion matrix SVG heatmap here")
    p_eval.add_argument("--error-report", help="write the misclassification report TSV here")
    p_eval.add_argument(
        "--short-threshold",
        type=int,
        help="token count at or below which a misclassified text is flagged short [default: 3]",
    )
    p_eval.add_argument("--baseline", choices=["random"], help="score a baseline instead of a model")
    p_eval.add_argument("--seed", type=int, help="baseline RNG seed [default: 0]")
    p_eval.add_argument("--config", help="JSON config file; flags override its values")
    p_eval.set_defaults(
        func=_cmd_evaluate,
        defaults={
            "model": None,
            "test": None,
            "report": None,
            "confusion": None,
            "confusion_svg": None,
            "error_report": None,
            "short_threshold": 3,
            "baseline": None,
            "seed": 0,
        },
    )

    p_tune = sub.add_parser("tune", help="grid searches against a development set")
    tune_sub = p_tune.add_subparsers(dest="tune_command", required=True)

    p_c = tune_sub.add_parser("c", help="grid search over the regularization parameter C")
    _add_tune_io_flags(p_c)
    p_c.add_argument("--c-grid", help="comma-separated C values [default: 0.001,0.01,0.1,1,10,100,1000]")
    _add_train_flags(p_c)
    p_c.set_defaults(
        func=_cmd_tune_c,
        defaults={**_TRAIN_DEFAULTS, "train": None, "dev": None, "c_grid": None,
                  "out_tsv": None, "out_json": None},
    )

    p_ab = tune_sub.add_parser("ablate", help="score one single-feature classifier per spec")
    _add_tune_io_flags(p_ab)
    _add_train_flags(p_ab, with_features_default=False)
    p_ab.set_defaults(
        func=_cmd_tune_ablate,
        defaults={**_TRAIN_DEFAULTS, "features": None, "train": None, "dev": None,
                  "out_tsv": None, "out_json": None},
    )

    p_co = tune_sub.add_parser("combos", help="evaluate candidate feature combinations")
    _add_tune_io_flags(p_co)
    p_co.add_argument("--candidates", help="file with one comma-separated spec list per line")
    p_co.add_argument(
        "--powerset-max-size",
        type=int,
        help="generate all spec subsets up to this size from the --features pool",
    )
    _add_train_flags(p_co, with_features_default=False)
    p_co.set_defaults(
        func=_cmd_tune_combos,
        defaults={**_TRAIN_DEFAULTS, "features": None, "train": None, "dev": None,
                  "candidates": None, "powerset_max_size": None,
                  "out_tsv": None, "out_json": None},
    )

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Apply flag > config-file > default precedence and echo the result."""
    defaults = dict(args.defaults)
    merged = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            cfg_obj = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as e:
            raise FlagError(f"cannot read config file: {e}")
        except json.JSONDecodeError as e:
            raise FlagError(f"config file is not valid JSON: {e}")
        if not isinstance(cfg_obj, dict):
            raise FlagError("config file must hold a JSON object")
        for key, value in cfg_obj.items():
            dest = key.replace("-", "_")
            if dest not in defaults:
                raise FlagError(f"unknown config key {key!r}")
            merged[dest] = value
    for dest in defaults:
        value = getattr(args, dest, None)
        if value is not None:
            merged[dest] = value
    log.info("run config: %s", json.dumps(merged, sort_keys=True, default=str))
    return merged


def _resolve_threads(value) -> int:
    if value is not None:
        n = int(value)
        if n < 1:
            raise FlagError(f"--threads must be >= 1, got {n}")
        return n
    env = os.environ.get("LIDC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise FlagError(f"LIDC_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _require(opts: dict, *keys: str):
    for key in keys:
        if opts.get(key) is None:
            raise FlagError(f"--{key.replace('_', '-')} is required")


def _train_settings(opts: dict) -> tuple[TrainConfig, Preprocessing, int, int]:
    try:
        cfg = TrainConfig(
            c=float(opts["c"]),
            loss=opts["loss"],
            tol=float(opts["tol"]),
            max_epochs=int(opts["max_epochs"]),
            shuffle_seed=int(opts["seed"]),
            fit_bias=bool(opts["bias"]),
            bias_scale=float(opts["bias_scale"]),
        )
        prep = Preprocessing(
            lowercase=bool(opts["lowercase"]),
            strip_punctuation=bool(opts["strip_punctuation"]),
            skip_mode=opts["skip_mode"],
        )
        min_df = int(opts["min_df"])
        if min_df < 1:
            raise ValueError(f"--min-df must be >= 1, got {min_df}")
    except (TypeError, ValueError) as e:
        raise FlagError(str(e))
    return cfg, prep, min_df, _resolve_threads(opts["threads"])


def _parse_features(value: str) -> list[FeatureSpec]:
    try:
        return parse_spec_list(value)
    except ValueError as e:
        raise FlagError(str(e))


def _write_or_stdout(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _cmd_train(opts: dict) -> int:
    _require(opts, "train", "out")
    specs = _parse_features(opts["features"])
    cfg, prep, min_df, threads = _train_settings(opts)

    t0 = time.perf_counter()
    dataset = load_tsv(opts["train"], labeled=True)
    ens = train_ensemble(dataset, specs, cfg, prep=prep, min_df=min_df, threads=threads)
    save(ens, opts["out"], seed=cfg.shuffle_seed, train_digest=file_digest(opts["train"]))
    wall = time.perf_counter() - t0

    for member in ens.members:
        infos = member.model.fit_info or []
        epochs = max((i.epochs for i in infos), default=0)
        converged = all(i.converged for i in infos)
        log.info(
            "member %s: vocabulary %d terms, max epochs %d%s",
            member.spec,
            member.tfidf.n_features,
            epochs,
            "" if converged else " (hit epoch cap)",
        )
    log.info(
        "trained %d members on %d documents, %d labels in %.2fs -> %s",
        len(ens.members),
        len(dataset),
        len(ens.catalog),
        wall,
        opts["out"],
    )
    return 0


def _cmd_predict(opts: dict) -> int:
    _require(opts, "model", "input")
    ens = load(opts["model"])
    data = load_tsv(opts["input"], labeled=False)
    lines = []
    for doc in data:
        label = ens.catalog[ens.predict(doc.text)]
        lines.append(f"{doc.text}\t{label}\n")
    _write_or_stdout("".join(lines), opts["out"])
    log.info("predicted %d texts", len(data))
    return 0


def _cmd_evaluate(opts: dict) -> int:
    _require(opts, "test")
    if opts["baseline"] is None:
        _require(opts, "model")
    try:
        seed = int(opts["seed"])
        short_threshold = int(opts["short_threshold"])
    except (TypeError, ValueError) as e:
        raise FlagError(str(e))

    test = load_tsv(opts["test"], labeled=True)
    if len(test) == 0:
        raise ValueError(f"{opts['test']}: no instances to evaluate")

    if opts["baseline"] == "random":
        catalog = test.catalog
        gold = test.label_ids()
        preds = [int(p) for p in random_predictions(len(test), len(catalog), seed)]
    else:
        ens = load(opts["model"])
        catalog = ens.catalog
        try:
            gold = [catalog.id_of(d.label) for d in test.documents]
        except KeyError as e:
            raise ValueError(f"{opts['test']}: test label not known to the model: {e}")
        preds = ens.predict_all(test.documents)

    cm = confusion(gold, preds, catalog)
    report = score(cm)
    report_json = json.dumps(report.to_jsonable(), sort_keys=True, indent=2) + "\n"
    _write_or_stdout(report_json, opts["report"])
    if opts["confusion"]:
        Path(opts["confusion"]).write_text(cm.to_csv(), encoding="utf-8")
    if opts["confusion_svg"]:
        Path(opts["confusion_svg"]).write_text(cm.to_svg(), encoding="utf-8")
    if opts["error_report"]:
        scored = Dataset(test.documents, catalog)
        err = error_report(scored, preds, short_threshold=short_threshold)
        Path(opts["error_report"]).write_text(err.to_tsv(), encoding="utf-8")
        log.info(
            "%d misclassified of %d; %.1f%% short (<= %d tokens)",
            err.n_errors,
            err.total_scored,
            100.0 * err.short_fraction,
            short_threshold,
        )
    log.info("macro_f1=%.4f weighted_f1=%.4f accuracy=%.4f", report.macro_f1,
             report.weighted_f1, report.accuracy)
    return 0


def _emit_grid(result: GridResult, opts: dict, what: str) -> None:
    _write_or_stdout(result.to_tsv(), opts["out_tsv"])
    if opts["out_json"]:
        Path(opts["out_json"]).write_text(result.to_json(), encoding="utf-8")
    best = result.best
    log.info(
        "best %s: specs=%s c=%r macro_f1=%.4f weighted_f1=%.4f",
        what,
        ",".join(best.spec_strings),
        best.c,
        best.macro_f1,
        best.weighted_f1,
    )


def _load_train_dev(opts: dict) -> tuple[Dataset, Dataset]:
    _require(opts, "train", "dev")
    return load_tsv(opts["train"], labeled=True), load_tsv(opts["dev"], labeled=True)


def _cmd_tune_c(opts: dict) -> int:
    specs = _parse_features(opts["features"])
    cfg, prep, min_df, threads = _train_settings(opts)
    if opts["c_grid"] is None:
        c_grid = list(DEFAULT_C_GRID)
    else:
        try:
            c_grid = [float(x) for x in str(opts["c_grid"]).split(",") if x.strip()]
        except ValueError:
            raise FlagError(f"--c-grid must be comma-separated numbers, got {opts['c_grid']!r}")
        if not c_grid:
            raise FlagError("--c-grid must not be empty")
    train, dev = _load_train_dev(opts)
    result = grid_search_c(train, dev, specs, c_grid, cfg, prep=prep, min_df=min_df,
                           threads=threads)
    _emit_grid(result, opts, "C")
    return 0


def _cmd_tune_ablate(opts: dict) -> int:
    if opts["features"] is None:
        specs = full_feature_grid()
    else:
        specs = _parse_features(opts["features"])
    cfg, prep, min_df, threads = _train_settings(opts)
    train, dev = _load_train_dev(opts)
    result = ablate_features(train, dev, specs, cfg, prep=prep, min_df=min_df,
                             threads=threads)
    _emit_grid(result, opts, "single feature")
    return 0


def _parse_candidates_file(path: str) -> list[list[FeatureSpec]]:
    try:
        content = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise  # data error, exit 1
    candidates = []
    for lineno, line in enumerate(content.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            cand = parse_spec_list(line)
        except ValueError as e:
            raise FlagError(f"{path}: line {lineno}: {e}")
        if len(set(cand)) != len(cand):
            raise FlagError(f"{path}: line {lineno}: duplicate specs in candidate")
        candidates.append(cand)
    if not candidates:
        raise FlagError(f"{path}: no candidates found")
    return candidates


def _cmd_tune_combos(opts: dict) -> int:
    has_file = opts["candidates"] is not None
    has_powerset = opts["powerset_max_size"] is not None
    if has_file == has_powerset:
        raise FlagError("give exactly one of --candidates or --powerset-max-size")
    cfg, prep, min_df, threads = _train_settings(opts)
    if has_powerset:
        try:
            max_size = int(opts["powerset_max_size"])
        except (TypeError, ValueError) as e:
            raise FlagError(str(e))
        pool = (full_feature_grid() if opts["features"] is None
                else _parse_features(opts["features"]))
        try:
            candidates = powerset_candidates(pool, max_size)
        except ValueError as e:
            raise FlagError(str(e))
    else:
        candidates = _parse_candidates_file(opts["candidates"])
    train, dev = _load_train_dev(opts)
    result = search_combinations(train, dev, candidates, cfg, prep=prep, min_df=min_df,
                                 threads=threads)
    _emit_grid(result, opts, "combination")
    return 0


def main(argv=None) -> int:
    root = logging.getLogger("lidc")
    root.setLevel(logging.INFO)
    for stale in list(root.handlers):
        root.removeHandler(stale)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(handler)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        opts = _merge_config(args)
        return args.func(opts)
    except FlagError as e:
        print(f"error: {e}", file=sys.stderr)
        print("run with --help for usage", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
