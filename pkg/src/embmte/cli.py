"""Command-line pipeline: synth, train, evaluate, predict, analyze, baseline.

Every run is a pure function of (inputs, flags, seed): identical invocations
write byte-identical artifacts, whatever the worker count. Errors print a
machine-parsable ``error:`` line; exit codes are 0 (success), 1 (validation
or input error), 2 (solver non-convergence).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import synthetic
from .analysis import AnalysisConfig, disagreement_report, format_analysis_report, \
    load_vocabulary, write_analysis_report
from .corpus import DACorpus, LanguagePair, leave_one_pair_out_split, parse_corpus, write_corpus
from .embeddings import combine_sources, load_embeddings, save_embeddings
from .errors import ConvergenceError, EmbmteError, ValidationError
from .evaluation import evaluate_metric, format_report, read_scores, write_report, write_scores
from .features import apply_standardizer, feature_matrix, fit_standardizer, \
    load_standardizer, save_standardizer
from .sentbleu import BleuConfig, score_corpus, sentbleu_report
from .svr import CVResult, DEFAULT_MAX_ITER, DEFAULT_TOL, Hyperparams, default_grid, \
    grid_search, load_model, save_model, svr_predict_batch, svr_train

JOBS_ENV_VAR = "EMBMTE_JOBS"


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"expected a boolean, got {text!r}")


def _parse_config_file(path) -> dict[str, str]:
    """key=value lines; '#' starts a comment; values may be double-quoted."""
    cfg: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"{path}: line {line_no}: expected key=value")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] == '"':
            value = value[1:-1]
        cfg[key.strip()] = value
    return cfg


class _Options:
    """Flag/config-file resolution: flags beat the file, the file beats defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        config = getattr(args, "config", None)
        self.file = _parse_config_file(config) if config else {}

    def get(self, key: str, default=None, convert=str):
        cli_value = getattr(self.args, key.replace("-", "_"), None)
        if cli_value is not None:
            return cli_value
        if key in self.file:
            return convert(self.file[key])
        return default

    def require(self, key: str, convert=str):
        value = self.get(key, None, convert)
        if value is None:
            raise ValidationError(f"missing required option --{key}")
        return value


def parse_grid_spec(spec: str) -> list[Hyperparams]:
    """Parse 'c=0.01,0.1;eps=0.1;gamma=1,10' into grid enumeration order."""
    fields: dict[str, list[float]] = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, values_text = part.partition("=")
        if not sep:
            raise ValidationError(f"grid field {part!r} is not key=value")
        key = key.strip().lower()
        if key not in ("c", "eps", "gamma"):
            raise ValidationError(f"unknown grid field {key!r} (expected c, eps, gamma)")
        try:
            values = sorted({float(v) for v in values_text.split(",") if v.strip()})
        except ValueError:
            raise ValidationError(f"grid field {key!r} has a non-numeric value") from None
        if not values:
            raise ValidationError(f"grid field {key!r} has no values")
        fields[key] = values
    missing = {"c", "eps", "gamma"} - fields.keys()
    if missing:
        raise ValidationError(f"grid spec is missing fields: {', '.join(sorted(missing))}")
    return [
        Hyperparams(c, e, g)
        for c in fields["c"]
        for e in fields["eps"]
        for g in fields["gamma"]
    ]


def _resolve_jobs(opt: _Options) -> int:
    jobs = opt.get("jobs", None, int)
    if jobs is None:
        env = os.environ.get(JOBS_ENV_VAR, "").strip()
        jobs = int(env) if env else 1
    if jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {jobs}")
    return jobs


def _out_dir(opt: _Options) -> Path:
    out = Path(opt.get("out-dir", ".", str))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus_and_store(opt: _Options):
    corpus = parse_corpus(opt.require("corpus"))
    spec = opt.require("embeddings")
    paths = [p for p in str(spec).split(",") if p]
    if not paths:
        raise ValidationError("--embeddings needs at least one path")
    store = combine_sources([load_embeddings(p) for p in paths])
    return corpus, store


def _split_features(corpus, store, opt: _Options):
    target_pair = LanguagePair.parse(opt.require("target-pair"))
    test_dataset = opt.require("test-dataset")
    split = leave_one_pair_out_split(corpus, target_pair, test_dataset)
    return split


def _write_cv_table(cv: CVResult | None, k: int, path: Path) -> None:
    header = ["C", "epsilon", "gamma", "mean_score"] + [f"fold_{i}" for i in range(k)]
    rows = ["\t".join(header)]
    if cv is not None:
        for point in cv.grid:
            cells = [repr(float(point.params.C)), repr(float(point.params.epsilon)),
                     repr(float(point.params.gamma)), repr(float(point.mean_score))]
            cells.extend(repr(float(s)) for s in point.fold_scores)
            rows.append("\t".join(cells))
        for warning in cv.warnings:
            rows.append(f"# warning\t{warning}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def cmd_synth(args: argparse.Namespace) -> int:
    opt = _Options(args)
    n = opt.get("n", 1000, int)
    dim = opt.get("dim", 32, int)
    noise_sigma = opt.get("noise-sigma", 0.05, float)
    seed = opt.get("seed", 42, int)
    out = _out_dir(opt)

    corpus, store = synthetic.generate(n, dim, noise_sigma, seed)
    corpus_path = out / "corpus.tsv"
    emb_path = out / "embeddings.emb1"
    write_corpus(corpus, corpus_path)
    save_embeddings(store, emb_path)
    print(f"wrote {corpus_path} ({len(corpus)} segments) and {emb_path} (dim {dim})")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    opt = _Options(args)
    corpus, store = _load_corpus_and_store(opt)
    split = _split_features(corpus, store, opt)
    folds = opt.get("folds", 10, int)
    seed = opt.get("seed", 42, int)
    jobs = _resolve_jobs(opt)
    tol = opt.get("tol", DEFAULT_TOL, float)
    max_iter = opt.get("max-iter", DEFAULT_MAX_ITER, int)
    cv_objective = opt.get("cv-objective", "pearson", str)
    standardize = not opt.get("no-standardize", False, _parse_bool)
    grid_spec = opt.get("grid", None, str)
    grid = parse_grid_spec(grid_spec) if grid_spec else default_grid()
    out = _out_dir(opt)
    model_path = Path(opt.get("model", out / "model.svr1", str))

    X_train = feature_matrix(store, split.train_ids)
    feature_matrix(store, split.test_ids)  # fail now if test embeddings are missing
    y_train = np.array([corpus.by_id(i).da_score for i in split.train_ids])

    standardizer = fit_standardizer(X_train) if standardize else None
    if standardizer is not None:
        X_train = apply_standardizer(standardizer, X_train)

    if len(grid) > 1:
        cv = grid_search(
            X_train, y_train, grid, k=folds, seed=seed,
            score=cv_objective, jobs=jobs, tol=tol, max_iter=max_iter,
        )
        best = cv.best
    else:
        cv = None
        best = grid[0]

    model = svr_train(X_train, y_train, best, tol=tol, max_iter=max_iter)
    save_model(model, model_path)
    if standardizer is not None:
        save_standardizer(standardizer, model_path.with_suffix(".std1"))
    cv_path = out / "cv_grid.tsv"
    _write_cv_table(cv, folds, cv_path)

    print(f"best hyperparameters: C={best.C} epsilon={best.epsilon} gamma={best.gamma}")
    print(f"trained on {len(split.train_ids)} segments, {model.n_sv} support vectors")
    print(f"wrote {model_path} and {cv_path}")
    return 0


def _test_predictions(corpus, store, split, model, model_path):
    X_test = feature_matrix(store, split.test_ids)
    std_path = model_path.with_suffix(".std1")
    if std_path.exists():
        X_test = apply_standardizer(load_standardizer(std_path), X_test)
    if X_test.shape[1] != model.dim:
        raise ValidationError(
            f"feature dim {X_test.shape[1]} does not match model dim {model.dim}"
        )
    values = svr_predict_batch(model, X_test)
    return {seg_id: float(v) for seg_id, v in zip(split.test_ids, values)}


def cmd_evaluate(args: argparse.Namespace) -> int:
    opt = _Options(args)
    corpus, store = _load_corpus_and_store(opt)
    split = _split_features(corpus, store, opt)
    model_path = Path(opt.require("model"))
    model = load_model(model_path)
    out = _out_dir(opt)

    if getattr(args, "oracle_da", None):
        # Testing hook: score the test set with its own DA values.
        predictions = {i: corpus.by_id(i).da_score for i in split.test_ids}
    else:
        predictions = _test_predictions(corpus, store, split, model, model_path)

    test_corpus = DACorpus(corpus.by_id(i) for i in split.test_ids)
    report = evaluate_metric(predictions, test_corpus, [split.target_pair])
    write_report(report, out / "report.tsv")
    write_scores(predictions, out / "scores.tsv")
    print(format_report(report))
    print(f"held-out pearson ({split.target_pair}): {report.per_pair[split.target_pair]!r}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    opt = _Options(args)
    corpus, store = _load_corpus_and_store(opt)
    model_path = Path(opt.require("model"))
    model = load_model(model_path)
    out = _out_dir(opt)

    ids = corpus.ids()
    X = feature_matrix(store, ids)
    std_path = model_path.with_suffix(".std1")
    if std_path.exists():
        X = apply_standardizer(load_standardizer(std_path), X)
    if X.shape[1] != model.dim:
        raise ValidationError(f"feature dim {X.shape[1]} does not match model dim {model.dim}")
    values = svr_predict_batch(model, X)
    scores_path = out / "scores.tsv"
    write_scores({i: float(v) for i, v in zip(ids, values)}, scores_path)
    print(f"wrote {scores_path} ({len(ids)} scores)")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    opt = _Options(args)
    corpus = parse_corpus(opt.require("corpus"))
    scores_a_path = Path(opt.require("scores-a"))
    scores_b_path = Path(opt.require("scores-b"))
    vocab = load_vocabulary(opt.require("vocab"))
    config = AnalysisConfig(
        top_fraction=opt.get("top-fraction", 0.20, float),
        overlap_threshold=opt.get("overlap-threshold", 0.5, float),
        short_length_max=opt.get("short-length-max", 15, int),
        high_quality_quantile=opt.get("quantile", 0.8, float),
    )
    out = _out_dir(opt)

    report = disagreement_report(
        read_scores(scores_a_path),
        read_scores(scores_b_path),
        list(corpus),
        config,
        vocab,
        metric_a=scores_a_path.stem,
        metric_b=scores_b_path.stem,
    )
    report_path = out / "analysis.tsv"
    write_analysis_report(report, report_path)
    print(format_analysis_report(report))
    print(f"wrote {report_path}")
    return 0


def cmd_baseline(args: argparse.Namespace) -> int:
    opt = _Options(args)
    corpus = parse_corpus(opt.require("corpus"))
    config = BleuConfig(
        max_n=opt.get("max-n", 4, int),
        smoothing=opt.get("smoothing", "add1_positive_n", str),
    )
    out = _out_dir(opt)

    scores = score_corpus(corpus, config)
    report = sentbleu_report(corpus, config)
    scores_path = out / "sentbleu_scores.tsv"
    report_path = out / "sentbleu_report.tsv"
    write_scores(scores, scores_path)
    write_report(report, report_path)
    print(format_report(report, title="SentBLEU vs DA"))
    print(f"wrote {scores_path} and {report_path}")
    return 0


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value file; explicit flags take precedence")
    sub.add_argument("--out-dir", help="directory for output artifacts (default .)")


def _add_pipeline_inputs(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--corpus", help="corpus TSV path")
    sub.add_argument(
        "--embeddings",
        help="EMB1 path, or comma-separated paths combined in order",
    )


def _add_split_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--target-pair", help="held-out language pair, e.g. cs-en")
    sub.add_argument("--test-dataset", help="dataset tag of the held-out slice")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="embmte", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="generate a synthetic corpus + embeddings")
    synth.add_argument("--n", type=int, help="number of segments (default 1000)")
    synth.add_argument("--dim", type=int, help="embedding dimension (default 32)")
    synth.add_argument("--noise-sigma", type=float, help="DA noise sigma (default 0.05)")
    synth.add_argument("--seed", type=int, help="generator seed (default 42)")
    _add_common(synth)
    synth.set_defaults(func=cmd_synth)

    train = subs.add_parser("train", help="grid-search and train a model")
    _add_pipeline_inputs(train)
    _add_split_flags(train)
    train.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
    train.add_argument("--seed", type=int, help="fold-assignment seed (default 42)")
    train.add_argument("--grid", help="grid spec c=..;eps=..;gamma=.. (default paper grid)")
    train.add_argument("--no-standardize", action="store_const", const=True,
                       help="skip feature standardization")
    train.add_argument("--cv-objective", choices=["pearson", "neg_mse"],
                       help="fold scoring objective (default pearson)")
    train.add_argument("--model", help="model output path (default OUT_DIR/model.svr1)")
    train.add_argument("--jobs", type=int, help=f"parallel CV workers (env {JOBS_ENV_VAR})")
    train.add_argument("--tol", type=float, help="solver KKT tolerance (default 1e-3)")
    train.add_argument("--max-iter", type=int, help="solver pair-update budget (default 1e7)")
    _add_common(train)
    train.set_defaults(func=cmd_train)

    evaluate = subs.add_parser("evaluate", help="score a held-out pair with a trained model")
    _add_pipeline_inputs(evaluate)
    _add_split_flags(evaluate)
    evaluate.add_argument("--model", help="model file to evaluate")
    evaluate.add_argument("--oracle-da", action="store_const", const=True,
                          help="testing hook: use DA scores as predictions")
    _add_common(evaluate)
    evaluate.set_defaults(func=cmd_evaluate)

    predict = subs.add_parser("predict", help="score every corpus segment with a model")
    _add_pipeline_inputs(predict)
    predict.add_argument("--model", help="model file")
    _add_common(predict)
    predict.set_defaults(func=cmd_predict)

    analyze = subs.add_parser("analyze", help="disagreement report between two metrics")
    analyze.add_argument("--corpus", help="corpus TSV path")
    analyze.add_argument("--scores-a", help="seg_id/score TSV for metric A")
    analyze.add_argument("--scores-b", help="seg_id/score TSV for metric B")
    analyze.add_argument("--vocab", help="one-token-per-line encoder vocabulary")
    analyze.add_argument("--top-fraction", type=float, help="DA slice to analyze (default 0.2)")
    analyze.add_argument("--overlap-threshold", type=float,
                         help="low word-overlap cutoff (default 0.5)")
    analyze.add_argument("--short-length-max", type=int,
                         help="short-hypothesis token bound (default 15)")
    analyze.add_argument("--quantile", type=float,
                         help="per-metric high-quality quantile (default 0.8)")
    _add_common(analyze)
    analyze.set_defaults(func=cmd_analyze)

    baseline = subs.add_parser("baseline", help="SentBLEU scores and correlation report")
    baseline.add_argument("--corpus", help="corpus TSV path")
    baseline.add_argument("--max-n", type=int, help="highest n-gram order (default 4)")
    baseline.add_argument("--smoothing", choices=["add1_positive_n", "none"],
                          help="smoothing variant (default add1_positive_n)")
    _add_common(baseline)
    baseline.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (None, 0) else int(exc.code)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EmbmteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
