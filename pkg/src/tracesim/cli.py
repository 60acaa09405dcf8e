"""Command-line entry point: parse, index, sim, eval, ablate, tune, synth, stats.

Exit codes: 0 success, 1 usage error, 2 data error. All randomness flows from
explicit ``--seed`` flags and every JSON output is rendered with sorted keys
and six-significant-digit floats, so re-running a command reproduces its
outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import jsonio
from .baselines import RebucketParams
from .core import Hyperparams
from .errors import TraceSimError
from .evaluation import (
    DEFAULT_EVAL_METHODS,
    METHOD_NAMES,
    EvalReport,
    LabeledPair,
    load_pairs,
    make_scorer,
    rank_reports,
    roc_points,
    run_ablation,
    score_methods,
    split_pairs,
    issue_size_buckets,
)
from .index import build_index, load_index, save_index
from .model import (
    corpus_traces,
    load_corpus,
    parse_corpus_text,
    parse_report,
    save_corpus,
)
from .synth import GeneratorConfig, bucket_sizes, derive_pairs, generate_corpus, load_truth, save_truth
from .tuning import SearchSpace, tune


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(parser, *flags):
    if "corpus" in flags:
        parser.add_argument("--corpus", help="corpus JSON Lines file")
    if "index" in flags:
        parser.add_argument("--index", help="index JSON file (built from --corpus when omitted)")
    if "pairs" in flags:
        parser.add_argument("--pairs", required=True, help="labeled pairs JSON Lines file")
    if "params" in flags:
        parser.add_argument("--params", help="params JSON (alpha/beta/gamma, rebucket_c/o, moroo_weight)")
    if "split" in flags:
        parser.add_argument("--train-fraction", type=float, default=0.8)
        parser.add_argument("--split", choices=("test", "train", "all"), default="test",
                            help="which side of the split to score (default: test)")
    if "seed" in flags:
        parser.add_argument("--seed", type=int, default=0)
    if "threads" in flags:
        parser.add_argument("--threads", type=int, default=1)
    if "out" in flags:
        parser.add_argument("--out", help="output JSON path (a CSV twin is written next to it)")
    if "figures" in flags:
        parser.add_argument("--figures", help="directory for PNG figures (default: next to --out)")
        parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tracesim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="raw crash-report text to corpus JSONL")
    p.add_argument("--input", required=True, help="raw report file or directory")
    p.add_argument("--out", required=True, help="corpus JSONL output")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("index", help="build the document-frequency index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="index JSON output")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("sim", help="score one pair of reports")
    p.add_argument("a", help="report id (with --corpus) or raw report file")
    p.add_argument("b", help="report id (with --corpus) or raw report file")
    _add_common(p, "corpus", "index", "params")
    p.add_argument("--method", choices=METHOD_NAMES, default="tracesim")
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("eval", help="rank similarity methods by test-split ROC AUC")
    _add_common(p, "corpus", "index", "pairs", "params", "split", "seed", "threads", "out", "figures")
    p.add_argument("--method", action="append", choices=METHOD_NAMES,
                   help="repeatable; default compares the standard method set")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ablate", help="score TraceSim with each step switched off")
    _add_common(p, "corpus", "index", "pairs", "params", "seed", "threads", "out", "figures")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("tune", help="search hyperparameters on the train split")
    _add_common(p, "corpus", "index", "pairs", "params", "seed", "threads", "out")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--budget", type=int, default=50)
    p.add_argument("--strategy", choices=("random", "tpe"), default="random")
    p.add_argument("--method", choices=METHOD_NAMES, default="tracesim")
    p.add_argument("--space", help="JSON file overriding the default search space")
    p.add_argument("--params-out", help="write the best params as a params JSON")
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--buckets", type=int, default=100)
    p.add_argument("--vocabulary", type=int, default=400)
    p.add_argument("--num-pos", type=int, default=500)
    p.add_argument("--num-neg", type=int, default=500)
    p.add_argument("--substitution-rate", type=float, default=0.1)
    p.add_argument("--insertion-rate", type=float, default=0.1)
    p.add_argument("--deletion-rate", type=float, default=0.1)
    p.add_argument("--truncation-rate", type=float, default=0.1)
    p.add_argument("--soe-probability", type=float, default=0.0)
    p.add_argument("--config", help="JSON file with full GeneratorConfig overrides")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("stats", help="issue-size bucket histogram from a truth map")
    p.add_argument("--truth", required=True, help="bucket map JSON (report id -> bucket id)")
    p.add_argument("--out", help="output JSON path")
    _add_common(p, "figures")
    p.set_defaults(func=_cmd_stats)

    return parser


def _load_params_file(path: str | None) -> dict:
    if path is None:
        return {}
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: params file must be a JSON object")
    return obj


def _hyperparams(params: dict, index) -> Hyperparams:
    base = Hyperparams.default(index)
    return Hyperparams(
        float(params.get("alpha", base.alpha)),
        float(params.get("beta", base.beta)),
        float(params.get("gamma", base.gamma)),
    )


def _rebucket(params: dict) -> RebucketParams:
    return RebucketParams(
        float(params.get("rebucket_c", 1.0)), float(params.get("rebucket_o", 1.0))
    )


def _load_corpus_and_index(args):
    if not args.corpus:
        raise ValueError("--corpus is required for this command")
    reports = load_corpus(args.corpus)
    traces = corpus_traces(reports)
    if getattr(args, "index", None):
        index = load_index(args.index)
    else:
        index = build_index(traces.values())
    return reports, traces, index


def _print_table(header: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
              for i in range(len(header))]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip())
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())


def _report_rows(reports: list[EvalReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        reduction = f"{r.error_reduction:.1f}" if r.error_reduction is not None else "-"
        rows.append(
            [r.method, f"{r.roc_auc:.4f}", str(r.num_pairs), str(r.num_positive),
             str(r.num_negative), reduction]
        )
    return rows


_TABLE_HEADER = ["method", "roc_auc", "pairs", "positives", "negatives", "error_red_%"]


def _write_report_files(reports: list[EvalReport], extra: dict, out: str) -> None:
    payload = {"reports": [r.to_dict() for r in reports], **extra}
    jsonio.dump(payload, out)
    csv_path = Path(out).with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(_TABLE_HEADER)
        for r in reports:
            writer.writerow(
                [r.method, f"{r.roc_auc:.6g}", r.num_pairs, r.num_positive, r.num_negative,
                 "" if r.error_reduction is None else f"{r.error_reduction:.6g}"]
            )


def _figure_dir(args, default_stem: str) -> tuple[Path, str] | None:
    if getattr(args, "no_figures", False):
        return None
    if getattr(args, "figures", None):
        directory = Path(args.figures)
        stem = Path(args.out).stem if getattr(args, "out", None) else default_stem
    elif getattr(args, "out", None):
        directory = Path(args.out).parent
        stem = Path(args.out).stem
    else:
        return None
    directory.mkdir(parents=True, exist_ok=True)
    return directory, stem


def _select_pairs(args, pairs: list[LabeledPair]) -> list[LabeledPair]:
    if getattr(args, "split", "test") == "all":
        return pairs
    train, test = split_pairs(pairs, args.train_fraction, args.seed)
    return train if args.split == "train" else test


def _cmd_parse(args) -> int:
    reports = parse_corpus_text(args.input)
    save_corpus(reports, args.out)
    print(f"parsed {len(reports)} reports -> {args.out}")
    return 0


def _cmd_index(args) -> int:
    reports = load_corpus(args.corpus)
    index = build_index(r.trace for r in reports)
    save_index(index, args.out)
    print(f"indexed {index.total_traces} traces, {len(index.df)} distinct frames -> {args.out}")
    return 0


def _cmd_sim(args) -> int:
    if args.corpus:
        reports = load_corpus(args.corpus)
        by_id = {r.id: r for r in reports}
        try:
            trace_a, trace_b = by_id[args.a].trace, by_id[args.b].trace
        except KeyError as exc:
            raise ValueError(f"unknown report id {exc.args[0]!r} in {args.corpus}") from exc
        index = load_index(args.index) if args.index else build_index(r.trace for r in reports)
    else:
        if not args.index:
            raise ValueError("sim needs --index when scoring raw files (or pass --corpus)")
        trace_a = parse_report(Path(args.a).read_text(encoding="utf-8")).trace
        trace_b = parse_report(Path(args.b).read_text(encoding="utf-8")).trace
        index = load_index(args.index)
    params = _load_params_file(args.params)
    scorer = make_scorer(
        args.method,
        index,
        hp=_hyperparams(params, index),
        rebucket=_rebucket(params),
        moroo_weight=float(params.get("moroo_weight", 0.5)),
    )
    print(str(round(scorer(trace_a, trace_b), 6)))
    return 0


def _cmd_eval(args) -> int:
    _, traces, index = _load_corpus_and_index(args)
    pairs = load_pairs(args.pairs)
    selected = _select_pairs(args, pairs)
    params = _load_params_file(args.params)
    methods = tuple(args.method) if args.method else DEFAULT_EVAL_METHODS
    scores = score_methods(
        traces, index, selected, methods,
        hp=_hyperparams(params, index),
        rebucket=_rebucket(params),
        moroo_weight=float(params.get("moroo_weight", 0.5)),
        threads=args.threads,
    )
    reports = rank_reports(scores)
    _print_table(_TABLE_HEADER, _report_rows(reports))
    if args.out:
        _write_report_files(
            reports,
            {"split": args.split, "train_fraction": args.train_fraction, "seed": args.seed},
            args.out,
        )
    figure_target = _figure_dir(args, "eval")
    if figure_target is not None:
        from . import plots

        directory, stem = figure_target
        plots.plot_method_comparison(reports, directory / f"{stem}_auc.png")
        plots.plot_roc_curves(
            {m: roc_points(scores[m]) for m in methods}, directory / f"{stem}_roc.png"
        )
    return 0


def _cmd_ablate(args) -> int:
    _, traces, index = _load_corpus_and_index(args)
    pairs = load_pairs(args.pairs)
    params = _load_params_file(args.params)
    reports = run_ablation(
        traces, pairs, _hyperparams(params, index),
        index=index, train_fraction=args.train_fraction, seed=args.seed, threads=args.threads,
    )
    _print_table(_TABLE_HEADER, _report_rows(reports))
    if args.out:
        _write_report_files(
            reports, {"train_fraction": args.train_fraction, "seed": args.seed}, args.out
        )
    figure_target = _figure_dir(args, "ablate")
    if figure_target is not None:
        from . import plots

        directory, stem = figure_target
        plots.plot_ablation(reports, directory / f"{stem}_ablation.png")
    return 0


def _cmd_tune(args) -> int:
    _, traces, index = _load_corpus_and_index(args)
    pairs = load_pairs(args.pairs)
    train, _ = split_pairs(pairs, args.train_fraction, args.seed)
    space = SearchSpace.from_mapping(json.loads(Path(args.space).read_text())) if args.space else None
    params = _load_params_file(args.params)
    result = tune(
        traces, train, space, args.budget, args.seed, args.strategy,
        method=args.method, index=index,
        hp=_hyperparams(params, index), rebucket=_rebucket(params),
        moroo_weight=float(params.get("moroo_weight", 0.5)),
        threads=args.threads,
    )
    best = ", ".join(f"{k}={v:.4g}" for k, v in result.best_params.items())
    print(f"best {result.method} train AUC {result.best_auc:.4f} with {best} "
          f"({len(result.trials)} trials, strategy={result.strategy})")
    if args.out:
        jsonio.dump(result.to_dict(), args.out)
    if args.params_out:
        jsonio.dump(result.best_params, args.params_out)
    return 0


def _cmd_synth(args) -> int:
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(overrides, dict):
            raise ValueError(f"{args.config}: config file must be a JSON object")
    cfg = GeneratorConfig(
        seed=args.seed,
        num_buckets=args.buckets,
        vocabulary_size=args.vocabulary,
        substitution_rate=args.substitution_rate,
        insertion_rate=args.insertion_rate,
        deletion_rate=args.deletion_rate,
        truncation_rate=args.truncation_rate,
        soe_probability=args.soe_probability,
    )
    if overrides:
        cfg = replace(cfg, **overrides)
    reports, truth = generate_corpus(cfg)
    pairs = derive_pairs(reports, truth, args.num_pos, args.num_neg, args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_corpus(reports, out_dir / "corpus.jsonl")
    save_truth(truth, out_dir / "truth.json")
    from .evaluation import save_pairs

    save_pairs(pairs, out_dir / "pairs.jsonl")
    n_buckets = len(set(truth.values()))
    print(
        f"generated {len(reports)} reports in {n_buckets} buckets, "
        f"{len(pairs)} labeled pairs -> {out_dir}"
    )
    return 0


def _cmd_stats(args) -> int:
    truth = load_truth(args.truth)
    sizes = bucket_sizes(truth)
    stats = issue_size_buckets(sizes)
    rows = []
    for (lo, hi), issues, reports_n in zip(stats.edges(), stats.issue_counts, stats.report_counts):
        closing = "]" if hi == 1.0 else ")"
        rows.append([f"[{lo:.1f},{hi:.1f}{closing}", str(issues), str(reports_n)])
    _print_table(["size_bucket", "issues", "reports"], rows)
    if args.out:
        jsonio.dump(
            {
                "issue_counts": list(stats.issue_counts),
                "report_counts": list(stats.report_counts),
                "max_size": stats.max_size,
                "num_issues": len(sizes),
            },
            args.out,
        )
    figure_target = _figure_dir(args, "stats")
    if figure_target is not None:
        from . import plots

        directory, stem = figure_target
        plots.plot_bucket_histogram(stats, directory / f"{stem}_buckets.png")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TraceSimError, ValueError, KeyError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
