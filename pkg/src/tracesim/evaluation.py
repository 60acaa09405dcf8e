"""Scoring labeled pairs: splits, ROC AUC, error reduction, ablations, stats."""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .baselines import (
    RebucketParams,
    cosine_sim,
    lerch_sim,
    moroo_sim,
    plain_levenshtein_sim,
    prefix_match,
    rebucket_sim,
)
from .core import Hyperparams, TraceSimOptions, TraceSimScorer
from .errors import (
    DegenerateLabels,
    DegenerateSizes,
    InsufficientPairs,
    IoFailure,
    MalformedReport,
)
from .index import CorpusIndex, build_index
from .model import StackTrace

Scorer = Callable[[StackTrace, StackTrace], float]


@dataclass(frozen=True)
class LabeledPair:
    """Two report ids plus a duplicate (True) / non-duplicate (False) label."""

    id_a: str
    id_b: str
    label: bool

    def __post_init__(self) -> None:
        if self.id_a == self.id_b:
            raise ValueError(f"labeled pair must reference two distinct reports: {self.id_a!r}")


@dataclass
class EvalReport:
    """One ranked row of the method-comparison table."""

    method: str
    roc_auc: float
    num_pairs: int
    num_positive: int
    num_negative: int
    error_reduction: float | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "roc_auc": self.roc_auc,
            "num_pairs": self.num_pairs,
            "num_positive": self.num_positive,
            "num_negative": self.num_negative,
            "error_reduction": self.error_reduction,
        }


def split_pairs(
    pairs: Sequence[LabeledPair], train_fraction: float, seed: int
) -> tuple[list[LabeledPair], list[LabeledPair]]:
    """Deterministic shuffled split; train gets round(fraction * n) pairs."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = list(pairs)
    n_train = round(train_fraction * len(order))
    if n_train <= 0 or n_train >= len(order):
        raise InsufficientPairs(
            f"cannot split {len(order)} pairs at fraction {train_fraction}: "
            "one side would be empty"
        )
    random.Random(seed).shuffle(order)
    return order[:n_train], order[n_train:]


def roc_auc(scored: Iterable[tuple[float, bool]]) -> float:
    """Probability a random positive outscores a random negative; ties count 0.5.

    Computed from midranks (the Mann-Whitney statistic), so it is exact for
    any tie structure.
    """
    points = [(float(score), bool(label)) for score, label in scored]
    n_pos = sum(1 for _, label in points if label)
    n_neg = len(points) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(
            f"ROC AUC needs both classes, got {n_pos} positives / {n_neg} negatives"
        )
    points.sort(key=lambda p: p[0])
    rank_sum_pos = 0.0
    i = 0
    while i < len(points):
        j = i
        while j < len(points) and points[j][0] == points[i][0]:
            j += 1
        midrank = (i + 1 + j) / 2
        rank_sum_pos += midrank * sum(1 for k in range(i, j) if points[k][1])
        i = j
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def roc_points(scored: Iterable[tuple[float, bool]]) -> list[tuple[float, float]]:
    """(FPR, TPR) polyline for plotting, thresholds swept from high to low."""
    points = sorted(((float(s), bool(l)) for s, l in scored), key=lambda p: -p[0])
    n_pos = sum(1 for _, label in points if label)
    n_neg = len(points) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("ROC curve needs both classes")
    curve = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(points):
        j = i
        while j < len(points) and points[j][0] == points[i][0]:
            j += 1
        tp += sum(1 for k in range(i, j) if points[k][1])
        fp += (j - i) - sum(1 for k in range(i, j) if points[k][1])
        curve.append((fp / n_neg, tp / n_pos))
        i = j
    return curve


def error_reduction(auc_better: float, auc_worse: float) -> float:
    """Percent of the remaining error removed: (better - worse) * 100 / (1 - worse)."""
    if auc_worse >= 1.0:
        raise ZeroDivisionError("error reduction undefined when the worse AUC is 1.0")
    return (auc_better - auc_worse) * 100.0 / (1.0 - auc_worse)


_TRACESIM_VARIANTS: dict[str, dict] = {
    "tracesim": {},
    "tracesim-no-gw": {"use_global_weight": False},
    "tracesim-no-lw": {"use_local_weight": False},
    "tracesim-no-soe": {"soe_path": False},
}

ABLATION_METHODS = ("tracesim", "tracesim-no-soe", "tracesim-no-lw", "tracesim-no-gw")

METHOD_NAMES = (
    "tracesim",
    "tracesim-no-gw",
    "tracesim-no-lw",
    "tracesim-no-soe",
    "prefix",
    "levenshtein",
    "cosine",
    "cosine-idf",
    "lerch",
    "rebucket",
    "moroo",
)

DEFAULT_EVAL_METHODS = (
    "tracesim",
    "moroo",
    "lerch",
    "cosine-idf",
    "rebucket",
    "cosine",
    "levenshtein",
    "prefix",
)


def make_scorer(
    method: str,
    index: CorpusIndex,
    *,
    hp: Hyperparams | None = None,
    rebucket: RebucketParams | None = None,
    moroo_weight: float = 0.5,
    options: TraceSimOptions | None = None,
) -> Scorer:
    """Build a pairwise scorer for a registered method name."""
    if method in _TRACESIM_VARIANTS:
        base = options or TraceSimOptions()
        opts = replace(base, **_TRACESIM_VARIANTS[method])
        return TraceSimScorer(index, hp or Hyperparams.default(index), opts)
    if method == "prefix":
        return prefix_match
    if method == "levenshtein":
        return plain_levenshtein_sim
    if method == "cosine":
        return lambda a, b: cosine_sim(a, b, use_idf=False)
    if method == "cosine-idf":
        return lambda a, b: cosine_sim(a, b, index, use_idf=True)
    if method == "lerch":
        return lambda a, b: lerch_sim(a, b, index)
    if method == "rebucket":
        params = rebucket or RebucketParams()
        return lambda a, b: rebucket_sim(a, b, params)
    if method == "moroo":
        params = rebucket or RebucketParams()
        return lambda a, b: moroo_sim(a, b, index, params, moroo_weight)
    raise ValueError(f"unknown similarity method {method!r}")


def score_pairs(
    traces: Mapping[str, StackTrace],
    pairs: Sequence[LabeledPair],
    scorer: Scorer,
    threads: int = 1,
) -> list[tuple[float, bool]]:
    """Score every pair; results are in pair order regardless of thread count."""

    def one(pair: LabeledPair) -> tuple[float, bool]:
        try:
            ta = traces[pair.id_a]
            tb = traces[pair.id_b]
        except KeyError as exc:
            raise ValueError(f"pair references unknown report id {exc.args[0]!r}") from exc
        return scorer(ta, tb), pair.label

    if threads <= 1:
        return [one(pair) for pair in pairs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, pairs))


def score_methods(
    traces: Mapping[str, StackTrace],
    index: CorpusIndex,
    pairs: Sequence[LabeledPair],
    methods: Sequence[str],
    *,
    hp: Hyperparams | None = None,
    rebucket: RebucketParams | None = None,
    moroo_weight: float = 0.5,
    options: TraceSimOptions | None = None,
    threads: int = 1,
) -> dict[str, list[tuple[float, bool]]]:
    out: dict[str, list[tuple[float, bool]]] = {}
    for method in methods:
        scorer = make_scorer(
            method, index, hp=hp, rebucket=rebucket, moroo_weight=moroo_weight, options=options
        )
        out[method] = score_pairs(traces, pairs, scorer, threads)
    return out


def rank_reports(scores_by_method: Mapping[str, Sequence[tuple[float, bool]]]) -> list[EvalReport]:
    """EvalReport rows sorted by AUC, each with error reduction vs the next-worse row."""
    rows = []
    for method, scored in scores_by_method.items():
        n_pos = sum(1 for _, label in scored if label)
        rows.append(
            EvalReport(method, roc_auc(scored), len(scored), n_pos, len(scored) - n_pos)
        )
    rows.sort(key=lambda r: (-r.roc_auc, r.method))
    for row, nxt in zip(rows, rows[1:]):
        if nxt.roc_auc < 1.0:
            row.error_reduction = error_reduction(row.roc_auc, nxt.roc_auc)
    return rows


def evaluate_methods(
    traces: Mapping[str, StackTrace],
    index: CorpusIndex,
    pairs: Sequence[LabeledPair],
    methods: Sequence[str] = DEFAULT_EVAL_METHODS,
    **kwargs,
) -> list[EvalReport]:
    return rank_reports(score_methods(traces, index, pairs, methods, **kwargs))


def run_ablation(
    traces: Mapping[str, StackTrace],
    pairs: Sequence[LabeledPair],
    hp: Hyperparams | None = None,
    *,
    index: CorpusIndex | None = None,
    train_fraction: float = 0.8,
    seed: int = 0,
    threads: int = 1,
) -> list[EvalReport]:
    """Test-split ROC AUC of full TraceSim and its three switched-off variants."""
    if index is None:
        index = build_index(traces.values())
    _, test = split_pairs(pairs, train_fraction, seed)
    scores = score_methods(traces, index, test, ABLATION_METHODS, hp=hp, threads=threads)
    reports = []
    for method in ABLATION_METHODS:
        scored = scores[method]
        n_pos = sum(1 for _, label in scored if label)
        reports.append(
            EvalReport(method, roc_auc(scored), len(scored), n_pos, len(scored) - n_pos)
        )
    return reports


@dataclass(frozen=True)
class BucketStats:
    """Ten-bucket histogram of issue sizes on a normalised log scale."""

    issue_counts: tuple[int, ...]
    report_counts: tuple[int, ...]
    max_size: int

    @staticmethod
    def edges() -> list[tuple[float, float]]:
        return [(k / 10, (k + 1) / 10) for k in range(10)]


def issue_size_buckets(issue_sizes: Sequence[int]) -> BucketStats:
    """Assign each issue to one of ten log-scaled size buckets.

    An issue of size s lands in bucket k when ln(s)/ln(max size) falls in
    [k/10, (k+1)/10), with the top bucket closed. The boundary test uses
    integer powers (s**10 >= max**k), which is exact where float logs round
    the wrong way at bucket edges.
    """
    sizes = [int(s) for s in issue_sizes]
    if not sizes:
        raise ValueError("issue_sizes must be non-empty")
    if any(s < 1 for s in sizes):
        raise ValueError("issue sizes must be >= 1")
    max_size = max(sizes)
    if max_size < 2:
        raise DegenerateSizes("all issues have size 1; the log scale is degenerate")
    powers = [max_size**k for k in range(11)]
    issue_counts = [0] * 10
    report_counts = [0] * 10
    for s in sizes:
        s10 = s**10
        bucket = 0
        while bucket < 9 and s10 >= powers[bucket + 1]:
            bucket += 1
        issue_counts[bucket] += 1
        report_counts[bucket] += s
    return BucketStats(tuple(issue_counts), tuple(report_counts), max_size)


def save_pairs(pairs: Iterable[LabeledPair], path: str | Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fp:
            for pair in pairs:
                fp.write(
                    json.dumps(
                        {"a": pair.id_a, "b": pair.id_b, "label": pair.label},
                        sort_keys=True,
                    )
                )
                fp.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write pairs to {path}: {exc}") from exc


def load_pairs(path: str | Path) -> list[LabeledPair]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read pairs from {path}: {exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            pairs.append(LabeledPair(obj["a"], obj["b"], bool(obj["label"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedReport(f"{path}:{lineno}: bad pair record: {exc}") from exc
    if not pairs:
        raise MalformedReport(f"{path}: pairs file contains no pairs")
    return pairs
