"""Synthetic crash-report corpora with known duplicate structure.

Buckets get one base trace each; members are mutated copies. Bucket sizes
follow a discrete power law, so most buckets are tiny and a few are huge.
Tokens are Java-shaped ("pkgN.ClassM.methodK") and drawn from a skewed
distribution, which gives the corpus both ubiquitous framework-style frames
and rare application frames. Stack-overflow buckets carry long repeated
blocks and the matching exception type.
"""

from __future__ import annotations

import bisect
import itertools
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import InsufficientData, InvalidConfig, IoFailure
from .evaluation import LabeledPair
from .model import CrashReport, Frame, StackTrace

SOE_EXCEPTION = "java.lang.StackOverflowError"

_EXCEPTION_TYPES = (
    "java.lang.NullPointerException",
    "java.lang.IllegalStateException",
    "java.lang.IllegalArgumentException",
    "java.lang.RuntimeException",
    "java.io.IOException",
    "java.lang.ArrayIndexOutOfBoundsException",
    "java.util.ConcurrentModificationException",
    "java.lang.UnsupportedOperationException",
)

_OS_NAMES = ("Linux", "Windows 11", "macOS 14")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    num_buckets: int = 100
    size_exponent: float = 2.0
    max_bucket_size: int = 500
    vocabulary_size: int = 400
    token_skew: float = 1.1
    min_trace_length: int = 4
    max_trace_length: int = 24
    substitution_rate: float = 0.1
    insertion_rate: float = 0.1
    deletion_rate: float = 0.1
    truncation_rate: float = 0.1
    mutation_sites: str = "uniform"  # uniform | deep | shallow
    mutation_pool: str = "any"  # any | common
    recursion_probability: float = 0.0
    recursion_depth: int = 8
    soe_probability: float = 0.0
    soe_depth: int = 200
    common_pool_size: int = 25
    scaffold_frames: int = 3
    # Bucket families produce near-miss non-duplicates: sibling buckets share a
    # family template and differ only in a few rare distinguishing frames.
    family_count: int = 0  # 0 = every bucket is its own family
    family_mutation_rate: float = 0.2
    family_sites: str = "uniform"  # uniform | deep | shallow

    def __post_init__(self) -> None:
        rates = {
            "substitution_rate": self.substitution_rate,
            "insertion_rate": self.insertion_rate,
            "deletion_rate": self.deletion_rate,
            "truncation_rate": self.truncation_rate,
            "recursion_probability": self.recursion_probability,
            "soe_probability": self.soe_probability,
        }
        for name, value in rates.items():
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {value}")
        if self.vocabulary_size < 10:
            raise InvalidConfig(f"vocabulary_size must be >= 10, got {self.vocabulary_size}")
        if self.recursion_depth < 1 or self.soe_depth < 1:
            raise InvalidConfig("recursion depths must be >= 1")
        if self.num_buckets < 1:
            raise InvalidConfig(f"num_buckets must be >= 1, got {self.num_buckets}")
        if not 1 <= self.min_trace_length <= self.max_trace_length:
            raise InvalidConfig("trace length bounds must satisfy 1 <= min <= max")
        if self.size_exponent <= 1.0:
            raise InvalidConfig(f"size_exponent must be > 1, got {self.size_exponent}")
        if self.max_bucket_size < 1:
            raise InvalidConfig("max_bucket_size must be >= 1")
        if self.mutation_sites not in ("uniform", "deep", "shallow"):
            raise InvalidConfig(f"mutation_sites must be uniform/deep/shallow, got {self.mutation_sites!r}")
        if self.mutation_pool not in ("any", "common"):
            raise InvalidConfig(f"mutation_pool must be any/common, got {self.mutation_pool!r}")
        if not 1 <= self.common_pool_size <= self.vocabulary_size:
            raise InvalidConfig("common_pool_size must be within the vocabulary")
        if self.scaffold_frames < 0:
            raise InvalidConfig("scaffold_frames must be >= 0")
        if self.family_count < 0:
            raise InvalidConfig("family_count must be >= 0")
        if not 0.0 <= self.family_mutation_rate <= 1.0:
            raise InvalidConfig("family_mutation_rate must be in [0, 1]")
        if self.family_sites not in ("uniform", "deep", "shallow"):
            raise InvalidConfig(f"family_sites must be uniform/deep/shallow, got {self.family_sites!r}")


class _TokenSampler:
    """Skewed vocabulary sampler; low indices are the common 'framework' tokens."""

    def __init__(self, cfg: GeneratorConfig) -> None:
        self.tokens = [
            f"pkg{i // 100}.Class{(i // 10) % 10}.method{i % 10}"
            for i in range(cfg.vocabulary_size)
        ]
        self.common = self.tokens[: cfg.common_pool_size]
        weights = [1.0 / (i + 1) ** cfg.token_skew for i in range(cfg.vocabulary_size)]
        self._cum = list(itertools.accumulate(weights))

    def draw(self, rng: random.Random) -> str:
        u = rng.random() * self._cum[-1]
        return self.tokens[bisect.bisect_left(self._cum, u)]

    def draw_rare(self, rng: random.Random) -> str:
        return self.tokens[rng.randrange(len(self.common), len(self.tokens))]

    def draw_common(self, rng: random.Random) -> str:
        return self.common[rng.randrange(len(self.common))]


def _frame(rng: random.Random, token: str) -> Frame:
    file = token.split(".")[1] + ".java"
    return Frame(token, file, rng.randint(5, 500))


def _mutation_probability(rate: float, position: int, length: int, sites: str) -> float:
    if sites == "uniform" or length <= 1:
        return rate
    ramp = (position + 1) / length
    if sites == "deep":
        return min(1.0, 2.0 * rate * ramp)
    return min(1.0, 2.0 * rate * (1.0 - ramp) + 2.0 * rate / length)


@dataclass
class _BucketTemplate:
    bucket_id: str
    exception_type: str
    message: str | None
    head: list[Frame]
    block: list[Frame] = field(default_factory=list)
    repeats: int = 0
    tail: list[Frame] = field(default_factory=list)

    @property
    def is_soe(self) -> bool:
        return self.exception_type == SOE_EXCEPTION


def _power_law_size(rng: random.Random, cfg: GeneratorConfig) -> int:
    u = rng.random()
    size = int((1.0 - u) ** (-1.0 / (cfg.size_exponent - 1.0)))
    return max(1, min(cfg.max_bucket_size, size))


def _base_template(
    rng: random.Random,
    cfg: GeneratorConfig,
    sampler: _TokenSampler,
    b: int,
    families: Sequence[Sequence[Frame]],
) -> _BucketTemplate:
    bucket_id = f"b{b:04d}"
    soe = rng.random() < cfg.soe_probability
    scaffold = [_frame(rng, sampler.draw_common(rng)) for _ in range(cfg.scaffold_frames)]
    if soe:
        block = [_frame(rng, sampler.draw_rare(rng)) for _ in range(rng.randint(1, 3))]
        repeats = max(2, cfg.soe_depth // len(block))
        head = [_frame(rng, sampler.draw(rng)) for _ in range(rng.randint(1, 3))]
        return _BucketTemplate(
            bucket_id, SOE_EXCEPTION, None, head, block, repeats, scaffold
        )
    if families:
        parent = families[rng.randrange(len(families))]
        n = len(parent)
        head = list(parent)
        changed = False
        for i in range(n):
            p = _mutation_probability(cfg.family_mutation_rate, i, n, cfg.family_sites)
            if rng.random() < p:
                head[i] = _frame(rng, sampler.draw_rare(rng))
                changed = True
        if not changed:
            # sibling buckets must stay distinguishable
            head[rng.randrange(n)] = _frame(rng, sampler.draw_rare(rng))
    else:
        length = rng.randint(cfg.min_trace_length, cfg.max_trace_length)
        head = [_frame(rng, sampler.draw(rng)) for _ in range(length)]
    exception = _EXCEPTION_TYPES[rng.randrange(len(_EXCEPTION_TYPES))]
    message = f"synthetic failure {b}" if rng.random() < 0.7 else None
    return _BucketTemplate(bucket_id, exception, message, head, tail=scaffold)


def _draw_replacement(rng: random.Random, cfg: GeneratorConfig, sampler: _TokenSampler) -> Frame:
    if cfg.mutation_pool == "common":
        return _frame(rng, sampler.draw_common(rng))
    return _frame(rng, sampler.draw(rng))


def _mutate_frames(
    rng: random.Random,
    cfg: GeneratorConfig,
    sampler: _TokenSampler,
    frames: Sequence[Frame],
    *,
    truncate: bool = True,
) -> list[Frame]:
    out: list[Frame] = []
    n = len(frames)
    for i, frame in enumerate(frames):
        if rng.random() < _mutation_probability(cfg.deletion_rate, i, n, cfg.mutation_sites):
            continue
        if rng.random() < _mutation_probability(cfg.substitution_rate, i, n, cfg.mutation_sites):
            out.append(_draw_replacement(rng, cfg, sampler))
        else:
            out.append(frame)
        if rng.random() < _mutation_probability(cfg.insertion_rate, i, n, cfg.mutation_sites):
            out.append(_draw_replacement(rng, cfg, sampler))
    if not out:
        out = [frames[0]]
    if truncate and cfg.truncation_rate > 0 and rng.random() < cfg.truncation_rate and len(out) > 1:
        cut = rng.randint(1, max(1, len(out) // 4))
        out = out[: max(1, len(out) - cut)]
    if cfg.recursion_probability > 0 and rng.random() < cfg.recursion_probability and out:
        pos = rng.randrange(len(out))
        block_len = min(rng.randint(1, 3), len(out) - pos)
        block = out[pos : pos + block_len]
        out = out[:pos] + block * cfg.recursion_depth + out[pos + block_len :]
    return out


def _member_trace(
    rng: random.Random, cfg: GeneratorConfig, sampler: _TokenSampler, template: _BucketTemplate
) -> StackTrace:
    no_mutation = (
        cfg.substitution_rate == 0
        and cfg.insertion_rate == 0
        and cfg.deletion_rate == 0
        and cfg.truncation_rate == 0
        and cfg.recursion_probability == 0
    )
    if template.is_soe:
        jitter = 0 if no_mutation else template.repeats // 10
        repeats = max(2, template.repeats + rng.randint(-jitter, jitter))
        head = (
            list(template.head)
            if no_mutation
            else _mutate_frames(rng, cfg, sampler, template.head, truncate=False)
        )
        tail = (
            list(template.tail)
            if no_mutation
            else _mutate_frames(rng, cfg, sampler, template.tail, truncate=False)
        )
        frames = template.block * repeats + head + tail
        return StackTrace(tuple(frames), template.exception_type, template.message)
    if no_mutation:
        frames = template.head + template.tail
    else:
        frames = _mutate_frames(rng, cfg, sampler, template.head, truncate=True) + list(template.tail)
    return StackTrace(tuple(frames), template.exception_type, template.message)


def generate_corpus(cfg: GeneratorConfig) -> tuple[list[CrashReport], dict[str, str]]:
    """Generate reports plus the ground-truth report-id -> bucket-id map."""
    rng = random.Random(cfg.seed)
    sampler = _TokenSampler(cfg)
    families: list[list[Frame]] = []
    for _ in range(cfg.family_count):
        length = rng.randint(cfg.min_trace_length, cfg.max_trace_length)
        families.append([_frame(rng, sampler.draw(rng)) for _ in range(length)])
    reports: list[CrashReport] = []
    truth: dict[str, str] = {}
    for b in range(cfg.num_buckets):
        template = _base_template(rng, cfg, sampler, b, families)
        size = _power_law_size(rng, cfg)
        for _ in range(size):
            trace = _member_trace(rng, cfg, sampler, template)
            report_id = f"r{len(reports):06d}"
            metadata = {
                "os": _OS_NAMES[rng.randrange(len(_OS_NAMES))],
                "version": f"2024.{rng.randint(1, 3)}",
            }
            reports.append(CrashReport(report_id, trace, metadata))
            truth[report_id] = template.bucket_id
    return reports, truth


def derive_pairs(
    reports: Sequence[CrashReport],
    truth: Mapping[str, str],
    num_pos: int,
    num_neg: int,
    seed: int,
) -> list[LabeledPair]:
    """Sample labeled pairs: positives within buckets, negatives across them."""
    if num_pos < 0 or num_neg < 0:
        raise ValueError("pair counts must be >= 0")
    rng = random.Random(seed)
    by_bucket: dict[str, list[str]] = {}
    for report in reports:
        by_bucket.setdefault(truth[report.id], []).append(report.id)
    positives_all = [
        (a, b)
        for bucket in sorted(by_bucket)
        for a, b in itertools.combinations(sorted(by_bucket[bucket]), 2)
    ]
    total = len(reports)
    total_neg = total * (total - 1) // 2 - len(positives_all)
    if num_pos > len(positives_all):
        raise InsufficientData(
            f"requested {num_pos} positive pairs but only {len(positives_all)} exist"
        )
    if num_neg > total_neg:
        raise InsufficientData(
            f"requested {num_neg} negative pairs but only {total_neg} exist"
        )
    positives = rng.sample(positives_all, num_pos)
    ids = sorted(truth)
    negatives: set[tuple[str, str]] = set()
    attempts = 0
    cap = 100 * num_neg + 1000
    while len(negatives) < num_neg and attempts < cap:
        attempts += 1
        a = ids[rng.randrange(total)]
        b = ids[rng.randrange(total)]
        if a == b or truth[a] == truth[b]:
            continue
        negatives.add((a, b) if a < b else (b, a))
    if len(negatives) < num_neg:
        # Dense request; enumerate the full cross-bucket pair set instead.
        everything = [
            (a, b)
            for a, b in itertools.combinations(ids, 2)
            if truth[a] != truth[b]
        ]
        negatives = set(rng.sample(everything, num_neg))
    pairs = [LabeledPair(a, b, True) for a, b in sorted(positives)]
    pairs += [LabeledPair(a, b, False) for a, b in sorted(negatives)]
    return pairs


def save_truth(truth: Mapping[str, str], path: str | Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(dict(sorted(truth.items())), fp, sort_keys=True, indent=2)
            fp.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write truth map to {path}: {exc}") from exc


def load_truth(path: str | Path) -> dict[str, str]:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read truth map from {path}: {exc}") from exc
    except ValueError as exc:
        raise IoFailure(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise IoFailure(f"{path}: expected an object mapping report id to bucket id")
    return {str(k): str(v) for k, v in obj.items()}


def bucket_sizes(truth: Mapping[str, str]) -> list[int]:
    """Issue sizes from a truth map, ordered by bucket id."""
    counts: dict[str, int] = {}
    for bucket in truth.values():
        counts[bucket] = counts.get(bucket, 0) + 1
    return [counts[bucket] for bucket in sorted(counts)]
