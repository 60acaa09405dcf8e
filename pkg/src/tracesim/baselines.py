"""Comparison metrics the evaluation harness ranks against TraceSim."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .core import _cosine, soe_similarity
from .index import CorpusIndex
from .model import StackTrace, trace_tokens


@dataclass(frozen=True)
class RebucketParams:
    """Decay coefficients: ``c`` from the top of the stack, ``o`` per alignment offset."""

    c: float = 1.0
    o: float = 1.0

    def __post_init__(self) -> None:
        for name in ("c", "o"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


def _require_non_empty(a: StackTrace, b: StackTrace) -> None:
    if not a.frames or not b.frames:
        raise ValueError("similarity requires non-empty traces")


def prefix_match(a: StackTrace, b: StackTrace) -> float:
    """Longest common token prefix over the longer trace length."""
    _require_non_empty(a, b)
    ta, tb = trace_tokens(a), trace_tokens(b)
    common = 0
    for x, y in zip(ta, tb):
        if x != y:
            break
        common += 1
    return common / max(len(ta), len(tb))


def plain_levenshtein_sim(a: StackTrace, b: StackTrace) -> float:
    """1 - unit-cost edit distance / max length."""
    _require_non_empty(a, b)
    ta, tb = trace_tokens(a), trace_tokens(b)
    n, m = len(ta), len(tb)
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        token = ta[i - 1]
        for j in range(1, m + 1):
            cur[j] = min(
                prev[j] + 1,
                cur[j - 1] + 1,
                prev[j - 1] + (0 if token == tb[j - 1] else 1),
            )
        prev = cur
    return 1.0 - prev[m] / max(n, m)


def cosine_sim(
    a: StackTrace,
    b: StackTrace,
    index: CorpusIndex | None = None,
    use_idf: bool = False,
) -> float:
    """Cosine over token-count vectors, optionally weighted by IDF."""
    _require_non_empty(a, b)
    if use_idf:
        if index is None:
            raise ValueError("cosine_sim(use_idf=True) requires an index")
        return soe_similarity(a, b, index)
    ca, cb = Counter(trace_tokens(a)), Counter(trace_tokens(b))
    if ca == cb:
        return 1.0
    sim = _cosine({t: float(n) for t, n in ca.items()}, {t: float(n) for t, n in cb.items()})
    if sim is None:
        return 0.0
    return min(max(sim, 0.0), 1.0)


def lerch_sim(a: StackTrace, b: StackTrace, index: CorpusIndex) -> float:
    """TF-IDF cosine baseline; the same implementation the SOE path uses."""
    return soe_similarity(a, b, index)


def rebucket_sim(a: StackTrace, b: StackTrace, params: RebucketParams) -> float:
    """Position-decayed alignment similarity.

    Maximises sum(exp(-c * min(i, j)) * exp(-o * |i - j|)) over
    order-preserving alignments of equal tokens, normalised by the best
    achievable value sum_{k < min(|a|, |b|)} exp(-c * k).
    """
    _require_non_empty(a, b)
    ta, tb = trace_tokens(a), trace_tokens(b)
    n, m = len(ta), len(tb)
    exp_c = [math.exp(-params.c * k) for k in range(min(n, m))]
    exp_o = [math.exp(-params.o * d) for d in range(max(n, m))]
    prev = [0.0] * (m + 1)
    for i in range(1, n + 1):
        cur = [0.0] * (m + 1)
        token = ta[i - 1]
        for j in range(1, m + 1):
            best = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
            if token == tb[j - 1]:
                gain = exp_c[min(i - 1, j - 1)] * exp_o[abs(i - j)]
                cand = prev[j - 1] + gain
                if cand > best:
                    best = cand
            cur[j] = best
        prev = cur
    denom = sum(exp_c)
    sim = prev[m] / denom
    return min(max(sim, 0.0), 1.0)


def moroo_sim(
    a: StackTrace,
    b: StackTrace,
    index: CorpusIndex,
    params: RebucketParams | None = None,
    weight: float = 0.5,
) -> float:
    """Weighted harmonic mean of the alignment and TF-IDF similarities.

    Defined as 0 when either component is 0 (the harmonic mean's natural
    limit), and exactly the shared value when both components agree.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {weight}")
    r = rebucket_sim(a, b, params or RebucketParams())
    l = lerch_sim(a, b, index)
    if r == 0.0 or l == 0.0:
        return 0.0
    if r == l:
        return r
    sim = 1.0 / (weight / r + (1.0 - weight) / l)
    return min(max(sim, 0.0), 1.0)
