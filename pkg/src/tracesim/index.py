"""Document-frequency statistics over a trace corpus and frame IDF."""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CorruptIndex, EmptyCorpus, IoFailure
from .model import StackTrace, trace_tokens


@dataclass(frozen=True)
class CorpusIndex:
    """Trace count plus per-token document frequencies.

    ``df[token]`` counts the traces containing the token at least once;
    multiplicity within one trace does not matter.
    """

    total_traces: int
    df: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.total_traces < 1:
            raise ValueError("index requires at least one trace")
        for token, count in self.df.items():
            if not 1 <= count <= self.total_traces:
                raise ValueError(
                    f"df[{token!r}] = {count} outside 1..{self.total_traces}"
                )

    def idf(self, token: str) -> float:
        """Natural-log IDF; unseen tokens count as df = 1 (maximally rare)."""
        return math.log(self.total_traces / self.df.get(token, 1))

    def median_idf(self) -> float:
        if not self.df:
            return 0.0
        return statistics.median(self.idf(t) for t in sorted(self.df))

    def max_idf(self) -> float:
        if not self.df:
            return 0.0
        return math.log(self.total_traces / min(self.df.values()))


def build_index(corpus: Iterable[StackTrace]) -> CorpusIndex:
    """Count document frequencies over a corpus of traces."""
    df: Counter[str] = Counter()
    total = 0
    for trace in corpus:
        total += 1
        df.update(set(trace_tokens(trace)))
    if total == 0:
        raise EmptyCorpus("cannot index an empty corpus")
    return CorpusIndex(total, dict(df))


def save_index(index: CorpusIndex, path: str | Path) -> None:
    payload = {"total_traces": index.total_traces, "df": dict(index.df)}
    try:
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(payload, fp, sort_keys=True, indent=2)
            fp.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write index to {path}: {exc}") from exc


def load_index(path: str | Path) -> CorpusIndex:
    """Load an index file, validating schema and count bounds."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read index from {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise CorruptIndex(f"{path}: invalid JSON: {exc}") from exc
    if (
        not isinstance(obj, dict)
        or not isinstance(obj.get("total_traces"), int)
        or isinstance(obj.get("total_traces"), bool)
        or not isinstance(obj.get("df"), dict)
    ):
        raise CorruptIndex(f"{path}: expected {{'total_traces': int, 'df': {{...}}}}")
    df = obj["df"]
    for token, count in df.items():
        if not isinstance(token, str) or not isinstance(count, int) or isinstance(count, bool):
            raise CorruptIndex(f"{path}: bad df entry {token!r}: {count!r}")
    try:
        return CorpusIndex(obj["total_traces"], df)
    except ValueError as exc:
        raise CorruptIndex(f"{path}: {exc}") from exc
