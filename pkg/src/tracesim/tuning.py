"""Hyperparameter search maximising train-split ROC AUC."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .baselines import RebucketParams
from .core import Hyperparams, TraceSimOptions
from .errors import InvalidSpace
from .evaluation import LabeledPair, make_scorer, roc_auc, score_pairs
from .index import CorpusIndex, build_index
from .model import StackTrace

_TPE_CANDIDATES = 24


@dataclass(frozen=True)
class ParamSpec:
    """Bounds and scale for one searched parameter."""

    low: float
    high: float
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.scale not in ("linear", "log"):
            raise InvalidSpace(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if not (math.isfinite(self.low) and math.isfinite(self.high)):
            raise InvalidSpace("bounds must be finite")
        if not self.low < self.high:
            raise InvalidSpace(f"low must be < high, got [{self.low}, {self.high}]")
        if self.scale == "log" and self.low <= 0:
            raise InvalidSpace(f"log scale requires low > 0, got {self.low}")

    def transform(self, value: float) -> float:
        return math.log(value) if self.scale == "log" else value

    def untransform(self, z: float) -> float:
        return math.exp(z) if self.scale == "log" else z

    def bounds_transformed(self) -> tuple[float, float]:
        return self.transform(self.low), self.transform(self.high)

    def sample(self, rng: random.Random) -> float:
        lo, hi = self.bounds_transformed()
        value = self.untransform(rng.uniform(lo, hi))
        return min(max(value, self.low), self.high)


@dataclass(frozen=True)
class SearchSpace:
    """Named parameter specs; dict order fixes the sampling order."""

    params: Mapping[str, ParamSpec]

    def __post_init__(self) -> None:
        if not self.params:
            raise InvalidSpace("search space must declare at least one parameter")

    @classmethod
    def default(cls, index: CorpusIndex) -> "SearchSpace":
        """alpha in [0, 3], beta log in [0.1, 10], gamma across the index's IDF range."""
        top = index.max_idf()
        if top <= 0.0:
            top = 1.0
        return cls(
            {
                "alpha": ParamSpec(0.0, 3.0),
                "beta": ParamSpec(0.1, 10.0, "log"),
                "gamma": ParamSpec(0.0, top),
            }
        )

    @classmethod
    def from_mapping(cls, obj: Mapping) -> "SearchSpace":
        params = {}
        for name, spec in obj.items():
            params[name] = ParamSpec(
                float(spec["low"]), float(spec["high"]), spec.get("scale", "linear")
            )
        return cls(params)

    def to_dict(self) -> dict:
        return {
            name: {"low": spec.low, "high": spec.high, "scale": spec.scale}
            for name, spec in self.params.items()
        }

    def sample(self, rng: random.Random) -> dict[str, float]:
        return {name: spec.sample(rng) for name, spec in self.params.items()}


@dataclass(frozen=True)
class Trial:
    params: dict[str, float]
    auc: float


@dataclass(frozen=True)
class TuneResult:
    best_params: dict[str, float]
    best_auc: float
    trials: tuple[Trial, ...]
    seed: int
    strategy: str
    method: str

    def to_dict(self) -> dict:
        return {
            "best_params": dict(self.best_params),
            "best_auc": self.best_auc,
            "trials": [{"params": dict(t.params), "auc": t.auc} for t in self.trials],
            "seed": self.seed,
            "strategy": self.strategy,
            "method": self.method,
        }


def _effective_params(
    sampled: Mapping[str, float],
    base_hp: Hyperparams,
    base_rebucket: RebucketParams,
    base_moroo_weight: float,
) -> dict[str, float]:
    merged = {
        "alpha": base_hp.alpha,
        "beta": base_hp.beta,
        "gamma": base_hp.gamma,
        "rebucket_c": base_rebucket.c,
        "rebucket_o": base_rebucket.o,
        "moroo_weight": base_moroo_weight,
    }
    for name, value in sampled.items():
        if name not in merged:
            raise InvalidSpace(f"unknown tunable parameter {name!r}")
        merged[name] = value
    return merged


def tune(
    traces: Mapping[str, StackTrace],
    train_pairs: Sequence[LabeledPair],
    space: SearchSpace | None = None,
    budget: int = 20,
    seed: int = 0,
    strategy: str = "random",
    *,
    method: str = "tracesim",
    index: CorpusIndex | None = None,
    hp: Hyperparams | None = None,
    rebucket: RebucketParams | None = None,
    moroo_weight: float = 0.5,
    options: TraceSimOptions | None = None,
    threads: int = 1,
) -> TuneResult:
    """Evaluate ``budget`` parameter settings and return the argmax by AUC.

    The random strategy draws its whole schedule up-front from the seed, so
    budgets extend as prefixes of one another. The TPE strategy is sequential:
    after a short random startup it splits past trials at the top-quartile
    AUC, samples candidates from a kernel density over the good trials, and
    evaluates the candidate with the highest good/bad density ratio.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if strategy not in ("random", "tpe"):
        raise ValueError(f"strategy must be 'random' or 'tpe', got {strategy!r}")
    if index is None:
        index = build_index(traces.values())
    if space is None:
        space = SearchSpace.default(index)
    base_hp = hp or Hyperparams.default(index)
    base_rebucket = rebucket or RebucketParams()

    def objective(sampled: Mapping[str, float]) -> float:
        eff = _effective_params(sampled, base_hp, base_rebucket, moroo_weight)
        scorer = make_scorer(
            method,
            index,
            hp=Hyperparams(eff["alpha"], eff["beta"], eff["gamma"]),
            rebucket=RebucketParams(eff["rebucket_c"], eff["rebucket_o"]),
            moroo_weight=eff["moroo_weight"],
            options=options,
        )
        return roc_auc(score_pairs(traces, train_pairs, scorer, threads))

    rng = random.Random(seed)
    if strategy == "random":
        schedule = [space.sample(rng) for _ in range(budget)]
        trials = [Trial(params, objective(params)) for params in schedule]
    else:
        trials = _tpe_trials(rng, space, objective, budget)

    best = trials[0]
    for trial in trials[1:]:
        if trial.auc > best.auc:
            best = trial
    best_params = _effective_params(best.params, base_hp, base_rebucket, moroo_weight)
    if method in ("tracesim", "tracesim-no-gw", "tracesim-no-lw", "tracesim-no-soe"):
        best_params = {k: best_params[k] for k in ("alpha", "beta", "gamma")}
    return TuneResult(best_params, best.auc, tuple(trials), seed, strategy, method)


def _tpe_trials(rng, space, objective, budget) -> list[Trial]:
    startup = min(budget, max(3, budget // 5))
    trials: list[Trial] = []
    for t in range(budget):
        if t < startup or len(trials) < 2:
            params = space.sample(rng)
        else:
            params = _tpe_suggest(rng, space, trials)
        trials.append(Trial(params, objective(params)))
    return trials


def _tpe_suggest(rng, space: SearchSpace, trials: Sequence[Trial]) -> dict[str, float]:
    names = list(space.params)
    specs = [space.params[name] for name in names]
    ranked = sorted(trials, key=lambda tr: -tr.auc)
    n_good = max(1, math.ceil(0.25 * len(trials)))
    good = [[specs[d].transform(tr.params[names[d]]) for d in range(len(names))] for tr in ranked[:n_good]]
    bad = [[specs[d].transform(tr.params[names[d]]) for d in range(len(names))] for tr in ranked[n_good:]]
    spans = [hi - lo for lo, hi in (spec.bounds_transformed() for spec in specs)]
    bw_good = _bandwidths(good, spans)
    bw_bad = _bandwidths(bad, spans)

    best_z: list[float] | None = None
    best_ratio = -math.inf
    for _ in range(_TPE_CANDIDATES):
        pick = rng.randrange(len(good))
        z = []
        for d, spec in enumerate(specs):
            lo, hi = spec.bounds_transformed()
            z.append(min(max(rng.gauss(good[pick][d], bw_good[pick][d]), lo), hi))
        g = _kde(z, good, bw_good)
        b = _kde(z, bad, bw_bad) if bad else 0.0
        ratio = g / max(b, 1e-300)
        if ratio > best_ratio:
            best_ratio = ratio
            best_z = z
    assert best_z is not None
    return {name: specs[d].untransform(best_z[d]) for d, name in enumerate(names)}


def _bandwidths(points: Sequence[Sequence[float]], spans: Sequence[float]) -> list[list[float]]:
    """Per-point, per-dimension kernel widths: nearest-neighbour distance, floored."""
    out = []
    for i, p in enumerate(points):
        row = []
        for d, span in enumerate(spans):
            floor = max(span * 1e-3, 1e-12)
            if len(points) == 1:
                row.append(max(span / 4.0, floor))
                continue
            nearest = min(
                abs(p[d] - q[d]) for j, q in enumerate(points) if j != i
            )
            row.append(max(nearest, floor))
        out.append(row)
    return out


def _kde(z: Sequence[float], centers: Sequence[Sequence[float]], bandwidths) -> float:
    if not centers:
        return 0.0
    total = 0.0
    for center, bw in zip(centers, bandwidths):
        term = 1.0
        for d in range(len(z)):
            u = (z[d] - center[d]) / bw[d]
            term *= math.exp(-0.5 * u * u) / (bw[d] * math.sqrt(2.0 * math.pi))
        total += term
    return total / len(centers)
