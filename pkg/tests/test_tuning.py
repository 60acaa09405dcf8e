"""Hyperparameter search contract tests."""

from __future__ import annotations

import pytest

from tracesim import (
    DegenerateLabels,
    GeneratorConfig,
    InvalidSpace,
    ParamSpec,
    SearchSpace,
    build_index,
    derive_pairs,
    generate_corpus,
    tune,
)
from tracesim.model import corpus_traces


def _tiny_world():
    cfg = GeneratorConfig(
        seed=13,
        num_buckets=12,
        max_bucket_size=8,
        vocabulary_size=60,
        substitution_rate=0.15,
        insertion_rate=0.1,
        deletion_rate=0.1,
    )
    reports, truth = generate_corpus(cfg)
    pairs = derive_pairs(reports, truth, 25, 25, seed=5)
    return corpus_traces(reports), pairs


def test_param_spec_validation():
    with pytest.raises(InvalidSpace):
        ParamSpec(2.0, 1.0)
    with pytest.raises(InvalidSpace):
        ParamSpec(1.0, 1.0)
    with pytest.raises(InvalidSpace):
        ParamSpec(0.0, 1.0, "log")
    with pytest.raises(InvalidSpace):
        ParamSpec(0.0, 1.0, "cubic")
    with pytest.raises(InvalidSpace):
        SearchSpace({})


def test_budget_one_returns_single_trial():
    traces, pairs = _tiny_world()
    result = tune(traces, pairs, budget=1, seed=42)
    assert len(result.trials) == 1
    assert result.best_auc == result.trials[0].auc
    for key in ("alpha", "beta", "gamma"):
        assert key in result.best_params


def test_point_like_space_pins_parameters():
    traces, pairs = _tiny_world()
    space = SearchSpace(
        {
            "alpha": ParamSpec(1.0, 1.0 + 1e-9),
            "beta": ParamSpec(2.0, 2.0 + 1e-9),
            "gamma": ParamSpec(0.5, 0.5 + 1e-9),
        }
    )
    result = tune(traces, pairs, space, budget=3, seed=0)
    assert result.best_params["alpha"] == pytest.approx(1.0, abs=1e-6)
    assert result.best_params["beta"] == pytest.approx(2.0, abs=1e-6)
    assert result.best_params["gamma"] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("strategy", ["random", "tpe"])
def test_reproducible_and_in_bounds(strategy):
    traces, pairs = _tiny_world()
    index = build_index(traces.values())
    space = SearchSpace.default(index)
    first = tune(traces, pairs, space, budget=8, seed=7, strategy=strategy, index=index)
    second = tune(traces, pairs, space, budget=8, seed=7, strategy=strategy, index=index)
    assert first == second
    assert len(first.trials) == 8
    for trial in first.trials:
        for name, spec in space.params.items():
            assert spec.low <= trial.params[name] <= spec.high


def test_budget_prefix_extension_random():
    traces, pairs = _tiny_world()
    index = build_index(traces.values())
    space = SearchSpace.default(index)
    short = tune(traces, pairs, space, budget=4, seed=3, index=index)
    long = tune(traces, pairs, space, budget=8, seed=3, index=index)
    assert [t.params for t in long.trials[:4]] == [t.params for t in short.trials]
    assert long.best_auc >= short.best_auc


def test_degenerate_labels_propagates():
    traces, pairs = _tiny_world()
    positives = [p for p in pairs if p.label]
    with pytest.raises(DegenerateLabels):
        tune(traces, positives, budget=2, seed=0)


def test_bad_budget_and_strategy():
    traces, pairs = _tiny_world()
    with pytest.raises(ValueError):
        tune(traces, pairs, budget=0, seed=0)
    with pytest.raises(ValueError):
        tune(traces, pairs, budget=2, seed=0, strategy="grid")


def test_unknown_space_parameter_rejected():
    traces, pairs = _tiny_world()
    space = SearchSpace({"nonsense": ParamSpec(0.0, 1.0)})
    with pytest.raises(InvalidSpace):
        tune(traces, pairs, space, budget=1, seed=0)


def test_tpe_runs_full_budget_and_can_tune_rebucket():
    traces, pairs = _tiny_world()
    space = SearchSpace(
        {
            "rebucket_c": ParamSpec(0.01, 3.0, "log"),
            "rebucket_o": ParamSpec(0.01, 3.0, "log"),
        }
    )
    result = tune(traces, pairs, space, budget=12, seed=1, strategy="tpe", method="rebucket")
    assert len(result.trials) == 12
    assert result.method == "rebucket"
    assert 0.0 <= result.best_auc <= 1.0
    assert set(result.best_params) >= {"rebucket_c", "rebucket_o"}


def test_default_space_covers_index_idf_range():
    traces, _ = _tiny_world()
    index = build_index(traces.values())
    space = SearchSpace.default(index)
    assert space.params["gamma"].high == pytest.approx(index.max_idf())
    assert space.params["alpha"].low == 0.0
