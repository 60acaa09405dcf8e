"""Index construction, IDF, and persistence tests."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracesim import CorruptIndex, EmptyCorpus, IoFailure, build_index, load_index, save_index
from tracesim.model import trace_tokens

from conftest import make_trace

_token = st.sampled_from([f"t{i}.C.m" for i in range(12)])
_corpora = st.lists(st.lists(_token, min_size=1, max_size=6).map(make_trace), min_size=1, max_size=20)


def test_df_counts_presence_per_trace():
    corpus = [
        make_trace(["A.a.x"]),
        make_trace(["B.b.x", "C.c.x"]),
        make_trace(["B.b.x"]),
        make_trace(["C.c.x", "C.c.x", "C.c.x"]),
    ]
    index = build_index(corpus)
    assert index.total_traces == 4
    assert index.df["A.a.x"] == 1
    assert index.df["B.b.x"] == 2
    assert index.df["C.c.x"] == 2  # multiplicity within one trace counts once


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        build_index([])


def test_idf_values():
    corpus = [make_trace(["A.a.x"])] + [make_trace(["B.b.x"]) for _ in range(3)]
    index = build_index(corpus)
    assert index.idf("A.a.x") == pytest.approx(math.log(4), abs=1e-12)
    everywhere = build_index([make_trace(["A.a.x"]) for _ in range(5)])
    assert everywhere.idf("A.a.x") == 0.0


def test_unseen_token_is_maximally_rare():
    corpus = [make_trace([f"t{i}.C.m"]) for i in range(100)]
    index = build_index(corpus)
    assert index.idf("never.Seen.tok") == pytest.approx(math.log(100), abs=1e-12)


def test_index_round_trip(tmp_path, small_corpus):
    index = build_index(small_corpus)
    path = tmp_path / "index.json"
    save_index(index, path)
    again = load_index(path)
    assert again.total_traces == index.total_traces
    assert dict(again.df) == dict(index.df)


def test_load_truncated_index(tmp_path):
    path = tmp_path / "index.json"
    path.write_text('{"total_traces": 5, "df": {"a.B.c": ')
    with pytest.raises(CorruptIndex):
        load_index(path)


def test_load_bad_schema(tmp_path):
    path = tmp_path / "index.json"
    path.write_text('{"total_traces": 2, "df": {"a.B.c": 9}}')
    with pytest.raises(CorruptIndex):
        load_index(path)


def test_load_missing_path(tmp_path):
    with pytest.raises(IoFailure):
        load_index(tmp_path / "does-not-exist.json")


@given(_corpora, st.lists(_token, min_size=1, max_size=6))
@settings(max_examples=60)
def test_adding_a_trace_is_monotone(corpus, extra_tokens):
    before = build_index(corpus)
    after = build_index(corpus + [make_trace(extra_tokens)])
    assert after.total_traces == before.total_traces + 1
    for token, count in before.df.items():
        assert after.df[token] >= count


@given(_corpora)
@settings(max_examples=60)
def test_df_matches_naive_double_loop(corpus):
    index = build_index(corpus)
    for token in index.df:
        naive = sum(1 for trace in corpus if token in trace_tokens(trace))
        assert index.df[token] == naive


def test_idf_antitone_in_df():
    corpus = (
        [make_trace(["rare.C.m"])]
        + [make_trace(["mid.C.m"]) for _ in range(3)]
        + [make_trace(["common.C.m"]) for _ in range(6)]
    )
    index = build_index(corpus)
    assert index.idf("rare.C.m") > index.idf("mid.C.m") > index.idf("common.C.m")
