"""Shared fixtures and trace-building helpers."""

from __future__ import annotations

import random

import pytest

from tracesim import CorpusIndex, Frame, StackTrace, build_index

VOCAB = [f"pkg{i // 10}.Class{i % 10}.method{i % 7}" for i in range(60)]


def make_trace(tokens, exception_type="java.lang.RuntimeException", message=None):
    return StackTrace(tuple(Frame(t) for t in tokens), exception_type, message)


def random_trace(rng: random.Random, max_len=10, soe_fraction=0.0, vocab=VOCAB):
    length = rng.randint(1, max_len)
    tokens = [vocab[rng.randrange(len(vocab))] for _ in range(length)]
    exception = "java.lang.RuntimeException"
    if soe_fraction and rng.random() < soe_fraction:
        exception = "java.lang.StackOverflowError"
    return make_trace(tokens, exception)


@pytest.fixture(scope="session")
def small_corpus() -> list[StackTrace]:
    rng = random.Random(7)
    return [random_trace(rng) for _ in range(50)]


@pytest.fixture(scope="session")
def small_index(small_corpus) -> CorpusIndex:
    return build_index(small_corpus)
