"""Shared test models and independent oracles.

The oracles deliberately avoid the library's own construction paths:
code-length optimality is checked against exhaustive enumeration of full
binary trees, and grid distributions are generated from integer
compositions so the enumeration is complete.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

from stegotext.lm import LanguageModel, Vocabulary
from stegotext.ngram import NgramModel, train


class FixedModel(LanguageModel):
    """i.i.d. model: the same next-token distribution at every step."""

    def __init__(self, probs) -> None:
        self._probs = np.asarray(probs, dtype=np.float64)

    @property
    def vocab_size(self) -> int:
        return int(self._probs.size)

    def raw_distribution(self, prefix) -> np.ndarray:
        return self._probs.copy()


def word_corpus(vocab_size: int, length: int, seed: int, zipf: float = 0.0) -> str:
    """Random word corpus guaranteed to use exactly `vocab_size` distinct words."""
    rng = np.random.default_rng(seed)
    words = [f"w{i:04d}" for i in range(vocab_size)]
    ids = list(rng.permutation(vocab_size))
    if length > vocab_size:
        weights = 1.0 / np.arange(1, vocab_size + 1, dtype=np.float64) ** zipf
        weights /= weights.sum()
        ids += rng.choice(vocab_size, size=length - vocab_size, p=weights).tolist()
    return " ".join(words[i] for i in ids)


def build_model(vocab_size: int, length: int, seed: int, order: int = 2,
                alpha: float = 0.5, zipf: float = 0.0) -> NgramModel:
    return train(word_corpus(vocab_size, length, seed, zipf), order=order, alpha=alpha)


def mixed_regime_model() -> NgramModel:
    """V=16 bigram model alternating exactly-uniform and strongly peaked contexts.

    Uniform contexts sit at zero distance from their dyadic Huffman
    approximation while peaked ones are far from it, so a threshold-gated
    encoder sees a healthy mix of embedding and skipping without ever
    starving: every skip lands mostly on tokens with uniform continuations.
    """
    vocab = Vocabulary(tuple(f"w{i:02d}" for i in range(16)))
    counts: dict[tuple[int, ...], dict[int, int]] = {(): {i: 100 for i in range(16)}}
    for token in range(16):
        if token < 8:
            counts[(token,)] = {i: 50 for i in range(16)}
        else:
            follow = {i: 2 for i in range(16)}
            follow[token - 8] = 400
            counts[(token,)] = follow
    return NgramModel(order=2, alpha=5.0, vocabulary=vocab, mode="word", counts=counts)


@lru_cache(maxsize=None)
def kraft_depth_profiles(num_leaves: int) -> frozenset[tuple[int, ...]]:
    """All sorted leaf-depth profiles of full binary trees with `num_leaves` leaves.

    A profile (d1 <= ... <= dn) is realizable iff sum 2^-di = 1; recursing on
    the left/right leaf split enumerates exactly those.
    """
    if num_leaves == 1:
        return frozenset({(0,)})
    out: set[tuple[int, ...]] = set()
    for left_leaves in range(1, num_leaves // 2 + 1):
        for left in kraft_depth_profiles(left_leaves):
            for right in kraft_depth_profiles(num_leaves - left_leaves):
                merged = sorted(d + 1 for d in left)
                merged += sorted(d + 1 for d in right)
                out.add(tuple(sorted(merged)))
    return frozenset(out)


def optimal_expected_length(probs) -> float:
    """Minimum expected codeword length over every full binary tree.

    For a fixed depth profile the best assignment pairs the largest
    probability with the smallest depth (rearrangement inequality), so
    minimizing over sorted profiles covers all leaf labelings.
    """
    p_desc = sorted(probs, reverse=True)
    best = math.inf
    for profile in kraft_depth_profiles(len(p_desc)):
        value = math.fsum(p * d for p, d in zip(p_desc, profile))
        best = min(best, value)
    return best


def grid_distributions(size: int, units: int = 20) -> Iterator[tuple[float, ...]]:
    """Every probability vector of `size` entries that are positive multiples of 1/units."""

    def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for comp in compositions(units, size):
        yield tuple(c / units for c in comp)
