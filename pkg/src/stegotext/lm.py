"""Language-model contract: validated next-token distributions and sampling.

Every codec and metric consumes a NextTokenDistribution produced here.
The construction rules (probability floor, ascending-index renormalization)
exist so that two processes holding byte-identical models derive
bit-identical distributions, which is what makes decoding by replay sound.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

TokenId = int
Prefix = tuple[int, ...]

# Minimum probability after floor-and-renormalize.  Keeps every bin mass
# positive and every KL term finite regardless of the backend.
PROB_FLOOR = 1e-10

# Accepted deviation of the raw input mass from 1 at construction time.
SUM_TOLERANCE = 1e-6


class LanguageModelError(RuntimeError):
    """A backend failed to produce a distribution (I/O, dead process, corrupt file)."""


@dataclass(frozen=True)
class Vocabulary:
    """Finite token set; entry i is the surface rendering of token id i."""

    surface_forms: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.surface_forms) < 1:
            raise ValueError("vocabulary must contain at least one token")
        if len(set(self.surface_forms)) != len(self.surface_forms):
            raise ValueError("vocabulary surface forms must be unique")

    @property
    def size(self) -> int:
        return len(self.surface_forms)

    @cached_property
    def index(self) -> dict[str, int]:
        return {form: i for i, form in enumerate(self.surface_forms)}

    def __len__(self) -> int:
        return len(self.surface_forms)


class NextTokenDistribution:
    """Probability vector over the vocabulary at one generation step.

    The raw input mass must lie within SUM_TOLERANCE of 1.  Entries are
    floored at PROB_FLOOR and renormalized with an ascending-index
    sequential sum; the stored vector is read-only.
    """

    __slots__ = ("probs",)

    def __init__(self, probs) -> None:
        arr = np.array(probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("distribution must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("distribution entries must be finite")
        if np.any(arr < 0):
            raise ValueError("distribution entries must be non-negative")
        total = float(np.cumsum(arr)[-1])  # sequential ascending-index sum
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"distribution mass {total!r} is not within {SUM_TOLERANCE} of 1")
        arr = np.maximum(arr, PROB_FLOOR)
        arr /= np.cumsum(arr)[-1]
        arr.flags.writeable = False
        self.probs = arr

    def __len__(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, token: int) -> float:
        return float(self.probs[token])

    def __repr__(self) -> str:
        return f"NextTokenDistribution(V={len(self)})"


class LanguageModel(ABC):
    """Read-only handle yielding conditional next-token probabilities.

    Handles must be safe for concurrent queries after load (or document
    that callers clone one handle per worker).  A hide/seek stream itself
    is strictly sequential.
    """

    @property
    @abstractmethod
    def vocab_size(self) -> int: ...

    @abstractmethod
    def raw_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        """Probability vector for the next token given `prefix`, summing to ~1.

        Raises LanguageModelError on backend failure; never substitutes a
        fallback distribution.
        """

    def tokenize(self, text: str) -> list[int]:
        raise NotImplementedError(f"{type(self).__name__} does not tokenize text")

    def detokenize(self, ids: Sequence[int]) -> str:
        raise NotImplementedError(f"{type(self).__name__} does not render text")


def validate_prefix(prefix: Sequence[int], vocab_size: int) -> Prefix:
    out = tuple(int(t) for t in prefix)
    for t in out:
        if not 0 <= t < vocab_size:
            raise ValueError(f"token id {t} out of range [0, {vocab_size})")
    return out


def next_distribution(model: LanguageModel, prefix: Sequence[int]) -> NextTokenDistribution:
    """Floored, renormalized conditional distribution of the next token.

    Deterministic: equal prefixes against the same model yield bit-identical
    probability vectors.
    """
    prefix = validate_prefix(prefix, model.vocab_size)
    raw = model.raw_distribution(prefix)
    if len(raw) != model.vocab_size:
        raise LanguageModelError(
            f"backend returned {len(raw)} probabilities for vocabulary of {model.vocab_size}"
        )
    return NextTokenDistribution(raw)


def sample_token(dist: NextTokenDistribution, rng: np.random.Generator) -> TokenId:
    """Inverse-CDF draw over ascending token ids; reproducible for a seeded rng."""
    return inverse_cdf_sample(dist.probs, rng)


def inverse_cdf_sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from an arbitrary probability vector.

    Zero-probability entries are never selected (their CDF step has zero
    width), which lets codecs sample from masked vectors safely.
    """
    u = float(rng.random())
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, u * float(cdf[-1]), side="right"))
    return min(idx, len(probs) - 1)
