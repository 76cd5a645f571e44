"""Self-contained n-gram language model: train, save, load, query.

Additive smoothing over a dense vocabulary, back-off to the longest
context seen in training.  The on-disk format is byte-stable (versioned,
sorted keys, trailing CRC-32) so a sender and receiver loading the same
file answer every query bit-identically.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .lm import LanguageModel, Vocabulary

MAGIC = b"NGLM"
FORMAT_VERSION = 1

_MODES = ("word", "char")


class ModelFileError(Exception):
    """Base class for model file problems."""


class ModelFormatError(ModelFileError):
    """Not a model file at all (bad magic or unparseable structure)."""


class ModelVersionError(ModelFileError):
    """File declares a format version this library does not read."""


class ModelChecksumError(ModelFileError):
    """Trailing CRC-32 does not match the file contents."""


class ModelTruncatedError(ModelFileError):
    """File ends before the declared structure does."""


@dataclass
class NgramModel(LanguageModel):
    """Order-n model with add-alpha smoothing and longest-context back-off.

    Query probability for token s after context c is
    (count(c, s) + alpha) / (total(c) + alpha * V), where c is the longest
    suffix of the prefix (up to order-1 tokens) with training mass.
    Immutable after construction; safe for concurrent queries.
    """

    order: int
    alpha: float
    vocabulary: Vocabulary
    mode: str
    counts: dict[tuple[int, ...], dict[int, int]]
    totals: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if not self.totals:
            self.totals = {ctx: sum(c.values()) for ctx, c in self.counts.items()}

    @property
    def vocab_size(self) -> int:
        return self.vocabulary.size

    def _context_for(self, prefix: Sequence[int]) -> tuple[int, ...]:
        # Longest stored suffix wins; the empty context always exists for
        # a trained model, so back-off terminates.
        ctx = tuple(prefix[max(0, len(prefix) - (self.order - 1)):])
        while ctx not in self.totals or self.totals[ctx] == 0:
            if not ctx:
                raise ValueError("model has no training mass (empty context missing)")
            ctx = ctx[1:]
        return ctx

    def raw_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        ctx = self._context_for(prefix)
        V = self.vocab_size
        probs = np.full(V, self.alpha, dtype=np.float64)
        for token, count in self.counts[ctx].items():
            probs[token] += count
        probs /= self.totals[ctx] + self.alpha * V
        return probs

    def tokenize(self, text: str) -> list[int]:
        surfaces = text.split() if self.mode == "word" else list(text)
        index = self.vocabulary.index
        out = []
        for s in surfaces:
            if s not in index:
                raise ValueError(f"token {s!r} is not in the model vocabulary")
            out.append(index[s])
        return out

    def detokenize(self, ids: Sequence[int]) -> str:
        forms = [self.vocabulary.surface_forms[i] for i in ids]
        return " ".join(forms) if self.mode == "word" else "".join(forms)


def _surface_tokens(corpus: str | Sequence[str], mode: str) -> list[str]:
    if isinstance(corpus, str):
        return corpus.split() if mode == "word" else list(corpus)
    return [str(t) for t in corpus]


def train(
    corpus: str | Sequence[str],
    order: int,
    alpha: float = 0.01,
    mode: str = "word",
    specials: Iterable[str] = (),
) -> NgramModel:
    """Train from raw text (tokenized per `mode`) or a pre-tokenized sequence.

    The vocabulary is the corpus alphabet in first-appearance order, with
    any `specials` not already present appended after it.  Counts are kept
    for every context length 0..order-1 so queries can back off.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}")
    surfaces = _surface_tokens(corpus, mode)
    if not surfaces:
        raise ValueError("corpus is empty")

    vocab_list: list[str] = []
    index: dict[str, int] = {}
    for s in surfaces:
        if s not in index:
            index[s] = len(vocab_list)
            vocab_list.append(s)
    for s in specials:
        if s not in index:
            index[s] = len(vocab_list)
            vocab_list.append(s)

    ids = [index[s] for s in surfaces]
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for t, token in enumerate(ids):
        for ctx_len in range(min(order - 1, t) + 1):
            ctx = tuple(ids[t - ctx_len:t])
            bucket = counts.setdefault(ctx, {})
            bucket[token] = bucket.get(token, 0) + 1

    return NgramModel(
        order=order,
        alpha=alpha,
        vocabulary=Vocabulary(tuple(vocab_list)),
        mode=mode,
        counts=counts,
    )


class _Reader:
    """Bounds-checked little-endian reader over a byte buffer."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelTruncatedError(
                f"file ends at byte {len(self.data)}, needed {self.pos + n}"
            )
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def save(model: NgramModel, path: str) -> None:
    """Write the byte-stable model file (see module docstring for layout)."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    out += struct.pack("<H", model.order)
    out += struct.pack("<B", _MODES.index(model.mode))
    alpha_text = repr(model.alpha).encode("ascii")
    out += struct.pack("<H", len(alpha_text))
    out += alpha_text
    out += struct.pack("<I", model.vocab_size)
    for form in model.vocabulary.surface_forms:
        raw = form.encode("utf-8")
        out += struct.pack("<I", len(raw))
        out += raw
    contexts = sorted(model.counts)
    out += struct.pack("<I", len(contexts))
    for ctx in contexts:
        out += struct.pack("<H", len(ctx))
        for token in ctx:
            out += struct.pack("<I", token)
        pairs = sorted(model.counts[ctx].items())
        out += struct.pack("<I", len(pairs))
        for token, count in pairs:
            out += struct.pack("<IQ", token, count)
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def load(path: str) -> NgramModel:
    """Load a model file; queries of load(save(m)) are bit-identical to m's."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 2 + 4:
        raise ModelTruncatedError(f"file is only {len(data)} bytes")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"bad magic {data[:len(MAGIC)]!r}")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[:-4])
    version = struct.unpack("<H", data[4:6])[0]
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"file version {version}, library reads {FORMAT_VERSION}")
    if stored_crc != actual_crc:
        raise ModelChecksumError(f"CRC-32 mismatch: stored {stored_crc:#x}, actual {actual_crc:#x}")

    r = _Reader(data[:-4])
    r.take(len(MAGIC) + 2)  # magic + version, checked above
    order = r.u16()
    mode_code = r.u8()
    if mode_code >= len(_MODES):
        raise ModelFormatError(f"unknown tokenization mode code {mode_code}")
    alpha = float(r.take(r.u16()).decode("ascii"))
    vocab_count = r.u32()
    forms = tuple(r.take(r.u32()).decode("utf-8") for _ in range(vocab_count))
    context_count = r.u32()
    counts: dict[tuple[int, ...], dict[int, int]] = {}
    for _ in range(context_count):
        ctx = tuple(r.u32() for _ in range(r.u16()))
        pair_count = r.u32()
        bucket: dict[int, int] = {}
        for _ in range(pair_count):
            token = r.u32()
            bucket[token] = r.u64()
        counts[ctx] = bucket
    if r.pos != len(r.data):
        raise ModelFormatError(f"{len(r.data) - r.pos} trailing bytes after model payload")
    return NgramModel(
        order=order,
        alpha=alpha,
        vocabulary=Vocabulary(forms),
        mode=_MODES[mode_code],
        counts=counts,
    )
