"""Hide/seek codecs over a shared language model.

Three algorithm pairs, all driving the model one token at a time:

* ``bins``    -- fixed-rate: each k-bit block selects one of 2^k shared
  vocabulary bins; the token is sampled from the model restricted to that
  bin.
* ``vlc``     -- variable-rate: each step builds a Huffman code for the
  current distribution and walks it with payload bits.
* ``patient`` -- vlc that embeds only when the Huffman approximation is
  within ``delta`` of the model distribution (total variation or KL);
  otherwise it emits a plain model sample carrying no payload.

The receiver recovers the payload by replaying the same model over the
observed tokens with a field-for-field identical configuration.

``hide``/``seek`` keep ``delta`` constant across the stream.  A decaying
per-step schedule (which would bound the stream's total divergence at the
cost of rapidly vanishing capacity) can be layered on by driving
``patient_encode_step``/``patient_decode_step`` directly with a delta per
step; both sides just have to derive the same schedule.
"""

from __future__ import annotations

import dataclasses
import hashlib
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import metrics
from .bits import BitReader, BitString
from .huffman import build_huffman, decode_token, encode_token, huffman_distribution
from .lm import (
    LanguageModel,
    NextTokenDistribution,
    inverse_cdf_sample,
    next_distribution,
    validate_prefix,
)
from .metrics import StepDiagnostics

ALGORITHMS = ("bins", "vlc", "patient")
LENGTH_MODES = ("out_of_band", "header32")
DIVERGENCE_KINDS = ("tvd", "kl")

# Width of the optional self-delimiting length prefix (big-endian bit count).
HEADER_BITS = 32

_MASK64 = (1 << 64) - 1


class TruncatedStegotextError(ValueError):
    """The observed tokens yield fewer payload bits than expected."""


class EncodingStalledError(RuntimeError):
    """hide() gave up after its max_steps cap without delivering the payload."""


class StallWarning(UserWarning):
    """patient hide is generating tokens but has not embedded bits for a long run."""


class _SplitMix64:
    """Tiny fixed-forever PRNG so partitions never drift across library versions."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased draw from [0, bound) by rejection."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound


@dataclass(frozen=True, eq=False)
class BinPartition:
    """Disjoint cover of the token ids by 2^k near-equal bins.

    `assignment[token]` is the bin index.  Reconstructible bit-exactly from
    (seed, V, k) via make_partition, so sender and receiver can share it as
    a seed instead of a table.
    """

    k: int
    assignment: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        assignment = np.asarray(self.assignment, dtype=np.int64)
        sizes = np.bincount(assignment, minlength=self.num_bins)
        if assignment.min(initial=0) < 0 or assignment.max(initial=0) >= self.num_bins:
            raise ValueError("bin indices out of range")
        if sizes.size != self.num_bins or sizes.min() < 1:
            raise ValueError("every bin must hold at least one token")
        if sizes.max() - sizes.min() > 1:
            raise ValueError("bin sizes may differ by at most 1")
        assignment.flags.writeable = False
        object.__setattr__(self, "assignment", assignment)

    @property
    def num_bins(self) -> int:
        return 1 << self.k

    @property
    def vocab_size(self) -> int:
        return int(self.assignment.size)

    def members(self, bin_index: int) -> np.ndarray:
        return np.nonzero(self.assignment == bin_index)[0]


def make_partition(seed: int, vocab_size: int, k: int) -> BinPartition:
    """Fisher-Yates shuffle of the token ids, sliced round-robin into 2^k bins."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if (1 << k) > vocab_size:
        raise ValueError(f"2^{k} bins cannot cover a vocabulary of {vocab_size} tokens")
    rng = _SplitMix64(seed)
    perm = list(range(vocab_size))
    for i in range(vocab_size - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    assignment = np.empty(vocab_size, dtype=np.int64)
    for position, token in enumerate(perm):
        assignment[token] = position % (1 << k)
    return BinPartition(k=k, assignment=assignment, seed=seed)


def bin_conditional(p, partition: BinPartition, bin_index: int) -> np.ndarray:
    """The model distribution restricted to one bin and renormalized.

    This is exactly what a bins encode step samples from; entries outside
    the bin are identically zero.
    """
    probs = np.asarray(getattr(p, "probs", p), dtype=np.float64)
    masked = np.where(partition.assignment == bin_index, probs, 0.0)
    mass = masked.sum()
    if mass <= 0.0:
        raise ValueError(f"bin {bin_index} has no probability mass")
    return masked / mass


def bins_effective(p, partition: BinPartition) -> np.ndarray:
    """Per-token distribution induced by encoding a uniform block: p(s) / (2^k * mass of s's bin)."""
    probs = np.asarray(getattr(p, "probs", p), dtype=np.float64)
    masses = metrics.bin_masses(probs, partition)
    return probs / (partition.num_bins * masses[partition.assignment])


def bins_encode_step(
    p: NextTokenDistribution,
    partition: BinPartition,
    block: BitString,
    rng: np.random.Generator,
    step_index: int = 0,
) -> tuple[int, StepDiagnostics]:
    """Embed one k-bit block: sample a token from the block's bin.

    The step KL has the closed form k - H(bin masses); the total variation
    against the induced per-token distribution is computed exactly.
    """
    if len(block) != partition.k:
        raise ValueError(f"block of {len(block)} bits does not match k={partition.k}")
    token = inverse_cdf_sample(bin_conditional(p, partition, block.to_int()), rng)
    kl = max(0.0, partition.k - metrics.partition_entropy(p, partition))
    tv = metrics.tvd(p, bins_effective(p, partition))
    diag = StepDiagnostics(
        step_index=step_index, kl_bits=kl, tvd=tv, bits_embedded=partition.k, encoded=True
    )
    return token, diag


def bins_decode_step(partition: BinPartition, observed: int) -> BitString:
    """The k-bit block an observed token carries: its bin index, big-endian."""
    if not 0 <= observed < partition.vocab_size:
        raise ValueError(f"token id {observed} out of range [0, {partition.vocab_size})")
    return BitString.from_int(int(partition.assignment[observed]), partition.k)


def vlc_encode_step(
    p: NextTokenDistribution,
    bits: BitReader,
    step_index: int = 0,
) -> tuple[int, StepDiagnostics]:
    """Embed by walking the step's Huffman tree with payload bits."""
    code = build_huffman(p)
    real_before = bits.real_consumed
    token, _ = decode_token(code, bits)
    mass = huffman_distribution(code)
    diag = StepDiagnostics(
        step_index=step_index,
        kl_bits=metrics.kl_divergence(p, mass),
        tvd=metrics.tvd(p, mass),
        bits_embedded=bits.real_consumed - real_before,
        encoded=True,
    )
    return token, diag


def vlc_decode_step(p: NextTokenDistribution, observed: int) -> BitString:
    """The payload bits an observed token carries: its Huffman codeword."""
    return encode_token(build_huffman(p), observed)


def _patient_divergence(p, mass, kind: str) -> float:
    if kind == "tvd":
        return metrics.tvd(p, mass)
    return metrics.kl_divergence(p, mass)


def patient_encode_step(
    p: NextTokenDistribution,
    bits: BitReader,
    delta: float,
    divergence_kind: str,
    rng: np.random.Generator,
    step_index: int = 0,
) -> tuple[int, StepDiagnostics]:
    """Embed like vlc only when the Huffman gap is below delta.

    When the gap is too large the step samples the model directly and
    carries no payload, so it adds no divergence at all; payload-carrying
    steps add strictly less than delta of the configured divergence.
    """
    if not delta > 0:
        raise ValueError("delta must be > 0")
    code = build_huffman(p)
    mass = huffman_distribution(code)
    gap = _patient_divergence(p, mass, divergence_kind)
    if gap < delta:
        real_before = bits.real_consumed
        token, _ = decode_token(code, bits)
        diag = StepDiagnostics(
            step_index=step_index,
            kl_bits=metrics.kl_divergence(p, mass),
            tvd=metrics.tvd(p, mass),
            bits_embedded=bits.real_consumed - real_before,
            encoded=True,
        )
        return token, diag
    token = inverse_cdf_sample(p.probs, rng)
    diag = StepDiagnostics(
        step_index=step_index, kl_bits=0.0, tvd=0.0, bits_embedded=0, encoded=False
    )
    return token, diag


def patient_decode_step(
    p: NextTokenDistribution,
    observed: int,
    delta: float,
    divergence_kind: str,
) -> BitString:
    """Recompute the sender's branch; return the codeword or nothing.

    Correct for any observed token: the branch depends only on the
    distribution and delta, never on which token was emitted.
    """
    if not delta > 0:
        raise ValueError("delta must be > 0")
    code = build_huffman(p)
    mass = huffman_distribution(code)
    if _patient_divergence(p, mass, divergence_kind) < delta:
        return encode_token(code, observed)
    return BitString()


@dataclass(frozen=True)
class CodecConfig:
    """Everything hide and seek must agree on, except rng_seed (sender-only).

    rng_seed drives the sender's non-payload sampling: within-bin draws for
    bins, skip steps for patient, and trailing tokens.  It never affects
    what the receiver recovers.
    """

    algorithm: str
    k: int | None = None
    delta: float | None = None
    divergence_kind: str = "tvd"
    partition_seed: int | None = None
    rng_seed: int | None = None
    length_mode: str = "out_of_band"
    trailing_tokens: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.length_mode not in LENGTH_MODES:
            raise ValueError(f"length_mode must be one of {LENGTH_MODES}")
        if self.divergence_kind not in DIVERGENCE_KINDS:
            raise ValueError(f"divergence_kind must be one of {DIVERGENCE_KINDS}")
        if self.trailing_tokens < 0:
            raise ValueError("trailing_tokens must be >= 0")
        if self.algorithm == "bins":
            if self.k is None or self.k < 1:
                raise ValueError("bins requires k >= 1")
            if self.partition_seed is None:
                raise ValueError("bins requires a shared partition_seed")
        if self.algorithm == "patient":
            if self.delta is None or not self.delta > 0:
                raise ValueError("patient requires delta > 0")


@dataclass(frozen=True)
class StegoResult:
    """Outcome of a hide call.

    bits_embedded_total counts every embedded bit; in header32 mode that is
    the payload length plus the 32 header bits.
    """

    stegotext_tokens: tuple[int, ...]
    diagnostics: tuple[StepDiagnostics, ...]
    bits_embedded_total: int

    def cumulative_bound(self) -> metrics.CumulativeBound:
        return metrics.accumulate(self.diagnostics)


def _check_config_fits(config: CodecConfig, vocab_size: int) -> None:
    if vocab_size < 2:
        raise ValueError("encoding needs a vocabulary of at least 2 tokens")
    if config.algorithm == "bins" and (1 << config.k) > vocab_size:
        raise ValueError(
            f"2^{config.k} bins cannot cover a vocabulary of {vocab_size} tokens"
        )


def _payload_for(config: CodecConfig, ciphertext: BitString) -> BitString:
    if config.length_mode == "header32":
        if len(ciphertext) >= 1 << HEADER_BITS:
            raise ValueError(f"payload of {len(ciphertext)} bits exceeds the 32-bit header")
        return BitString.from_int(len(ciphertext), HEADER_BITS) + ciphertext
    return ciphertext


def hide(
    model: LanguageModel,
    config: CodecConfig,
    seed_prefix: Sequence[int],
    ciphertext: BitString,
    rng: np.random.Generator | None = None,
    max_steps: int | None = None,
) -> StegoResult:
    """Generate stegotext tokens carrying `ciphertext`.

    Steps the configured algorithm until every payload bit is embedded,
    zero-padding a final partial block or tree descent.  Generation stops
    at the first token boundary after the last payload bit, then emits
    config.trailing_tokens plain samples.  The returned tokens exclude the
    seed prefix; diagnostics cover every generated token, skip steps
    included.

    patient can legitimately make no progress for long stretches; after
    10 * max(C, 1) consecutive skip steps a StallWarning is issued, and if
    max_steps is set, exceeding it raises EncodingStalledError.
    """
    _check_config_fits(config, model.vocab_size)
    payload = _payload_for(config, ciphertext)
    reader = BitReader(payload)
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    prefix = list(validate_prefix(seed_prefix, model.vocab_size))

    partition = None
    if config.algorithm == "bins":
        partition = make_partition(config.partition_seed, model.vocab_size, config.k)

    tokens: list[int] = []
    diags: list[StepDiagnostics] = []
    stall_after = 10 * max(1, len(payload))
    consecutive_skips = 0
    warned = False
    step = 0

    while reader.remaining > 0:
        if max_steps is not None and step >= max_steps:
            raise EncodingStalledError(
                f"no full delivery after {step} steps; {reader.remaining} bits remain"
            )
        p = next_distribution(model, prefix)
        if config.algorithm == "bins":
            real = min(config.k, reader.remaining)
            block = reader.read(config.k)
            token, diag = bins_encode_step(p, partition, block, rng, step_index=step)
            if real < config.k:
                diag = dataclasses.replace(diag, bits_embedded=real)
        elif config.algorithm == "vlc":
            token, diag = vlc_encode_step(p, reader, step_index=step)
        else:
            token, diag = patient_encode_step(
                p, reader, config.delta, config.divergence_kind, rng, step_index=step
            )
            consecutive_skips = 0 if diag.encoded else consecutive_skips + 1
            if consecutive_skips >= stall_after and not warned:
                warnings.warn(
                    f"no payload embedded in the last {consecutive_skips} steps "
                    f"(delta={config.delta}, {config.divergence_kind}); still generating",
                    StallWarning,
                    stacklevel=2,
                )
                warned = True
        tokens.append(token)
        prefix.append(token)
        diags.append(diag)
        step += 1

    for _ in range(config.trailing_tokens):
        p = next_distribution(model, prefix)
        token = inverse_cdf_sample(p.probs, rng)
        tokens.append(token)
        prefix.append(token)
        diags.append(
            StepDiagnostics(step_index=step, kl_bits=0.0, tvd=0.0, bits_embedded=0, encoded=False)
        )
        step += 1

    total = sum(d.bits_embedded for d in diags)
    assert total == len(payload), "embedded bit accounting out of sync"
    return StegoResult(
        stegotext_tokens=tuple(tokens),
        diagnostics=tuple(diags),
        bits_embedded_total=total,
    )


def seek(
    model: LanguageModel,
    config: CodecConfig,
    seed_prefix: Sequence[int],
    stegotext_tokens: Sequence[int],
    num_bits: int | None = None,
) -> BitString:
    """Recover the ciphertext from observed tokens by replaying the model.

    Requires the same model bytes, configuration, and seed prefix the
    sender used.  In out_of_band mode `num_bits` gives the payload length;
    in header32 mode the length is read from the embedded 32-bit header.
    Pad bits are discarded.
    """
    _check_config_fits(config, model.vocab_size)
    vocab_size = model.vocab_size
    tokens = [int(t) for t in stegotext_tokens]
    for t in tokens:
        if not 0 <= t < vocab_size:
            raise ValueError(f"stegotext token id {t} out of range [0, {vocab_size})")

    if config.length_mode == "out_of_band":
        if num_bits is None or num_bits < 0:
            raise ValueError("out_of_band seek needs the payload bit length")
        target = num_bits
    else:
        target = None  # learned from the header once 32 bits are in

    partition = None
    if config.algorithm == "bins":
        partition = make_partition(config.partition_seed, vocab_size, config.k)

    collected: list[int] = []
    prefix = list(validate_prefix(seed_prefix, vocab_size))
    for token in tokens:
        if target is not None and len(collected) >= target:
            break
        if config.algorithm == "bins":
            # The partition is context-free, so no model replay is needed.
            collected.extend(bins_decode_step(partition, token))
        else:
            p = next_distribution(model, prefix)
            if config.algorithm == "vlc":
                collected.extend(vlc_decode_step(p, token))
            else:
                collected.extend(
                    patient_decode_step(p, token, config.delta, config.divergence_kind)
                )
            prefix.append(token)
        if target is None and len(collected) >= HEADER_BITS:
            declared = BitString(collected[:HEADER_BITS]).to_int()
            target = HEADER_BITS + declared

    if config.length_mode == "header32":
        if target is None:
            raise TruncatedStegotextError(
                f"truncated stegotext: {len(collected)} bits recovered, header needs {HEADER_BITS}"
            )
        if len(collected) < target:
            raise TruncatedStegotextError(
                f"truncated stegotext: {len(collected)} bits recovered, header declares {target - HEADER_BITS}"
            )
        return BitString(collected[HEADER_BITS:target])
    if len(collected) < num_bits:
        raise TruncatedStegotextError(
            f"truncated stegotext: {len(collected)} bits recovered, expected {num_bits}"
        )
    return BitString(collected[:num_bits])


def keystream_xor(data: BitString, key: bytes) -> BitString:
    """Self-inverse mask from a hash-counter keystream.

    Plumbing for turning a message into coin-flip-like bits before hiding;
    carries no security claim of its own.
    """
    if not key:
        raise ValueError("key must be non-empty")
    needed = (len(data) + 7) // 8
    stream = bytearray()
    counter = 0
    while len(stream) < needed:
        stream += hashlib.sha256(key + counter.to_bytes(8, "big")).digest()
        counter += 1
    masked = bytes(a ^ b for a, b in zip(data.to_bytes(), stream))
    return BitString.from_bytes(masked, len(data))
