"""Exact divergence measurements in bits: KL, total variation, entropy.

All logarithms are base 2.  Reductions go through math.fsum (exactly
rounded compensated summation) so the 1e-9 identities hold even for
vocabulary-scale term counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# Pinsker: total variation <= sqrt(PINSKER_COEFF * KL-in-bits).
PINSKER_COEFF = math.log(2.0) / 2.0


def _vec(p) -> np.ndarray:
    return np.asarray(getattr(p, "probs", p), dtype=np.float64)


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p, q = _vec(p), _vec(q)
    if p.shape != q.shape:
        raise ValueError(f"distributions differ in size: {p.size} vs {q.size}")
    return p, q


def kl_divergence(p, q) -> float:
    """KL(p || q) in bits, with 0*log(0/q) = 0.

    Raises if q assigns zero mass where p does not (the result would be
    infinite); tiny negative float residue is clamped to 0.
    """
    p, q = _pair(p, q)
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        raise ValueError("support violation: q has zero mass where p is positive")
    ps = p[mask]
    value = math.fsum(ps * np.log2(ps / q[mask]))
    return value if value > 0.0 else 0.0


def tvd(p, q) -> float:
    """Total variation distance: half the l1 distance, in [0, 1]."""
    p, q = _pair(p, q)
    return 0.5 * math.fsum(np.abs(p - q))


def entropy(p) -> float:
    """Shannon entropy in bits, in [0, log2 V]."""
    p = _vec(p)
    ps = p[p > 0.0]
    return -math.fsum(ps * np.log2(ps))


def bin_masses(p, partition) -> np.ndarray:
    """Pushforward mass per bin under a partition of the token ids.

    `partition` is anything with `assignment` (token id -> bin index) and
    `num_bins` attributes, or a raw assignment array.
    """
    p = _vec(p)
    assignment = np.asarray(getattr(partition, "assignment", partition))
    num_bins = int(getattr(partition, "num_bins", assignment.max() + 1))
    if assignment.shape != p.shape:
        raise ValueError("partition does not cover this vocabulary")
    return np.bincount(assignment, weights=p, minlength=num_bins)


def partition_entropy(p, partition) -> float:
    """Entropy of the bin-mass pushforward, in [0, log2 num_bins]."""
    return entropy(bin_masses(p, partition))


def pinsker_bound(kl_bits: float) -> float:
    """Upper bound on total variation implied by a KL divergence in bits."""
    if kl_bits < 0:
        raise ValueError(f"KL divergence cannot be negative, got {kl_bits}")
    return math.sqrt(PINSKER_COEFF * kl_bits)


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step imperceptibility record emitted by every codec step.

    kl_bits and tvd measure the gap between the model distribution and the
    effective distribution the step actually sampled from; both are 0 for
    steps that sampled the model directly (patient skips, trailing tokens).
    Any (kl_bits, tvd) pair measured from one distribution pair satisfies
    the per-step Pinsker relation, which construction enforces.
    """

    step_index: int
    kl_bits: float
    tvd: float
    bits_embedded: int
    encoded: bool

    def __post_init__(self) -> None:
        if self.kl_bits < 0:
            raise ValueError("kl_bits must be >= 0")
        if not 0.0 <= self.tvd <= 1.0:
            raise ValueError("tvd must lie in [0, 1]")
        if self.bits_embedded < 0:
            raise ValueError("bits_embedded must be >= 0")
        if self.tvd > math.sqrt(PINSKER_COEFF * self.kl_bits) + 1e-9:
            raise ValueError(
                f"tvd {self.tvd} exceeds the Pinsker bound for {self.kl_bits} KL bits"
            )


@dataclass(frozen=True)
class CumulativeBound:
    """Running bound on the total variation a whole stream has incurred.

    Two routes: Pinsker over the KL sum, and direct sub-additivity of the
    per-step total variation.  Both are monotone in the number of steps;
    the reported bound takes whichever is smaller and caps at 1.
    """

    kl_sum_bits: float
    tvd_sum: float
    steps: int

    @property
    def pinsker_bound(self) -> float:
        return pinsker_bound(self.kl_sum_bits)

    @property
    def reported_bound(self) -> float:
        return min(1.0, self.pinsker_bound, self.tvd_sum)


def accumulate(diagnostics: Iterable[StepDiagnostics]) -> CumulativeBound:
    """Fold per-step diagnostics into the cumulative divergence bound."""
    kl_terms: list[float] = []
    tvd_terms: list[float] = []
    for diag in diagnostics:
        kl_terms.append(diag.kl_bits)
        tvd_terms.append(diag.tvd)
    return CumulativeBound(
        kl_sum_bits=math.fsum(kl_terms),
        tvd_sum=math.fsum(tvd_terms),
        steps=len(kl_terms),
    )
