"""Measurement harness: roll a model forward and tabulate per-step divergences.

For each sampled prefix the harness records, at every step, the exact KL
and total variation gap each encoder would have incurred against the live
next-token distribution: the bins encoder for each configured k (one fixed
shared partition per k) and the per-step Huffman coder.  Output is plain
CSV so plots can be made elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import metrics
from .codecs import BinPartition, bins_effective, make_partition
from .huffman import build_huffman, huffman_distribution
from .lm import LanguageModel, next_distribution, sample_token

TABLE_HEADER = "prefix,step,algo,param,kl_bits,tvd"
SUMMARY_HEADER = "algo,param,count,mean,median,max"


class Row(NamedTuple):
    prefix: int
    step: int
    algo: str
    param: str
    kl_bits: float
    tvd: float


@dataclass(frozen=True)
class ExperimentSpec:
    """Shape of a measurement run.

    num_prefixes * steps_per_prefix is the total number of recorded steps.
    Rollouts start from the empty context unless seed_prefixes supplies one
    starting context per prefix.
    """

    num_prefixes: int = 50
    steps_per_prefix: int = 40
    bins_ks: tuple[int, ...] = (3,)
    include_vlc: bool = True
    partition_seed: int = 0
    rng_seed: int = 0
    seed_prefixes: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.num_prefixes < 1 or self.steps_per_prefix < 1:
            raise ValueError("num_prefixes and steps_per_prefix must be >= 1")
        if not self.bins_ks and not self.include_vlc:
            raise ValueError("nothing to measure: no bins widths and vlc disabled")
        if any(k < 1 for k in self.bins_ks):
            raise ValueError("bins widths must be >= 1")
        if self.seed_prefixes is not None and len(self.seed_prefixes) != self.num_prefixes:
            raise ValueError("seed_prefixes must supply one context per prefix")

    @property
    def total_steps(self) -> int:
        return self.num_prefixes * self.steps_per_prefix


def run_experiment(model: LanguageModel, spec: ExperimentSpec) -> list[Row]:
    """Record per-step divergences over seeded rollouts; fully deterministic.

    Row order is (prefix index, step index, algo) with bins widths ascending
    before vlc, so reruns with the same seed are byte-identical.
    """
    partitions: dict[int, BinPartition] = {
        k: make_partition(spec.partition_seed, model.vocab_size, k)
        for k in sorted(set(spec.bins_ks))
    }
    rng = np.random.default_rng(spec.rng_seed)
    rows: list[Row] = []
    for i in range(spec.num_prefixes):
        context = list(spec.seed_prefixes[i]) if spec.seed_prefixes else []
        for step in range(spec.steps_per_prefix):
            p = next_distribution(model, context)
            for k, partition in partitions.items():
                kl = max(0.0, k - metrics.partition_entropy(p, partition))
                tv = metrics.tvd(p, bins_effective(p, partition))
                rows.append(Row(i, step, "bins", str(k), kl, tv))
            if spec.include_vlc:
                mass = huffman_distribution(build_huffman(p))
                rows.append(
                    Row(i, step, "vlc", "", metrics.kl_divergence(p, mass), metrics.tvd(p, mass))
                )
            context.append(sample_token(p, rng))
    return rows


def format_table(rows: Iterable[Row]) -> str:
    lines = [TABLE_HEADER]
    for r in rows:
        lines.append(f"{r.prefix},{r.step},{r.algo},{r.param},{r.kl_bits!r},{r.tvd!r}")
    return "\n".join(lines) + "\n"


def summarize(rows: Sequence[Row]) -> str:
    """Mean/median/max of the KL column per (algo, param), as CSV."""
    groups: dict[tuple[str, str], list[float]] = {}
    for r in rows:
        groups.setdefault((r.algo, r.param), []).append(r.kl_bits)
    lines = [SUMMARY_HEADER]
    for (algo, param), values in sorted(groups.items()):
        arr = np.asarray(values)
        lines.append(
            f"{algo},{param},{arr.size},{float(arr.mean())!r},"
            f"{float(np.median(arr))!r},{float(arr.max())!r}"
        )
    return "\n".join(lines) + "\n"


def emit_histogram(values: Sequence[float], num_bins: int, upper: float | None = None) -> str:
    """Fixed-width histogram over [0, upper] as CSV (bin_lo,bin_hi,count).

    `upper` defaults to the data maximum; pass the metric's theoretical
    bound (k for bins, 1 for vlc) to make runs comparable.  Values beyond
    the range are clipped into the edge bins.
    """
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    arr = np.asarray(values, dtype=np.float64)
    if upper is None:
        upper = float(arr.max()) if arr.size else 1.0
    if upper <= 0.0:
        upper = 1.0
    counts, edges = np.histogram(np.clip(arr, 0.0, upper), bins=num_bins, range=(0.0, upper))
    lines = ["bin_lo,bin_hi,count"]
    for i, count in enumerate(counts):
        lines.append(f"{float(edges[i])!r},{float(edges[i + 1])!r},{int(count)}")
    return "\n".join(lines) + "\n"
