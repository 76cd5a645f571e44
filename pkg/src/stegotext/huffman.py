"""Deterministic minimum-redundancy prefix codes over a probability vector.

Construction is the classic weight-merge, with a fixed total order on
merge candidates: nodes are popped by (weight, creation index), where
leaves carry creation indices 0..V-1 (their token ids) and each merged
node takes the next index.  The first-popped child of a merge becomes the
0-branch.  Equal inputs therefore produce byte-identical codes on every
platform, which the replay decoder depends on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bits import BitReader, BitString

# Optional defense-in-depth: snap weights to a 2^-32 grid before merging so
# marginally different float pipelines still agree on the tree.
QUANT_GRID = float(2**32)


@dataclass(frozen=True, eq=False)
class HuffmanCode:
    """Prefix code in array form.

    Nodes 0..n-1 are token leaves; internal nodes are n..2n-2 in creation
    order, so the root is 2n-2.  `left`/`right` give the 0/1 children of
    internal node n+i; `parent` and `parent_bit` cover every non-root node.
    """

    num_leaves: int
    left: np.ndarray
    right: np.ndarray
    parent: np.ndarray
    parent_bit: np.ndarray
    depths: np.ndarray

    @property
    def root(self) -> int:
        return 2 * self.num_leaves - 2

    def codeword(self, token: int) -> BitString:
        return encode_token(self, token)


def build_huffman(p, quantize: bool = False) -> HuffmanCode:
    """Build the minimum-redundancy code for probability vector `p`.

    Accepts a NextTokenDistribution or any 1-D array-like.  O(V log V).
    """
    weights = np.asarray(getattr(p, "probs", p), dtype=np.float64)
    n = int(weights.size)
    if n < 2:
        raise ValueError("a binary prefix code needs a vocabulary of at least 2 tokens")
    if quantize:
        weights = np.round(weights * QUANT_GRID) / QUANT_GRID

    # Two sorted queues replace a heap: leaves in (weight, token id) order,
    # merged nodes in creation order (their weights are non-decreasing), so
    # the smaller front of the two queues is the global (weight, index) min.
    order = np.argsort(weights, kind="stable")
    leaf_w = weights[order]
    leaf_id = order
    merged_w: list[float] = []
    merged_id: list[int] = []

    left = np.empty(n - 1, dtype=np.int64)
    right = np.empty(n - 1, dtype=np.int64)
    li = 0
    mi = 0
    next_id = n

    def pop() -> tuple[float, int]:
        nonlocal li, mi
        take_leaf = li < n and (
            mi >= len(merged_w)
            or (leaf_w[li], leaf_id[li]) <= (merged_w[mi], merged_id[mi])
        )
        if take_leaf:
            li += 1
            return float(leaf_w[li - 1]), int(leaf_id[li - 1])
        mi += 1
        return merged_w[mi - 1], merged_id[mi - 1]

    for m in range(n - 1):
        w0, id0 = pop()
        w1, id1 = pop()
        left[m] = id0   # first-popped child takes the 0-branch
        right[m] = id1
        merged_w.append(w0 + w1)
        merged_id.append(next_id)
        next_id += 1

    # Depths and parent links, walking internal nodes root-first (a parent
    # is always created after its children, so descending id order works).
    node_depth = np.zeros(2 * n - 1, dtype=np.int64)
    parent = np.full(2 * n - 2, -1, dtype=np.int64)
    parent_bit = np.zeros(2 * n - 2, dtype=np.int8)
    for m in range(n - 2, -1, -1):
        node = n + m
        d = node_depth[node] + 1
        for child, bit in ((left[m], 0), (right[m], 1)):
            node_depth[child] = d
            parent[child] = node
            parent_bit[child] = bit

    depths = node_depth[:n].copy()
    assert math.fsum(2.0 ** -depths) == 1.0, "leaf depths violate Kraft equality"
    for arr in (left, right, parent, parent_bit, depths):
        arr.flags.writeable = False
    return HuffmanCode(
        num_leaves=n,
        left=left,
        right=right,
        parent=parent,
        parent_bit=parent_bit,
        depths=depths,
    )


def huffman_distribution(code: HuffmanCode) -> np.ndarray:
    """Dyadic mass 2^-depth per token; sums to exactly 1."""
    return 2.0 ** -code.depths.astype(np.float64)


def decode_token(code: HuffmanCode, bits: BitReader) -> tuple[int, int]:
    """Walk the tree root-to-leaf consuming bits (0 = left branch).

    Returns (token, bits_consumed).  The reader supplies zero padding once
    the payload runs out and records real vs padding consumption itself.
    """
    node = code.root
    consumed = 0
    n = code.num_leaves
    while node >= n:
        branch = code.right if bits.read_bit() else code.left
        node = int(branch[node - n])
        consumed += 1
    return node, consumed


def encode_token(code: HuffmanCode, token: int) -> BitString:
    """Codeword of `token`; exact inverse of decode_token's walk."""
    if not 0 <= token < code.num_leaves:
        raise ValueError(f"token id {token} out of range [0, {code.num_leaves})")
    bits: list[int] = []
    node = token
    while node != code.root:
        bits.append(int(code.parent_bit[node]))
        node = int(code.parent[node])
    bits.reverse()
    return BitString(bits)
