"""Four equivalent carriers of an exchangeable linear order on 1..N.

A realized prefix can be stored as distinct uniforms ``u``, as the chain of
stable sorting permutations ``S_n`` of the prefixes of ``u``, as the
insertion ranks ``eta_n = S_n^{-1}(n)`` (the rank of ``u_n`` among the first
n values), or, for small N, as the full comparison matrix of the order.
Conversions between the first three are exact and lossless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .words import Permutation, invert_permutation, sorting_permutation

ORDER_MATRIX_LIMIT = 64


@dataclass(frozen=True)
class OrderQuadruple:
    """Coherent realization: uniforms, permutation chain, ranks, order matrix.

    ``order`` is the boolean matrix ``order[i-1, j-1] = (u_i < u_j)``; it is
    materialized only for horizons up to ORDER_MATRIX_LIMIT and is None
    otherwise (the permutation chain already determines it).
    """

    u: np.ndarray
    perms: list[Permutation]
    eta: tuple[int, ...]
    order: np.ndarray | None


def prefix_permutations(u) -> list[Permutation]:
    """S_n = stable sorting permutation of (u_1, ..., u_n) for n = 1..N."""
    u = list(u)
    if len(set(u)) != len(u):
        raise ValueError("prefix values must be pairwise distinct")
    return [sorting_permutation(u[:n]) for n in range(1, len(u) + 1)]


def insertion_ranks_from_permutations(perms) -> tuple[int, ...]:
    """eta_n = S_n^{-1}(n): the slot occupied by the newest item."""
    return tuple(invert_permutation(p)[len(p) - 1] for p in perms)


def permutations_from_insertion_ranks(eta) -> list[Permutation]:
    """Rebuild the permutation chain by inserting n into the eta_n-th slot."""
    perms: list[Permutation] = []
    line: list[int] = []
    for n, r in enumerate(eta, start=1):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} at step {n} outside 1..{n}")
        line.insert(r - 1, n)
        perms.append(tuple(line))
    return perms


def recover_position(eta, i: int) -> float:
    """Estimate u_i by its final relative rank S_N^{-1}(i) / N."""
    n = len(eta)
    if not 1 <= i <= n:
        raise ValueError(f"index {i} outside 1..{n}")
    final = permutations_from_insertion_ranks(eta)[-1]
    return invert_permutation(final)[i - 1] / n


def rank_sequence(values) -> np.ndarray:
    """eta_n = #{k <= n : values_k <= values_n} for every n, as int array.

    Quadratic comparison for short inputs, Fenwick tree above that.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n <= 2048:
        less = v[None, :] < v[:, None]
        tri = np.tril(less, k=-1)
        return tri.sum(axis=1).astype(np.int64) + 1
    order = np.argsort(v, kind="stable")
    compressed = np.empty(n, dtype=np.int64)
    compressed[order] = np.arange(1, n + 1)
    tree = np.zeros(n + 1, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    for j in range(n):
        pos = int(compressed[j])
        i = pos
        acc = 0
        while i > 0:
            acc += tree[i]
            i -= i & (-i)
        out[j] = acc + 1
        i = pos
        while i <= n:
            tree[i] += 1
            i += i & (-i)
    return out


def remaining_slots(eta_tail, n: int) -> np.ndarray:
    """Final ranks (sorted) of the first n items, from the rank tail alone.

    ``eta_tail`` lists eta_j for j = n+1 .. N. Items are placed back to
    front: item j claims the eta_j-th currently free slot of 1..N, so the
    slots never claimed are exactly the final ranks of items 1..n. The
    result does not depend on the internal order of the first n items.
    """
    tail = list(eta_tail)
    total = n + len(tail)
    for offset, r in enumerate(tail):
        if not 1 <= r <= n + offset + 1:
            raise ValueError(f"rank {r} at step {n + offset + 1} out of range")
    size = total + 1
    tree = np.zeros(size, dtype=np.int64)

    def add(i, delta):
        while i <= total:
            tree[i] += delta
            i += i & (-i)

    def kth_free(k):
        # smallest slot s with (free slots <= s) == k
        pos = 0
        log = size.bit_length()
        for p in range(log, -1, -1):
            npos = pos + (1 << p)
            if npos <= total and tree[npos] < k:
                pos = npos
                k -= tree[npos]
        return pos + 1

    for i in range(1, total + 1):
        add(i, 1)
    taken = np.zeros(total + 1, dtype=bool)
    for j in range(len(tail) - 1, -1, -1):
        slot = kth_free(tail[j])
        taken[slot] = True
        add(slot, -1)
    return np.flatnonzero(~taken[1:]) + 1


def prefix_rank_estimates(values, n: int) -> np.ndarray:
    """Sorted final ranks of the first n values among all values, over N.

    Equal to ``remaining_slots(rank_sequence(values)[n:], n) / N``; this is
    the vectorized route used in long-horizon experiments.
    """
    v = np.asarray(values, dtype=float)
    total = v.size
    ranks = np.argsort(np.argsort(v, kind="stable"), kind="stable")[:n] + 1
    return np.sort(ranks) / total


def simulate_quadruple(horizon: int, rng) -> OrderQuadruple:
    """Draw distinct iid uniforms and derive the coherent quadruple."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    u = draw_distinct_uniforms(horizon, rng)
    perms = prefix_permutations(u)
    eta = insertion_ranks_from_permutations(perms)
    order = None
    if horizon <= ORDER_MATRIX_LIMIT:
        order = u[None, :] > u[:, None]
    return OrderQuadruple(u=u, perms=perms, eta=eta, order=order)


def draw_distinct_uniforms(count: int, rng) -> np.ndarray:
    """Uniform draws with exact float collisions rejected and redrawn."""
    u = rng.random(count)
    while True:
        _, inverse, counts = np.unique(u, return_inverse=True, return_counts=True)
        dup = counts[inverse] > 1
        if not dup.any():
            return u
        u[dup] = rng.random(int(dup.sum()))
