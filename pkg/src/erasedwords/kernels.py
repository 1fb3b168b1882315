"""Erasure and subsequence kernels: embedding counts, densities, and the
law of a uniformly chosen length-k subsequence.

Counting is done in exact integer arithmetic; probabilities are exposed
either as floats or, with ``exact=True``, as :class:`fractions.Fraction`
so that identities like the Chapman-Kolmogorov consistency come out as
literal zeros rather than rounding noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .words import Word, erase

EXACT_TABLE_LIMIT = 2**20


@dataclass(frozen=True)
class WordDistribution:
    """Probability vector over words of one fixed length."""

    length: int
    weights: Mapping[Word, float | Fraction]

    def __post_init__(self):
        for v in self.weights:
            if len(v) != self.length:
                raise ValueError(f"key {v} has length {len(v)}, expected {self.length}")
        total = sum(self.weights.values())
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {float(total)}, not 1")
        if any(float(p) < 0 for p in self.weights.values()):
            raise ValueError("negative weight")

    def probability(self, word: Word):
        return self.weights.get(tuple(word), 0)

    def support(self) -> list[Word]:
        return sorted(v for v, p in self.weights.items() if p > 0)

    def as_float(self) -> "WordDistribution":
        return WordDistribution(
            self.length, {v: float(p) for v, p in self.weights.items()}
        )


def count_embeddings(pattern, word) -> int:
    """Number of index tuples j_1 < ... < j_k with word[j_i] == pattern[i].

    Returns 0 when the pattern is longer than the word.
    """
    k, n = len(pattern), len(word)
    if k > n:
        return 0
    # table[i] = embeddings of pattern[:i] in the scanned prefix of word
    table = [0] * (k + 1)
    table[0] = 1
    for letter in word:
        for i in range(min(k, n), 0, -1):
            if pattern[i - 1] == letter:
                table[i] += table[i - 1]
    return table[k]


def subsequence_density(pattern, word, exact: bool = False):
    """Probability that a uniform |pattern|-subsequence of word equals pattern."""
    k, n = len(pattern), len(word)
    if not 1 <= k <= n:
        raise ValueError(f"pattern length {k} outside 1..{n}")
    hits = count_embeddings(pattern, word)
    if exact:
        return Fraction(hits, math.comb(n, k))
    return hits / math.comb(n, k)


def subsequence_law(
    word, k: int, alphabet_size: int | None = None, exact: bool = False
) -> WordDistribution:
    """Exact law of a uniformly chosen length-k subsequence of ``word``.

    One dynamic-programming sweep counts embeddings of every length-k
    target simultaneously; the table is sparse in the realized
    subsequences. With ``alphabet_size`` given, zero-probability words are
    filled in explicitly (only when the full table stays below
    EXACT_TABLE_LIMIT entries).
    """
    word = tuple(word)
    n = len(word)
    if not 1 <= k <= n:
        raise ValueError(f"subsequence length {k} outside 1..{n}")
    layers: list[dict[Word, int]] = [{(): 1}] + [dict() for _ in range(k)]
    for letter in word:
        for i in range(min(k, n), 0, -1):
            grown = layers[i]
            for v, c in layers[i - 1].items():
                key = v + (letter,)
                grown[key] = grown.get(key, 0) + c
            if len(grown) > EXACT_TABLE_LIMIT:
                raise ValueError(
                    f"realized subsequence table exceeds {EXACT_TABLE_LIMIT} "
                    "entries; use sample_subsequence or per-target "
                    "subsequence_density"
                )
    denom = math.comb(n, k)
    if exact:
        weights = {v: Fraction(c, denom) for v, c in layers[k].items()}
    else:
        weights = {v: c / denom for v, c in layers[k].items()}
    if alphabet_size is not None:
        if alphabet_size**k > EXACT_TABLE_LIMIT:
            raise ValueError(
                f"full table of size {alphabet_size}^{k} exceeds limit; "
                "use sample_subsequence or per-target subsequence_density"
            )
        zero = Fraction(0) if exact else 0.0
        for v in _all_words(alphabet_size, k):
            weights.setdefault(v, zero)
    return WordDistribution(k, weights)


def _all_words(m: int, k: int) -> Iterable[Word]:
    if k == 0:
        yield ()
        return
    for prefix in _all_words(m, k - 1):
        for a in range(1, m + 1):
            yield prefix + (a,)


def sample_subsequence(word, k: int, rng) -> Word:
    """Subsequence at a uniformly chosen set of k positions."""
    word = tuple(word)
    n = len(word)
    if not 1 <= k <= n:
        raise ValueError(f"subsequence length {k} outside 1..{n}")
    picks = sorted(rng.choice(n, size=k, replace=False))
    return tuple(word[j] for j in picks)


def chapman_kolmogorov_deviation(word, k: int, m: int) -> float:
    """Max deviation between the one-step and two-step subsequence laws.

    Compares the law of a length-k subsequence of ``word`` against first
    passing through length m. Both sides are assembled in exact rational
    arithmetic, so the returned deviation is genuinely zero when the
    kernels are consistent.
    """
    word = tuple(word)
    n = len(word)
    if not 1 <= k <= m <= n:
        raise ValueError(f"need 1 <= k <= m <= |word|, got k={k} m={m} n={n}")
    direct = subsequence_law(word, k, exact=True).weights
    outer = subsequence_law(word, m, exact=True).weights
    composed: dict[Word, Fraction] = {}
    for u, pu in outer.items():
        for v, pv in subsequence_law(u, k, exact=True).weights.items():
            composed[v] = composed.get(v, Fraction(0)) + pu * pv
    keys = set(direct) | set(composed)
    dev = max(
        abs(direct.get(v, Fraction(0)) - composed.get(v, Fraction(0))) for v in keys
    )
    return float(dev)


def erase_chain(word, rank_tail, down_to: int) -> Word:
    """Iterated erasure from |word| down to ``down_to`` letters.

    ``rank_tail`` supplies the erasure slots eta_j for j = down_to+1 ..
    |word|, in ascending j order; they are applied from the top down.
    """
    word = tuple(word)
    n = len(word)
    if not 0 <= down_to <= n:
        raise ValueError(f"target length {down_to} outside 0..{n}")
    tail = list(rank_tail)
    if len(tail) != n - down_to:
        raise ValueError(
            f"rank tail has {len(tail)} entries, expected {n - down_to}"
        )
    current = word
    for j in range(n, down_to, -1):
        r = tail[j - down_to - 1]
        if not 1 <= r <= j:
            raise ValueError(f"rank {r} at length {j} outside 1..{j}")
        current = erase(current, r)
    return current
