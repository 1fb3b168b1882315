"""Words over a finite alphabet, erasure, and rank statistics.

Letters are stored as 1-based integer indices into an :class:`Alphabet`;
symbolic names only appear at the I/O boundary (corpus files, configs).
Permutations use one-line notation with 1-based values throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

Word = tuple[int, ...]
Permutation = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet; letter i is ``symbols[i-1]``."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ValueError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        """1-based index of a symbol."""
        try:
            return self.symbols.index(symbol) + 1
        except ValueError:
            raise KeyError(f"unknown letter {symbol!r}") from None

    def symbol(self, letter: int) -> str:
        if not 1 <= letter <= self.size:
            raise KeyError(f"letter index {letter} out of range 1..{self.size}")
        return self.symbols[letter - 1]

    def word_from_tokens(self, tokens: Sequence[str]) -> Word:
        return tuple(self.index(t) for t in tokens)

    def tokens(self, word: Sequence[int]) -> list[str]:
        return [self.symbol(a) for a in word]


def erase(word: Sequence[int], i: int) -> Word:
    """Remove the i-th letter (1-based); length shrinks by exactly one."""
    n = len(word)
    if not 1 <= i <= n:
        raise ValueError(f"erase index {i} out of range 1..{n}")
    return tuple(word[: i - 1]) + tuple(word[i:])


def sorting_permutation(values: Sequence) -> Permutation:
    """Stable sorting permutation pi: values[pi(k)-1] is the k-th smallest.

    Ties keep original order, i.e. equal values appear in increasing
    index order in the output.
    """
    order = sorted(range(len(values)), key=values.__getitem__)
    return tuple(i + 1 for i in order)


def order_statistics(values: Sequence) -> tuple:
    """Values rearranged non-decreasingly."""
    return tuple(sorted(values))


def induced_order_statistics(letters: Sequence[int], values: Sequence) -> Word:
    """Letters rearranged by the stable sorting permutation of the values."""
    if len(letters) != len(values):
        raise ValueError(
            f"length mismatch: {len(letters)} letters vs {len(values)} values"
        )
    pi = sorting_permutation(values)
    return tuple(letters[p - 1] for p in pi)


def is_permutation(images: Sequence[int]) -> bool:
    n = len(images)
    return sorted(images) == list(range(1, n + 1))


def invert_permutation(pi: Sequence[int]) -> Permutation:
    inv = [0] * len(pi)
    for slot, value in enumerate(pi, start=1):
        inv[value - 1] = slot
    return tuple(inv)


def compose_permutations(outer: Sequence[int], inner: Sequence[int]) -> Permutation:
    """(outer . inner)(i) = outer(inner(i))."""
    if len(outer) != len(inner):
        raise ValueError("permutation sizes differ")
    return tuple(outer[inner[i] - 1] for i in range(len(inner)))
