"""Probability measures on letters x [0,1] with uniform position marginal,
and the maps between words, word laws, and such measures.

A measure is stored through its conditional letter weights q_a(u): piecewise
polynomials in the position u with exact rational coefficients, one piece
per interval of a shared breakpoint grid. Having the conditionals sum to
the constant 1 on every piece makes the uniform-position-marginal
requirement hold identically, and polynomial calculus gives exact values
for letter masses, sorted-word laws, and quantiles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .kernels import EXACT_TABLE_LIMIT, WordDistribution
from .words import Word

# ---------------------------------------------------------------------------
# polynomial helpers (coefficient tuples, index = power, Fraction entries)


def _poly_eval(coeffs, x):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca == 0:
            continue
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return tuple(out)


def _poly_antiderivative(coeffs):
    return (Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(coeffs))


def _piecewise_cumulative(breaks, pieces):
    """Antiderivative of a piecewise polynomial, continuous with value 0 at 0."""
    out = []
    running = Fraction(0)
    for (lo, hi), piece in zip(itertools.pairwise(breaks), pieces):
        anti = _poly_antiderivative(piece)
        shift = running - _poly_eval(anti, lo)
        out.append((anti[0] + shift,) + anti[1:])
        running = shift + _poly_eval(anti, hi)
    return out


def _piecewise_eval_scalar(breaks, pieces, x):
    for (lo, hi), piece in zip(itertools.pairwise(breaks), pieces):
        if x < hi or hi == breaks[-1]:
            return _poly_eval(piece, x)
    return _poly_eval(pieces[-1], x)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMeasure2D:
    """Finitely supported probability measure on letters x [0,1].

    Atoms are canonicalized: sorted by (letter, position), duplicates
    merged, zero masses dropped.
    """

    atoms: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        merged: dict[tuple[int, float], float] = {}
        for letter, pos, mass in self.atoms:
            if mass < 0:
                raise ValueError("negative atom mass")
            if not 0.0 <= pos <= 1.0 + 1e-12:
                raise ValueError(f"position {pos} outside [0,1]")
            if mass > 0:
                key = (int(letter), float(pos))
                merged[key] = merged.get(key, 0.0) + float(mass)
        total = sum(merged.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom masses sum to {total}, not 1")
        object.__setattr__(
            self,
            "atoms",
            tuple((a, p, m) for (a, p), m in sorted(merged.items())),
        )

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def letter_marginal(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for a, _, m in self.atoms:
            out[a] = out.get(a, 0.0) + m
        return out

    def to_rows(self) -> list[tuple[int, float, float]]:
        return [tuple(atom) for atom in self.atoms]


def word_measure(word) -> FiniteMeasure2D:
    """Empirical letter-with-relative-position measure of a word."""
    word = tuple(word)
    n = len(word)
    if n == 0:
        raise ValueError("empty word has no position measure")
    return FiniteMeasure2D(tuple((a, (j + 1) / n, 1.0 / n) for j, a in enumerate(word)))


def position_sample(dist: WordDistribution) -> FiniteMeasure2D:
    """Mixture of word measures under a word law: pick a word, then sample a
    letter together with its relative position."""
    k = dist.length
    mass: dict[tuple[int, float], float] = {}
    for v, p in dist.weights.items():
        p = float(p)
        if p == 0:
            continue
        for j, a in enumerate(v):
            key = (a, (j + 1) / k)
            mass[key] = mass.get(key, 0.0) + p / k
    return FiniteMeasure2D(tuple((a, u, m) for (a, u), m in mass.items()))


@dataclass(frozen=True)
class DirectingMeasure:
    """Measure on letters x [0,1] with uniform position marginal.

    ``cond[a-1]`` holds the piecewise polynomial conditional weight of
    letter a given the position, on the shared ``breaks`` grid. The
    conditionals of every piece sum to the constant one, which is exactly
    the uniform-marginal membership condition.
    """

    breaks: tuple[Fraction, ...]
    cond: tuple[tuple[tuple[Fraction, ...], ...], ...]
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    projection_residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_cum_cache", {})
        if self.breaks[0] != 0 or self.breaks[-1] != 1:
            raise ValueError("breakpoints must span [0, 1]")
        if any(b >= c for b, c in itertools.pairwise(self.breaks)):
            raise ValueError("breakpoints must be strictly increasing")
        npieces = len(self.breaks) - 1
        for qa in self.cond:
            if len(qa) != npieces:
                raise ValueError("conditional piece count mismatch")
        for p in range(npieces):
            total = [Fraction(0)]
            for qa in self.cond:
                piece = qa[p]
                total += [Fraction(0)] * (len(piece) - len(total))
                for i, c in enumerate(piece):
                    total[i] += c
                lo, hi = self.breaks[p], self.breaks[p + 1]
                if _poly_eval(piece, lo) < 0 or _poly_eval(piece, hi) < 0:
                    raise ValueError("negative conditional letter weight")
            if total[0] != 1 or any(c != 0 for c in total[1:]):
                raise ValueError("conditional letter weights must sum to one")

    # -- constructors -------------------------------------------------------

    @classmethod
    def product(cls, probs: Sequence) -> "DirectingMeasure":
        """Letters independent of positions: letter law ``probs``, uniform u."""
        p = [Fraction(x) for x in probs]
        total = sum(p)
        if total == 0 or any(x < 0 for x in p):
            raise ValueError("letter probabilities must be nonnegative, not all 0")
        p = [x / total for x in p]
        cond = tuple(((x,),) for x in p)
        return cls(
            breaks=(Fraction(0), Fraction(1)),
            cond=cond,
            kind="product",
            params={"probs": [float(x) for x in p]},
        )

    @classmethod
    def threshold(
        cls, cuts: Sequence, letters: Sequence[int], size: int | None = None
    ) -> "DirectingMeasure":
        """Deterministic letter map: letter ``letters[i]`` on the i-th
        interval of the partition given by ``cuts``."""
        cuts = [Fraction(c) for c in cuts]
        if any(not 0 < c < 1 for c in cuts) or any(
            a >= b for a, b in itertools.pairwise(cuts)
        ):
            raise ValueError("cuts must be strictly increasing inside (0,1)")
        if len(letters) != len(cuts) + 1:
            raise ValueError("need one letter per interval")
        m = size if size is not None else max(letters)
        if any(not 1 <= a <= m for a in letters):
            raise ValueError("letter outside alphabet")
        breaks = (Fraction(0), *cuts, Fraction(1))
        cond = tuple(
            tuple((Fraction(1 if letters[p] == a else 0),) for p in range(len(letters)))
            for a in range(1, m + 1)
        )
        return cls(
            breaks=breaks,
            cond=cond,
            kind="threshold",
            params={"cuts": [float(c) for c in cuts], "letters": list(letters)},
        )

    @classmethod
    def triangular(cls) -> "DirectingMeasure":
        """Binary measure with conditional weight u for the second letter;
        second-letter mass below t is t^2 / 2."""
        cond = (((Fraction(1), Fraction(-1)),), ((Fraction(0), Fraction(1)),))
        return cls(
            breaks=(Fraction(0), Fraction(1)),
            cond=cond,
            kind="triangular",
            params={},
        )

    @classmethod
    def from_grid(
        cls, measure: FiniteMeasure2D, bins: int, size: int | None = None
    ) -> "DirectingMeasure":
        """Bin a finitely supported measure into equal position bins and
        project the position marginal to uniform.

        Within every bin the letter split is kept proportional; the total
        variation between the original binned position marginal and the
        uniform one is recorded as ``projection_residual``.
        """
        if bins < 1:
            raise ValueError("need at least one bin")
        m = size if size is not None else max(a for a, _, _ in measure.atoms)
        bin_letter = [[Fraction(0)] * m for _ in range(bins)]
        for a, pos, mass in measure.atoms:
            j = min(bins - 1, max(0, math.ceil(pos * bins) - 1))
            bin_letter[j][a - 1] += Fraction(mass)
        alpha = [sum(bin_letter[j][a] for j in range(bins)) for a in range(m)]
        alpha_total = sum(alpha)
        residual = sum(
            abs(sum(row) - Fraction(1, bins)) for row in bin_letter
        ) / Fraction(2)
        cond_rows = []
        for row in bin_letter:
            total = sum(row)
            if total > 0:
                cond_rows.append([x / total for x in row])
            else:
                cond_rows.append([x / alpha_total for x in alpha])
        breaks = tuple(Fraction(j, bins) for j in range(bins + 1))
        cond = tuple(
            tuple((cond_rows[p][a],) for p in range(bins)) for a in range(m)
        )
        return cls(
            breaks=breaks,
            cond=cond,
            kind="grid",
            params={"bins": bins},
            projection_residual=float(residual),
        )

    @classmethod
    def from_word(cls, word, size: int | None = None) -> "DirectingMeasure":
        """Grid measure exactly matching a word's position measure: bin j
        carries letter word[j] deterministically."""
        word = tuple(word)
        n = len(word)
        if n == 0:
            raise ValueError("empty word")
        m = size if size is not None else max(word)
        breaks = tuple(Fraction(j, n) for j in range(n + 1))
        cond = tuple(
            tuple((Fraction(1 if word[p] == a else 0),) for p in range(n))
            for a in range(1, m + 1)
        )
        return cls(breaks=breaks, cond=cond, kind="grid", params={"bins": n})

    # -- basic quantities ----------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.cond)

    def letter_masses(self) -> tuple[Fraction, ...]:
        out = []
        for qa in self.cond:
            total = Fraction(0)
            for (lo, hi), piece in zip(itertools.pairwise(self.breaks), qa):
                anti = _poly_antiderivative(piece)
                total += _poly_eval(anti, hi) - _poly_eval(anti, lo)
            out.append(total)
        return tuple(out)

    def conditional_matrix(self, u: np.ndarray) -> np.ndarray:
        """Conditional letter weights at each position, shape (len(u), m)."""
        u = np.asarray(u, dtype=float)
        edges = np.array([float(b) for b in self.breaks])
        piece_idx = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(edges) - 2)
        out = np.zeros((u.size, self.size))
        for a, qa in enumerate(self.cond):
            for p, piece in enumerate(qa):
                mask = piece_idx == p
                if mask.any():
                    cs = [float(c) for c in piece]
                    out[mask, a] = np.polyval(cs[::-1], u[mask])
        return out

    def position_cdf(self, letter: int, t) -> float | np.ndarray:
        """Mass of the given letter on [0, t]; accepts scalars or arrays."""
        edges, polys = self._cdf_float(letter)
        t_arr = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        idx = np.clip(np.searchsorted(edges, t_arr, side="right") - 1, 0, len(polys) - 1)
        out = np.empty_like(t_arr, dtype=float)
        for p, poly in enumerate(polys):
            mask = idx == p
            if mask.any():
                out[mask] = np.polyval(poly[::-1], t_arr[mask])
        if np.ndim(t) == 0:
            return float(out)
        return out

    def _cdf_pieces(self, letter: int):
        cache = self._cum_cache
        if letter not in cache:
            cache[letter] = _piecewise_cumulative(self.breaks, self.cond[letter - 1])
        return cache[letter]

    def _cdf_float(self, letter: int):
        cache = self._cum_cache
        key = ("float", letter)
        if key not in cache:
            pieces = self._cdf_pieces(letter)
            edges = np.array([float(b) for b in self.breaks])
            polys = [[float(c) for c in piece] for piece in pieces]
            cache[key] = (edges, polys)
        return cache[key]

    def position_quantile(self, letter: int, s: float) -> float:
        """Left-continuous inverse of the letter's position mass function:
        the smallest t with mass of letter on [0, t] at least s."""
        return float(self.position_quantile_many(letter, np.array([s]))[0])

    def position_quantile_many(self, letter: int, s: np.ndarray) -> np.ndarray:
        """Vectorized quantiles; levels must lie within the letter's mass."""
        edges, polys = self._cdf_float(letter)
        knots = np.array(
            [np.polyval(poly[::-1], t) for poly, t in zip(polys, edges[1:])]
        )
        knots = np.concatenate(([0.0], knots))
        alpha = knots[-1]
        s = np.asarray(s, dtype=float)
        if s.size and (s.min() < -1e-12 or s.max() > alpha + 1e-12):
            raise ValueError(
                f"quantile level outside [0, {alpha}] for letter {letter}"
            )
        s = np.clip(s, 0.0, alpha)
        # knots may stall on zero-density pieces; left-continuity wants the
        # first piece whose right endpoint reaches the level
        idx = np.clip(np.searchsorted(knots, s, side="left") - 1, 0, len(polys) - 1)
        out = np.empty_like(s)
        for p, poly in enumerate(polys):
            mask = idx == p
            if mask.any():
                out[mask] = _solve_monotone_many(
                    poly, edges[p], edges[p + 1], s[mask]
                )
        return out

    def discretize(self, bins: int) -> FiniteMeasure2D:
        """Atomic approximation: per-bin letter masses at bin midpoints."""
        atoms = []
        for a in range(1, self.size + 1):
            cum = self._cdf_pieces(a)
            prev = Fraction(0)
            for j in range(1, bins + 1):
                t = Fraction(j, bins)
                here = _piecewise_eval_scalar(self.breaks, cum, t)
                mass = here - prev
                prev = here
                if mass > 0:
                    atoms.append((a, (j - Fraction(1, 2)) / bins, float(mass)))
        return FiniteMeasure2D(tuple((a, float(p), m) for a, p, m in atoms))

    def sample_pairs(self, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """iid draws: uniform positions, letters from the conditionals.

        Positions are redrawn on exact float collisions so downstream
        sorting never sees ties.
        """
        from .orders import draw_distinct_uniforms

        u = draw_distinct_uniforms(count, rng)
        weights = self.conditional_matrix(u)
        cum = np.cumsum(weights, axis=1)
        cum /= cum[:, -1:]
        r = rng.random(count)
        letters = (r[:, None] > cum).sum(axis=1) + 1
        return letters.astype(np.int64), u

    def to_config(self) -> dict:
        return {"kind": self.kind, **self.params}


def _solve_monotone_many(coeffs, lo: float, hi: float, targets: np.ndarray) -> np.ndarray:
    """Solve poly(t) = target on [lo, hi] for a nondecreasing polynomial,
    vectorized over targets."""
    cs = [float(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    targets = np.asarray(targets, dtype=float)
    if len(cs) <= 1:
        return np.full_like(targets, lo)
    if len(cs) == 2:
        return np.clip((targets - cs[0]) / cs[1], lo, hi)
    if len(cs) == 3:
        a, b = cs[2], cs[1]
        c = cs[0] - targets
        disc = np.sqrt(np.maximum(b * b - 4 * a * c, 0.0))
        r1 = (-b + disc) / (2 * a)
        r2 = (-b - disc) / (2 * a)
        pick1 = (r1 >= lo - 1e-9) & (r1 <= hi + 1e-9)
        return np.clip(np.where(pick1, r1, r2), lo, hi)
    a = np.full_like(targets, lo)
    b = np.full_like(targets, hi)
    for _ in range(80):
        mid = 0.5 * (a + b)
        low = np.polyval(cs[::-1], mid) < targets
        a = np.where(low, mid, a)
        b = np.where(low, b, mid)
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# exact and sampled laws of sorted iid draws


def marginal_word_law(
    measure: DirectingMeasure, k: int, exact: bool = False
) -> WordDistribution:
    """Exact law of the word formed by k iid draws sorted by position.

    The probability of a word v is k! times the iterated integral of the
    conditional letter weights over the ordered simplex; prefixes share
    their partial integrals, so the whole table costs O(m^k) polynomial
    integrations.
    """
    m = measure.size
    if m**k > EXACT_TABLE_LIMIT:
        raise ValueError(
            f"table of size {m}^{k} exceeds limit; use empirical_word_law"
        )
    if measure.kind == "product":
        alphas = measure.letter_masses()
        weights = {}
        for v in itertools.product(range(1, m + 1), repeat=k):
            p = Fraction(1)
            for a in v:
                p *= alphas[a - 1]
            weights[v] = p if exact else float(p)
        return WordDistribution(k, weights)
    breaks = measure.breaks
    npieces = len(breaks) - 1
    one = tuple((Fraction(1),) for _ in range(npieces))
    level: dict[Word, tuple] = {(): one}
    for _ in range(k):
        nxt: dict[Word, tuple] = {}
        for prefix, pieces in level.items():
            for a in range(1, m + 1):
                prod = tuple(
                    _poly_mul(pieces[p], measure.cond[a - 1][p])
                    for p in range(npieces)
                )
                nxt[prefix + (a,)] = tuple(_piecewise_cumulative(breaks, prod))
        level = nxt
    factorial = math.factorial(k)
    weights = {}
    for v, pieces in level.items():
        p = _poly_eval(pieces[-1], breaks[-1]) * factorial
        weights[v] = p if exact else float(p)
    return WordDistribution(k, weights)


def position_letter_marginals(
    measure: DirectingMeasure, k: int
) -> list[tuple[Fraction, ...]]:
    """Letter law of each slot of the sorted k-draw word.

    Slot j holds the letter attached to the j-th smallest of k iid uniform
    positions, whose density is the Beta(j, k-j+1) polynomial; the integral
    against the conditionals is exact.
    """
    out = []
    breaks = measure.breaks
    for j in range(1, k + 1):
        # density k * C(k-1, j-1) * u^(j-1) * (1-u)^(k-j), expanded
        base = [Fraction(0)] * (k)
        lead = Fraction(k * math.comb(k - 1, j - 1))
        for t in range(k - j + 1):
            base[j - 1 + t] += lead * ((-1) ** t) * math.comb(k - j, t)
        row = []
        for a in range(1, measure.size + 1):
            total = Fraction(0)
            for p, (lo, hi) in enumerate(itertools.pairwise(breaks)):
                piece = _poly_mul(tuple(base), measure.cond[a - 1][p])
                anti = _poly_antiderivative(piece)
                total += _poly_eval(anti, hi) - _poly_eval(anti, lo)
            row.append(total)
        out.append(tuple(row))
    return out


def sampled_marginal_measure(measure: DirectingMeasure, k: int) -> FiniteMeasure2D:
    """Position sample of the sorted k-draw word law, computed from the
    per-slot letter marginals without enumerating the word table."""
    marginals = position_letter_marginals(measure, k)
    atoms = []
    for j, row in enumerate(marginals, start=1):
        for a, mass in enumerate(row, start=1):
            if mass > 0:
                atoms.append((a, j / k, float(mass) / k))
    return FiniteMeasure2D(tuple(atoms))


def sample_word(measure: DirectingMeasure, k: int, rng) -> Word:
    """One draw from the sorted k-draw word law."""
    letters, u = measure.sample_pairs(k, rng)
    order = np.argsort(u, kind="stable")
    return tuple(int(a) for a in letters[order])


def empirical_word_law(
    measure: DirectingMeasure, k: int, reps: int, rng
) -> WordDistribution:
    """Empirical sorted-word law from ``reps`` independent draws."""
    if reps < 1:
        raise ValueError("need at least one draw")
    u = rng.random((reps, k))
    flat_weights = measure.conditional_matrix(u.reshape(-1))
    cum = np.cumsum(flat_weights, axis=1)
    cum /= cum[:, -1:]
    r = rng.random(reps * k)
    letters = ((r[:, None] > cum).sum(axis=1) + 1).reshape(reps, k)
    order = np.argsort(u, axis=1, kind="stable")
    sorted_letters = np.take_along_axis(letters, order, axis=1)
    counts: dict[Word, int] = {}
    for row in sorted_letters:
        v = tuple(int(a) for a in row)
        counts[v] = counts.get(v, 0) + 1
    return WordDistribution(k, {v: c / reps for v, c in counts.items()})
