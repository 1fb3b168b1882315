"""Relabeled innovations and deterministic reconstruction.

The eraser rank at stage n can be pushed through the block-sorting
permutation of the stage word; the relabeled ranks are again independent
uniforms, and they correspond to a second uniform sequence V whose values
factor the directing measure through a single uniform: letter by block
membership, position by a per-letter quantile. On a coupled simulation the
relabeling identity holds exactly at every stage, and the stage word is a
deterministic function of the sorted V-prefix, which is what the
reconstruction routines certify at finite horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DirectingMeasure
from .orders import draw_distinct_uniforms, rank_sequence, remaining_slots
from .process import Trajectory, words_by_insertion, validate_trajectory
from .transport import word_curve
from .words import Word, induced_order_statistics, invert_permutation, sorting_permutation


def block_sort_permutation(word) -> tuple[int, ...]:
    """Permutation sending each slot of the word to its slot in the
    letter-sorted word, increasing within equal-letter blocks.

    This is the inverse of the stable sorting permutation of the letters.
    """
    word = tuple(word)
    if not word:
        raise ValueError("empty word")
    return invert_permutation(sorting_permutation(word))


def relabel_rank(word, rank: int) -> int:
    """Image of an eraser rank under the word's block-sorting permutation.

    A bijection of 1..|word|, so uniform ranks stay uniform.
    """
    word = tuple(word)
    if not 1 <= rank <= len(word):
        raise ValueError(f"rank {rank} outside 1..{len(word)}")
    return block_sort_permutation(word)[rank - 1]


@dataclass(frozen=True)
class UniformFactorization:
    """Letter and position of a draw as functions of one uniform seed.

    ``letter_map`` sends v to the letter whose mass block contains v;
    ``position_map`` applies that letter's position quantile to the offset
    of v within the block. Pushing a uniform through the pair reproduces
    the source measure.
    """

    measure: DirectingMeasure
    alphas: tuple[float, ...]
    cuts: np.ndarray  # cumulative letter masses, length m

    def letter_map(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        letters = np.searchsorted(self.cuts, v, side="right") + 1
        out = np.clip(letters, 1, len(self.alphas))
        return out.astype(np.int64)

    def position_map(self, v) -> np.ndarray:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        letters = self.letter_map(v)
        lows = np.concatenate(([0.0], self.cuts[:-1]))
        out = np.empty_like(v)
        for a in np.unique(letters):
            mask = letters == a
            levels = np.clip(v[mask] - lows[a - 1], 0.0, self.alphas[a - 1])
            out[mask] = self.measure.position_quantile_many(int(a), levels)
        return out

    def pairs(self, v) -> tuple[np.ndarray, np.ndarray]:
        return self.letter_map(v), self.position_map(v)


def uniform_factorization(measure: DirectingMeasure) -> UniformFactorization:
    alphas = tuple(float(a) for a in measure.letter_masses())
    cuts = np.cumsum(alphas)
    cuts[-1] = 1.0
    return UniformFactorization(measure=measure, alphas=alphas, cuts=cuts)


class BayesLetterMap:
    """Most probable letter given the position; for a deterministic
    position-to-letter measure this recovers the defining step map.

    A plain callable object so it survives pickling into worker processes.
    """

    def __init__(self, measure: DirectingMeasure):
        self.measure = measure

    def __call__(self, u) -> np.ndarray:
        weights = self.measure.conditional_matrix(np.atleast_1d(u))
        return np.argmax(weights, axis=1) + 1


def bayes_letter_map(measure: DirectingMeasure) -> BayesLetterMap:
    return BayesLetterMap(measure)


def word_from_sorted_uniforms(values, factorization: UniformFactorization) -> Word:
    """Stage word reconstructed from the seed order statistics.

    Only the multiset of values matters: they are sorted, mapped to
    letter-position pairs, and re-sorted by position.
    """
    v = np.sort(np.asarray(values, dtype=float))
    letters, positions = factorization.pairs(v)
    return induced_order_statistics(
        [int(a) for a in letters], positions.tolist()
    )


def word_from_rank_tail(rank_tail, n: int, letter_map) -> Word:
    """Estimate the stage-n word from the eraser ranks beyond stage n.

    The tail determines the final relative ranks of the first n draws as a
    set; those, scaled into (0, 1], estimate the position order statistics,
    and ``letter_map`` turns each estimated position into a letter. The
    output is already position-sorted.
    """
    rank_tail = list(rank_tail)
    slots = remaining_slots(rank_tail, n)
    estimates = slots / (n + len(rank_tail))
    return tuple(int(a) for a in letter_map(estimates))


def seed_estimates_from_rank_tail(rank_tail, n: int) -> np.ndarray:
    """Sorted estimates of the first n seed values from the rank tail."""
    rank_tail = list(rank_tail)
    slots = remaining_slots(rank_tail, n)
    return slots / (n + len(rank_tail))


@dataclass
class DualTrajectory:
    """Trajectory driven through the factorization, with both rank processes.

    ``ranks`` lives on the position side, ``star_ranks`` on the seed side;
    at every stage the star rank is the block-sorting relabel of the plain
    rank.
    """

    base: Trajectory
    factorization: UniformFactorization
    seeds: np.ndarray
    star_ranks: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        return self.base.ranks


def simulate_dual_trajectory(
    measure: DirectingMeasure,
    horizon: int,
    seed: int | None = None,
    rng=None,
    validate: bool = True,
) -> DualTrajectory:
    """Simulate seeds V, push them through the factorization, and build the
    trajectory together with both innovation processes."""
    if rng is None:
        rng = np.random.default_rng(seed)
    fact = uniform_factorization(measure)
    v = draw_distinct_uniforms(horizon, rng)
    letters, positions = fact.pairs(v)
    while True:
        _, inverse, counts = np.unique(positions, return_inverse=True, return_counts=True)
        dup = counts[inverse] > 1
        if not dup.any():
            break
        v[dup] = rng.random(int(dup.sum()))
        letters[dup], positions[dup] = fact.letter_map(v[dup]), fact.position_map(v[dup])
    ranks = rank_sequence(positions)
    star_ranks = rank_sequence(v)
    words = words_by_insertion(letters, ranks) if horizon <= 4096 else None
    base = Trajectory(
        horizon=horizon,
        seed=seed,
        measure=measure,
        letters=letters,
        positions=positions,
        ranks=ranks,
        words=words,
    )
    dual = DualTrajectory(base=base, factorization=fact, seeds=v, star_ranks=star_ranks)
    if validate:
        validate_trajectory(base)
        validate_relabel_identity(dual)
    return dual


def validate_relabel_identity(dual: DualTrajectory) -> None:
    """Assert the exact stagewise identity between the two rank processes."""
    for n in range(1, dual.base.horizon + 1):
        word = dual.base.word_at(n)
        expected = relabel_rank(word, int(dual.base.ranks[n - 1]))
        if expected != int(dual.star_ranks[n - 1]):
            raise RuntimeError(
                f"relabel identity violated at stage {n}: "
                f"{expected} != {int(dual.star_ranks[n - 1])}"
            )


def curve_anchor_data(dual: DualTrajectory, n_mark: int, checkpoints) -> dict:
    """Per-checkpoint plot data: the stage word's count curve plus the
    relative ranks of the first marked draws on both the position side and
    the seed side. The anchors converge to the true positions and seeds."""
    if dual.base.measure.size != 2:
        raise ValueError("plot data is defined for binary alphabets only")
    checkpoints = sorted(checkpoints)
    if n_mark > checkpoints[0]:
        raise ValueError("marked count exceeds the smallest checkpoint")
    records = []
    for n in checkpoints:
        u_sorted = np.sort(dual.base.positions[:n])
        v_sorted = np.sort(dual.seeds[:n])
        u_anchor = (
            np.searchsorted(u_sorted, dual.base.positions[:n_mark], side="right") / n
        )
        v_anchor = np.searchsorted(v_sorted, dual.seeds[:n_mark], side="right") / n
        records.append(
            {
                "n": n,
                "curve": word_curve(dual.base.word_at(n)),
                "u_anchors": u_anchor,
                "v_anchors": v_anchor,
            }
        )
    return {"n_mark": n_mark, "checkpoints": list(checkpoints), "records": records}
