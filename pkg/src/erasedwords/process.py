"""Simulation of the word process directed by a fixed measure, plus the
estimators and diagnostics that certify its convergence behavior.

A trajectory at horizon N is driven by N iid letter-position pairs. The
word at stage n is the first n letters sorted by their positions, the
eraser rank at stage n is the rank of the n-th position among the first n,
and erasing that slot steps the word chain down, all of which hold as
exact identities on every simulated trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import subsequence_density, subsequence_law
from .measures import DirectingMeasure, FiniteMeasure2D, marginal_word_law, word_measure
from .orders import rank_sequence
from .transport import total_variation
from .words import Word, erase, induced_order_statistics

WORD_STORE_LIMIT = 4096


@dataclass
class Trajectory:
    """Finite-horizon realization of the erased-word dynamics.

    ``words`` holds every stage word when the horizon is small enough to
    materialize them; otherwise only the requested checkpoint words are
    kept and other stages are rebuilt from the driving pairs on demand.
    """

    horizon: int
    seed: int | None
    measure: DirectingMeasure
    letters: np.ndarray
    positions: np.ndarray
    ranks: np.ndarray
    words: list[Word] | None
    checkpoint_words: dict[int, Word] = field(default_factory=dict)

    def word_at(self, n: int) -> Word:
        if not 1 <= n <= self.horizon:
            raise ValueError(f"stage {n} outside 1..{self.horizon}")
        if self.words is not None:
            return self.words[n - 1]
        if n in self.checkpoint_words:
            return self.checkpoint_words[n]
        return induced_order_statistics(
            [int(a) for a in self.letters[:n]], self.positions[:n].tolist()
        )


def simulate_trajectory(
    measure: DirectingMeasure,
    horizon: int,
    seed: int | None = None,
    rng=None,
    checkpoints=(),
    validate: bool = True,
) -> Trajectory:
    """Draw a trajectory of the given horizon; see the module docstring for
    the identities that are asserted when ``validate`` is set."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    letters, positions = measure.sample_pairs(horizon, rng)
    ranks = rank_sequence(positions)
    words: list[Word] | None = None
    checkpoint_words: dict[int, Word] = {}
    if horizon <= WORD_STORE_LIMIT:
        words = words_by_insertion(letters, ranks)
    else:
        for n in sorted(set(checkpoints)):
            checkpoint_words[n] = induced_order_statistics(
                [int(a) for a in letters[:n]], positions[:n].tolist()
            )
    traj = Trajectory(
        horizon=horizon,
        seed=seed,
        measure=measure,
        letters=letters,
        positions=positions,
        ranks=ranks,
        words=words,
        checkpoint_words=checkpoint_words,
    )
    if validate:
        validate_trajectory(traj)
    return traj


def words_by_insertion(letters, ranks) -> list[Word]:
    words = []
    line: list[int] = []
    for a, r in zip(letters, ranks):
        line.insert(int(r) - 1, int(a))
        words.append(tuple(line))
    return words


def validate_trajectory(traj: Trajectory) -> None:
    """Assert the three construction identities, raising on any violation."""
    n_check = traj.horizon
    u = traj.positions
    expected_ranks = rank_sequence(u)
    if not np.array_equal(expected_ranks, traj.ranks):
        raise RuntimeError("trajectory invariant violated: rank identity")
    final = traj.word_at(n_check)
    rebuilt = induced_order_statistics(
        [int(a) for a in traj.letters], u.tolist()
    )
    if final != rebuilt:
        raise RuntimeError("trajectory invariant violated: sorted-letters identity")
    if traj.words is not None:
        for n in range(traj.horizon, 1, -1):
            if erase(traj.words[n - 1], int(traj.ranks[n - 1])) != traj.words[n - 2]:
                raise RuntimeError(
                    f"trajectory invariant violated: erasure coherence at n={n}"
                )


def erased_letters(traj: Trajectory) -> list[int]:
    """Letter removed at each backward step: stage word at its eraser slot.

    Read off the stored words; equals the driving letter sequence exactly.
    """
    if traj.words is not None:
        words = traj.words
    else:
        words = words_by_insertion(traj.letters, traj.ranks)
    return [words[j][int(traj.ranks[j]) - 1] for j in range(traj.horizon)]


def empirical_directing_measure(
    traj: Trajectory, n: int, mode: str = "position"
) -> FiniteMeasure2D:
    """Estimate the directing measure from the stage-n word.

    ``position`` places the stage word's letters at relative slots j/n;
    ``empirical-u`` keeps the realized position values instead (the letters
    paired with the sorted positions). Both converge to the true measure.
    """
    if not 1 <= n <= traj.horizon:
        raise ValueError(f"stage {n} outside 1..{traj.horizon}")
    if mode == "position":
        return word_measure(traj.word_at(n))
    if mode == "empirical-u":
        return FiniteMeasure2D(
            tuple(
                (int(a), float(u), 1.0 / n)
                for a, u in zip(traj.letters[:n], traj.positions[:n])
            )
        )
    raise ValueError(f"unknown mode {mode!r}")


def density_trace(traj: Trajectory, pattern, checkpoints) -> list[tuple[int, float]]:
    """Subsequence density of the pattern in the stage word, per checkpoint."""
    pattern = tuple(pattern)
    out = []
    for n in sorted(checkpoints):
        if len(pattern) > n:
            raise ValueError(f"pattern longer than checkpoint word ({n})")
        out.append((n, subsequence_density(pattern, traj.word_at(n))))
    return out


def marginal_gap_diagnostics(
    measure: DirectingMeasure,
    k: int,
    checkpoints,
    seeds,
) -> dict:
    """Distance of stage-word subsequence laws to the sorted-draw law.

    For every seed and checkpoint n the total variation between the exact
    length-k subsequence law of the stage word and the k-draw law of the
    measure is tabulated, along with the across-seed dispersion of the
    per-word estimates (an ergodicity proxy that shrinks with n).
    """
    checkpoints = sorted(checkpoints)
    if k > checkpoints[0]:
        raise ValueError("subsequence length exceeds smallest checkpoint")
    target = marginal_word_law(measure, k)
    horizon = checkpoints[-1]
    tv_by_seed = []
    cell_estimates = {n: [] for n in checkpoints}
    for seed in seeds:
        traj = simulate_trajectory(
            measure, horizon, seed=seed, checkpoints=checkpoints, validate=False
        )
        row = []
        for n in checkpoints:
            law = subsequence_law(traj.word_at(n), k)
            row.append(float(total_variation(law, target)))
            cell_estimates[n].append(law)
        tv_by_seed.append(row)
    support = sorted(target.weights)
    dispersion = []
    for n in checkpoints:
        laws = cell_estimates[n]
        stds = []
        for v in support:
            vals = [law.probability(v) for law in laws]
            stds.append(float(np.std(vals)))
        dispersion.append(float(np.mean(stds)))
    table = np.array(tv_by_seed)
    return {
        "checkpoints": checkpoints,
        "tv_by_seed": table.tolist(),
        "tv_median": np.median(table, axis=0).tolist(),
        "dispersion": dispersion,
        "seeds": list(seeds),
    }


def batch_stage_words(
    measure: DirectingMeasure, n: int, reps: int, rng
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized replicates of the stage-n word and its rank column.

    Returns (words, ranks): ``words[r]`` is the sorted letter row of
    replicate r, ``ranks[r, j]`` the eraser rank at stage j+1.
    """
    u = rng.random((reps, n))
    weights = measure.conditional_matrix(u.reshape(-1))
    cum = np.cumsum(weights, axis=1)
    cum /= cum[:, -1:]
    r = rng.random(reps * n)
    letters = ((r[:, None] > cum).sum(axis=1) + 1).reshape(reps, n)
    order = np.argsort(u, axis=1, kind="stable")
    words = np.take_along_axis(letters, order, axis=1)
    ranks = np.empty((reps, n), dtype=np.int64)
    for j in range(n):
        ranks[:, j] = 1 + (u[:, : j + 1] < u[:, j : j + 1]).sum(axis=1)
    return words, ranks
