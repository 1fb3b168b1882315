import itertools

import numpy as np
import pytest

from erasedwords.orders import (
    OrderQuadruple,
    draw_distinct_uniforms,
    insertion_ranks_from_permutations,
    permutations_from_insertion_ranks,
    prefix_permutations,
    prefix_rank_estimates,
    rank_sequence,
    recover_position,
    remaining_slots,
    simulate_quadruple,
)
from erasedwords.words import invert_permutation


def all_rank_prefixes(n):
    return itertools.product(*[range(1, j + 1) for j in range(1, n + 1)])


def test_prefix_permutations_example():
    perms = prefix_permutations((0.7, 0.2, 0.9))
    assert perms == [(1,), (2, 1), (2, 1, 3)]


def test_prefix_permutations_increasing_input():
    perms = prefix_permutations((0.1, 0.2, 0.3, 0.4))
    assert all(p == tuple(range(1, n + 1)) for n, p in enumerate(perms, start=1))


def test_prefix_permutations_reversal():
    assert prefix_permutations((0.9, 0.5, 0.1))[-1] == (3, 2, 1)


def test_prefix_permutations_reject_duplicates():
    with pytest.raises(ValueError):
        prefix_permutations((0.5, 0.5))


def test_insertion_ranks_example():
    perms = prefix_permutations((0.7, 0.2, 0.9))
    assert insertion_ranks_from_permutations(perms) == (1, 1, 3)


def test_insertion_ranks_identity_chain():
    perms = prefix_permutations((0.1, 0.2, 0.3, 0.4, 0.5))
    assert insertion_ranks_from_permutations(perms) == (1, 2, 3, 4, 5)


def test_insertion_rank_of_reversal():
    perms = prefix_permutations((0.9, 0.5, 0.1))
    assert insertion_ranks_from_permutations(perms)[-1] == 1


def test_rebuild_example():
    assert permutations_from_insertion_ranks((1, 1, 3))[-1] == (2, 1, 3)


def test_rebuild_identity():
    perms = permutations_from_insertion_ranks((1, 2, 3, 4))
    assert perms[-1] == (1, 2, 3, 4)


def test_roundtrip_exhaustive_to_horizon_six():
    for eta in all_rank_prefixes(6):
        perms = permutations_from_insertion_ranks(eta)
        assert insertion_ranks_from_permutations(perms) == eta
        # the permutation chain is coherent: each one-line drops the top value
        for small, big in itertools.pairwise(perms):
            drop = invert_permutation(big)[len(big) - 1]
            line = list(big)
            del line[drop - 1]
            assert tuple(line) == small


def test_roundtrip_from_simulated_uniforms():
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = draw_distinct_uniforms(500, rng)
        perms = prefix_permutations(u)
        eta = insertion_ranks_from_permutations(perms)
        assert permutations_from_insertion_ranks(eta) == perms


def test_recover_position_example():
    assert recover_position((1, 1, 3), 1) == pytest.approx(2 / 3)


def test_recover_position_top_rank():
    assert recover_position((1, 2, 3), 3) == pytest.approx(1.0)


def test_recover_position_monte_carlo_error():
    rng = np.random.default_rng(11)
    errors = []
    for _ in range(100):
        u = rng.random(10_000)
        est = prefix_rank_estimates(u, 1)[0]
        errors.append(abs(est - u[0]))
    assert np.mean(errors) < 0.02


def test_rank_sequence_matches_definition():
    rng = np.random.default_rng(3)
    u = rng.random(60)
    eta = rank_sequence(u)
    for n in range(1, 61):
        assert eta[n - 1] == sum(1 for k in range(n) if u[k] <= u[n - 1])


def test_rank_sequence_fenwick_path_agrees():
    rng = np.random.default_rng(4)
    u = rng.random(2500)  # above the quadratic cutoff
    eta = rank_sequence(u)
    ref = rank_sequence(u[:100])
    assert np.array_equal(eta[:100], ref)
    perms = prefix_permutations(u[:40].tolist())
    assert tuple(eta[:40]) == insertion_ranks_from_permutations(perms)


def test_remaining_slots_matches_direct_ranks():
    rng = np.random.default_rng(5)
    for n in (1, 3, 5):
        u = rng.random(400)
        eta = rank_sequence(u)
        slots = remaining_slots(eta[n:], n)
        assert np.allclose(slots / u.size, prefix_rank_estimates(u, n))


def test_remaining_slots_small_example():
    # ranks (1, 1, 3) give final arrangement (2, 1, 3)
    assert remaining_slots([1, 3], 1).tolist() == [2]
    assert remaining_slots([3], 2).tolist() == [1, 2]


def test_sorted_prefix_estimate_error_at_large_horizon():
    rng = np.random.default_rng(12)
    errors = []
    for _ in range(100):
        u = rng.random(10_000)
        est = prefix_rank_estimates(u, 5)
        errors.append(np.max(np.abs(est - np.sort(u[:5]))))
    assert np.median(errors) < 0.02


def test_simulate_quadruple_coherence():
    rng = np.random.default_rng(21)
    quad = simulate_quadruple(40, rng)
    assert isinstance(quad, OrderQuadruple)
    assert prefix_permutations(quad.u.tolist()) == quad.perms
    assert insertion_ranks_from_permutations(quad.perms) == quad.eta
    assert quad.order is not None
    # order matrix agrees with the final permutation ranking
    inv = invert_permutation(quad.perms[-1])
    for i in range(40):
        for j in range(40):
            assert quad.order[i, j] == (inv[i] < inv[j])


def test_simulate_quadruple_skips_matrix_for_long_horizons():
    rng = np.random.default_rng(22)
    assert simulate_quadruple(65, rng).order is None


def test_restricted_order_uniform_over_small_orders():
    rng = np.random.default_rng(23)
    reps = 100_000
    u = rng.random((reps, 3))
    patterns = np.argsort(u, axis=1)
    codes = patterns[:, 0] * 4 + patterns[:, 1] * 2 + patterns[:, 2]
    _, counts = np.unique(codes, return_counts=True)
    assert counts.size == 6
    p = 1 / 6
    sigma = np.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(counts / reps - p) < 3 * sigma)


def test_eraser_rank_uniform_at_step_three():
    rng = np.random.default_rng(24)
    reps = 100_000
    u = rng.random((reps, 3))
    eta3 = (u[:, :3] <= u[:, 2:3]).sum(axis=1)
    _, counts = np.unique(eta3, return_counts=True)
    p = 1 / 3
    sigma = np.sqrt(p * (1 - p) / reps)
    assert np.all(np.abs(counts / reps - p) < 3 * sigma)


def test_draw_distinct_uniforms_resolves_collisions():
    class CollidingRng:
        def __init__(self):
            self.calls = 0

        def random(self, size):
            self.calls += 1
            if self.calls == 1:
                return np.array([0.25, 0.5, 0.25, 0.75])
            return np.full(size, 0.1) + np.arange(size) * 1e-3

    u = draw_distinct_uniforms(4, CollidingRng())
    assert len(np.unique(u)) == 4
