import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from erasedwords.kernels import (
    WordDistribution,
    chapman_kolmogorov_deviation,
    count_embeddings,
    erase_chain,
    sample_subsequence,
    subsequence_density,
    subsequence_law,
)
from erasedwords.orders import rank_sequence

A, B, C = 1, 2, 3


def brute_force_law(word, k):
    """Enumerate all k-subsets of positions; the independent oracle."""
    n = len(word)
    counts = {}
    for picks in itertools.combinations(range(n), k):
        v = tuple(word[j] for j in picks)
        counts[v] = counts.get(v, 0) + 1
    total = math.comb(n, k)
    return {v: Fraction(c, total) for v, c in counts.items()}


def test_count_embeddings_worked_example():
    assert count_embeddings((A, A, B), (A, B, A, A, B)) == 3


def test_count_embeddings_identity():
    w = (A, B, B, C)
    assert count_embeddings(w, w) == 1


def test_count_embeddings_pairs():
    assert count_embeddings((A, B), (A, A, B, B)) == 4


def test_count_embeddings_longer_pattern_gives_zero():
    assert count_embeddings((A, A, A), (A, A)) == 0


def test_count_embeddings_against_enumeration():
    w = (A, B, A, A, B, C, B)
    for k in range(1, 5):
        oracle = {}
        for picks in itertools.combinations(range(len(w)), k):
            v = tuple(w[j] for j in picks)
            oracle[v] = oracle.get(v, 0) + 1
        for v in itertools.product((A, B, C), repeat=k):
            assert count_embeddings(v, w) == oracle.get(v, 0)


def test_embedding_counts_sum_to_binomial():
    for n in range(1, 9):
        for w in itertools.product((A, B), repeat=n):
            for k in range(1, min(n, 4) + 1):
                total = sum(
                    count_embeddings(v, w)
                    for v in itertools.product((A, B), repeat=k)
                )
                assert total == math.comb(n, k)


def test_density_worked_example():
    assert subsequence_density((A, A, B), (A, B, A, A, B)) == 0.3


def test_density_of_word_in_itself():
    w = (B, A, C)
    assert subsequence_density(w, w) == 1.0


def test_density_no_embedding():
    assert subsequence_density((B, A), (A, A, B, B)) == 0.0


def test_density_rejects_long_pattern():
    with pytest.raises(ValueError):
        subsequence_density((A, A, A), (A, B))


def test_subsequence_law_point_mass_at_full_length():
    w = (A, B, A)
    law = subsequence_law(w, len(w))
    assert law.weights == {w: 1.0}


def test_subsequence_law_single_letter():
    law = subsequence_law((A, B), 1)
    assert law.weights == {(A,): 0.5, (B,): 0.5}


def test_subsequence_law_worked_example():
    law = subsequence_law((A, B, A, A, B), 3)
    assert law.probability((A, A, B)) == pytest.approx(0.3)


def test_subsequence_law_matches_per_target_density_exhaustively():
    for n in range(1, 9):
        for w in itertools.product((A, B), repeat=n):
            for k in range(1, min(n, 4) + 1):
                law = subsequence_law(w, k, alphabet_size=2, exact=True)
                for v in itertools.product((A, B), repeat=k):
                    assert law.probability(v) == subsequence_density(v, w, exact=True)


def test_subsequence_law_matches_brute_force():
    w = (A, B, A, A, B, C)
    for k in (1, 2, 3):
        law = subsequence_law(w, k, exact=True)
        assert law.weights == brute_force_law(w, k)


def test_subsequence_law_rejects_oversized_table():
    with pytest.raises(ValueError):
        subsequence_law((A, B) * 15, 25, alphabet_size=2)


def test_word_distribution_validation():
    with pytest.raises(ValueError):
        WordDistribution(2, {(A,): 1.0})
    with pytest.raises(ValueError):
        WordDistribution(1, {(A,): 0.7})
    with pytest.raises(ValueError):
        WordDistribution(1, {(A,): 1.5, (B,): -0.5})


def test_sample_subsequence_full_length_is_identity():
    rng = np.random.default_rng(0)
    w = (A, B, C, A)
    assert sample_subsequence(w, 4, rng) == w


def test_sample_subsequence_matches_exact_law():
    rng = np.random.default_rng(1)
    w = (A, B, A, A, B)
    k = 3
    law = subsequence_law(w, k)
    reps = 100_000
    counts = {}
    for _ in range(reps):
        v = sample_subsequence(w, k, rng)
        counts[v] = counts.get(v, 0) + 1
    for v, p in law.weights.items():
        sigma = math.sqrt(p * (1 - p) / reps)
        assert abs(counts.get(v, 0) / reps - p) < 3 * sigma + 1e-12


def test_two_stage_sampling_matches_exact_law():
    rng = np.random.default_rng(2)
    w = (A, B, A, A, B)
    law = subsequence_law(w, 2)
    reps = 100_000
    counts = {}
    for _ in range(reps):
        mid = sample_subsequence(w, 4, rng)
        v = sample_subsequence(mid, 2, rng)
        counts[v] = counts.get(v, 0) + 1
    for v, p in law.weights.items():
        sigma = math.sqrt(p * (1 - p) / reps)
        assert abs(counts.get(v, 0) / reps - p) < 3 * sigma + 1e-12


def test_chapman_kolmogorov_exact_for_all_short_binary_words():
    for n in range(1, 8):
        for w in itertools.product((A, B), repeat=n):
            for m in range(1, n + 1):
                for k in range(1, m + 1):
                    assert chapman_kolmogorov_deviation(w, k, m) == 0.0


def test_chapman_kolmogorov_equal_lengths():
    assert chapman_kolmogorov_deviation((A, B, C, A), 2, 2) == 0.0


def test_chapman_kolmogorov_constant_word():
    assert chapman_kolmogorov_deviation((A,) * 6, 2, 4) == 0.0


def test_erase_chain_identity():
    w = (B, A, C)
    assert erase_chain(w, (), 3) == w


def test_erase_chain_hand_iteration():
    # (b,a,c) -> erase slot 2 -> (b,c) -> erase slot 1 -> (c)
    assert erase_chain((B, A, C), (1, 2), 1) == (C,)


def test_erase_chain_rejects_malformed_tail():
    with pytest.raises(ValueError):
        erase_chain((A, B, C), (5,), 2)
    with pytest.raises(ValueError):
        erase_chain((A, B, C), (1,), 1)


def test_erase_chain_with_uniform_ranks_matches_law():
    rng = np.random.default_rng(3)
    w = (A, B, A, A, B)
    k = 2
    law = subsequence_law(w, k)
    reps = 100_000
    counts = {}
    for _ in range(reps):
        tail = [int(rng.integers(1, j + 1)) for j in range(k + 1, len(w) + 1)]
        v = erase_chain(w, tail, k)
        counts[v] = counts.get(v, 0) + 1
    for v, p in law.weights.items():
        sigma = math.sqrt(p * (1 - p) / reps)
        assert abs(counts.get(v, 0) / reps - p) < 3 * sigma + 1e-12


def test_word_chain_conditional_law_matches_subsequence_kernel():
    # within a simulated trajectory the law of the short word given the long
    # one is the subsequence kernel, one chi-square test per long word
    from scipy.stats import chisquare

    rng = np.random.default_rng(4)
    reps = 60_000
    n, k = 4, 2
    by_long: dict[tuple, dict[tuple, int]] = {}
    for _ in range(reps):
        u = rng.random(n)
        letters = (rng.random(n) < 0.5).astype(int) + 1
        order = np.argsort(u, kind="stable")
        w_long = tuple(int(a) for a in letters[order])
        eta = rank_sequence(u)
        tail = [int(eta[j]) for j in range(k, n)]
        w_short = erase_chain(w_long, tail, k)
        by_long.setdefault(w_long, {})[w_short] = (
            by_long.setdefault(w_long, {}).get(w_short, 0) + 1
        )
    for w_long, counts in by_long.items():
        total = sum(counts.values())
        if total < 1000:
            continue
        law = subsequence_law(w_long, k)
        support = sorted(law.weights)
        observed = [counts.get(v, 0) for v in support]
        expected = [float(law.weights[v]) * total for v in support]
        if len(support) == 1:
            assert observed == [total]
        else:
            assert chisquare(observed, expected).pvalue > 1e-5
