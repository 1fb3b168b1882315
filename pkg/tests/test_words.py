import itertools

import pytest

from erasedwords.words import (
    Alphabet,
    compose_permutations,
    erase,
    induced_order_statistics,
    invert_permutation,
    order_statistics,
    sorting_permutation,
)

A, B, C = 1, 2, 3


def test_erase_middle():
    assert erase((A, B, C), 2) == (A, C)


def test_erase_to_empty():
    assert erase((A,), 1) == ()


def test_erase_long_word():
    w = (B, B, A, C, A, B, C, B, A)
    assert erase(w, 4) == (B, B, A, A, B, C, B, A)


@pytest.mark.parametrize("i", [0, 4])
def test_erase_rejects_bad_index(i):
    with pytest.raises(ValueError):
        erase((A, B, C), i)


def test_erase_exhaustive_small_words():
    # erase drops exactly the i-th letter and keeps the rest in order
    for n in range(1, 7):
        for w in itertools.product((A, B), repeat=n):
            for i in range(1, n + 1):
                out = erase(w, i)
                assert len(out) == n - 1
                assert out == w[: i - 1] + w[i:]


def test_sorting_permutation_basic():
    assert sorting_permutation((0.3, 0.1, 0.2)) == (2, 3, 1)


def test_sorting_permutation_ties_stable():
    assert sorting_permutation((0.5, 0.5)) == (1, 2)


def test_sorting_permutation_with_repeats():
    assert sorting_permutation((0.9, 0.1, 0.9, 0.1)) == (2, 4, 1, 3)


def test_sorting_permutation_matches_stable_sort_oracle():
    values = [0.4, 0.1, 0.4, 0.9, 0.1, 0.5]
    pi = sorting_permutation(values)
    oracle = [i + 1 for i, _ in sorted(enumerate(values), key=lambda t: t[1])]
    assert list(pi) == oracle


def test_order_statistics():
    assert order_statistics((0.3, 0.1, 0.2)) == (0.1, 0.2, 0.3)
    assert order_statistics(()) == ()
    assert order_statistics((0.5, 0.5, 0.2)) == (0.2, 0.5, 0.5)


def test_induced_order_statistics():
    assert induced_order_statistics((A, B, C), (0.3, 0.1, 0.2)) == (B, C, A)
    assert induced_order_statistics((A, B, A, B), (0.9, 0.1, 0.9, 0.1)) == (B, B, A, A)


def test_induced_order_identity_on_sorted_values():
    w = (C, A, B, B)
    assert induced_order_statistics(w, (0.1, 0.2, 0.3, 0.4)) == w


def test_induced_order_rejects_length_mismatch():
    with pytest.raises(ValueError):
        induced_order_statistics((A, B), (0.1,))


def test_sorted_by_own_permutation_is_nondecreasing():
    values = (0.7, 0.2, 0.2, 0.9, 0.1)
    reordered = induced_order_statistics(values, values)
    assert list(reordered) == sorted(values)


def test_permuted_input_relation_exhaustive():
    # relabeling the inputs by tau turns the sorting permutation pi into
    # tau^{-1} . pi, and leaves the induced order unchanged
    values = [0.31, 0.77, 0.12, 0.55, 0.90]
    letters = [A, B, C, A, B]
    for n in range(1, 6):
        x = values[:n]
        y = letters[:n]
        pi = sorting_permutation(x)
        for tau in itertools.permutations(range(1, n + 1)):
            xt = [x[t - 1] for t in tau]
            yt = [y[t - 1] for t in tau]
            expected = compose_permutations(invert_permutation(tau), pi)
            assert sorting_permutation(xt) == expected
            assert induced_order_statistics(yt, xt) == induced_order_statistics(y, x)


def test_invert_and_compose():
    pi = (3, 1, 2)
    assert invert_permutation(pi) == (2, 3, 1)
    assert compose_permutations(pi, invert_permutation(pi)) == (1, 2, 3)


def test_alphabet_roundtrip():
    alphabet = Alphabet(("a", "b", "c"))
    assert alphabet.size == 3
    assert alphabet.index("b") == 2
    assert alphabet.symbol(3) == "c"
    assert alphabet.word_from_tokens(["c", "a"]) == (3, 1)
    assert alphabet.tokens((3, 1)) == ["c", "a"]


def test_alphabet_rejects_duplicates_and_unknowns():
    with pytest.raises(ValueError):
        Alphabet(("a", "a"))
    with pytest.raises(KeyError):
        Alphabet(("a", "b")).index("z")
