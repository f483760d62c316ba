"""Free words, Fox derivatives, abelianization determinants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platvol.errors import RankMismatch
from platvol.words import (
    FreeEndomorphism,
    FreeWord,
    abelianization_matrix,
    det_abelianization,
    fox_derivative,
    generator,
    parse_word,
)


def word(rank, *letters):
    return FreeWord(rank, letters)


def random_word(rng, rank, max_len=8):
    length = int(rng.integers(0, max_len + 1))
    letters = []
    for _ in range(length):
        j = int(rng.integers(1, rank + 1))
        letters.append(j if rng.random() < 0.5 else -j)
    return FreeWord(rank, tuple(letters))


class TestWordOps:
    def test_free_reduction(self):
        w = word(3, 1, 2) * word(3, -2, 3)
        assert w == word(3, 1, 3)

    def test_inverse_antihomomorphism(self):
        w = word(3, 1, 2)
        assert w.inverse() == word(3, -2, -1)

    def test_rank_mismatch(self):
        with pytest.raises(RankMismatch):
            word(2, 1) * word(3, 1)

    def test_parse_and_str(self):
        w = parse_word("s1 s2^-1 s3", 3)
        assert w == word(3, 1, -2, 3)
        assert parse_word(str(w), 3) == w

    def test_substitution_is_homomorphism(self):
        rng = np.random.default_rng(2)
        phi = FreeEndomorphism(
            2, (word(2, 1, 2, -1), word(2, 1))
        )  # the standard positive half-twist action
        for _ in range(100):
            u, v = random_word(rng, 2), random_word(rng, 2)
            assert phi(u * v) == phi(u) * phi(v)

    def test_halftwist_substitution(self):
        phi = FreeEndomorphism(2, (word(2, 1, 2, -1), word(2, 1)))
        assert phi(word(2, 1, 2)) == word(2, 1, 2)


class TestFox:
    def test_generator_rule(self):
        d = fox_derivative(word(2, 1, 2), 2)
        assert d.to_dict() == {word(2, 1): 1}

    def test_inverse_rule(self):
        d = fox_derivative(word(2, -1), 1)
        assert d.to_dict() == {word(2, -1): -1}

    def test_product_rule_random(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            u, v = random_word(rng, 3), random_word(rng, 3)
            j = int(rng.integers(1, 4))
            lhs = fox_derivative(u * v, j)
            rhs = fox_derivative(u, j) + fox_derivative(v, j).left_mul(u)
            assert lhs == rhs


class TestAbelianization:
    def test_halftwist(self):
        phi = FreeEndomorphism(2, (word(2, 1, 2, -1), word(2, 1)))
        m = abelianization_matrix(phi)
        assert np.array_equal(m, [[0, 1], [1, 0]])
        assert det_abelianization(phi) == -1

    def test_identity(self):
        phi = FreeEndomorphism.identity(3)
        assert np.array_equal(abelianization_matrix(phi), np.eye(3, dtype=int))
        assert det_abelianization(phi) == 1

    def test_axis_reversal_map(self):
        # s_j -> s_{2n-j+1}^{-1} on rank 4: anti-diagonal of -1, det +1
        n4 = 4
        phi = FreeEndomorphism(
            n4, tuple(generator(n4, n4 - j + 1, -1) for j in range(1, n4 + 1))
        )
        m = abelianization_matrix(phi)
        assert np.array_equal(m, -np.eye(4, dtype=int)[::-1])
        assert det_abelianization(phi) == 1

    def test_det_multiplicative(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            imgs1 = tuple(random_word(rng, 3, 5) for _ in range(3))
            imgs2 = tuple(random_word(rng, 3, 5) for _ in range(3))
            phi, psi = FreeEndomorphism(3, imgs1), FreeEndomorphism(3, imgs2)
            assert det_abelianization(phi.compose(psi)) == det_abelianization(
                phi
            ) * det_abelianization(psi)

    def test_fox_row_is_abelianized_image(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            w = random_word(rng, 3)
            row = [fox_derivative(w, j).augmentation() for j in (1, 2, 3)]
            assert np.array_equal(row, w.exponent_sums())


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_inverse_round_trip(seed):
    rng = np.random.default_rng(seed)
    w = random_word(rng, 4, 12)
    assert (w * w.inverse()).is_identity()
    assert w.inverse().inverse() == w
