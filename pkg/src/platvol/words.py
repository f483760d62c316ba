"""Free-group words, endomorphisms, Fox derivatives and group-ring sums.

A word in the free group of a given rank is a tuple of nonzero signed
integers: letter ``+j`` is the j-th generator (1-based), ``-j`` its inverse.
Words are kept freely reduced at all times.  The debug text syntax is
``s1 s2^-1 s3`` (whitespace separated, ``^-1`` marks inverses).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankMismatch, WordTooLong

WORD_LENGTH_CAP = 10**6


def _reduce(letters) -> tuple[int, ...]:
    out: list[int] = []
    for l in letters:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


@dataclass(frozen=True, order=True)
class FreeWord:
    """A freely reduced word in the free group of rank ``rank``."""

    rank: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if any(l == 0 or abs(l) > self.rank for l in self.letters):
            raise ValueError(f"letter out of range for rank {self.rank}")
        reduced = _reduce(self.letters)
        if reduced != self.letters:
            object.__setattr__(self, "letters", reduced)
        if len(self.letters) > WORD_LENGTH_CAP:
            raise WordTooLong(f"word of length {len(self.letters)}")

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        if self.rank != other.rank:
            raise RankMismatch(f"ranks {self.rank} vs {other.rank}")
        return FreeWord(self.rank, self.letters + other.letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(self.rank, tuple(-l for l in reversed(self.letters)))

    def __pow__(self, k: int) -> "FreeWord":
        if k < 0:
            return self.inverse() ** (-k)
        out = FreeWord(self.rank)
        for _ in range(k):
            out = out * self
        return out

    def is_identity(self) -> bool:
        return not self.letters

    def exponent_sums(self) -> np.ndarray:
        """Abelianized image: exponent sum per generator."""
        v = np.zeros(self.rank, dtype=np.int64)
        for l in self.letters:
            v[abs(l) - 1] += 1 if l > 0 else -1
        return v

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"s{l}" if l > 0 else f"s{-l}^-1" for l in self.letters)


def generator(rank: int, j: int, exponent: int = 1) -> FreeWord:
    return FreeWord(rank, (j if exponent > 0 else -j,))


def parse_word(text: str, rank: int) -> FreeWord:
    """Parse the ``s1 s2^-1`` debug syntax."""
    letters = []
    for tok in text.split():
        if tok == "1":
            continue
        body, _, exp = tok.partition("^")
        if not body.startswith("s"):
            raise ValueError(f"bad token {tok!r}")
        j = int(body[1:])
        e = int(exp) if exp else 1
        if abs(e) != 1:
            letters.extend([j if e > 0 else -j] * abs(e))
        else:
            letters.append(j if e > 0 else -j)
    return FreeWord(rank, tuple(letters))


@dataclass(frozen=True)
class FreeEndomorphism:
    """Endomorphism of a free group, given by the images of the generators."""

    rank: int
    images: tuple[FreeWord, ...]

    def __post_init__(self):
        if len(self.images) != self.rank or any(
            w.rank != self.rank for w in self.images
        ):
            raise RankMismatch("image list does not match rank")

    def __call__(self, w: FreeWord) -> FreeWord:
        if w.rank != self.rank:
            raise RankMismatch(f"ranks {w.rank} vs {self.rank}")
        out: list[int] = []
        for l in w.letters:
            img = self.images[abs(l) - 1]
            out.extend(img.letters if l > 0 else img.inverse().letters)
            if len(out) > 2 * WORD_LENGTH_CAP:
                raise WordTooLong("substitution blow-up")
        return FreeWord(self.rank, tuple(out))

    def compose(self, other: "FreeEndomorphism") -> "FreeEndomorphism":
        """self after other: (self.compose(other))(w) = self(other(w))."""
        return FreeEndomorphism(self.rank, tuple(self(w) for w in other.images))

    @staticmethod
    def identity(rank: int) -> "FreeEndomorphism":
        return FreeEndomorphism(rank, tuple(generator(rank, j) for j in range(1, rank + 1)))


@dataclass(frozen=True)
class GroupRingElement:
    """Finite integer combination of free words, in canonical sorted order."""

    rank: int
    terms: tuple[tuple[int, FreeWord], ...] = ()

    @staticmethod
    def from_dict(rank: int, d: dict[FreeWord, int]) -> "GroupRingElement":
        items = tuple(
            (c, w) for w, c in sorted(d.items(), key=lambda kv: kv[0]) if c != 0
        )
        return GroupRingElement(rank, items)

    def to_dict(self) -> dict[FreeWord, int]:
        return {w: c for c, w in self.terms}

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        d = self.to_dict()
        for c, w in other.terms:
            d[w] = d.get(w, 0) + c
        return GroupRingElement.from_dict(self.rank, d)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.rank, tuple((-c, w) for c, w in self.terms))

    def left_mul(self, g: FreeWord) -> "GroupRingElement":
        return GroupRingElement.from_dict(
            self.rank, {g * w: c for c, w in self.terms}
        )

    def augmentation(self) -> int:
        return sum(c for c, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms


def fox_derivative(w: FreeWord, j: int) -> GroupRingElement:
    """Free derivative d(w)/d(s_j) in the integral group ring.

    Axioms: d(s_j)/d(s_j) = 1, d(s_j^-1)/d(s_j) = -s_j^-1 and the product
    rule d(uv) = d(u) + u d(v).
    """
    rank = w.rank
    acc: dict[FreeWord, int] = {}
    prefix: list[int] = []
    for l in w.letters:
        if abs(l) == j:
            if l > 0:
                key = FreeWord(rank, tuple(prefix))
                acc[key] = acc.get(key, 0) + 1
            else:
                key = FreeWord(rank, tuple(prefix) + (l,))
                acc[key] = acc.get(key, 0) - 1
        prefix.append(l)
    return GroupRingElement.from_dict(rank, acc)


def abelianization_matrix(phi: FreeEndomorphism) -> np.ndarray:
    """Integer matrix with entry (i, j) = aug(d(phi(s_i))/d(s_j)).

    Row i is the abelianized image of the i-th generator.
    """
    n = phi.rank
    m = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            m[i, j] = fox_derivative(phi.images[i], j + 1).augmentation()
    return m


def _int_det(a: np.ndarray) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    a = [[int(x) for x in row] for row in a]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det_abelianization(phi: FreeEndomorphism) -> int:
    return _int_det(abelianization_matrix(phi))
