"""Braid words, plat presentations and the moves relating them.

Geometry conventions:

* A braid word in ``B_{2n}`` is a sequence of signed generator indices,
  read left to right from the top of the braid to the bottom.  The letter
  ``+i`` is the positive crossing of strands i, i+1.
* ``sigma_i`` acts on the free group F_{2n} by
  ``s_i -> s_i s_{i+1} s_i^-1,  s_{i+1} -> s_i`` and concatenation of braid
  words corresponds to composition of these endomorphisms.
* The plat closure joins bottom positions (2k-1, 2k) by arcs below the
  braid and top positions (2k-1, 2k) by arcs above; it must be a knot.
* Each closure arc carries a sign recording whether the oriented knot
  passes downward through the odd-numbered end of that arc; the signs feed
  the letterwise rewriting of puncture loops into arc meridians.  Reversing
  the knot orientation flips every sign at once.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NonCyclicAbelianization, NotAKnot
from .words import FreeEndomorphism, FreeWord, generator


@dataclass(frozen=True)
class BraidWord:
    """A word in the braid group on ``strands`` strands."""

    strands: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.strands < 2:
            raise ValueError("need at least two strands")
        if any(l == 0 or abs(l) >= self.strands for l in self.letters):
            raise ValueError("letter index out of range")

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if self.strands != other.strands:
            raise ValueError("strand counts differ")
        return BraidWord(self.strands, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-l for l in reversed(self.letters)))

    def mirror(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-l for l in self.letters))

    def text(self) -> str:
        """Canonical plain-text form, e.g. ``B4: 2 2 2``."""
        body = " ".join(str(l) for l in self.letters)
        return f"B{self.strands}:{' ' + body if body else ''}"

    @staticmethod
    def parse(text: str) -> "BraidWord":
        head, _, body = text.partition(":")
        head = head.strip()
        if not head.startswith("B"):
            raise ValueError(f"bad braid text {text!r}")
        strands = int(head[1:])
        letters = tuple(int(tok) for tok in body.split())
        return BraidWord(strands, letters)


def _letter_endomorphism(strands: int, letter: int) -> FreeEndomorphism:
    i = abs(letter)
    gens = [generator(strands, j) for j in range(1, strands + 1)]
    s_i, s_i1 = gens[i - 1], gens[i]
    if letter > 0:
        gens[i - 1] = s_i * s_i1 * s_i.inverse()
        gens[i] = s_i
    else:
        gens[i - 1] = s_i1
        gens[i] = s_i1.inverse() * s_i * s_i1
    return FreeEndomorphism(strands, tuple(gens))


def artin_endomorphism(braid: BraidWord) -> FreeEndomorphism:
    """The braid's action on the free group of puncture loops.

    Concatenation of braids maps to composition of endomorphisms, so the
    inverse braid induces the inverse automorphism.
    """
    phi = FreeEndomorphism.identity(braid.strands)
    for letter in braid.letters:
        phi = phi.compose(_letter_endomorphism(braid.strands, letter))
    return phi


def braid_permutation(braid: BraidWord) -> tuple[int, ...]:
    """perm[p-1] + 1 is the top position of the strand entering at bottom
    position p (1-based)."""
    perm = list(range(braid.strands))
    for letter in braid.letters:
        i = abs(letter) - 1
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    return tuple(perm)


def _pair(p: int) -> int:
    return p + 1 if p % 2 == 1 else p - 1


def plat_components(braid: BraidWord) -> int:
    """Number of components of the plat closure."""
    if braid.strands % 2 != 0:
        raise ValueError("plat closure needs an even strand count")
    perm = braid_permutation(braid)
    parent = list(range(braid.strands))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    inv = [0] * braid.strands
    for p, q in enumerate(perm):
        inv[q] = p
    for p in range(0, braid.strands, 2):
        union(p, p + 1)  # bottom arcs
    for q in range(0, braid.strands, 2):
        union(inv[q], inv[q + 1])  # top arcs pulled down through the braid
    return len({find(x) for x in range(braid.strands)})


def _closure_signs(braid: BraidWord) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Arc signs from one traversal of the closed curve.

    The traversal starts on the first top arc, oriented from top position 1
    to top position 2.  A bottom (resp. top) arc k gets sign +1 exactly when
    the curve passes downward through position 2k-1 at the bottom (resp.
    top) level.
    """
    m = braid.strands
    perm = braid_permutation(braid)
    inv = [0] * m
    for p, q in enumerate(perm):
        inv[q] = p
    top_dir: dict[int, int] = {}
    bottom_dir: dict[int, int] = {}
    q = 2  # descend at top position 2
    for _ in range(m):
        top_dir[q] = +1
        p = inv[q - 1] + 1
        bottom_dir[p] = +1
        p2 = _pair(p)
        bottom_dir[p2] = -1
        q2 = perm[p2 - 1] + 1
        top_dir[q2] = -1
        q = _pair(q2)
        if q == 2:
            break
    if len(top_dir) != m:
        raise NotAKnot(f"plat closure has {plat_components(braid)} components")
    n = m // 2
    eps1 = tuple(bottom_dir[2 * k - 1] for k in range(1, n + 1))
    eps2 = tuple(top_dir[2 * k - 1] for k in range(1, n + 1))
    return eps1, eps2


@dataclass(frozen=True)
class PlatPresentation:
    """A braid with its plat-closure data: arc signs, strand permutation,
    orientation, splitting choice and ambient sign."""

    braid: BraidWord
    orientation: int = 1
    alternate_splitting: bool = False
    ambient_sign: int = 1
    eps1: tuple[int, ...] = ()
    eps2: tuple[int, ...] = ()
    perm: tuple[int, ...] = ()

    @staticmethod
    def from_braid(
        braid: BraidWord,
        orientation: int = 1,
        alternate_splitting: bool = False,
        ambient_sign: int = 1,
    ) -> "PlatPresentation":
        if plat_components(braid) != 1:
            raise NotAKnot(
                f"{braid.text()} closes to {plat_components(braid)} components"
            )
        eps1, eps2 = _closure_signs(braid)
        if orientation == -1:
            eps1 = tuple(-e for e in eps1)
            eps2 = tuple(-e for e in eps2)
        return PlatPresentation(
            braid,
            orientation,
            alternate_splitting,
            ambient_sign,
            eps1,
            eps2,
            braid_permutation(braid),
        )

    @property
    def n(self) -> int:
        """Genus of the two handlebodies (half the strand count)."""
        return self.braid.strands // 2

    def text(self) -> str:
        return self.braid.text()

    # -- moves -----------------------------------------------------------

    def stabilize(self) -> "PlatPresentation":
        """Append a trivial strand pair with one extra crossing at the
        bottom right; the closure is the same knot one width up."""
        b = self.braid
        new = BraidWord(b.strands + 2, b.letters + (b.strands,))
        return PlatPresentation.from_braid(
            new, self.orientation, self.alternate_splitting, self.ambient_sign
        )

    def multiply(self, xi: BraidWord, side: str) -> "PlatPresentation":
        if side == "left":
            new = xi * self.braid
        elif side == "right":
            new = self.braid * xi
        else:
            raise ValueError("side must be 'left' or 'right'")
        return PlatPresentation.from_braid(
            new, self.orientation, self.alternate_splitting, self.ambient_sign
        )

    def mirror(self) -> "PlatPresentation":
        return PlatPresentation.from_braid(
            self.braid.mirror(),
            self.orientation,
            self.alternate_splitting,
            self.ambient_sign,
        )

    def reverse_orientation(self) -> "PlatPresentation":
        return PlatPresentation.from_braid(
            self.braid, -self.orientation, self.alternate_splitting, self.ambient_sign
        )

    def connected_sum(self, other: "PlatPresentation") -> "PlatPresentation":
        """Place the second plat to the right of the first, sharing one
        strand pair (shift its letters by the first width minus two)."""
        b1, b2 = self.braid, other.braid
        shift = b1.strands - 2
        letters = b1.letters + tuple(
            l + shift if l > 0 else l - shift for l in b2.letters
        )
        new = BraidWord(b1.strands + b2.strands - 2, letters)
        return PlatPresentation.from_braid(
            new, self.orientation, self.alternate_splitting, self.ambient_sign
        )

    def with_alternate_splitting(self, flag: bool = True) -> "PlatPresentation":
        return replace(self, alternate_splitting=flag)

    def with_ambient_sign(self, sign: int) -> "PlatPresentation":
        return replace(self, ambient_sign=sign)


def _lambda_letterwise(word: FreeWord, eps: tuple[int, ...], n: int) -> FreeWord:
    """Rewrite a word in puncture loops as a word in arc meridians: letter
    s_{2k-1} becomes t_k^{eps_k}, letter s_{2k} becomes t_k^{-eps_k}."""
    out: list[int] = []
    for l in word.letters:
        j = abs(l)
        k = (j + 1) // 2
        sign = eps[k - 1] if j % 2 == 1 else -eps[k - 1]
        if l < 0:
            sign = -sign
        out.append(k if sign > 0 else -k)
    return FreeWord(n, tuple(out))


def kappa_word(plat: PlatPresentation, side: int, j: int) -> FreeWord:
    """Image of the j-th puncture loop in the genus-n free group of the
    bottom (side 1) or top (side 2) handlebody."""
    m = plat.braid.strands
    n = plat.n
    if not 1 <= j <= m:
        raise ValueError(f"puncture index {j} out of range")
    s_j = generator(m, j)
    if not plat.alternate_splitting:
        if side == 1:
            return _lambda_letterwise(s_j, plat.eps1, n)
        if side == 2:
            phi = artin_endomorphism(plat.braid)
            return _lambda_letterwise(phi(s_j), plat.eps2, n)
    else:
        # splitting along the sphere above the braid instead of below it
        if side == 1:
            phi_inv = artin_endomorphism(plat.braid.inverse())
            return _lambda_letterwise(phi_inv(s_j), plat.eps1, n)
        if side == 2:
            return _lambda_letterwise(s_j, plat.eps2, n)
    raise ValueError("side must be 1 or 2")


def kappa_words(plat: PlatPresentation, side: int) -> tuple[FreeWord, ...]:
    """All 2n images at once (the braid action is computed once)."""
    m = plat.braid.strands
    n = plat.n
    if plat.alternate_splitting:
        phi = artin_endomorphism(plat.braid.inverse()) if side == 1 else None
        eps = plat.eps1 if side == 1 else plat.eps2
    else:
        phi = artin_endomorphism(plat.braid) if side == 2 else None
        eps = plat.eps1 if side == 1 else plat.eps2
    out = []
    for j in range(1, m + 1):
        w = generator(m, j)
        if phi is not None:
            w = phi(w)
        out.append(_lambda_letterwise(w, eps, n))
    return tuple(out)


@dataclass(frozen=True)
class KnotGroupPresentation:
    """Wirtinger-type presentation from a plat: 2n meridian generators
    (bottom arcs first, then top arcs) and 2n-1 relators."""

    num_generators: int
    relators: tuple[FreeWord, ...]
    meridian: int = 1

    def abelianization_is_cyclic(self) -> bool:
        rows = [w.exponent_sums() for w in self.relators]
        mat = np.array(rows, dtype=np.int64).reshape(len(rows), self.num_generators)
        diag = _smith_diagonal(mat)
        nonzero = [d for d in diag if d != 0]
        rank_defect = self.num_generators - len(nonzero)
        return rank_defect == 1 and all(abs(d) == 1 for d in nonzero)


def _smith_diagonal(mat: np.ndarray) -> list[int]:
    """Diagonal of the Smith normal form of a small integer matrix."""
    a = [[int(x) for x in row] for row in mat]
    rows, cols = len(a), len(a[0]) if len(a) else 0
    diag = []
    r = c = 0
    while r < rows and c < cols:
        # find a pivot of minimal absolute value
        best = None
        for i in range(r, rows):
            for j in range(c, cols):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        a[r], a[i0] = a[i0], a[r]
        for row in a:
            row[c], row[j0] = row[j0], row[c]
        reduced = False
        for i in range(rows):
            if i != r and a[i][c] != 0:
                q = a[i][c] // a[r][c]
                for j in range(cols):
                    a[i][j] -= q * a[r][j]
                reduced = True
        for j in range(cols):
            if j != c and a[r][j] != 0:
                q = a[r][j] // a[r][c]
                for i in range(rows):
                    a[i][j] -= q * a[i][c]
                reduced = True
        if reduced and (any(a[i][c] for i in range(rows) if i != r)
                        or any(a[r][j] for j in range(cols) if j != c)):
            continue
        if not reduced or (all(a[i][c] == 0 for i in range(rows) if i != r)
                           and all(a[r][j] == 0 for j in range(cols) if j != c)):
            diag.append(abs(a[r][c]))
            r += 1
            c += 1
    return diag


def wirtinger_presentation(plat: PlatPresentation) -> KnotGroupPresentation:
    """Presentation of the knot group on the 2n arc meridians.

    Generators 1..n are the bottom-arc meridians, n+1..2n the top-arc
    meridians; relator j equates the two images of the j-th puncture loop
    for j = 1..2n-1 (the last one is a consequence and dropped).
    """
    m = plat.braid.strands
    n = plat.n
    w1 = kappa_words(plat, 1)
    w2 = kappa_words(plat, 2)
    rank = 2 * n

    def embed(word: FreeWord, offset: int) -> FreeWord:
        return FreeWord(
            rank, tuple(l + offset if l > 0 else l - offset for l in word.letters)
        )

    relators = tuple(
        embed(w1[j], 0) * embed(w2[j], n).inverse() for j in range(m - 1)
    )
    pres = KnotGroupPresentation(rank, relators, meridian=1)
    if not pres.abelianization_is_cyclic():
        raise NonCyclicAbelianization(
            f"plat {plat.text()} gave a presentation with non-cyclic abelianization"
        )
    return pres


def half_braid_generators(strands: int) -> list[tuple[str, BraidWord]]:
    """The standard generators of the subgroup of braids preserving the
    plat closure pattern."""
    n = strands // 2
    gens = [
        ("sigma1", BraidWord(strands, (1,))),
        ("sigma2_sigma1sq_sigma2", BraidWord(strands, (2, 1, 1, 2))),
    ]
    for k in range(1, n):
        gens.append(
            (
                f"arc_swap_{k}",
                BraidWord(strands, (2 * k, 2 * k - 1, 2 * k + 1, 2 * k)),
            )
        )
    return gens


def half_braid_membership(braid: BraidWord) -> bool:
    """Test whether the braid preserves the normal closure of the products
    of paired puncture loops (the plat-closure criterion).

    Evaluated by rewriting each image of ``s_{2k-1} s_{2k}`` through the
    all-plus arc pattern and checking it dies in the free group.
    """
    if braid.strands % 2 != 0:
        return False
    n = braid.strands // 2
    phi = artin_endomorphism(braid)
    eps = tuple(1 for _ in range(n))
    for k in range(1, n + 1):
        w = phi(generator(braid.strands, 2 * k - 1) * generator(braid.strands, 2 * k))
        if not _lambda_letterwise(w, eps, n).is_identity():
            return False
    return True
