"""Marked representation coordinates and their exact differentials.

A representation of a genus-n free group with all generator traces equal is
stored as a common angle ``theta in (0, pi)`` plus one unit axis per
generator: generator k maps to ``cos(theta) + sin(theta) * P_k``.  The same
chart, with 2n axes and the product-equals-one constraint, covers the
punctured-sphere representation space.

Tangents to these charts are pairs ``(dtheta, V)`` with row ``V[k]``
orthogonal to axis k.  Conversions to and from group tangents (the
``exp(eps*u)*q`` convention of :mod:`platvol.su2`) are closed-form and are
cross-checked against finite differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import su2
from .braids import KnotGroupPresentation, PlatPresentation, kappa_words
from .errors import NotARepresentation, RankMismatch, Reducible
from .su2 import Quaternion, ad_matrix, cross3, from_axis_angle, log_su2, trace_axis
from .words import FreeWord

# singular values below RANK_RTOL * sigma_max count as zero
RANK_RTOL = 1e-7


def evaluate_word(values: list[Quaternion], word: FreeWord) -> Quaternion:
    """Evaluate a word at a generator assignment (1-based indices)."""
    if word.rank > len(values):
        raise RankMismatch(f"word rank {word.rank} exceeds {len(values)} values")
    out = su2.ONE
    for l in word.letters:
        q = values[abs(l) - 1]
        out = out * (q if l > 0 else q.inverse())
    return out.normalized()


def word_differential_matrix(values: list[Quaternion], word: FreeWord) -> np.ndarray:
    """The 3 x 3m matrix of the right-trivialized derivative of evaluation.

    Perturbing generator j along u_j (so g_j becomes exp(eps*u_j) g_j)
    moves the value W along ``eps -> exp(eps * D @ u) W`` where u stacks the
    u_j.  Block j is the Fox derivative of the word at j, pushed through the
    adjoint representation.
    """
    m = len(values)
    out = np.zeros((3, 3 * m))
    prefix = su2.ONE
    for l in word.letters:
        j = abs(l) - 1
        if l > 0:
            out[:, 3 * j : 3 * j + 3] += ad_matrix(prefix)
            prefix = prefix * values[j]
        else:
            prefix = prefix * values[j].inverse()
            out[:, 3 * j : 3 * j + 3] -= ad_matrix(prefix)
    return out


def chart_tangent_to_group(
    theta: float, axis: np.ndarray, dtheta: float, v: np.ndarray
) -> np.ndarray:
    """Group tangent u at cos(theta)+sin(theta)*axis for a chart motion
    (dtheta, axis velocity v), with v orthogonal to the axis."""
    s, c = math.sin(theta), math.cos(theta)
    return dtheta * axis + s * (c * v - s * cross3(v, axis))


def group_tangent_to_chart(
    theta: float, axis: np.ndarray, u: np.ndarray
) -> tuple[float, np.ndarray]:
    """Inverse of :func:`chart_tangent_to_group`."""
    s, c = math.sin(theta), math.cos(theta)
    dtheta = float(np.dot(u, axis))
    perp = u - dtheta * axis
    v = (c / s) * perp + cross3(u, axis)
    return dtheta, v


@dataclass(frozen=True)
class HandlebodyPoint:
    """Equal-trace representation of a genus-n free group."""

    theta: float
    axes: np.ndarray  # (n, 3), unit rows

    def __post_init__(self):
        object.__setattr__(self, "axes", np.atleast_2d(np.asarray(self.axes, float)))

    @property
    def n(self) -> int:
        return self.axes.shape[0]

    @property
    def trace(self) -> float:
        return 2.0 * math.cos(self.theta)

    def quaternions(self) -> list[Quaternion]:
        return [from_axis_angle(self.theta, p) for p in self.axes]


@dataclass(frozen=True)
class SphereTuple:
    """Equal-trace tuple over the punctured sphere; rows are axes of the
    puncture-loop images."""

    theta: float
    axes: np.ndarray  # (2n, 3)

    def __post_init__(self):
        object.__setattr__(self, "axes", np.atleast_2d(np.asarray(self.axes, float)))

    @property
    def trace(self) -> float:
        return 2.0 * math.cos(self.theta)

    def quaternions(self) -> list[Quaternion]:
        return [from_axis_angle(self.theta, p) for p in self.axes]

    def product_defect(self) -> float:
        """Norm of log of the full product; zero on the constraint locus."""
        prod = su2.ONE
        for q in self.quaternions():
            prod = prod * q
        return float(np.linalg.norm(log_su2(prod)))


def kappa_bar(plat: PlatPresentation, side: int, point: HandlebodyPoint) -> SphereTuple:
    """Push a handlebody point to the punctured-sphere chart.

    The image satisfies the product constraint automatically because the
    rewriting maps preserve the full boundary product.
    """
    words = kappa_words(plat, side)
    values = point.quaternions()
    axes = np.zeros((len(words), 3))
    for idx, w in enumerate(words):
        q = evaluate_word(values, w)
        ang, ax = trace_axis(q)
        if abs(ang - point.theta) > 1e-9:
            raise NotARepresentation(
                f"trace drift {ang - point.theta:.3e} in kappa_bar"
            )
        axes[idx] = ax
    return SphereTuple(point.theta, axes)


def kappa_bar_differential(
    plat: PlatPresentation, side: int, point: HandlebodyPoint
) -> callable:
    """Differential of kappa_bar as a function of chart tangents.

    Returns a closure mapping (dtheta, V) at the handlebody point to
    (dtheta, W) at its image, with V of shape (n, 3) and W of shape (2n, 3).
    """
    words = kappa_words(plat, side)
    values = point.quaternions()
    mats = [word_differential_matrix(values, w) for w in words]
    out_axes = kappa_bar(plat, side, point).axes
    theta = point.theta
    in_axes = point.axes

    def dkappa(dtheta: float, v: np.ndarray) -> tuple[float, np.ndarray]:
        u = np.concatenate(
            [
                chart_tangent_to_group(theta, in_axes[k], dtheta, v[k])
                for k in range(in_axes.shape[0])
            ]
        )
        w = np.zeros_like(out_axes)
        for idx in range(out_axes.shape[0]):
            u_out = mats[idx] @ u
            dth, vel = group_tangent_to_chart(theta, out_axes[idx], u_out)
            if abs(dth - dtheta) > 1e-8 * (1.0 + abs(dtheta)):
                raise NotARepresentation("trace component drift in differential")
            w[idx] = vel
        return dtheta, w

    return dkappa


def points_from_sphere(
    plat: PlatPresentation, x: SphereTuple
) -> tuple[HandlebodyPoint, HandlebodyPoint]:
    """Invert both chart maps at a sphere tuple lying on the intersection of
    the two handlebody images (used to transport solutions across moves).

    The arc-pattern side reads its axes off the odd slots directly; the
    braid-word side first rewrites the tuple across the braid and then does
    the same.
    """
    from .braids import artin_endomorphism
    from .words import generator

    values = x.quaternions()
    m = plat.braid.strands
    n = m // 2

    def pattern_axes(eps):
        return np.array(
            [eps[k] * x.axes[2 * k] for k in range(n)]
        )

    def word_axes(phi_inv, eps):
        axes = np.zeros((n, 3))
        for k in range(n):
            t = evaluate_word(values, phi_inv(generator(m, 2 * k + 1)))
            _, ax = trace_axis(t)
            axes[k] = eps[k] * ax
        return axes

    if not plat.alternate_splitting:
        p1 = HandlebodyPoint(x.theta, pattern_axes(plat.eps1))
        phi_inv = artin_endomorphism(plat.braid.inverse())
        p2 = HandlebodyPoint(x.theta, word_axes(phi_inv, plat.eps2))
    else:
        p2 = HandlebodyPoint(x.theta, pattern_axes(plat.eps2))
        phi = artin_endomorphism(plat.braid)
        p1 = HandlebodyPoint(x.theta, word_axes(phi, plat.eps1))
    return p1, p2


def orbit_velocities(axes: np.ndarray) -> list[np.ndarray]:
    """Axis velocities of the three conjugation one-parameter groups.

    Conjugating by exp(eps*a) rotates every axis at rate 2 a x Q; the trace
    never moves.  The returned list corresponds to a = i, j, k and carries
    the reference normalization of the orbit (unit 3-volume at these three
    velocities).
    """
    return [2.0 * np.cross(a, axes) for a in (su2.E1, su2.E2, su2.E3)]


def irreducibility_measure(axes: np.ndarray) -> float:
    """Max over axis pairs of the sine of the angle between them; zero
    exactly on the abelian locus."""
    m = 0.0
    k = axes.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            m = max(m, float(np.linalg.norm(cross3(axes[i], axes[j]))))
    return m


def orbit_rank(axes: np.ndarray, tol: float = 1e-8) -> int:
    vecs = np.array([v.ravel() for v in orbit_velocities(axes)])
    s = np.linalg.svd(vecs, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _rotation_to_e1(p: np.ndarray) -> np.ndarray:
    """Rotation matrix sending the unit vector p to e1, identity if aligned."""
    c = float(np.dot(p, su2.E1))
    if c > 1.0 - 1e-15:
        return np.eye(3)
    if c < -1.0 + 1e-15:
        # rotate by pi about e2
        return np.diag([-1.0, 1.0, -1.0])
    axis = np.cross(p, su2.E1)
    s = float(np.linalg.norm(axis))
    axis = axis / s
    angle = math.atan2(s, c)
    return _axis_rotation(axis, angle)


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)


def gauge_fix(
    p1: HandlebodyPoint, p2: HandlebodyPoint, tol: float = 1e-8
) -> tuple[HandlebodyPoint, HandlebodyPoint, np.ndarray]:
    """Rotate a pair of handlebody points onto the conjugation slice.

    The slice: the first bottom axis is exactly e1, and the first remaining
    axis not parallel to it (bottom axes scanned before top ones) lies in
    the e1-e2 plane with positive e2 component.  Raises ``Reducible`` when
    every axis is parallel to the first.
    """
    r1 = _rotation_to_e1(p1.axes[0])
    a1 = p1.axes @ r1.T
    a2 = p2.axes @ r1.T
    scan = np.vstack([a1[1:], a2])
    pick = None
    for row in scan:
        if np.linalg.norm(np.cross(row, su2.E1)) > tol:
            pick = row
            break
    if pick is None:
        raise Reducible("all axes parallel; conjugation slice undefined")
    angle = math.atan2(pick[2], pick[1])
    r2 = _axis_rotation(su2.E1, -angle)
    rot = r2 @ r1
    q1 = HandlebodyPoint(p1.theta, np.array([v / np.linalg.norm(v) for v in p1.axes @ rot.T]))
    q1 = HandlebodyPoint(p1.theta, _snap_first(q1.axes))
    q2 = HandlebodyPoint(p2.theta, np.array([v / np.linalg.norm(v) for v in p2.axes @ rot.T]))
    return q1, q2, rot


def _snap_first(axes: np.ndarray) -> np.ndarray:
    out = axes.copy()
    out[0] = su2.E1
    return out


def twisted_cohomology_dims(
    pres: KnotGroupPresentation,
    values: list[Quaternion],
    rel_tol: float = 1e-8,
    rank_rtol: float = RANK_RTOL,
    check_stability: bool = True,
) -> tuple[int, int]:
    """Dimensions (h0, h1) of the low twisted cohomology of the presentation
    at a representation, from numerical ranks of the Fox Jacobian.

    h0 is the dimension of the common fixed space of the adjoint images;
    h1 = dim(cocycles) - dim(coboundaries).  Ranks use a relative singular
    value threshold and are required to be stable one decade either way.
    """
    for r in pres.relators:
        q = evaluate_word(values, r)
        if float(np.linalg.norm(q.vec())) > rel_tol or q.a < 0:
            raise NotARepresentation(f"relator violated by {np.linalg.norm(q.vec()):.2e}")
    m = pres.num_generators
    jac = np.vstack([word_differential_matrix(values, r) for r in pres.relators])
    cob = np.vstack([np.eye(3) - ad_matrix(values[i]) for i in range(m)])

    def dims(rtol):
        z1 = 3 * m - _rank(jac, rtol)
        b1 = _rank(cob, rtol)
        h0 = 3 - b1
        return h0, z1 - b1

    h0, h1 = dims(rank_rtol)
    if check_stability:
        lo = dims(rank_rtol / 10)
        hi = dims(rank_rtol * 10)
        if lo != (h0, h1) or hi != (h0, h1):
            raise NotARepresentation(
                f"cohomology dims unstable under threshold sweep: {lo} {(h0, h1)} {hi}"
            )
    return h0, h1


def _rank(mat: np.ndarray, rtol: float) -> int:
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))
