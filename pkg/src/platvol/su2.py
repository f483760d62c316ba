"""Quaternion model of SU(2) and its Lie algebra.

Conventions used throughout the package (see docs/conventions.md):

* A group element is a unit quaternion ``q = a + b*i + c*j + d*k`` with
  ``Tr(q) = 2a``.  Every non-central element factors uniquely as
  ``q = cos(theta) + sin(theta)*P`` with ``theta in (0, pi)`` and ``P`` a
  unit pure quaternion (a point of the 2-sphere of trace-zero elements).
* The Lie algebra su(2) is the space of pure quaternions, identified with
  R^3 in the ordered basis (i, j, k); numpy arrays of shape (3,) represent
  its elements.  The inner product <x, y> = -Tr(xy)/2 makes (i, j, k)
  orthonormal.
* Tangent vectors at q are stored as elements ``u`` of su(2) via the curve
  ``eps -> exp(eps*u) * q``.  All differentials in the package use this one
  trivialization.
* ``eta`` is the 3-form on SU(2) equal to the determinant in the (i, j, k)
  frame; it is bi-invariant and gives SU(2) total volume 2*pi^2.
* ``nu`` is the 2-form on the trace-zero sphere obtained by dividing eta by
  the pullback of the standard 1-form dt on (-2, 2) through the trace
  submersion.  In closed form ``nu_P(x, y) = -<P, x cross y> / 2``; its
  total mass is 2*pi.  The scale and sign are forced by the quotient
  construction, not chosen (tests pin both).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CentralElement, LogAtMinusOne

# |Tr q| above this counts as central.
CENTRAL_TRACE_TOL = 2.0 - 1e-9


@dataclass(frozen=True)
class Quaternion:
    """A quaternion a + b*i + c*j + d*k, unit-norm for group elements."""

    a: float
    b: float
    c: float
    d: float

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = other.a, other.b, other.c, other.d
        return Quaternion(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "Quaternion":
        # Unit quaternions only; renormalize to keep drift out of long products.
        return self.conjugate().normalized()

    def norm(self) -> float:
        return math.sqrt(self.a**2 + self.b**2 + self.c**2 + self.d**2)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        return Quaternion(self.a / n, self.b / n, self.c / n, self.d / n)

    def trace(self) -> float:
        return 2.0 * self.a

    def vec(self) -> np.ndarray:
        """Pure part as an su(2) vector."""
        return np.array([self.b, self.c, self.d])

    def is_unit(self, tol: float = 1e-12) -> bool:
        return abs(self.a**2 + self.b**2 + self.c**2 + self.d**2 - 1.0) <= tol

    def __pow__(self, k: int) -> "Quaternion":
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out.normalized()


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
QI = Quaternion(0.0, 1.0, 0.0, 0.0)
QJ = Quaternion(0.0, 0.0, 1.0, 0.0)
QK = Quaternion(0.0, 0.0, 0.0, 1.0)

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def from_vec(a: float, v: np.ndarray) -> Quaternion:
    return Quaternion(a, v[0], v[1], v[2])


def from_axis_angle(theta: float, axis: np.ndarray) -> Quaternion:
    """cos(theta) + sin(theta) * axis, for a unit axis."""
    s = math.sin(theta)
    return Quaternion(math.cos(theta), s * axis[0], s * axis[1], s * axis[2])


def exp_su2(v: np.ndarray) -> Quaternion:
    """exp(v) = cos|v| + sin|v| * v/|v|, exact on su(2)."""
    r = float(np.linalg.norm(v))
    if r < 1e-100:
        return Quaternion(1.0, v[0], v[1], v[2]).normalized()
    s = math.sin(r) / r
    return Quaternion(math.cos(r), s * v[0], s * v[1], s * v[2])


def log_su2(q: Quaternion) -> np.ndarray:
    """Inverse of exp_su2 on SU(2) minus the antipode of the identity."""
    if q.trace() <= -CENTRAL_TRACE_TOL:
        raise LogAtMinusOne(f"log undefined near -1 (trace {q.trace():.3g})")
    a = min(1.0, max(-1.0, q.a / q.norm()))
    v = q.vec()
    r = float(np.linalg.norm(v))
    theta = math.atan2(r, a)
    if r < 1e-12:
        # theta/sin(theta) -> 1 + theta^2/6 near the identity
        return v * (1.0 + theta * theta / 6.0)
    return v * (theta / r)


def ad_matrix(q: Quaternion) -> np.ndarray:
    """Rotation matrix of Ad_q acting on su(2) in the (i, j, k) frame."""
    a, b, c, d = q.a, q.b, q.c, q.d
    return np.array(
        [
            [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
            [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
            [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
        ]
    )


def adjoint(q: Quaternion, v: np.ndarray) -> np.ndarray:
    """Ad_q(v) = q v q^-1 on su(2); a rotation by twice the angle of q."""
    return ad_matrix(q) @ v


def trace_axis(q: Quaternion, tol: float = CENTRAL_TRACE_TOL) -> tuple[float, np.ndarray]:
    """Decompose q = cos(theta) + sin(theta)*P; raises at central elements."""
    if abs(q.trace()) > tol:
        raise CentralElement(f"no axis at central element (trace {q.trace():.6g})")
    v = q.vec()
    r = float(np.linalg.norm(v))
    theta = math.atan2(r, q.a)
    return theta, v / r


def eta_value(v1: np.ndarray, v2: np.ndarray, v3: np.ndarray) -> float:
    """The reference 3-form on SU(2) evaluated on trivialized tangents.

    Translation-invariant, so the base point never enters.
    """
    return float(np.linalg.det(np.column_stack([v1, v2, v3])))


def nu_value(p: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """The trace-fibration 2-form on the trace-zero sphere at P.

    Derived once from compatibility of eta with dt through the trace
    submersion; see the module docstring.  Antisymmetric and rotation
    invariant.
    """
    return -0.5 * float(np.dot(p, cross3(x, y)))


def sphere_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed orthonormal frame (g1, g2) of the tangent
    plane at p, i.e. g1 x g2 = p."""
    h = E3 if abs(p[2]) < 0.9 else E2
    g1 = h - np.dot(h, p) * p
    g1 = g1 / np.linalg.norm(g1)
    g2 = cross3(p, g1)
    return g1, g2


def nu_unit_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tangent frame (f1, f2) at p with nu(f1, f2) = +1.

    Coordinates taken in this frame make the sphere factor of any product
    volume form a plain determinant.
    """
    g1, g2 = sphere_frame(p)
    s = math.sqrt(2.0)
    return s * g2, s * g1


def sphere_tangent_coords(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coordinates of a tangent v at p in the nu-unit frame."""
    f1, f2 = nu_unit_frame(p)
    # f1, f2 are orthogonal of norm sqrt(2); <fi, fi> = 2
    return np.array([np.dot(v, f1) / 2.0, np.dot(v, f2) / 2.0])


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of 3-vectors without numpy's generic-axis overhead."""
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _skew(r: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -r[2], r[1]], [r[2], 0.0, -r[0]], [-r[1], r[0], 0.0]]
    )


def dlog(r: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Differential of log at C = exp(r): if dC*C^-1 = xi then d(log C) =
    dlog(r, xi).

    With the half-angle exponential above the closed form is
    ``<xi,n>n + t*cot(t)*xi_perp + xi_perp x r`` for r = t*n.
    """
    return dlog_matrix(r) @ xi


def dlog_matrix(r: np.ndarray) -> np.ndarray:
    """The linear map xi -> dlog(r, xi) as a 3x3 matrix."""
    t = float(np.linalg.norm(r))
    if t < 1e-8:
        sk = _skew(r)
        return np.eye(3) - sk + (sk @ sk) / 3.0
    n = r / t
    proj = np.outer(n, n)
    perp = np.eye(3) - proj
    return proj + (t * math.cos(t) / math.sin(t)) * perp - _skew(r) @ perp
