"""Evaluation of the canonical 1-volume form at regular intersection points.

The construction follows the quotient recipe for compatible volume forms on
a short exact sequence 0 -> E' -> E -> E'' -> 0: fixing forms on two of the
spaces determines the third by v' ^ v'' = (i + s)* v for any section s of
the quotient map, with the primed space always written first.  Concretely:

* Both handlebody charts ``(-2, 2) x (sphere)^n`` and the ambient
  punctured-sphere chart ``(-2, 2) x (sphere)^{2n}`` carry the product form
  dt ^ nu^k.  Coordinates below are always taken in frames that make these
  forms plain determinants.
* The quotient of the punctured-sphere chart by the product-equals-one
  constraint divides by the reference form on su(2); the quotient of any
  chart by the conjugation orbit divides by the reference form on the
  orbit, whose unit basis is the image of (i, j, k).
* At a regular point the difference of the two handlebody differentials is
  onto the reduced sphere space with a one-dimensional kernel, and the
  1-form on that kernel is (-1)^n times the quotient of the product of the
  handlebody forms by the reduced sphere form.

The one remaining global sign (the ambient orientation of the 3-sphere the
plat closes up in) is fixed by OMEGA_GLOBAL_SIGN below and calibrated once
against the width-4 torus plats; the ``ambient_sign`` field of a plat flips
it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import su2
from .braids import PlatPresentation
from .errors import (
    ConstraintViolated,
    DegenerateBasis,
    NotRegular,
    Reducible,
)
from .repspace import (
    HandlebodyPoint,
    SphereTuple,
    chart_tangent_to_group,
    kappa_bar,
    kappa_bar_differential,
    orbit_velocities,
    word_differential_matrix,
)
from .words import FreeWord

# Global orientation convention for the ambient 3-sphere; calibrated so the
# width-4 torus plats give positive density against increasing meridian
# angle on the arc nearest the trivial representation.
OMEGA_GLOBAL_SIGN = 1.0

_ORBIT_MIN_SV = 1e-8


class ProductChart:
    """Unit-volume coordinates on the tangent space of an equal-trace chart.

    Coordinate 0 is the common-angle motion d(theta); each axis contributes
    two coordinates in its nu-unit frame.  In these coordinates the
    reference product form (interval factor wedged with one sphere factor
    per marked generator) is the standard determinant.

    The interval factor is taken in the angle parametrization of the trace
    interval.  The trace parametrization differs by the Jacobian
    -2 sin(theta); the torus-knot acceptance family is the arbiter between
    the two readings and selects the angle convention (the trace reading
    scales the final 1-form by exactly that Jacobian, which the closed
    forms reject).
    """

    def __init__(self, theta: float, axes: np.ndarray):
        self.theta = theta
        self.axes = axes
        self.frames = [su2.nu_unit_frame(p) for p in axes]
        self.k = axes.shape[0]
        self.dim = 1 + 2 * self.k

    def coords(self, dtheta: float, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        out[0] = dtheta
        for i, (f1, f2) in enumerate(self.frames):
            out[1 + 2 * i] = np.dot(v[i], f1) / 2.0
            out[2 + 2 * i] = np.dot(v[i], f2) / 2.0
        return out

    def tangent(self, coords: np.ndarray) -> tuple[float, np.ndarray]:
        dtheta = coords[0]
        v = np.zeros((self.k, 3))
        for i, (f1, f2) in enumerate(self.frames):
            v[i] = coords[1 + 2 * i] * f1 + coords[2 + 2 * i] * f2
        return dtheta, v

    def orbit_matrix(self) -> np.ndarray:
        """Columns are the unit-coordinate images of the conjugation
        velocities for i, j, k (the reference basis of the orbit)."""
        cols = [self.coords(0.0, vel) for vel in orbit_velocities(self.axes)]
        return np.column_stack(cols)


@dataclass
class QuotientBasis:
    """Vectors spanning a complement of the conjugation orbit, scaled so the
    assembled determinant against the orbit basis (and constraint sections,
    when present) equals one."""

    chart: ProductChart
    vectors: np.ndarray  # (dim, count), columns are coordinate vectors
    normalization: float  # determinant absorbed into the first column


def _orbit_complement(orbit: np.ndarray, within: np.ndarray | None = None):
    """Orthonormal basis of the complement of the orbit columns, optionally
    inside the column span of ``within``."""
    if within is None:
        dim = orbit.shape[0]
        u, s, vt = np.linalg.svd(orbit, full_matrices=True)
        if s.size < 3 or s[2] < _ORBIT_MIN_SV * max(1.0, s[0]):
            raise Reducible("conjugation orbit is rank deficient")
        return u[:, 3:]
    # restrict to the subspace first
    g = within.T @ orbit  # coefficients of orbit vectors in the subspace
    u, s, vt = np.linalg.svd(g, full_matrices=True)
    if s.size < 3 or s[2] < _ORBIT_MIN_SV * max(1.0, s[0]):
        raise Reducible("conjugation orbit is rank deficient")
    return within @ u[:, 3:]


def handlebody_quotient_basis(
    point: HandlebodyPoint, rng: np.random.Generator | None = None
) -> QuotientBasis:
    """Unit-volume basis of the conjugation quotient at a handlebody point.

    Returns 2n-2 coordinate vectors; together with the orbit basis they have
    unit volume for the reference product form.  An optional generator mixes
    the complement by a random rotation (the downstream answer must not
    move; tests rely on this hook).
    """
    chart = ProductChart(point.theta, point.axes)
    orbit = chart.orbit_matrix()
    comp = _orbit_complement(orbit)
    if rng is not None:
        comp = comp @ _random_rotation(comp.shape[1], rng)
    det = np.linalg.det(np.column_stack([orbit, comp]))
    if abs(det) < 1e-12:
        raise DegenerateBasis("orbit + complement failed to span")
    comp = comp.copy()
    comp[:, 0] /= det
    return QuotientBasis(chart, comp, det)


def _random_rotation(k: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(k, k))
    q, r = np.linalg.qr(a)
    return q @ np.diag(np.sign(np.diag(r)))


def _product_word(rank: int) -> FreeWord:
    return FreeWord(rank, tuple(range(1, rank + 1)))


def constraint_differential(x: SphereTuple) -> np.ndarray:
    """Matrix of the derivative of the full product, unit coordinates to
    su(2), at a point of the constraint locus."""
    chart = ProductChart(x.theta, x.axes)
    values = x.quaternions()
    wmat = word_differential_matrix(values, _product_word(x.axes.shape[0]))
    cols = []
    for idx in range(chart.dim):
        e = np.zeros(chart.dim)
        e[idx] = 1.0
        dtheta, v = chart.tangent(e)
        u = np.concatenate(
            [
                chart_tangent_to_group(x.theta, x.axes[k], dtheta, v[k])
                for k in range(x.axes.shape[0])
            ]
        )
        cols.append(wmat @ u)
    return np.column_stack(cols)


@dataclass
class SphereQuotientData:
    """Reduced-space data at a point of the constraint locus: unit quotient
    basis, the constraint sections and the orbit, all in unit coordinates."""

    chart: ProductChart
    orbit: np.ndarray  # (dim, 3)
    quotient: np.ndarray  # (dim, 4n-5), v-unit after scaling
    sections: np.ndarray  # (dim, 3), mapped to the su(2) unit basis
    constraint: np.ndarray  # (3, dim)
    normalization: float


def punctured_sphere_quotient_basis(
    x: SphereTuple,
    rng: np.random.Generator | None = None,
    section_shift: np.ndarray | None = None,
) -> SphereQuotientData:
    """Unit-volume basis of the doubly reduced sphere space.

    Two compatibility reductions: first by the product constraint (dividing
    by the su(2) reference form), then by the conjugation orbit.  The
    optional ``section_shift`` adds kernel components to the constraint
    sections; the assembled value must not depend on it.
    """
    if x.product_defect() > 1e-8:
        raise ConstraintViolated(f"product defect {x.product_defect():.2e}")
    chart = ProductChart(x.theta, x.axes)
    a = constraint_differential(x)
    u, s, vt = np.linalg.svd(a)
    if s[2] < 1e-10 * max(1.0, s[0]):
        raise Reducible("constraint map not submersive (abelian point)")
    kernel = vt[3:].T  # (dim, dim-3), orthonormal columns
    sections = np.linalg.pinv(a) @ np.eye(3)
    if section_shift is not None:
        sections = sections + kernel @ section_shift
    orbit = chart.orbit_matrix()
    # orbit velocities preserve the constraint; project exactly onto kernel
    defect = np.linalg.norm(a @ orbit) / max(1.0, np.linalg.norm(orbit))
    if defect > 1e-8:
        raise ConstraintViolated(f"orbit leaves constraint locus by {defect:.2e}")
    comp = _orbit_complement(orbit, within=kernel)
    if rng is not None:
        comp = comp @ _random_rotation(comp.shape[1], rng)
    det = np.linalg.det(np.column_stack([orbit, comp, sections]))
    if abs(det) < 1e-12:
        raise DegenerateBasis("sphere quotient assembly is singular")
    comp = comp.copy()
    comp[:, 0] /= det
    return SphereQuotientData(chart, orbit, comp, sections, a, det)


@dataclass
class TransversalityData:
    """The reduced difference differential at an intersection point."""

    plat: PlatPresentation
    p1: HandlebodyPoint
    p2: HandlebodyPoint
    basis1: QuotientBasis
    basis2: QuotientBasis
    sphere: SphereQuotientData
    matrix: np.ndarray  # (4n-5, 4n-4)
    singular_values: np.ndarray
    kernel_dim: int

    @property
    def is_regular(self) -> bool:
        return self.kernel_dim == 1

    def kernel_vector(self) -> np.ndarray:
        """Middle-space coordinates of the kernel, unit-normalized against
        the meridian angle (d theta_m of the returned vector is +1)."""
        if not self.is_regular:
            raise NotRegular(f"kernel dimension {self.kernel_dim}")
        _, _, vt = np.linalg.svd(self.matrix)
        u = vt[-1]
        dtheta = self._dtheta_m(u)
        if abs(dtheta) < 1e-12:
            raise DegenerateBasis("curve tangent has no meridian-angle motion")
        return u / dtheta

    def _dtheta_m(self, u: np.ndarray) -> float:
        m1 = self.basis1.vectors.shape[1]
        dth1 = float(self.basis1.vectors[0] @ u[:m1])
        dth2 = float(self.basis2.vectors[0] @ u[m1:])
        if abs(dth1 - dth2) > 1e-6 * (1.0 + abs(dth1)):
            raise DegenerateBasis(f"kernel angle motion mismatch {dth1} vs {dth2}")
        return dth1


def transversality_data(
    plat: PlatPresentation,
    p1: HandlebodyPoint,
    p2: HandlebodyPoint,
    rng: np.random.Generator | None = None,
    section_shift: np.ndarray | None = None,
) -> TransversalityData:
    """Assemble the reduced difference differential at a solved point."""
    x = kappa_bar(plat, 1, p1)
    b1 = handlebody_quotient_basis(p1, rng=rng)
    b2 = handlebody_quotient_basis(p2, rng=rng)
    sph = punctured_sphere_quotient_basis(x, rng=rng, section_shift=section_shift)
    dk1 = kappa_bar_differential(plat, 1, p1)
    dk2 = kappa_bar_differential(plat, 2, p2)
    proj = np.column_stack([sph.orbit, sph.quotient])
    cols = []
    for basis, dk, sign in ((b1, dk1, 1.0), (b2, dk2, -1.0)):
        for col in basis.vectors.T:
            dtheta, v = basis.chart.tangent(col)
            dth_out, w = dk(dtheta, v)
            image = sph.chart.coords(dth_out, w)
            beta, res, *_ = np.linalg.lstsq(proj, image, rcond=None)
            resid = np.linalg.norm(proj @ beta - image)
            if resid > 1e-7 * max(1.0, np.linalg.norm(image)):
                raise DegenerateBasis(
                    f"differential image leaves the reduced space ({resid:.2e})"
                )
            cols.append(sign * beta[3:])
    mat = np.column_stack(cols)
    svals = np.linalg.svd(mat, compute_uv=False)
    tol = 1e-7 * max(1.0, svals[0] if svals.size else 1.0)
    rank = int(np.sum(svals > tol))
    kdim = mat.shape[1] - rank
    return TransversalityData(plat, p1, p2, b1, b2, sph, mat, svals, kdim)


def omega_value(data: TransversalityData, u: np.ndarray | None = None) -> float:
    """The canonical 1-form at a regular point, on the kernel tangent u.

    With u omitted, evaluates on the tangent normalized against the
    meridian angle (the reported per-sample density).  Linear in u.
    """
    if not data.is_regular:
        raise NotRegular(f"kernel dimension {data.kernel_dim}")
    if u is None:
        u = data.kernel_vector()
    w = np.linalg.pinv(data.matrix)  # columns map to the unit quotient basis
    square = np.column_stack([u, w])
    det1 = np.linalg.det(square)
    n = data.plat.n
    return (
        ((-1.0) ** n)
        * det1
        * OMEGA_GLOBAL_SIGN
        * data.plat.ambient_sign
    )


def kernel_motion(data: TransversalityData) -> tuple[float, np.ndarray, np.ndarray]:
    """Concrete chart motion of the curve tangent: (dtheta, V1, V2) with
    d theta_m normalized to +1, for continuation predictors."""
    u = data.kernel_vector()
    m1 = data.basis1.vectors.shape[1]
    c1 = data.basis1.vectors @ u[:m1]
    c2 = data.basis2.vectors @ u[m1:]
    dth1, v1 = data.basis1.chart.tangent(c1)
    dth2, v2 = data.basis2.chart.tangent(c2)
    return dth1, v1, v2


@dataclass
class ArcIntegral:
    """Signed mass of an arc against increasing meridian angle."""

    value: float
    error: float
    divergent: bool
    theta_lo: float
    theta_hi: float


def _adaptive_simpson(f, a, b, tol, depth=24):
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if abs(err) <= 15.0 * tol or depth <= 0:
            return left + right + err / 15.0, abs(err) / 15.0
        lv, le = recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        rv, re = recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        return lv + rv, le + re

    return recurse(a, b, fa, fm, fb, whole, tol, depth)


def integrate_arc(plat, arc, config=None, tol: float = 1e-9) -> ArcIntegral:
    """Integrate the per-angle density over an arc, in the direction of
    increasing meridian angle.

    Adaptive Simpson on warm-started re-solves between the outermost
    samples, plus first-order slivers to the extrapolated abelian limits.
    A tail whose density grows far beyond the arc median is flagged
    divergent and excluded from the sum.
    """
    from .solver import SolverConfig, resolve_on_arc

    cfg = config or SolverConfig()
    cache: dict[float, float] = {s.theta_m: s.omega for s in arc.samples}

    def density(theta):
        if theta not in cache:
            pt = resolve_on_arc(plat, arc, theta, cfg)
            cache[theta] = omega_value(pt.data)
        return cache[theta]

    # keep the quadrature interval a margin away from the abelian limits,
    # where the corrector conditioning degrades; the clipped slivers are
    # added at first order (the density extends continuously)
    margin = 1e-6
    a = arc.samples[0].theta_m
    b = arc.samples[-1].theta_m
    if arc.lo.kind == "abelian":
        a = max(a, arc.lo.theta + margin)
    if arc.hi.kind == "abelian":
        b = min(b, arc.hi.theta - margin)
    value, err = _adaptive_simpson(density, a, b, tol)
    divergent = False
    med = float(np.median([abs(s.omega) for s in arc.samples]))
    for end, edge in ((arc.lo, a), (arc.hi, b)):
        if end.kind != "abelian":
            continue
        om_edge = density(edge)
        sliver = abs(edge - end.theta)
        if abs(om_edge) > 50.0 * max(med, 1e-12):
            divergent = True
            continue
        value += om_edge * sliver
        err += 0.1 * abs(om_edge) * sliver
    return ArcIntegral(value, err, divergent, arc.lo.theta, arc.hi.theta)


def orientation_signs(arc) -> list[int]:
    """Per-sample sign of the density against increasing meridian angle."""
    return [s.sign for s in arc.samples]
