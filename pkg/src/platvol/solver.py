"""Intersection points of the two handlebody images and continuation of the
regular curve.

At a fixed common trace the unknowns are the two axis tuples; the equations
match the first 2n-1 puncture-loop images of the two sides (the last one is
a consequence of the product constraint and is checked after the fact).
Gauss-Newton with a pseudo-inverse step handles the three-dimensional
conjugation degeneracy; converged points are pushed onto the gauge slice.

The continuation parameter is the meridian angle theta_m (the common trace
is 2 cos theta_m), stepped by a predictor along the kernel of the reduced
difference differential and corrected at fixed angle.  Arcs terminate at
abelian limits (detected by the axis-spread measure and located by
extrapolating its square, which vanishes linearly in cos^2 theta_m), at
interior regularity failures, or at the chart boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .braids import PlatPresentation, kappa_words, wirtinger_presentation
from .errors import (
    ConstraintViolated,
    ConvergedToReducible,
    DegenerateBasis,
    InconsistentRegularity,
    LogAtMinusOne,
    NoConvergence,
    NotARepresentation,
    NotRegular,
    Reducible,
    StepCollapse,
)
from .repspace import (
    HandlebodyPoint,
    chart_tangent_to_group,
    evaluate_word,
    gauge_fix,
    irreducibility_measure,
    kappa_bar,
    twisted_cohomology_dims,
    word_differential_matrix,
)
from .su2 import ad_matrix, dlog_matrix, from_axis_angle, log_su2, sphere_frame
from .volume import TransversalityData, kernel_motion, omega_value, transversality_data

_SOLVE_FAILURES = (
    NoConvergence,
    ConvergedToReducible,
    NotARepresentation,
    InconsistentRegularity,
    NotRegular,
    DegenerateBasis,
    Reducible,
    ConstraintViolated,
)


@dataclass(frozen=True)
class SolverConfig:
    """Numerical policy; a fixed seed makes every run deterministic."""

    residual_tol: float = 1e-12
    max_iterations: int = 80
    multistart: int = 200
    dedup_tol: float = 1e-6
    step_initial: float = 0.02
    step_min: float = 1e-4
    step_max: float = 0.1
    seed: int = 0
    reducible_tol: float = 1e-6
    endpoint_measure: float = 1e-5
    endpoint_onset: float = 0.05
    theta_margin: float = 1e-3

    def to_dict(self) -> dict:
        return {
            "residual_tol": self.residual_tol,
            "max_iterations": self.max_iterations,
            "multistart": self.multistart,
            "dedup_tol": self.dedup_tol,
            "step_initial": self.step_initial,
            "step_min": self.step_min,
            "step_max": self.step_max,
            "seed": self.seed,
            "reducible_tol": self.reducible_tol,
            "endpoint_measure": self.endpoint_measure,
            "endpoint_onset": self.endpoint_onset,
            "theta_margin": self.theta_margin,
        }


@dataclass
class IntersectionPoint:
    """A gauge-fixed solution at fixed meridian angle, with its regularity
    certificate."""

    plat: PlatPresentation = field(repr=False)
    theta_m: float = 0.0
    p1: HandlebodyPoint = None
    p2: HandlebodyPoint = None
    residual: float = 0.0
    invariants: tuple[float, ...] = ()
    singular_values: tuple[float, ...] = ()
    kernel_dim: int = 0
    regular: bool = False
    h0: int = 0
    h1: int = 0
    data: TransversalityData = field(default=None, repr=False)

    @property
    def trace(self) -> float:
        return 2.0 * math.cos(self.theta_m)

    def measure(self) -> float:
        return irreducibility_measure(np.vstack([self.p1.axes, self.p2.axes]))


@dataclass
class EndpointInfo:
    kind: str  # 'abelian' | 'interior_singularity' | 'domain_boundary'
    theta: float
    measure: float


@dataclass
class ArcSample:
    theta_m: float
    omega: float
    sign: int
    point: IntersectionPoint = field(repr=False)


@dataclass
class RegularArc:
    """A continuation-traced component of the regular curve, parametrized by
    increasing meridian angle."""

    plat: PlatPresentation = field(repr=False)
    samples: list[ArcSample] = field(default_factory=list)
    lo: EndpointInfo = None
    hi: EndpointInfo = None

    @property
    def theta_range(self) -> tuple[float, float]:
        return self.samples[0].theta_m, self.samples[-1].theta_m

    def endpoint_angles(self) -> tuple[float, float]:
        return self.lo.theta, self.hi.theta

    def key(self, digits: int = 4) -> tuple:
        """Rounded endpoint pair; used to deduplicate and match arcs."""
        return (round(self.lo.theta, digits), round(self.hi.theta, digits))


_SYSTEMS: dict[PlatPresentation, "PlatSystem"] = {}


def get_system(plat: PlatPresentation) -> "PlatSystem":
    """Memoized per-presentation system (the rewriting words and the
    presentation are move-independent data worth reusing)."""
    if plat not in _SYSTEMS:
        if len(_SYSTEMS) > 256:
            _SYSTEMS.clear()
        _SYSTEMS[plat] = PlatSystem(plat)
    return _SYSTEMS[plat]


class PlatSystem:
    """Residuals and Jacobians of the matching equations for one plat."""

    def __init__(self, plat: PlatPresentation):
        self.plat = plat
        self.n = plat.n
        self.m = plat.braid.strands
        self.words1 = kappa_words(plat, 1)
        self.words2 = kappa_words(plat, 2)
        self.presentation = wirtinger_presentation(plat)

    def _values(self, theta, axes):
        return [from_axis_angle(theta, p) for p in axes]

    def residual(self, theta, axes1, axes2) -> np.ndarray | None:
        """Stacked logs of the side-1/side-2 mismatches; None signals a
        branch-cut hit (treated as a failed iterate)."""
        v1 = self._values(theta, axes1)
        v2 = self._values(theta, axes2)
        out = np.zeros(3 * (self.m - 1))
        for j in range(self.m - 1):
            a = evaluate_word(v1, self.words1[j])
            b = evaluate_word(v2, self.words2[j])
            try:
                out[3 * j : 3 * j + 3] = log_su2(a * b.inverse())
            except LogAtMinusOne:
                return None
        return out

    def dropped_relation_defect(self, theta, axes1, axes2) -> float:
        v1 = self._values(theta, axes1)
        v2 = self._values(theta, axes2)
        a = evaluate_word(v1, self.words1[self.m - 1])
        b = evaluate_word(v2, self.words2[self.m - 1])
        return float(np.linalg.norm(log_su2(a * b.inverse())))

    def jacobian(self, theta, axes1, axes2, res) -> np.ndarray:
        """Exact derivative of the residual in the axis degrees of freedom
        (two per axis, frames recomputed each call); the trace is frozen."""
        n = self.n
        v1 = self._values(theta, axes1)
        v2 = self._values(theta, axes2)
        f1 = [sphere_frame(p) for p in axes1]
        f2 = [sphere_frame(p) for p in axes2]
        t1 = np.zeros((3 * n, 2 * n))
        t2 = np.zeros((3 * n, 2 * n))
        for k in range(n):
            for c, g in enumerate(f1[k]):
                t1[3 * k : 3 * k + 3, 2 * k + c] = chart_tangent_to_group(
                    theta, axes1[k], 0.0, g
                )
            for c, g in enumerate(f2[k]):
                t2[3 * k : 3 * k + 3, 2 * k + c] = chart_tangent_to_group(
                    theta, axes2[k], 0.0, g
                )
        jac = np.zeros((3 * (self.m - 1), 4 * n))
        for j in range(self.m - 1):
            a = evaluate_word(v1, self.words1[j])
            b = evaluate_word(v2, self.words2[j])
            c = a * b.inverse()
            r = res[3 * j : 3 * j + 3]
            du_a = word_differential_matrix(v1, self.words1[j]) @ t1
            du_b = word_differential_matrix(v2, self.words2[j]) @ t2
            xi = np.column_stack([du_a, -ad_matrix(c) @ du_b])
            jac[3 * j : 3 * j + 3, :] = dlog_matrix(r) @ xi
        return jac

    def gauss_newton(self, theta, axes1, axes2, config: SolverConfig):
        """Iterate to the residual tolerance; returns (axes1, axes2, norm)."""
        ax1 = np.array(axes1, float)
        ax2 = np.array(axes2, float)
        n = self.n
        res = self.residual(theta, ax1, ax2)
        if res is None:
            raise NoConvergence("seed on a branch cut")
        best = float(np.linalg.norm(res))
        for _ in range(config.max_iterations):
            if best < config.residual_tol:
                return ax1, ax2, best
            jac = self.jacobian(theta, ax1, ax2, res)
            step, *_ = np.linalg.lstsq(jac, -res, rcond=1e-12)
            scale = 1.0
            for _damp in range(8):
                c1 = _step_axes(ax1, step[: 2 * n] * scale)
                c2 = _step_axes(ax2, step[2 * n :] * scale)
                cand = self.residual(theta, c1, c2)
                if cand is not None and np.linalg.norm(cand) < best:
                    ax1, ax2, res = c1, c2, cand
                    best = float(np.linalg.norm(cand))
                    break
                scale *= 0.5
            else:
                # stalled in rounding noise: accept if essentially converged
                if best < max(config.residual_tol, 1e-10):
                    return ax1, ax2, best
                raise NoConvergence(f"stalled at residual {best:.3e}")
        if best < max(config.residual_tol, 1e-10):
            return ax1, ax2, best
        raise NoConvergence(f"no convergence, residual {best:.3e}")


def _step_axes(axes: np.ndarray, dof: np.ndarray) -> np.ndarray:
    out = axes.copy()
    for k in range(axes.shape[0]):
        g1, g2 = sphere_frame(axes[k])
        v = axes[k] + dof[2 * k] * g1 + dof[2 * k + 1] * g2
        out[k] = v / np.linalg.norm(v)
    return out


_INVARIANT_PAIRS = [(0, 1), (0, 2), (1, 2), (0, 3)]


def invariant_traces(plat: PlatPresentation, p1: HandlebodyPoint) -> tuple[float, ...]:
    """Conjugation-invariant signature of a solution: the common trace plus
    traces of a fixed list of products of puncture-loop images."""
    x = kappa_bar(plat, 1, p1)
    qs = x.quaternions()
    vals = [x.trace]
    for i, j in _INVARIANT_PAIRS:
        if i < len(qs) and j < len(qs):
            vals.append((qs[i] * qs[j]).trace())
    vals.append((qs[0] * qs[1] * qs[2]).trace() if len(qs) >= 3 else 0.0)
    return tuple(vals)


def solve_at_trace(
    plat: PlatPresentation,
    theta_m: float,
    seed1: np.ndarray,
    seed2: np.ndarray,
    config: SolverConfig = SolverConfig(),
    system: PlatSystem | None = None,
    require_regular: bool = False,
) -> IntersectionPoint:
    """Converge from a seed at fixed meridian angle and certify the result.

    Raises NoConvergence or ConvergedToReducible on solver failures;
    InconsistentRegularity when the transversality rank and the twisted
    cohomology dimension disagree outside the rank-threshold hysteresis
    band; NotRegular when ``require_regular`` is set and the point fails
    the certificate.
    """
    sys_ = system or get_system(plat)
    ax1, ax2, resnorm = sys_.gauss_newton(theta_m, seed1, seed2, config)
    measure = irreducibility_measure(np.vstack([ax1, ax2]))
    if measure < config.reducible_tol:
        raise ConvergedToReducible(f"axis spread {measure:.2e}")
    p1, p2, _ = gauge_fix(HandlebodyPoint(theta_m, ax1), HandlebodyPoint(theta_m, ax2))
    defect = sys_.dropped_relation_defect(theta_m, p1.axes, p2.axes)
    if defect > 1e-8:
        raise NotARepresentation(f"dropped relation defect {defect:.2e}")
    data = transversality_data(plat, p1, p2)
    values = p1.quaternions() + p2.quaternions()
    h0, h1 = twisted_cohomology_dims(sys_.presentation, values, check_stability=False)
    regular = data.kernel_dim == 1
    if regular != (h1 == 1):
        svals = np.array(data.singular_values)
        smin = svals[svals > 0].min() if np.any(svals > 0) else 0.0
        thresh = 1e-7 * max(1.0, svals[0])
        band = 10.0  # one decade of hysteresis around the rank threshold
        if not (thresh / band < smin < thresh * band):
            raise InconsistentRegularity(
                f"transversality kernel {data.kernel_dim} vs h1 {h1}"
            )
        regular = h1 == 1
    point = IntersectionPoint(
        plat=plat,
        theta_m=theta_m,
        p1=p1,
        p2=p2,
        residual=resnorm,
        invariants=invariant_traces(plat, p1),
        singular_values=tuple(data.singular_values),
        kernel_dim=data.kernel_dim,
        regular=regular,
        h0=h0,
        h1=h1,
        data=data,
    )
    if require_regular and not regular:
        raise NotRegular(f"kernel dimension {data.kernel_dim}, h1 {h1}")
    return point


def regularity_check(point: IntersectionPoint):
    """(is_regular, kernel dimension, singular values) for a solved point."""
    return point.regular, point.kernel_dim, np.array(point.singular_values)


def _multistart_seeds(n: int, count: int, rng: np.random.Generator):
    """Half planar-axis seeds (binary dihedral basin), half uniform."""
    seeds = []
    for idx in range(count):
        if idx % 2 == 0:
            ang1 = rng.uniform(0.0, 2 * math.pi, size=n)
            ang2 = rng.uniform(0.0, 2 * math.pi, size=n)
            a1 = np.column_stack([np.cos(ang1), np.sin(ang1), np.zeros(n)])
            a2 = np.column_stack([np.cos(ang2), np.sin(ang2), np.zeros(n)])
        else:
            a1 = rng.normal(size=(n, 3))
            a2 = rng.normal(size=(n, 3))
            a1 /= np.linalg.norm(a1, axis=1, keepdims=True)
            a2 /= np.linalg.norm(a2, axis=1, keepdims=True)
        seeds.append((a1, a2))
    return seeds


def find_all_at_trace(
    plat: PlatPresentation,
    theta_m: float,
    config: SolverConfig = SolverConfig(),
    system: PlatSystem | None = None,
) -> list[IntersectionPoint]:
    """Multi-start search for every conjugacy class at one meridian angle.

    Points are deduplicated on the invariant trace vector and returned in a
    deterministic order (lexicographic on that vector).
    """
    sys_ = system or get_system(plat)
    rng = np.random.default_rng(config.seed)
    found: list[IntersectionPoint] = []
    for seed1, seed2 in _multistart_seeds(plat.n, config.multistart, rng):
        try:
            pt = solve_at_trace(plat, theta_m, seed1, seed2, config, system=sys_)
        except _SOLVE_FAILURES:
            continue
        if any(
            np.allclose(pt.invariants, q.invariants, atol=config.dedup_tol)
            for q in found
        ):
            continue
        found.append(pt)
    found.sort(key=lambda p: p.invariants)
    return found


def _sample(point: IntersectionPoint) -> ArcSample | None:
    """Evaluate the density at a point; None when the reduced rank sits in
    the threshold hysteresis band (only happens hard against endpoints)."""
    try:
        om = omega_value(point.data)
    except (NotRegular, DegenerateBasis):
        return None
    return ArcSample(point.theta_m, om, 1 if om > 0 else -1, point)


def _fit_endpoint(history: list[tuple[float, float]], direction: int) -> float | None:
    """Extrapolate the abelian limit angle from (theta, measure) samples.

    The squared spread vanishes linearly (in cos^2 theta) at an abelian
    limit; a secant through the two samples closest to the limit locates
    the root, and sharpens as the samples close in."""
    tail = [(t, m) for t, m in history if m < 0.4]
    if len(tail) < 2:
        tail = history[-2:]
    if len(tail) < 2:
        return None
    (t1, m1), (t2, m2) = tail[-2], tail[-1]
    x1, x2 = math.cos(t1) ** 2, math.cos(t2) ** 2
    y1, y2 = m1 * m1, m2 * m2
    if abs(y1 - y2) < 1e-18 or x1 == x2:
        return None
    root = x2 + y2 * (x2 - x1) / (y1 - y2)
    if not 0.0 <= root <= 1.0:
        return None
    c = math.sqrt(root)
    last = t2
    cands = [t for t in (math.acos(c), math.acos(-c)) if (t - last) * direction > 0]
    if not cands:
        return None
    return min(cands, key=lambda t: abs(t - last))


def _invariant_drift(a: IntersectionPoint, b: IntersectionPoint) -> float:
    return float(
        np.max(np.abs(np.array(a.invariants) - np.array(b.invariants)))
    )


def _march(
    plat: PlatPresentation,
    system: PlatSystem,
    start: IntersectionPoint,
    direction: int,
    config: SolverConfig,
) -> tuple[list[IntersectionPoint], EndpointInfo]:
    points: list[IntersectionPoint] = []
    current = start
    h = config.step_initial
    measures = [(current.theta_m, current.measure())]
    while True:
        try:
            _, v1, v2 = kernel_motion(current.data)
        except (NotRegular, DegenerateBasis):
            return points, EndpointInfo(
                "interior_singularity", current.theta_m, current.measure()
            )
        theta_new = current.theta_m + direction * h
        if not config.theta_margin < theta_new < math.pi - config.theta_margin:
            return points, EndpointInfo(
                "domain_boundary", current.theta_m, current.measure()
            )
        ok = False
        sing = False
        try:
            nxt = solve_at_trace(
                plat,
                theta_new,
                _predict(current.p1.axes, v1, direction * h),
                _predict(current.p2.axes, v2, direction * h),
                config,
                system=system,
                require_regular=True,
            )
            # guard against hopping to a different branch
            ok = _invariant_drift(current, nxt) < max(1.0, 20.0 * h)
        except (NotRegular, InconsistentRegularity):
            sing = True
        except _SOLVE_FAILURES:
            pass
        if ok:
            points.append(nxt)
            current = nxt
            measures.append((current.theta_m, current.measure()))
            if current.measure() < config.endpoint_onset:
                break  # close to an abelian limit; switch to the endpoint flow
            h = min(h * 1.4, config.step_max)
            continue
        h *= 0.5
        if h >= config.step_min:
            continue
        if current.measure() < 2 * config.endpoint_onset:
            break
        if sing:
            return points, EndpointInfo(
                "interior_singularity", current.theta_m, current.measure()
            )
        raise StepCollapse(
            f"step collapsed at theta_m={current.theta_m:.6f}, "
            f"measure={current.measure():.3e}"
        )
    # abelian endpoint: extrapolate the limit angle, then polish toward it
    theta_end = _fit_endpoint(measures, direction)
    gap = abs(current.theta_m - theta_end) if theta_end is not None else h
    for _ in range(60):
        if theta_end is None:
            break
        gap *= 0.25
        if gap < 1e-8 or current.measure() < config.endpoint_measure:
            break
        target = theta_end - direction * gap
        if (target - current.theta_m) * direction <= 0:
            continue
        try:
            _, v1, v2 = kernel_motion(current.data)
            dstep = target - current.theta_m
            nxt = solve_at_trace(
                plat,
                target,
                _predict(current.p1.axes, v1, dstep),
                _predict(current.p2.axes, v2, dstep),
                config,
                system=system,
            )
        except _SOLVE_FAILURES:
            break
        if nxt.regular:
            points.append(nxt)
        current = nxt
        measures.append((current.theta_m, current.measure()))
        refit = _fit_endpoint(measures, direction)
        if refit is not None:
            theta_end = refit
            gap = abs(current.theta_m - theta_end)
    if theta_end is None:
        theta_end = current.theta_m
    return points, EndpointInfo("abelian", theta_end, current.measure())


def _predict(axes: np.ndarray, vel: np.ndarray, step: float) -> np.ndarray:
    out = axes + step * vel
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def trace_arc(
    plat: PlatPresentation,
    start: IntersectionPoint,
    config: SolverConfig = SolverConfig(),
    system: PlatSystem | None = None,
) -> RegularArc:
    """Continue the regular curve through a starting point in both meridian
    angle directions and assemble the ordered arc."""
    sys_ = system or get_system(plat)
    up_pts, up_end = _march(plat, sys_, start, +1, config)
    down_pts, down_end = _march(plat, sys_, start, -1, config)
    pts = list(reversed(down_pts)) + [start] + up_pts
    pts.sort(key=lambda p: p.theta_m)
    samples = [s for s in (_sample(p) for p in pts) if s is not None]
    return RegularArc(plat, samples, lo=down_end, hi=up_end)


def find_arcs(
    plat: PlatPresentation,
    config: SolverConfig = SolverConfig(),
    scan_angles: tuple[float, ...] = (math.pi / 2, 1.2, 1.9),
) -> list[RegularArc]:
    """Locate arcs by multi-start at a few meridian angles, then trace and
    deduplicate them by endpoint pairs."""
    system = get_system(plat)
    # distinct arcs may share endpoint pairs (composite knots), so coverage
    # is decided by re-solving on the arc, never by the endpoint key alone
    arcs: list[RegularArc] = []
    for theta in scan_angles:
        for pt in find_all_at_trace(plat, theta, config, system=system):
            if not pt.regular:
                continue
            if any(_covers(plat, arc, pt, config, system) for arc in arcs):
                continue
            arcs.append(trace_arc(plat, pt, config, system=system))
    return sorted(arcs, key=lambda a: (a.key(), a.samples[0].point.invariants))


def _covers(
    plat: PlatPresentation,
    arc: RegularArc,
    pt: IntersectionPoint,
    config: SolverConfig,
    system: PlatSystem,
) -> bool:
    lo, hi = arc.theta_range
    if not lo - 1e-9 <= pt.theta_m <= hi + 1e-9:
        return False
    try:
        on_arc = resolve_on_arc(plat, arc, pt.theta_m, config, system=system)
    except _SOLVE_FAILURES:
        return False
    return bool(
        np.allclose(on_arc.invariants, pt.invariants, atol=max(config.dedup_tol, 1e-7))
    )


def resolve_on_arc(
    plat: PlatPresentation,
    arc: RegularArc,
    theta_m: float,
    config: SolverConfig = SolverConfig(),
    system: PlatSystem | None = None,
) -> IntersectionPoint:
    """Solve at an arbitrary angle inside an arc, warm-started from the
    nearest sample (used by the integrator and the matching harness)."""
    sys_ = system or get_system(plat)
    best = min(arc.samples, key=lambda s: abs(s.theta_m - theta_m))
    pt = best.point
    _, v1, v2 = kernel_motion(pt.data)
    step = theta_m - pt.theta_m
    return solve_at_trace(
        plat,
        theta_m,
        _predict(pt.p1.axes, v1, step),
        _predict(pt.p2.axes, v2, step),
        config,
        system=sys_,
    )
