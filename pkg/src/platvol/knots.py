"""Knot-level oracles and the verification harness.

Closed forms for the width-4 torus family, Alexander polynomials from the
Fox Jacobian, the composite-knot pullback check, and the invariance suite
that re-derives the curve and its density after each move of the plat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy

from .braids import (
    BraidWord,
    KnotGroupPresentation,
    PlatPresentation,
    half_braid_generators,
)
from .errors import MatchingFailure, NonCyclicAbelianization
from .repspace import SphereTuple, kappa_bar, points_from_sphere
from .solver import (
    IntersectionPoint,
    PlatSystem,
    get_system,
    RegularArc,
    SolverConfig,
    _SOLVE_FAILURES,
    find_all_at_trace,
    find_arcs,
    resolve_on_arc,
    solve_at_trace,
    trace_arc,
)
from .volume import integrate_arc, omega_value
from .words import fox_derivative

_T = sympy.Symbol("T")


@dataclass(frozen=True)
class IntegerPolynomial:
    """Integer polynomial with lowest degree zero and positive leading
    coefficient (the Alexander normalization)."""

    coeffs: tuple[int, ...]  # coeffs[k] multiplies T^k

    @staticmethod
    def from_sympy(expr) -> "IntegerPolynomial":
        poly = sympy.Poly(sympy.expand(expr), _T)
        coeffs = [int(c) for c in reversed(poly.all_coeffs())]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            return IntegerPolynomial((0,))
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        return IntegerPolynomial(tuple(coeffs))

    def __call__(self, z: complex) -> complex:
        out = 0j
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self) -> str:
        if self.coeffs == (0,):
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                mono = "T" if k == 1 else f"T^{k}"
                parts.append(f"{c}*{mono}" if abs(c) != 1 else ("-" + mono if c < 0 else mono))
        return " + ".join(parts).replace("+ -", "- ")


def alexander_polynomial(pres: KnotGroupPresentation) -> IntegerPolynomial:
    """Alexander polynomial from the abelianized Fox Jacobian.

    Every generator is a meridian, so abelianization sends each to the
    same variable; the polynomial is the gcd of the maximal minors with one
    column deleted, normalized to degree-zero bottom and positive lead.
    """
    if not pres.abelianization_is_cyclic():
        raise NonCyclicAbelianization("presentation does not abelianize to Z")
    g = pres.num_generators
    rows = []
    for rel in pres.relators:
        entries = []
        exps = []
        for j in range(1, g + 1):
            deriv = fox_derivative(rel, j)
            expr = sympy.Integer(0)
            for c, w in deriv.terms:
                e = int(sum(w.exponent_sums()))
                exps.append(e)
                expr += c * _T**e
            entries.append(expr)
        shift = -min(exps, default=0)
        rows.append([sympy.expand(ent * _T**shift) for ent in entries])
    mat = sympy.Matrix(rows)
    dets = []
    for j in range(g):
        cols = [k for k in range(g) if k != j]
        d = sympy.expand(mat[:, cols].det(method="berkowitz"))
        if d != 0:
            dets.append(d)
    if not dets:
        return IntegerPolynomial((0,))
    acc = dets[0]
    for d in dets[1:]:
        acc = sympy.gcd(acc, d)
    poly = IntegerPolynomial.from_sympy(acc)
    if abs(poly(1.0)) != 1:
        raise NonCyclicAbelianization(
            f"minor gcd evaluates to {poly(1.0)} at 1; not a knot polynomial"
        )
    return poly


def abelian_regular(theta: float, delta: IntegerPolynomial, tol: float = 1e-9) -> bool:
    """Whether the diagonal representation at this meridian angle sits away
    from the roots of the Alexander polynomial."""
    return abs(delta(np.exp(2j * theta))) > tol


def alexander_root_angles(delta: IntegerPolynomial, tol: float = 1e-8) -> list[float]:
    """Angles theta in [0, pi] whose squared phase is a unit-circle root."""
    if delta.degree < 1:
        return []
    roots = np.roots(list(reversed(delta.coeffs)))
    angles = set()
    for r in roots:
        if abs(abs(r) - 1.0) < tol:
            ang = math.atan2(r.imag, r.real) % (2 * math.pi)
            angles.add(round(ang / 2.0, 12))
    return sorted(angles)


# -- width-4 torus family ---------------------------------------------------


def torus_plat(q: int) -> PlatPresentation:
    """The standard width-4 plat of the (2, q) torus knot."""
    if q < 3 or q % 2 == 0:
        raise ValueError("q must be odd and at least 3")
    return PlatPresentation.from_braid(BraidWord(4, (2,) * q))


def torus_arc_count(q: int) -> int:
    return (q - 1) // 2


def torus_omega_dtheta(q: int, ell: int) -> float:
    """Constant per-arc density against the meridian angle."""
    _check_torus_args(q, ell)
    return 8.0 / q * math.sin((2 * ell - 1) * math.pi / q) ** 2


def torus_theta_m(q: int, ell: int, t: float) -> float:
    """Meridian angle along arc ell at internal parameter t in (0, 1)."""
    _check_torus_args(q, ell)
    c = math.cos((2 * ell - 1) * math.pi / (2 * q)) * (-1.0) ** (ell - 1)
    return math.acos(c * math.cos(math.pi * t))


def torus_closed_form(q: int, ell: int, t: float) -> tuple[float, float]:
    """(theta_m, density with respect to the internal parameter t)."""
    _check_torus_args(q, ell)
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    c = math.cos((2 * ell - 1) * math.pi / (2 * q)) * (-1.0) ** (ell - 1)
    ct = math.cos(math.pi * t)
    dtheta_dt = c * math.pi * math.sin(math.pi * t) / math.sqrt(1.0 - (c * ct) ** 2)
    return math.acos(c * ct), torus_omega_dtheta(q, ell) * dtheta_dt


def torus_endpoints(q: int, ell: int) -> tuple[float, float]:
    """Meridian-angle endpoints of arc ell (abelian limits at roots of the
    Alexander polynomial)."""
    _check_torus_args(q, ell)
    a = (2 * ell - 1) * math.pi / (2 * q)
    return a, math.pi - a


def torus_integral(q: int) -> float:
    """The closed-form total of the density along the internal-parameter
    orientation of each arc (alternating in the arc index)."""
    if q < 3 or q % 2 == 0:
        raise ValueError("q must be odd and at least 3")
    total = 0.0
    for ell in range(1, (q - 1) // 2 + 1):
        total += (
            (-1.0) ** (ell - 1)
            * 8.0
            * math.pi
            * (q - 2 * ell + 1)
            / q**2
            * math.sin((2 * ell - 1) * math.pi / q) ** 2
        )
    return total


def torus_arc_mass(q: int, ell: int) -> float:
    """Mass of arc ell against increasing meridian angle (always positive:
    the density is a positive constant and the angle sweep is the distance
    between the endpoints)."""
    lo, hi = torus_endpoints(q, ell)
    return torus_omega_dtheta(q, ell) * (hi - lo)


def torus_total_mass(q: int) -> float:
    """Total mass of the curve against the orientation induced by the
    density itself (term-wise absolute version of ``torus_integral``)."""
    return sum(torus_arc_mass(q, ell) for ell in range(1, (q - 1) // 2 + 1))


def _check_torus_args(q: int, ell: int) -> None:
    if q < 3 or q % 2 == 0:
        raise ValueError("q must be odd and at least 3")
    if not 1 <= ell <= (q - 1) // 2:
        raise ValueError(f"arc index {ell} out of range for q={q}")


# -- matching across presentations ------------------------------------------


def match_arcs(
    base: list[RegularArc], moved: list[RegularArc], tol: float = 5e-4
) -> list[tuple[RegularArc, RegularArc]]:
    """Pair arcs across presentations by their endpoint angle pairs."""
    pairs = []
    used = set()
    for arc in base:
        best = None
        for idx, cand in enumerate(moved):
            if idx in used:
                continue
            d = max(
                abs(arc.lo.theta - cand.lo.theta), abs(arc.hi.theta - cand.hi.theta)
            )
            if d < tol and (best is None or d < best[0]):
                best = (d, idx)
        if best is None:
            raise MatchingFailure(
                f"no arc with endpoints near {arc.endpoint_angles()}"
            )
        used.add(best[1])
        pairs.append((arc, moved[best[1]]))
    return pairs


def compare_arcs_pointwise(
    plat_a: PlatPresentation,
    arc_a: RegularArc,
    plat_b: PlatPresentation,
    arc_b: RegularArc,
    sign: float,
    config: SolverConfig,
    grid: int = 7,
) -> float:
    """Max over a shared angle grid of |omega_b * sign - omega_a|."""
    lo = max(arc_a.theta_range[0], arc_b.theta_range[0])
    hi = min(arc_a.theta_range[1], arc_b.theta_range[1])
    if hi <= lo:
        raise MatchingFailure("arcs do not overlap in angle")
    dev = 0.0
    for theta in np.linspace(lo + 0.03 * (hi - lo), hi - 0.03 * (hi - lo), grid):
        pa = resolve_on_arc(plat_a, arc_a, float(theta), config)
        pb = resolve_on_arc(plat_b, arc_b, float(theta), config)
        dev = max(dev, abs(sign * omega_value(pb.data) - omega_value(pa.data)))
    return dev


def stabilization_image_seed(
    plat: PlatPresentation, point: IntersectionPoint
) -> tuple[np.ndarray, np.ndarray]:
    """Transport a solution to the stabilized plat through the explicit
    width-raising chart map (append the last axis and its negative)."""
    x = kappa_bar(plat, 1, point.p1)
    axes = np.vstack([x.axes, x.axes[-1], -x.axes[-1]])
    stab = plat.stabilize()
    p1, p2 = points_from_sphere(stab, SphereTuple(x.theta, axes))
    return p1.axes, p2.axes


@dataclass
class MoveReport:
    move: str
    expected_sign: int
    max_deviation: float
    arcs_matched: int
    passed: bool
    note: str = ""


@dataclass
class InvarianceReport:
    plat_text: str
    moves: list[MoveReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.moves)


_DEFAULT_MOVES = (
    "stabilize",
    "halfbraid",
    "mirror",
    "reverse_orientation",
    "alternate_splitting",
    "ambient_flip",
)


def _apply_move(plat: PlatPresentation, move: str):
    """Moved presentation and the expected factor on the density."""
    if move == "stabilize":
        return plat.stabilize(), 1
    if move == "mirror":
        return plat.mirror(), -1
    if move == "reverse_orientation":
        return plat.reverse_orientation(), 1
    if move == "alternate_splitting":
        return plat.with_alternate_splitting(not plat.alternate_splitting), 1
    if move == "ambient_flip":
        return plat.with_ambient_sign(-plat.ambient_sign), -1
    if move.startswith("halfbraid:"):
        _, name, side = move.split(":")
        for gen_name, xi in half_braid_generators(plat.braid.strands):
            if gen_name == name:
                return plat.multiply(xi, side), 1
        raise ValueError(f"unknown half-braid generator {name}")
    raise ValueError(f"unknown move {move}")


def expand_moves(plat: PlatPresentation, moves) -> list[str]:
    out = []
    for move in moves:
        if move == "halfbraid":
            for name, _ in half_braid_generators(plat.braid.strands):
                out.append(f"halfbraid:{name}:left")
                out.append(f"halfbraid:{name}:right")
        else:
            out.append(move)
    return out


def invariance_suite(
    plat: PlatPresentation,
    moves=_DEFAULT_MOVES,
    config: SolverConfig = SolverConfig(),
    tolerance: float = 1e-8,
) -> InvarianceReport:
    """Re-derive the curve after each move and compare densities pointwise.

    Arcs are matched by endpoint angles; the stabilization move is also
    checked through the explicit chart map on a sample of points.
    """
    report = InvarianceReport(plat.text())
    base_arcs = find_arcs(plat, config)
    for move in expand_moves(plat, moves):
        moved, sign = _apply_move(plat, move)
        try:
            moved_arcs = find_arcs(moved, config)
            pairs = match_arcs(base_arcs, moved_arcs)
            dev = 0.0
            for arc_a, arc_b in pairs:
                dev = max(
                    dev,
                    compare_arcs_pointwise(plat, arc_a, moved, arc_b, sign, config),
                )
            note = ""
            if move == "stabilize":
                dev2 = _stabilization_pointmap_deviation(plat, base_arcs, config)
                dev = max(dev, dev2)
                note = "includes explicit chart-map matching"
            report.moves.append(
                MoveReport(move, sign, dev, len(pairs), dev < tolerance, note)
            )
        except MatchingFailure as err:
            report.moves.append(MoveReport(move, sign, math.inf, 0, False, str(err)))
    return report


def _stabilization_pointmap_deviation(
    plat: PlatPresentation,
    base_arcs: list[RegularArc],
    config: SolverConfig,
    per_arc: int = 4,
) -> float:
    stab = plat.stabilize()
    system = get_system(stab)
    dev = 0.0
    for arc in base_arcs:
        lo, hi = arc.theta_range
        for theta in np.linspace(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), per_arc):
            pt = resolve_on_arc(plat, arc, float(theta), config)
            s1, s2 = stabilization_image_seed(plat, pt)
            moved = solve_at_trace(
                stab, pt.theta_m, s1, s2, config, system=system, require_regular=True
            )
            dev = max(dev, abs(omega_value(moved.data) - omega_value(pt.data)))
    return dev


# -- connected sums ----------------------------------------------------------


@dataclass
class CompositePointReport:
    theta_m: float
    factor: int  # 1 or 2: which factor carries the irreducible part
    omega_composite: float
    omega_factor: float
    deviation: float
    regular: bool


@dataclass
class ConnectedSumReport:
    plat_text: str
    points: list[CompositePointReport] = field(default_factory=list)
    mixed_point_h1: int | None = None
    mixed_point_regular: bool | None = None
    integral: float | None = None
    integral_expected: float | None = None
    excluded_angles_factor1: list[float] = field(default_factory=list)
    excluded_angles_factor2: list[float] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((p.deviation for p in self.points), default=math.inf)


def _composite_seeds_from_factor(
    factor_point: IntersectionPoint, other_n: int, factor: int
):
    """Seeds for the composite system: the irreducible factor's axes with
    the abelian factor's axes parallel to the bridge meridian.

    Axis signs are not transported across the closure-sign tables of the
    two presentations, so both global patterns of each block are offered;
    the corrector keeps whichever lands on the embedded point.
    """
    a1, a2 = factor_point.p1.axes, factor_point.p2.axes
    for block_sign in (+1.0, -1.0):
        b1, b2 = block_sign * a1, block_sign * a2
        for s in (+1.0, -1.0):
            if factor == 1:
                pad1 = np.tile(s * b1[-1], (other_n - 1, 1))
                pad2 = np.tile(s * b2[-1], (other_n - 1, 1))
                yield np.vstack([b1, pad1]), np.vstack([b2, pad2])
            else:
                pad1 = np.tile(s * b1[0], (other_n - 1, 1))
                pad2 = np.tile(s * b2[0], (other_n - 1, 1))
                yield np.vstack([pad1, b1]), np.vstack([pad2, b2])


def _factor_blocks(n1: int, n2: int, factor: int) -> list[int]:
    """Generator indices (0-based, per side) owned by the abelian factor,
    bridge included."""
    if factor == 1:  # factor 1 irreducible, factor 2 abelian
        return list(range(n1 - 1, n1 + n2 - 1))
    return list(range(0, n1))


def connected_sum_check(
    plat1: PlatPresentation,
    plat2: PlatPresentation,
    config: SolverConfig = SolverConfig(),
    thetas: tuple[float, ...] = (1.2, math.pi / 2, 1.8),
) -> ConnectedSumReport:
    """Verify the pullback property of the density on a composite plat.

    For each factor and angle: solve the factor, embed it with the other
    factor abelian, converge on the composite, check the abelian block
    stayed parallel, and compare the densities.  Also exhibits one point
    with both factors irreducible and reports its regularity data, the
    composite integral, and the angles excluded from each factor's curve
    (roots of the other factor's Alexander polynomial).
    """
    from .braids import wirtinger_presentation

    composite = plat1.connected_sum(plat2)
    n1, n2 = plat1.n, plat2.n
    sys_c = get_system(composite)
    sys_1 = get_system(plat1)
    sys_2 = get_system(plat2)
    report = ConnectedSumReport(composite.text())
    delta1 = alexander_polynomial(wirtinger_presentation(plat1))
    delta2 = alexander_polynomial(wirtinger_presentation(plat2))
    mixed_sample = None
    embedded: list[IntersectionPoint] = []
    for theta in thetas:
        for factor, sys_f, plat_f in ((1, sys_1, plat1), (2, sys_2, plat2)):
            factor_pts = find_all_at_trace(plat_f, theta, config, system=sys_f)
            other_n = n2 if factor == 1 else n1
            for fpt in factor_pts:
                if not fpt.regular:
                    continue
                block = _factor_blocks(n1, n2, factor)
                for s1, s2 in _composite_seeds_from_factor(fpt, other_n, factor):
                    try:
                        cpt = solve_at_trace(
                            composite, theta, s1, s2, config, system=sys_c
                        )
                    except _SOLVE_FAILURES:
                        continue
                    if _block_spread(cpt, block) > 1e-6:
                        continue  # not the embedded point
                    om_c = omega_value(cpt.data) if cpt.regular else math.nan
                    om_f = omega_value(fpt.data)
                    report.points.append(
                        CompositePointReport(
                            theta,
                            factor,
                            om_c,
                            om_f,
                            abs(om_c - om_f),
                            cpt.regular,
                        )
                    )
                    embedded.append(cpt)
                    break
                # one mixed (both factors irreducible) sample is enough
                if mixed_sample is None and factor == 1:
                    mixed_sample = _mixed_point(
                        composite, sys_c, theta, fpt, factor_pts, n1, n2, config
                    )
    if mixed_sample is not None:
        report.mixed_point_h1 = mixed_sample.h1
        report.mixed_point_regular = mixed_sample.regular
    # angles cut out of each factor's curve: interior hits of the other
    # factor's root set (window data comes from the already-known factor
    # points' arcs, found once through the middle angle)
    win1 = _factor_windows(plat1, config)
    win2 = _factor_windows(plat2, config)
    report.excluded_angles_factor1 = [
        a for a in alexander_root_angles(delta2) if any(lo < a < hi for lo, hi in win1)
    ]
    report.excluded_angles_factor2 = [
        a for a in alexander_root_angles(delta1) if any(lo < a < hi for lo, hi in win2)
    ]
    # arcs of the composite, traced from the deterministically embedded
    # points (multi-start alone is unreliable for isolated embedded points
    # among the non-regular mixed families)
    arcs: list[RegularArc] = []
    for cpt in embedded:
        if not cpt.regular:
            continue
        if any(
            _arc_covers_invariants(composite, arc, cpt, config, sys_c)
            for arc in arcs
        ):
            continue
        arcs.append(trace_arc(composite, cpt, config, system=sys_c))
    total = 0.0
    for arc in arcs:
        total += integrate_arc(composite, arc, config).value
    report.integral = total
    return report


def _arc_covers_invariants(plat, arc, pt, config, system) -> bool:
    lo, hi = arc.theta_range
    if not lo - 1e-9 <= pt.theta_m <= hi + 1e-9:
        return False
    try:
        on_arc = resolve_on_arc(plat, arc, pt.theta_m, config, system=system)
    except _SOLVE_FAILURES:
        return False
    return bool(np.allclose(on_arc.invariants, pt.invariants, atol=1e-6))


def _factor_windows(plat, config):
    # open angle ranges of the factor's arcs (endpoint pairs); one scan
    # angle suffices for the report since every arc is traced from it
    arcs = find_arcs(plat, config, scan_angles=(math.pi / 2,))
    return [(a.lo.theta, a.hi.theta) for a in arcs]


def _block_spread(point: IntersectionPoint, block: list[int]) -> float:
    spread = 0.0
    for axes in (point.p1.axes, point.p2.axes):
        sub = axes[block]
        for i in range(len(sub)):
            for j in range(i + 1, len(sub)):
                spread = max(spread, float(np.linalg.norm(np.cross(sub[i], sub[j]))))
    return spread


def _mixed_point(
    composite, sys_c, theta, fpt1, factor_pts, n1, n2, config
) -> IntersectionPoint | None:
    """Stitch two irreducible factor solutions into a composite seed with a
    generic bend and converge; expected non-regular (h1 = 2)."""
    from .repspace import _axis_rotation  # deterministic bend about the bridge

    for fpt2 in factor_pts:
        if not fpt2.regular:
            continue
        a1, a2 = fpt1.p1.axes, fpt1.p2.axes
        b1, b2 = fpt2.p1.axes, fpt2.p2.axes
        # rotate the second factor so its first axis matches the bridge,
        # then bend by a fixed generic angle about the bridge axis
        rot1 = _align_rotation(b1[0], a1[-1])
        rot2 = _align_rotation(b2[0], a2[-1])
        bend1 = _axis_rotation(a1[-1], 1.0) @ rot1
        bend2 = _axis_rotation(a2[-1], 1.0) @ rot2
        s1 = np.vstack([a1, (b1 @ bend1.T)[1:]])
        s2 = np.vstack([a2, (b2 @ bend2.T)[1:]])
        try:
            cpt = solve_at_trace(composite, theta, s1, s2, config, system=sys_c)
        except _SOLVE_FAILURES:
            continue
        if _block_spread(cpt, list(range(n1 - 1, n1 + n2 - 1))) > 1e-3:
            return cpt
    return None


def _align_rotation(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    from .repspace import _rotation_to_e1

    return _rotation_to_e1(dst).T @ _rotation_to_e1(src)
