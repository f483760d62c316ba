"""Representation charts, exact differentials, gauge slice, cohomology."""

import math

import numpy as np
import pytest

from platvol.braids import BraidWord, PlatPresentation, wirtinger_presentation
from platvol.errors import NotARepresentation, RankMismatch, Reducible
from platvol.repspace import (
    HandlebodyPoint,
    SphereTuple,
    chart_tangent_to_group,
    evaluate_word,
    gauge_fix,
    group_tangent_to_chart,
    irreducibility_measure,
    kappa_bar,
    kappa_bar_differential,
    orbit_rank,
    orbit_velocities,
    points_from_sphere,
    twisted_cohomology_dims,
    word_differential_matrix,
)
from platvol.su2 import QI, Quaternion, exp_su2, from_axis_angle, log_su2
from platvol.words import FreeWord, generator


def plat(text, **kw):
    return PlatPresentation.from_braid(BraidWord.parse(text), **kw)


def random_units(rng, count):
    v = rng.normal(size=(count, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return [Quaternion(*row) for row in v]


def random_axes(rng, count):
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_word(rng, rank, max_len=12):
    length = int(rng.integers(1, max_len + 1))
    letters = tuple(
        int(rng.integers(1, rank + 1)) * (1 if rng.random() < 0.5 else -1)
        for _ in range(length)
    )
    return FreeWord(rank, letters)


class TestEvaluate:
    def test_square_of_i(self):
        w = FreeWord(1, (1, 1))
        q = evaluate_word([QI], w)
        assert abs(q.a + 1) < 1e-15

    def test_empty_word(self):
        assert evaluate_word([QI], FreeWord(1)).a == 1.0

    def test_multiplicative(self):
        rng = np.random.default_rng(0)
        vals = random_units(rng, 3)
        for _ in range(200):
            u, v = random_word(rng, 3, 6), random_word(rng, 3, 6)
            lhs = evaluate_word(vals, u * v)
            rhs = evaluate_word(vals, u) * evaluate_word(vals, v)
            assert abs((lhs * rhs.inverse()).a - 1) < 1e-12

    def test_rank_guard(self):
        with pytest.raises(RankMismatch):
            evaluate_word([QI], FreeWord(2, (2,)))


class TestWordDifferential:
    def test_identity_word(self):
        rng = np.random.default_rng(1)
        vals = random_units(rng, 2)
        m = word_differential_matrix(vals, FreeWord(2, (1,)))
        assert np.allclose(m[:, :3], np.eye(3))
        assert np.allclose(m[:, 3:], 0)

    def test_inverse_generator(self):
        rng = np.random.default_rng(2)
        vals = random_units(rng, 1)
        m = word_differential_matrix(vals, FreeWord(1, (-1,)))
        from platvol.su2 import ad_matrix

        assert np.allclose(m, -ad_matrix(vals[0].inverse()))

    def test_against_finite_differences(self):
        rng = np.random.default_rng(3)
        eps = 1e-6
        for _ in range(60):
            vals = random_units(rng, 3)
            w = random_word(rng, 3)
            mat = word_differential_matrix(vals, w)
            u = rng.normal(size=9)
            pert = [exp_su2(eps * u[3 * k : 3 * k + 3]) * vals[k] for k in range(3)]
            base = evaluate_word(vals, w)
            moved = evaluate_word(pert, w)
            fd = log_su2(moved * base.inverse()) / eps
            assert np.allclose(mat @ u, fd, atol=2e-5, rtol=2e-5)


class TestChartTangents:
    def test_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            theta = rng.uniform(0.2, math.pi - 0.2)
            p = random_axes(rng, 1)[0]
            dth = rng.normal()
            v = np.cross(rng.normal(size=3), p)
            u = chart_tangent_to_group(theta, p, dth, v)
            dth2, v2 = group_tangent_to_chart(theta, p, u)
            assert abs(dth - dth2) < 1e-12
            assert np.allclose(v, v2, atol=1e-12)

    def test_against_finite_differences(self):
        rng = np.random.default_rng(5)
        eps = 1e-7
        for _ in range(50):
            theta = rng.uniform(0.2, math.pi - 0.2)
            p = random_axes(rng, 1)[0]
            dth = rng.normal()
            v = np.cross(rng.normal(size=3), p)
            q0 = from_axis_angle(theta, p)
            pp = p + eps * v
            pp /= np.linalg.norm(pp)
            q1 = from_axis_angle(theta + eps * dth, pp)
            fd = log_su2(q1 * q0.inverse()) / eps
            assert np.allclose(
                chart_tangent_to_group(theta, p, dth, v), fd, atol=1e-5, rtol=1e-5
            )


TREFOIL = "B4: 2 2 2"


class TestKappaBar:
    def test_pattern_side_axes(self):
        p = plat(TREFOIL)
        pt = HandlebodyPoint(math.pi / 2, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        x = kappa_bar(p, 1, pt)
        for k in range(2):
            assert np.allclose(x.axes[2 * k], p.eps1[k] * pt.axes[k])
            assert np.allclose(x.axes[2 * k + 1], -p.eps1[k] * pt.axes[k])

    def test_product_constraint_automatic(self):
        rng = np.random.default_rng(6)
        for text in (TREFOIL, "B4: 2 2 2 2 2"):
            pl = plat(text)
            for _ in range(50):
                theta = rng.uniform(0.3, math.pi - 0.3)
                pt = HandlebodyPoint(theta, random_axes(rng, pl.n))
                for side in (1, 2):
                    assert kappa_bar(pl, side, pt).product_defect() < 1e-10

    def test_differential_against_fd(self):
        rng = np.random.default_rng(7)
        pl = plat(TREFOIL)
        eps = 1e-6
        for side in (1, 2):
            for _ in range(10):
                theta = rng.uniform(0.4, math.pi - 0.4)
                axes = random_axes(rng, 2)
                pt = HandlebodyPoint(theta, axes)
                dk = kappa_bar_differential(pl, side, pt)
                dth = rng.normal()
                v = np.array([np.cross(rng.normal(size=3), a) for a in axes])
                _, w = dk(dth, v)
                moved = HandlebodyPoint(
                    theta + eps * dth,
                    np.array(
                        [
                            (a + eps * vv) / np.linalg.norm(a + eps * vv)
                            for a, vv in zip(axes, v)
                        ]
                    ),
                )
                x0 = kappa_bar(pl, side, pt)
                x1 = kappa_bar(pl, side, moved)
                fd = (x1.axes - x0.axes) / eps
                assert np.allclose(w, fd, atol=5e-5, rtol=5e-5)

    def test_points_from_sphere_round_trip(self):
        rng = np.random.default_rng(8)
        for text in (TREFOIL, "B4: 2 2 2 2 2"):
            for alt in (False, True):
                pl = plat(text).with_alternate_splitting(alt)
                theta = rng.uniform(0.4, math.pi - 0.4)
                pt = HandlebodyPoint(theta, random_axes(rng, pl.n))
                side = 2 if alt else 1
                x = kappa_bar(pl, side, pt)
                p1, p2 = points_from_sphere(pl, x)
                got = p1 if side == 1 else p2
                assert np.allclose(got.axes, pt.axes, atol=1e-10)


class TestOrbit:
    def test_reducible_rank(self):
        axes = np.array([[1.0, 0, 0], [1.0, 0, 0]])
        assert orbit_rank(axes) == 2

    def test_generic_rank(self):
        rng = np.random.default_rng(9)
        assert orbit_rank(random_axes(rng, 2)) == 3

    def test_orbit_annihilates_invariant_functions(self):
        # conjugation-invariant observables (traces of word images) must be
        # constant along orbit directions, checked by finite differences
        rng = np.random.default_rng(10)
        theta = 1.1
        axes = random_axes(rng, 3)
        eps = 1e-6
        w = random_word(rng, 3, 6)
        for vel in orbit_velocities(axes):
            moved = axes + eps * vel
            moved /= np.linalg.norm(moved, axis=1, keepdims=True)
            t0 = evaluate_word(
                [from_axis_angle(theta, a) for a in axes], w
            ).trace()
            t1 = evaluate_word(
                [from_axis_angle(theta, a) for a in moved], w
            ).trace()
            assert abs(t1 - t0) / eps < 1e-4


class TestGaugeFix:
    def test_idempotent_on_slice(self):
        pt1 = HandlebodyPoint(1.0, np.array([[1.0, 0, 0], [0, 1.0, 0]]))
        pt2 = HandlebodyPoint(1.0, np.array([[0, 0, 1.0], [0, 1.0, 0]]))
        q1, q2, rot = gauge_fix(pt1, pt2)
        assert np.allclose(rot, np.eye(3))
        assert np.allclose(q1.axes, pt1.axes)

    def test_recovers_slice_from_random_conjugate(self):
        rng = np.random.default_rng(11)
        from platvol.su2 import ad_matrix

        pt1 = HandlebodyPoint(1.0, np.array([[1.0, 0, 0], [0.6, 0.8, 0]]))
        pt2 = HandlebodyPoint(1.0, np.array([[0.6, 0, 0.8], [0, 1.0, 0]]))
        for _ in range(30):
            g = rng.normal(size=4)
            g /= np.linalg.norm(g)
            rot = ad_matrix(Quaternion(*g))
            r1 = HandlebodyPoint(1.0, pt1.axes @ rot.T)
            r2 = HandlebodyPoint(1.0, pt2.axes @ rot.T)
            q1, q2, _ = gauge_fix(r1, r2)
            assert np.allclose(q1.axes, pt1.axes, atol=1e-10)
            assert np.allclose(q2.axes, pt2.axes, atol=1e-10)

    def test_reducible_raises(self):
        pt1 = HandlebodyPoint(1.0, np.array([[1.0, 0, 0], [-1.0, 0, 0]]))
        pt2 = HandlebodyPoint(1.0, np.array([[1.0, 0, 0], [1.0, 0, 0]]))
        with pytest.raises(Reducible):
            gauge_fix(pt1, pt2)


class TestTwistedCohomology:
    def test_trivial_representation_h0(self):
        pres = wirtinger_presentation(plat("B2:"))
        one = Quaternion(1.0, 0, 0, 0)
        h0, h1 = twisted_cohomology_dims(pres, [one, one])
        assert h0 == 3

    def test_unknot_abelian(self):
        pres = wirtinger_presentation(plat("B2:"))
        p = plat("B2:")
        th = 1.0
        q = from_axis_angle(th, np.array([1.0, 0, 0]))
        vals = [q if e > 0 else q.inverse() for e in (p.eps1[0], p.eps2[0])]
        h0, h1 = twisted_cohomology_dims(pres, vals)
        assert (h0, h1) == (1, 1)

    def test_violated_relator_raises(self):
        pres = wirtinger_presentation(plat(TREFOIL))
        rng = np.random.default_rng(12)
        vals = random_units(rng, 4)
        with pytest.raises(NotARepresentation):
            twisted_cohomology_dims(pres, vals)


class TestIrreducibilityMeasure:
    def test_parallel_axes(self):
        axes = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
        assert irreducibility_measure(axes) < 1e-15

    def test_orthogonal_axes(self):
        axes = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        assert abs(irreducibility_measure(axes) - 1.0) < 1e-15
