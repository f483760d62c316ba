"""Quaternion layer: group law, exp/log, adjoint, the reference forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from platvol import su2
from platvol.errors import CentralElement, LogAtMinusOne
from platvol.su2 import (
    ONE,
    QI,
    QJ,
    QK,
    Quaternion,
    ad_matrix,
    adjoint,
    dlog,
    eta_value,
    exp_su2,
    from_axis_angle,
    log_su2,
    nu_unit_frame,
    nu_value,
    sphere_frame,
    trace_axis,
)


def random_unit_quaternion(rng):
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return Quaternion(*v)


def random_sphere_point(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


class TestGroupLaw:
    def test_ij_is_k(self):
        assert QI * QJ == QK

    def test_inverse(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            q = random_unit_quaternion(rng)
            p = q * q.inverse()
            assert abs(p.a - 1) < 1e-12 and np.linalg.norm(p.vec()) < 1e-12

    def test_angle_addition(self):
        th = math.pi / 6
        q = from_axis_angle(th, np.array([1.0, 0, 0]))
        sq = q * q
        assert abs(sq.a - math.cos(2 * th)) < 1e-14
        assert abs(sq.b - math.sin(2 * th)) < 1e-14

    def test_power(self):
        rng = np.random.default_rng(7)
        q = random_unit_quaternion(rng)
        expected = q * q * q
        got = q**3
        assert abs((expected * got.inverse()).a - 1) < 1e-12


class TestExpLog:
    def test_exp_quarter_turn(self):
        q = exp_su2(np.array([math.pi / 2, 0, 0]))
        assert abs(q.a) < 1e-15 and abs(q.b - 1) < 1e-15

    def test_log_identity(self):
        assert np.allclose(log_su2(ONE), 0.0)

    def test_round_trip_random(self):
        rng = np.random.default_rng(3)
        count = 0
        while count < 100:
            q = random_unit_quaternion(rng)
            if q.trace() <= -1.9:
                continue
            count += 1
            r = exp_su2(log_su2(q))
            assert abs(r.a - q.a) < 1e-12
            assert np.linalg.norm(r.vec() - q.vec()) < 1e-12

    def test_log_raises_at_minus_one(self):
        with pytest.raises(LogAtMinusOne):
            log_su2(Quaternion(-1.0, 0, 0, 0))


class TestAdjoint:
    def test_ad_i_flips_j(self):
        assert np.allclose(adjoint(QI, np.array([0.0, 1, 0])), [0, -1, 0])

    def test_isometry(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            q = random_unit_quaternion(rng)
            v = rng.normal(size=3)
            assert abs(np.linalg.norm(adjoint(q, v)) - np.linalg.norm(v)) < 1e-12

    def test_rotation_by_double_angle(self):
        q = from_axis_angle(math.pi / 4, np.array([1.0, 0, 0]))
        assert np.allclose(adjoint(q, np.array([0.0, 1, 0])), [0, 0, 1], atol=1e-15)

    def test_homomorphism(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            q1 = random_unit_quaternion(rng)
            q2 = random_unit_quaternion(rng)
            assert np.allclose(
                ad_matrix(q1 * q2), ad_matrix(q1) @ ad_matrix(q2), atol=1e-12
            )

    def test_ad_matches_conjugation(self):
        rng = np.random.default_rng(13)
        q = random_unit_quaternion(rng)
        v = rng.normal(size=3)
        w = q * Quaternion(0.0, *v) * q.inverse()
        assert np.allclose(w.vec(), adjoint(q, v), atol=1e-12)


class TestTraceAxis:
    def test_pure_quaternion(self):
        th, p = trace_axis(QI)
        assert abs(th - math.pi / 2) < 1e-15
        assert np.allclose(p, [1, 0, 0])

    def test_by_construction(self):
        th, p = trace_axis(from_axis_angle(math.pi / 3, np.array([0.0, 0, 1])))
        assert abs(th - math.pi / 3) < 1e-15
        assert np.allclose(p, [0, 0, 1])

    def test_central_raises(self):
        with pytest.raises(CentralElement):
            trace_axis(ONE)


class TestEta:
    def test_defining_convention(self):
        e = np.eye(3)
        assert eta_value(e[0], e[1], e[2]) == 1.0

    def test_antisymmetry(self):
        e = np.eye(3)
        assert eta_value(e[1], e[0], e[2]) == -1.0

    def test_left_translation_invariance(self):
        # eta is the determinant of trivialized coefficients, so translating
        # the frame by Ad of any group element must not change values.
        rng = np.random.default_rng(17)
        for _ in range(50):
            q = random_unit_quaternion(rng)
            vs = [rng.normal(size=3) for _ in range(3)]
            ws = [adjoint(q, v) for v in vs]
            assert abs(eta_value(*vs) - eta_value(*ws)) < 1e-12 * max(
                1.0, abs(eta_value(*vs))
            )

    def test_total_group_volume(self):
        # In angle-axis coordinates the volume element is sin^2(theta)
        # d(theta) d(area); eta must integrate to 2 pi^2 over the group.
        thetas, wt = np.polynomial.legendre.leggauss(60)
        thetas = 0.5 * math.pi * (thetas + 1.0)
        wt = wt * 0.5 * math.pi
        val = float(np.sum(np.sin(thetas) ** 2 * wt)) * 4.0 * math.pi
        assert abs(val - 2 * math.pi**2) < 1e-10


class TestNu:
    def test_antisymmetry(self):
        rng = np.random.default_rng(19)
        for _ in range(50):
            p = random_sphere_point(rng)
            a, b = rng.normal(size=3), rng.normal(size=3)
            assert abs(nu_value(p, a, b) + nu_value(p, b, a)) < 1e-14

    def test_rotation_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            p = random_sphere_point(rng)
            a, b = rng.normal(size=3), rng.normal(size=3)
            q = random_unit_quaternion(rng)
            lhs = nu_value(adjoint(q, p), adjoint(q, a), adjoint(q, b))
            assert abs(lhs - nu_value(p, a, b)) < 1e-12

    def test_total_sphere_mass(self):
        # Quadrature of |integral of nu| over the sphere: the polar pullback
        # of nu is constant in the azimuth and smooth in the colatitude.
        nodes, wts = np.polynomial.legendre.leggauss(50)
        colat = 0.5 * math.pi * (nodes + 1.0)
        wts = wts * 0.5 * math.pi
        n_az = 64
        total = 0.0
        for t, w in zip(colat, wts):
            for k in range(n_az):
                ph = 2 * math.pi * k / n_az
                p = np.array(
                    [math.sin(t) * math.cos(ph), math.sin(t) * math.sin(ph), math.cos(t)]
                )
                dt_vec = np.array(
                    [math.cos(t) * math.cos(ph), math.cos(t) * math.sin(ph), -math.sin(t)]
                )
                dp_vec = np.array(
                    [-math.sin(t) * math.sin(ph), math.sin(t) * math.cos(ph), 0.0]
                )
                total += nu_value(p, dt_vec, dp_vec) * w * (2 * math.pi / n_az)
        assert abs(abs(total) - 2 * math.pi) < 1e-10

    def test_compatibility_with_trace_fibration(self):
        # Finite-difference check of the defining property: for sphere
        # tangents a, b and a group tangent s with d(Tr)(s) = 1, the value
        # eta(i(a), i(b), s) equals nu(a, b).
        rng = np.random.default_rng(29)
        eps = 1e-6
        for _ in range(20):
            p = random_sphere_point(rng)
            g1, g2 = sphere_frame(p)
            a = rng.normal() * g1 + rng.normal() * g2
            b = rng.normal() * g1 + rng.normal() * g2

            def embed_velocity(v):
                # curve of pure unit quaternions through p with velocity v,
                # trivialized at p by finite differences
                pp = p + eps * v
                pp /= np.linalg.norm(pp)
                q1 = Quaternion(0.0, *pp)
                q0 = Quaternion(0.0, *p)
                return log_su2(q1 * q0.inverse()) / eps

            ia, ib = embed_velocity(a), embed_velocity(b)
            # group tangent with unit trace derivative at the point p:
            # Tr(exp(eps u) p) has derivative -2<u, p>
            s_vec = -0.5 * p
            lhs = eta_value(ia, ib, s_vec)
            assert abs(lhs - nu_value(p, a, b)) < 1e-6 * max(1.0, abs(lhs))

    def test_unit_frame(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            p = random_sphere_point(rng)
            f1, f2 = nu_unit_frame(p)
            assert abs(nu_value(p, f1, f2) - 1.0) < 1e-12


class TestDlog:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(37)
        eps = 1e-7
        for _ in range(50):
            r = rng.normal(size=3)
            r = r / np.linalg.norm(r) * rng.uniform(0.05, 2.9)  # stay below pi
            xi = rng.normal(size=3)
            c = exp_su2(r)
            c_eps = exp_su2(eps * xi) * c
            fd = (log_su2(c_eps) - log_su2(c)) / eps
            assert np.allclose(dlog(r, xi), fd, atol=1e-5, rtol=1e-5)

    def test_small_angle(self):
        rng = np.random.default_rng(41)
        r = rng.normal(size=3) * 1e-9
        xi = rng.normal(size=3)
        assert np.allclose(dlog(r, xi), xi, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_exp_log_round_trip_property(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=3)
    v = v / np.linalg.norm(v) * rng.uniform(1e-6, math.pi - 1e-3)
    w = log_su2(exp_su2(v))
    assert np.allclose(v, w, atol=1e-12)
