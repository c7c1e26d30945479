import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyness import (Jacobian2, ParameterCycle, PlanarPoint, PoleError, RangeError, compose,
                    compose_inverse, jacobian, log_compose, step, step_inverse)
from lyness.maps import compose_many, from_log, to_log

from conftest import log_uniform, random_cycle

pos = st.floats(min_value=1e-3, max_value=1e3)


def naive(c, p):
    x, y = p
    for a in c:
        x, y = y, (a + y) / x
    return x, y


def fd_jacobian(f, p, h=1e-6):
    x, y = p
    J = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((h * x, 0), (0, h * y))):
        fp = np.array(f((x + dx, y + dy)))
        fm = np.array(f((x - dx, y - dy)))
        J[:, j] = (fp - fm) / (2 * (dx + dy))
    return J


def test_single_step_and_orbit_of_f1():
    assert step(1.0, (1, 1)) == (1, 2)
    p = (1.0, 1.0)
    seen = [p]
    for _ in range(5):
        p = compose((1.0,), p)
        seen.append(p)
    assert seen == [(1, 1), (1, 2), (2, 3), (3, 2), (2, 1), (1, 1)]


def test_pole_and_range_errors():
    with pytest.raises(PoleError):
        step(1.0, (0.0, 1.0))
    with pytest.raises(PoleError):
        step_inverse(1.0, (1.0, 0.0))
    with pytest.raises(RangeError):
        compose([0.5] * 4, (1e-300, 1e-300))


@given(st.lists(pos, min_size=1, max_size=12), pos, pos)
def test_compose_matches_naive_and_inverse(vals, x, y):
    c = ParameterCycle(vals)
    got = compose(c, (x, y))
    want = naive(vals, (x, y))
    assert np.allclose(got, want, rtol=1e-11, atol=0)
    back = compose_inverse(c, got)
    assert np.allclose(back, (x, y), rtol=1e-8)


@given(st.lists(pos, min_size=5, max_size=15), pos, pos)
@settings(max_examples=50)
def test_five_factor_blocks_agree_with_factor_by_factor(vals, x, y):
    # block evaluation is used internally for k >= 5; compare with the plain loop
    got = compose(vals, (x, y))
    assert np.allclose(got, naive(vals, (x, y)), rtol=1e-9)


@given(st.lists(pos, min_size=1, max_size=10), pos, pos)
@settings(max_examples=50)
def test_log_conjugacy(vals, x, y):
    z = to_log((x, y))
    lhs = log_compose(vals, z)
    rhs = to_log(compose(vals, (x, y)))
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)
    assert np.allclose(from_log(z), (x, y), rtol=1e-14)


def test_jacobian_against_finite_differences(rng):
    for k in (1, 2, 4, 5, 7, 10):
        c = random_cycle(rng, k, 0.5, 2.0)
        p = tuple(log_uniform(rng, 0.5, 2.0, 2))
        J = jacobian(c, p).as_array()
        fd = fd_jacobian(lambda q: compose(c, q), p)
        assert np.allclose(J, fd, rtol=1e-5, atol=1e-8)


def test_log_jacobian_has_unit_determinant(rng):
    for k in (1, 3, 4, 6, 9):
        c = random_cycle(rng, k)
        z = tuple(rng.uniform(-2, 2, 2))
        J = jacobian(c, z, space="log")
        assert abs(J.det - 1) < 1e-10
        fd = fd_jacobian(lambda q: log_compose(c, (math.log(q[0]), math.log(q[1]))),
                         (math.exp(z[0]), math.exp(z[1])))
        # chain rule: d(log-map)/dz = d(log-map)/dx * x
        fd = fd * np.array([[math.exp(z[0]), math.exp(z[1])]])
        assert np.allclose(J.as_array(), fd, rtol=1e-5, atol=1e-7)


def test_standard_jacobian_determinant_law(rng):
    # det DF(p) = (x/y) * (y'/x') relates to the log-space unit determinant
    c = random_cycle(rng, 4)
    p = (1.3, 0.7)
    q = compose(c, p)
    det = jacobian(c, p).det
    assert det == pytest.approx((q[0] * q[1]) / (p[0] * p[1]), rel=1e-10)


def test_extended_domain_at_origin():
    c = ParameterCycle([2, 6, 3, 0.5, 1 / 6])
    assert compose(c, (0.0, 0.0), extended=True) == (0.0, 0.0)
    J = jacobian(c, (0.0, 0.0), extended=True)
    assert (J.a, J.b, J.c, J.d) == pytest.approx((0.5, 0, 0, 1 / 6), abs=1e-15)
    with pytest.raises(PoleError):
        compose(c, (0.0, 0.0))
    # the extension is continuous: compare with a nearby interior point
    eps = 1e-7
    near = compose(c, (eps, eps))
    assert near == pytest.approx((eps / 2, eps / 6), rel=1e-5)


def test_compose_many_vectorised(rng):
    c = random_cycle(rng, 7)
    pts = log_uniform(rng, 0.2, 5, (20, 2))
    out, J = compose_many(c.values, pts)
    for p, q, Jq in zip(pts, out, J):
        assert np.allclose(q, compose(c, p), rtol=1e-12)
        assert np.allclose(Jq, jacobian(c, p).as_array(), rtol=1e-9)


def test_jacobian2_algebra():
    A = Jacobian2(0, 1, -1, 0)
    assert A.det == 1 and A.trace == 0
    ev = A.eigenvalues
    assert ev[0] == pytest.approx(1j) and ev[1] == pytest.approx(-1j)
    assert (A @ A).as_array().tolist() == [[-1, 0], [0, -1]]
    assert Jacobian2.from_array(A.as_array()) == A
    assert PlanarPoint(1, 2).domain == "Q+" and PlanarPoint(0, 2).domain == "extended"
