import math

import mpmath
import numpy as np
import pytest

from lyness import (DomainError, GeometryError, ParameterCycle, RangeError,
                    adherence_intervals, classify_persistence, detect_period,
                    global_periodicity_test, iterate, persistence_probe, rotation_number)
from lyness.dynamics import composed_orbit

from conftest import log_uniform, random_cycle


def test_iterate_f1_and_csv():
    rec = iterate(ParameterCycle([1.0]), (1, 1), 7)
    assert rec.values.tolist() == [1, 1, 2, 3, 2, 1, 1]
    assert rec.to_csv().splitlines()[:3] == ["n,x,y", "1,1,1", "2,1,2"]
    assert (rec.min, rec.max) == (1, 3)


def test_modes_agree(rng):
    c = random_cycle(rng, 4)
    p = tuple(log_uniform(rng, 0.5, 2, 2))
    std = iterate(c, p, 200).values
    lg = iterate(c, (math.log(p[0]), math.log(p[1])), 200, mode="log")
    ext = iterate(c, p, 200, mode="extended")
    assert np.allclose(lg.x, std, rtol=1e-9)
    assert np.allclose(ext.values, std, rtol=1e-9)
    # oracle: mpmath at 200 bits, independently coded
    mpmath.mp.prec = 200
    x, y = mpmath.mpf(p[0]), mpmath.mpf(p[1])
    for i in range(198):
        x, y = y, (mpmath.mpf(c.values[i % 4]) + y) / x
    assert float(y) == pytest.approx(ext.values[-1], rel=1e-25 * 1e10)
    assert ext.exact_values is not None


def test_long_log_orbit_without_overflow():
    rec = iterate(ParameterCycle([2, 4, 7, 0.001]), (14.8, 8.25), 1_000_000, mode="log")
    assert np.isfinite(rec.values).all() and rec.count == 1_000_000


def test_range_error_keeps_partial_record():
    with pytest.raises(RangeError) as info:
        iterate(ParameterCycle([0.5]), (1e-300, 1e-300), 10)
    assert info.value.step is not None
    assert info.value.partial is not None


def test_bad_arguments():
    with pytest.raises(DomainError):
        iterate(ParameterCycle([1.0]), (1, 1), 1)
    with pytest.raises(DomainError):
        iterate(ParameterCycle([1.0]), (1, 1), 10, mode="quad")


def test_composed_orbit_steps_k_terms():
    c = ParameterCycle([1, 2, 3])
    pts = list(composed_orbit(c, (1.0, 1.0), 3))
    xs = iterate(c, (1.0, 1.0), 11).values
    assert pts[1] == pytest.approx((xs[3], xs[4]))
    assert pts[2] == pytest.approx((xs[6], xs[7]))


def test_detect_period(rng):
    for p in log_uniform(rng, 0.2, 5, (5, 2)):
        assert detect_period(ParameterCycle([1.0]), tuple(p), 10) == 5
        assert detect_period(ParameterCycle([0.25, 0.5, 2, 4]), tuple(p), 10) == 5
    assert detect_period(ParameterCycle([2.0]), (1, 1), 100) is None


def test_global_periodicity():
    assert global_periodicity_test(ParameterCycle([1.0]), 20) == 5
    assert global_periodicity_test(ParameterCycle([0.25, 0.5, 2, 4]), 20) == 5
    assert global_periodicity_test(ParameterCycle([2.0]), 100) is None


def test_adherence_intervals_basic():
    one = adherence_intervals(np.full(20000, 3.0))
    assert one.count == 1 and one.intervals[0] == (3.0, 3.0)
    xs = iterate(ParameterCycle([1.0]), (1, 1), 20000).values
    rep = adherence_intervals(xs)
    assert rep.intervals == [(1, 1), (2, 2), (3, 3)]
    rng = np.random.default_rng(0)
    two = np.concatenate([rng.uniform(0, 1, 20000), rng.uniform(5, 6, 20000)])
    rng.shuffle(two)
    assert adherence_intervals(two).count == 2
    with pytest.raises(DomainError):
        adherence_intervals(np.ones(100))


def test_interval_count_is_affine_invariant():
    xs = iterate(ParameterCycle([2, 4, 7, 0.001]), (13.35, 7.27), 200_000, mode="log").values
    assert adherence_intervals(2 * xs + 1).count == adherence_intervals(xs).count
    assert adherence_intervals(-xs).count == adherence_intervals(xs).count


def test_persistence_probe():
    esc = persistence_probe(ParameterCycle([2, 6, 3, 0.5, 1 / 6]), (1, 1))
    assert esc.kind == "escape" and esc.step <= 300
    assert esc.x_min < 1e-8 and esc.x_max > 1e8
    b = persistence_probe(ParameterCycle([1.0]), (1, 1))
    assert b.kind == "bounded" and (b.x_min, b.x_max) == (1, 3)
    with pytest.raises(DomainError):
        persistence_probe(ParameterCycle([1.0]), (1, 1), n=10)


def test_persistence_classification():
    cls = classify_persistence(ParameterCycle([2, 6, 3, 0.5, 1 / 6]))
    assert cls.verdict == "nonpersistent_by_theorem"
    assert classify_persistence(ParameterCycle([3.0] * 5)).verdict == "hypothesis_fails"
    assert classify_persistence(ParameterCycle([1, 1, 1, 1, 2])).verdict == "hypothesis_fails"
    near = classify_persistence(ParameterCycle([2, 1, 0.5, 1, 1]))
    assert near.verdict == "hypothesis_fails" and near.warning
    with pytest.raises(DomainError):
        classify_persistence(ParameterCycle([1, 2, 3]))


def test_all_phi_one_cycle_is_not_claimed_nonpersistent():
    c = ParameterCycle([2, 1, 1, 1, 1, 0.5, 1, 1, 1, 1])
    assert c.phi_products().phi == (1, 1, 1, 1, 1)
    cls = classify_persistence(c)
    assert cls.verdict == "hypothesis_fails"
    # the probe is an observation, not a theorem: the line y = 1 is invariant and
    # the composed map acts on it as x -> (2/3)(4/3) x = 8x/9, so this orbit
    # does drift to the boundary even though every phi equals 1
    from lyness import compose
    for x in (1.0, 0.3, 2.5):
        assert compose(c, (x, 1.0)) == pytest.approx((8 * x / 9, 1.0), rel=1e-13)


def test_rotation_number():
    assert rotation_number(ParameterCycle([1.0]), (1, 1)) == pytest.approx(0.8, abs=1e-6)
    with pytest.raises(GeometryError):
        rotation_number(ParameterCycle([1.0]), ((1 + 5 ** 0.5) / 2,) * 2)


def test_rotation_number_near_fixed_point_matches_linearisation():
    # oracle: small orbits rotate by the argument of the fixed-point multiplier
    a = 2.0
    ell = (1 + math.sqrt(1 + 4 * a)) / 2
    theta = math.acos(1 / (2 * ell))
    rho = rotation_number(ParameterCycle([a]), (ell + 1e-4, ell), n=2000)
    assert min(rho, 1 - rho) == pytest.approx(theta / (2 * math.pi), abs=1e-4)
