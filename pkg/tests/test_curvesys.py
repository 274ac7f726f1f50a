import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conelab.curvesys import (
    GEN_S,
    GEN_T,
    MappingClass,
    Slope,
    SurfaceKind,
    apply_mapping_class,
    enumerate_slopes,
    intersection_number,
    mapping_class_ball,
    slope_canonicalize,
)


def test_surface_kind_complexity():
    assert SurfaceKind(1, 1).complexity == 1
    assert SurfaceKind(2, 0).complexity == 3
    with pytest.raises(ValueError):
        SurfaceKind(0, 3)
    with pytest.raises(ValueError):
        SurfaceKind(-1, 5)


def test_slope_canonicalize_examples():
    assert slope_canonicalize(2, 4) == Slope(1, 2)
    assert slope_canonicalize(-1, -2) == Slope(1, 2)
    assert slope_canonicalize(3, 0) == Slope(1, 0)
    with pytest.raises(ValueError):
        slope_canonicalize(0, 0)


def test_slope_constructor_rejects_noncanonical():
    with pytest.raises(ValueError):
        Slope(2, 4)
    with pytest.raises(ValueError):
        Slope(1, -1)
    with pytest.raises(ValueError):
        Slope(-1, 0)


@given(st.integers(-50, 50), st.integers(-50, 50))
def test_canonicalize_idempotent_and_projective(p, q):
    if (p, q) == (0, 0):
        return
    s = slope_canonicalize(p, q)
    assert slope_canonicalize(s.p, s.q) == s
    assert slope_canonicalize(-p, -q) == s
    assert math.gcd(abs(s.p), s.q) == 1


def test_intersection_examples():
    assert intersection_number(Slope(0, 1), Slope(1, 0)) == 1
    assert intersection_number(Slope(1, 2), Slope(1, 2)) == 0
    assert intersection_number(Slope(1, 2), Slope(2, 3)) == 1


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_intersection_symmetric_and_zero_iff_equal(p1, q1, p2, q2):
    if (p1, q1) == (0, 0) or (p2, q2) == (0, 0):
        return
    a = slope_canonicalize(p1, q1)
    b = slope_canonicalize(p2, q2)
    assert intersection_number(a, b) == intersection_number(b, a)
    assert (intersection_number(a, b) == 0) == (a == b)


def test_enumerate_slopes_small():
    q1 = enumerate_slopes(1)
    assert set(q1) == {Slope(0, 1), Slope(1, 0), Slope(1, 1), Slope(-1, 1)}
    assert len(q1) == 4
    q2 = enumerate_slopes(2)
    assert set(q2) == set(q1) | {Slope(1, 2), Slope(-1, 2), Slope(2, 1), Slope(-2, 1)}
    assert len(q2) == 8
    with pytest.raises(ValueError):
        enumerate_slopes(0)


@pytest.mark.parametrize("height", [1, 3, 7, 12])
def test_enumerate_slopes_brute_force_and_prefix(height):
    got = enumerate_slopes(height)
    brute = {(1, 0)}
    for q in range(1, height + 1):
        for p in range(-height, height + 1):
            if math.gcd(abs(p), q) == 1:
                brute.add((p, q))
    assert {(s.p, s.q) for s in got} == brute
    assert len(got) == len(brute)
    # prefix compatibility and canonical idempotence
    assert enumerate_slopes(height + 1)[: len(got)] == got
    for s in got:
        assert slope_canonicalize(s.p, s.q) == s


def test_mapping_class_basics():
    with pytest.raises(ValueError):
        MappingClass(1, 0, 0, 2)
    ident = MappingClass.identity()
    assert ident * GEN_S == GEN_S
    assert (GEN_S * GEN_S.inverse()).is_identity()
    # projective: -M is M
    assert MappingClass(0, -1, 1, 0) == MappingClass(0, 1, -1, 0)


def test_apply_examples():
    s = Slope(1, 0)
    assert apply_mapping_class(MappingClass.identity(), s) == s
    assert apply_mapping_class(MappingClass(1, 0, 1, 1), Slope(1, 0)) == Slope(1, 1)


def test_ball_examples():
    assert mapping_class_ball(0) == [MappingClass.identity()]
    b1 = mapping_class_ball(1)
    assert len(b1) == 4
    assert set(b1) == {MappingClass.identity(), GEN_S, GEN_T, GEN_T.inverse()}
    sizes = [len(mapping_class_ball(r)) for r in range(6)]
    assert sizes == sorted(sizes)
    with pytest.raises(ValueError):
        mapping_class_ball(-1)


def test_ball_projective_dedup_and_inverse_closed():
    for r in range(4):
        ball = mapping_class_ball(r)
        assert len(set(ball)) == len(ball)
        for m in ball:
            assert m.inverse() in ball


def test_action_bijection_and_intersection_invariance(rng):
    slopes = enumerate_slopes(12)
    for m in mapping_class_ball(3):
        images = [apply_mapping_class(m, s) for s in slopes]
        assert len(set(images)) == len(slopes)
        for _ in range(30):
            a = slopes[rng.randrange(len(slopes))]
            b = slopes[rng.randrange(len(slopes))]
            assert intersection_number(
                apply_mapping_class(m, a), apply_mapping_class(m, b)
            ) == intersection_number(a, b)


def test_action_inverse_roundtrip(rng):
    slopes = enumerate_slopes(15)
    for m in mapping_class_ball(3):
        minv = m.inverse()
        for _ in range(20):
            s = slopes[rng.randrange(len(slopes))]
            assert apply_mapping_class(minv, apply_mapping_class(m, s)) == s
