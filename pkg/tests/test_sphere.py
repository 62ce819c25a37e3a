import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regvar.errors import DegeneratePoint, DimensionMismatch
from regvar.sphere import (
    TWO_PI,
    ArcSet,
    CapSet,
    angle_of,
    angles_of,
    arc_contains,
    direction_of,
    polar,
    polar_many,
    unit_vector,
    wrap_angle,
)


def test_polar_axis_points():
    norm, d = polar(np.array([3.0, 0.0]))
    assert norm == 3.0
    assert angle_of(d) == 0.0

    norm, d = polar(np.array([0.0, -5.0]))
    assert norm == 5.0
    assert angle_of(d) == pytest.approx(3 * np.pi / 2, abs=1e-15)


def test_polar_hand_3d():
    # |(1, 1, sqrt(2))| = 2 by hand
    norm, d = polar(np.array([1.0, 1.0, np.sqrt(2.0)]))
    assert norm == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_allclose(d, [0.5, 0.5, np.sqrt(2.0) / 2], atol=1e-15)


def test_polar_zero_vector_raises():
    with pytest.raises(DegeneratePoint):
        polar(np.zeros(2))
    with pytest.raises(DegeneratePoint):
        polar_many(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_polar_recompose_many_dims():
    rng = np.random.default_rng(1)
    for d in (2, 3, 5):
        pts = rng.standard_normal((d, 1_000_000 if d == 2 else 10_000))
        norms, dirs = polar_many(pts)
        err = np.sqrt(np.sum((dirs * norms - pts) ** 2, axis=0))
        assert np.max(err / np.sqrt(np.sum(pts * pts, axis=0))) <= 1e-10


def test_angle_direction_roundtrip_grid():
    theta = np.linspace(0.0, TWO_PI, 10_000, endpoint=False)
    dirs = np.stack([np.cos(theta), np.sin(theta)])
    back = angles_of(dirs)
    assert np.max(np.abs(back - theta)) <= 1e-12


def test_angle_of_trivials():
    assert angle_of(np.array([0.0, 1.0])) == pytest.approx(np.pi / 2, abs=1e-15)
    assert angle_of(np.array([-1.0, 0.0])) == pytest.approx(np.pi, abs=1e-15)


def test_direction_of_hand():
    d = direction_of(7 * np.pi / 4)
    np.testing.assert_allclose(d, [np.sqrt(2) / 2, -np.sqrt(2) / 2], atol=1e-15)


def test_angle_of_wrong_dim():
    with pytest.raises(DimensionMismatch):
        angle_of(np.array([1.0, 0.0, 0.0]))


def test_unit_vector_validation():
    with pytest.raises(ValueError):
        unit_vector(np.array([1.0, 1.0]))
    v = unit_vector(np.array([0.6, 0.8]))
    assert v.shape == (2,)


def test_wrap_angle_edges():
    assert wrap_angle(TWO_PI) == 0.0
    assert wrap_angle(-1e-20) == 0.0
    assert 0.0 <= wrap_angle(-0.5) < TWO_PI


def test_arc_membership_basics():
    half = ArcSet([(0.0, np.pi)])
    assert arc_contains(half, np.pi / 2)
    assert not arc_contains(half, np.pi)  # half-open at b
    assert arc_contains(half, 0.0)  # closed at a

    wrap = ArcSet([(3 * np.pi / 2, TWO_PI), (0.0, np.pi / 4)])
    assert arc_contains(wrap, 0.1)
    assert arc_contains(wrap, 3 * np.pi / 2)
    assert not arc_contains(wrap, np.pi)


def test_arcset_validation():
    with pytest.raises(ValueError):
        ArcSet([(1.0, 0.5)])
    with pytest.raises(ValueError):
        ArcSet([(0.0, 1.0), (0.5, 2.0)])  # overlap
    s = ArcSet([(1.0, 2.0), (0.0, 1.0)])  # touching is fine, gets sorted
    assert s.arcs[0][0] == 0.0
    assert s.length == pytest.approx(2.0)


@given(st.lists(st.floats(min_value=0.0, max_value=TWO_PI - 1e-9,
                          allow_nan=False), min_size=4, max_size=8,
                unique=True),
       st.floats(min_value=0.0, max_value=TWO_PI - 1e-12))
def test_disjoint_arcs_partition(breaks, theta):
    bs = sorted(breaks)
    a = ArcSet([(bs[0], bs[1])])
    b = ArcSet([(bs[2], bs[3])])
    assert not (arc_contains(a, theta) and arc_contains(b, theta))


def test_capset_membership():
    north = np.array([0.0, 0.0, 1.0])
    caps = CapSet([(north, 0.5)])
    assert caps.contains(north)
    assert not caps.contains(np.array([1.0, 0.0, 0.0]))
    many = np.stack([north, np.array([0.0, 1.0, 0.0])], axis=1)
    np.testing.assert_array_equal(caps.contains(many), [True, False])


def test_capset_validation():
    with pytest.raises(ValueError):
        CapSet([(np.array([0.0, 0.0, 1.0]), 1.5)])
    with pytest.raises(DimensionMismatch):
        CapSet([(np.array([0.0, 0.0, 1.0]), 0.0)]).contains(np.array([1.0, 0.0]))
