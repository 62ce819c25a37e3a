import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from regvar.errors import (
    DimensionMismatch,
    EmptyMeasure,
    InvalidGain,
    MomentDivergence,
    UnsupportedPair,
)
from regvar.measures import (
    RadialGain,
    RandomGainProcess,
    SpectralMeasure,
    constant_gain,
    constant_map,
    degenerate_gain_process,
    distance_ks,
    distance_tv,
    expected_gain_reweight,
    exponential_gain_process,
    identity_map,
    indicator_gain,
    moment_condition,
    normalize,
    power_cusp_gain,
    pushforward,
    quadrant_snap_map,
    quantile_transform_map,
    reweight,
    step_gain,
    step_map,
)
from regvar.sphere import TWO_PI, ArcSet

HALF_PI = np.pi / 2


def disc(angles, weights):
    return SpectralMeasure.discrete(angles, weights)


@st.composite
def discrete_measures(draw, max_atoms=12):
    m = draw(st.integers(min_value=1, max_value=max_atoms))
    angles = draw(st.lists(st.floats(min_value=0.0, max_value=TWO_PI - 1e-6),
                           min_size=m, max_size=m, unique=True))
    angles = np.sort(np.asarray(angles))
    if angles.size > 1 and (np.min(np.diff(angles)) < 1e-9
                            or angles[0] + TWO_PI - angles[-1] < 1e-9):
        angles = np.linspace(0.1, 6.0, m)
    weights = draw(st.lists(st.floats(min_value=1e-3, max_value=10.0),
                            min_size=m, max_size=m))
    return disc(angles, weights)


# ----------------------------------------------------------------------
# normalize


def test_normalize_symmetric():
    m = normalize(disc([0.0, np.pi], [2.0, 2.0]))
    np.testing.assert_allclose(m.weights, [0.5, 0.5])
    assert m.total_mass == pytest.approx(1.0, abs=1e-15)


def test_normalize_idempotent():
    m = disc([1.0, 2.0], [0.25, 0.75])
    again = normalize(m)
    np.testing.assert_allclose(again.weights, m.weights)


def test_normalize_hand():
    m = normalize(disc([HALF_PI, 3 * HALF_PI], [1.0, 9.0]))
    np.testing.assert_allclose(m.weights, [0.1, 0.9])


def test_normalize_zero_mass():
    with pytest.raises(ValueError):
        disc([0.0], [0.0])
    with pytest.raises(EmptyMeasure):
        SpectralMeasure.density(lambda t: np.zeros_like(t)).normalized()


# ----------------------------------------------------------------------
# pushforward


def test_pushforward_identity():
    m = disc([0.5, 2.0, 4.0], [0.2, 0.3, 0.5])
    out = pushforward(m, identity_map())
    np.testing.assert_allclose(out.angles, m.angles)
    np.testing.assert_allclose(out.weights, m.weights)


def test_pushforward_constant_collapses():
    m = disc([0.5, 2.0, 4.0], [0.2, 0.3, 0.5])
    out = pushforward(m, constant_map(1.0))
    assert out.n_atoms == 1
    assert out.angles[0] == pytest.approx(1.0)
    assert out.total_mass == m.total_mass


def test_pushforward_uniform_quadrant_snap_quadrature_oracle():
    # oracle: numeric quadrature of the uniform density over each preimage
    quadrant_mass = [integrate.quad(lambda t: 1.0 / TWO_PI, k * HALF_PI,
                                    (k + 1) * HALF_PI)[0] for k in range(4)]
    out = pushforward(SpectralMeasure.uniform(), quadrant_snap_map())
    assert out.n_atoms == 4
    np.testing.assert_allclose(
        out.angles, [HALF_PI / 2, 3 * HALF_PI / 2, 5 * HALF_PI / 2, 7 * HALF_PI / 2])
    np.testing.assert_allclose(out.weights, quadrant_mass, atol=1e-12)


def test_pushforward_mass_conserved_exactly_for_atoms():
    m = disc(np.linspace(0.1, 6.0, 50), np.linspace(1, 2, 50))
    out = pushforward(m, quadrant_snap_map())
    assert out.total_mass == m.total_mass


def test_pushforward_density_binning_fallback():
    # smooth non-step map falls back to binning quadrature
    smooth = type(identity_map())(angle_fn=lambda t: (t + 1.0) % TWO_PI)
    out = pushforward(SpectralMeasure.uniform(), smooth)
    assert abs(out.total_mass - 1.0) <= 1e-6


def test_pushforward_composition_atom_for_atom():
    m = disc([0.3, 1.0, 2.0, 5.0], [1.0, 2.0, 3.0, 4.0])
    f = quadrant_snap_map()
    g = step_map([0.0, np.pi], [0.1, 4.0])
    via_two = pushforward(pushforward(m, f), g)
    composed = type(f)(angle_fn=lambda t: g.apply_angles(f.apply_angles(t)))
    via_one = pushforward(m, composed)
    np.testing.assert_array_equal(via_two.angles, via_one.angles)
    np.testing.assert_allclose(via_two.weights, via_one.weights, rtol=1e-15)


# ----------------------------------------------------------------------
# reweight


def test_reweight_unit_gain_unchanged():
    m = disc([0.0, np.pi], [0.5, 0.5])
    out = reweight(m, constant_gain(1.0), 2.0)
    np.testing.assert_allclose(out.weights, m.weights)


def test_reweight_constant_two():
    m = disc([0.0, np.pi], [0.5, 0.5])
    out = reweight(m, constant_gain(2.0), 1.0)
    assert out.total_mass == pytest.approx(2.0, abs=1e-15)
    np.testing.assert_allclose(out.weights / m.weights, [2.0, 2.0])


def test_reweight_hand_case_not_renormalized():
    m = disc([0.0, np.pi], [0.5, 0.5])
    h = step_gain([0.0, 1.0], [1.0, 3.0])  # h(0) = 1, h(pi) = 3
    out = reweight(m, h, 2.0)
    np.testing.assert_allclose(out.weights, [0.5, 4.5])
    norm = normalize(out)
    np.testing.assert_allclose(norm.weights, [0.1, 0.9])


def test_reweight_multiplicativity():
    m = disc([0.2, 1.1, 3.3, 5.5], [1.0, 2.0, 0.5, 0.25])
    h1 = step_gain([0.0, 2.0], [1.5, 0.5])
    h2 = step_gain([0.0, 4.0], [2.0, 3.0])
    both = RadialGain(angle_fn=lambda t: h1.at_angles(t) * h2.at_angles(t),
                      declared_bound=4.5)
    a = reweight(reweight(m, h1, 1.7), h2, 1.7)
    b = reweight(m, both, 1.7)
    np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)


def test_reweight_negative_gain_rejected():
    bad = RadialGain(angle_fn=lambda t: np.full_like(t, -1.0))
    with pytest.raises(InvalidGain):
        reweight(disc([0.0], [1.0]), bad, 1.0)


def test_reweight_density_matches_quadrature():
    out = reweight(SpectralMeasure.uniform(),
                   step_gain([0.0, np.pi], [2.0, 1.0]), 1.0)
    # mass = (2 * pi + 1 * pi) / (2 pi) = 1.5
    assert out.total_mass == pytest.approx(1.5, rel=1e-10)


# ----------------------------------------------------------------------
# randomized reweighting


def test_expected_gain_degenerate_process_matches_reweight():
    m = disc([0.5, 4.0], [0.4, 0.6])
    h = step_gain([0.0, 2.0], [2.0, 5.0])
    z = degenerate_gain_process(h)
    np.testing.assert_allclose(expected_gain_reweight(m, z, 2.0).weights,
                               reweight(m, h, 2.0).weights, rtol=1e-14)


def test_expected_gain_uniform_multiplier_one():
    # Z ~ uniform on [0, 2]: E[Z^p] = 2^p / (p + 1), so E[Z] = 1
    z = RandomGainProcess(lambda t, rng: rng.uniform(0.0, 2.0, t.shape),
                          lambda t, p: np.full_like(t, 2.0 ** p / (p + 1.0)))
    m = disc([1.0, 2.0], [0.3, 0.7])
    out = expected_gain_reweight(m, z, 1.0)
    np.testing.assert_allclose(out.weights, m.weights, rtol=1e-14)


def test_expected_gain_exponential_second_moment():
    # Z ~ exponential mean 1: E[Z^2] = 2
    z = exponential_gain_process(lambda t: np.ones_like(t))
    m = disc([1.0, 2.0], [0.3, 0.7])
    out = expected_gain_reweight(m, z, 2.0)
    np.testing.assert_allclose(out.weights, 2.0 * m.weights, rtol=1e-14)


def test_expected_gain_monte_carlo_moment_is_seeded():
    z = RandomGainProcess(lambda t, rng: rng.uniform(0.0, 2.0, t.shape),
                          moment_fn=None, mc_budget=50_000)
    theta = np.array([0.3, 4.0])
    a = z.moment(theta, 1.0, np.random.default_rng(5))
    b = z.moment(theta, 1.0, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a, [1.0, 1.0], atol=0.02)
    with pytest.raises(ValueError):
        z.moment(theta, 1.0)  # Monte Carlo moments need an explicit rng


# ----------------------------------------------------------------------
# cdf / quantile


def test_cdf_uniform_half():
    assert SpectralMeasure.uniform().cdf(np.pi) == pytest.approx(0.5, abs=1e-12)


def test_cdf_single_atom_steps():
    m = disc([HALF_PI], [1.0])
    assert m.cdf(np.pi / 4) == 0.0
    assert m.cdf(HALF_PI) == 1.0


def test_cdf_two_atoms():
    m = disc([HALF_PI, 3 * HALF_PI], [0.3, 0.7])
    assert m.cdf(np.pi) == pytest.approx(0.3)


def test_quantile_uniform():
    assert SpectralMeasure.uniform().quantile(0.25) == pytest.approx(HALF_PI,
                                                                     abs=1e-9)


def test_quantile_point_mass():
    m = disc([2.0], [1.0])
    for u in (0.0, 0.3, 0.999):
        assert m.quantile(u) == 2.0


def test_quantile_step_inversion():
    m = disc([HALF_PI, 3 * HALF_PI], [0.3, 0.7])
    assert m.quantile(0.2) == HALF_PI
    assert m.quantile(0.5) == 3 * HALF_PI


def test_quantile_requires_normalized():
    with pytest.raises(ValueError):
        disc([0.0], [2.0]).quantile(0.5)


@given(discrete_measures())
def test_cdf_quantile_galois(m):
    m = normalize(m)
    for u in np.linspace(0.0, 0.999, 101):
        q = m.quantile(u)
        assert m.cdf(q) >= u
    for theta in np.linspace(0.0, TWO_PI - 1e-9, 57):
        assert m.quantile(min(m.cdf(theta), 1.0 - 1e-12)) <= theta or \
            m.cdf(theta) == 0.0


# ----------------------------------------------------------------------
# quantile transform map


def test_qtm_uniform_is_identity():
    g = quantile_transform_map(SpectralMeasure.uniform())
    theta = np.linspace(0.0, TWO_PI, 100, endpoint=False)
    np.testing.assert_allclose(g.apply_angles(theta), theta, atol=1e-9)


def test_qtm_point_mass_constant():
    g = quantile_transform_map(disc([2.0], [1.0]))
    theta = np.linspace(0.0, TWO_PI, 17, endpoint=False)
    np.testing.assert_array_equal(g.apply_angles(theta), np.full(17, 2.0))


def test_qtm_step_thresholds():
    g = quantile_transform_map(disc([HALF_PI, 3 * HALF_PI], [0.3, 0.7]))
    assert g.apply_angles(np.array([0.5 * 0.6 * np.pi]))[0] == HALF_PI
    assert g.apply_angles(np.array([0.6 * np.pi]))[0] == 3 * HALF_PI
    assert g.apply_angles(np.array([5.0]))[0] == 3 * HALF_PI


@given(discrete_measures(max_atoms=100))
def test_qtm_pushforward_recovers_target(m):
    m = normalize(m)
    image = pushforward(SpectralMeasure.uniform(), quantile_transform_map(m))
    assert distance_ks(image, m) <= 1e-9


# ----------------------------------------------------------------------
# distances


def test_tv_identical_zero():
    m = disc([0.1, 2.0], [0.5, 0.5])
    assert distance_tv(m, m) == 0.0


def test_tv_disjoint_atoms():
    assert distance_tv(disc([0.0], [1.0]), disc([np.pi], [1.0])) == 1.0


def test_tv_hand_case():
    centers = [HALF_PI / 2, 3 * HALF_PI / 2, 5 * HALF_PI / 2, 7 * HALF_PI / 2]
    a = disc(centers, [0.25] * 4)
    b = disc(centers, [0.3, 0.2, 0.3, 0.2])
    assert distance_tv(a, b) == pytest.approx(0.1, abs=1e-15)


def test_tv_rejects_density():
    with pytest.raises(UnsupportedPair):
        distance_tv(SpectralMeasure.uniform(), disc([0.0], [1.0]))


def test_distances_symmetric_nonnegative():
    a = disc([0.5, 2.5], [0.4, 0.6])
    b = disc([0.5, 4.0], [0.7, 0.3])
    assert distance_tv(a, b) == distance_tv(b, a) >= 0.0
    assert distance_ks(a, b) == distance_ks(b, a) >= 0.0
    assert distance_ks(a, a) == 0.0


def test_ks_attains_sup_for_steps():
    a = disc([1.0], [1.0])
    b = disc([1.0 - 1e-7], [1.0])  # off-grid atom location still probed
    assert distance_ks(a, b) == pytest.approx(1.0)


def test_ks_needs_planar():
    coords = np.eye(3)[:, :2]
    m3 = SpectralMeasure.discrete_dirs(coords, [0.5, 0.5])
    with pytest.raises(DimensionMismatch):
        distance_ks(m3, m3)


# ----------------------------------------------------------------------
# boundary mass and arc mass


def test_boundary_mass_examples():
    half = ArcSet([(0.0, np.pi)])
    assert disc([0.0], [1.0]).boundary_mass(half) == 1.0
    assert disc([HALF_PI], [1.0]).boundary_mass(half) == 0.0
    assert disc([0.0, np.pi], [0.5, 0.5]).boundary_mass(half) == 1.0
    assert SpectralMeasure.uniform().boundary_mass(half) == 0.0


def test_mass_on_density_arc():
    m = SpectralMeasure.uniform()
    assert m.mass_on(ArcSet([(0.0, np.pi)])) == pytest.approx(0.5, rel=1e-12)


# ----------------------------------------------------------------------
# moment condition


def test_moment_constant_gain():
    val = moment_condition(SpectralMeasure.uniform(), constant_gain(3.0),
                           1.0, 0.5)
    assert val == pytest.approx(3.0 ** 1.5, rel=1e-10)


def test_moment_power_cusp_hand_integral():
    # integral of |t - pi|^(-0.3) / (2 pi) over the circle
    h = power_cusp_gain(np.pi, 0.2)
    val = moment_condition(SpectralMeasure.uniform(), h, 1.0, 0.5)
    hand = 2.0 * np.pi ** 0.7 / (0.7 * TWO_PI)
    assert val == pytest.approx(hand, abs=1e-10)


def test_moment_divergence_detected():
    h = power_cusp_gain(np.pi, 0.8)  # 0.8 * (1 + 0.5) = 1.2 >= 1 diverges
    with pytest.raises(MomentDivergence):
        moment_condition(SpectralMeasure.uniform(), h, 1.0, 0.5)


def test_moment_discrete_sum():
    m = disc([0.0, np.pi], [0.5, 0.5])
    h = step_gain([0.0, 1.0], [1.0, 3.0])
    assert moment_condition(m, h, 1.0, 1.0) == pytest.approx(
        0.5 * 1.0 + 0.5 * 9.0)


# ----------------------------------------------------------------------
# misc invariants


def test_total_mass_matches_weights():
    m = disc(np.linspace(0, 6, 30), np.linspace(0.1, 3.0, 30))
    assert abs(m.total_mass - math.fsum(m.weights.tolist())) <= 1e-9 * m.total_mass


def test_atoms_closer_than_tolerance_rejected_without_merge():
    with pytest.raises(ValueError):
        SpectralMeasure.discrete([1.0, 1.0 + 1e-13], [0.5, 0.5])
    merged = SpectralMeasure.discrete([1.0, 1.0 + 1e-13], [0.5, 0.5], merge=True)
    assert merged.n_atoms == 1


def test_indicator_gain_zero_weight_removal():
    m = disc([0.0, np.pi], [0.5, 0.5])
    h = indicator_gain(ArcSet([(1.0, 4.0)]))
    out = reweight(m, h, 1.0)
    assert out.n_atoms == 1 and out.angles[0] == pytest.approx(np.pi)


def test_d3_measure_operations():
    from regvar.measures import SphereMap
    from regvar.sphere import CapSet

    m = SpectralMeasure.discrete_dirs(np.eye(3), [1.0, 2.0, 1.0])
    n = m.normalized()
    np.testing.assert_allclose(n.weights, [0.25, 0.5, 0.25])
    flip = SphereMap(coords_fn=lambda x: -x)
    image = pushforward(m, flip)
    assert image.total_mass == m.total_mass
    assert distance_tv(n, normalize(image)) == 1.0  # antipodal supports
    caps = CapSet([(np.array([0.0, 0.0, 1.0]), 0.9)])
    assert n.mass_on(caps) == 0.25
    h = RadialGain(coords_fn=lambda x: 1.0 + x[2] ** 2)
    out = reweight(n, h, 1.0)
    np.testing.assert_allclose(out.weights, [0.25, 0.5, 0.5])
