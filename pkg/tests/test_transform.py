import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigflip import gallery
from sigflip.errors import (
    ExtrapolationFailure,
    NearHypersurface,
    NormalizationError,
    NotTimelike,
    NotTimelikeInLorentzSector,
    ZeroScale,
)
from sigflip.geometry import Chart, MetricField, VectorField
from sigflip.randomized import random_comoving_triple
from sigflip.transform import (
    EPS_H,
    Triple,
    decompose_field,
    decompose_point,
    frame_identity_deviation,
    normalize_against,
    recover_at,
    rescaling_image,
    transform,
    triples_equivalent,
)

CHART = Chart(("t", "x"), [(-1, 1), (-1, 1)])
MINK = MetricField.diagonal(CHART, [-1, 1])
DT = VectorField.coordinate(CHART, 0)
KRIELE_GT = MetricField.from_matrix(CHART, [["x", "0"], ["0", "1"]])
TRANSVERSE_GT = MetricField.from_matrix(CHART, [["t", "0"], ["0", "1"]])
GRID = CHART.grid_points([11, 11])


def triple(f: str, g=MINK, V=DT) -> Triple:
    return Triple(g, V, CHART.parse(f))


def test_transform_kriele():
    gt = transform(triple("1+x"))
    for p in GRID:
        assert gt.matrix(p).tolist() == [[p[1], 0.0], [0.0, 1.0]]


def test_transform_zero_f_is_identity():
    g = MetricField.from_matrix(CHART, [["-2 + 0.1*sin(x)", "0.2*t"], ["0.2*t", "1 + x^2"]])
    V = VectorField.from_specs(CHART, ["1/sqrt(2 - 0.1*sin(x))", "0"])
    T = Triple(g, V, CHART.parse("0"))
    gt = transform(T, GRID)
    for p in GRID:
        assert np.array_equal(gt.matrix(p), g.matrix(p))


def test_transform_transverse_by_hand():
    # gt_00 = -1 + (1 + t) * (-1)^2 = t
    gt = transform(triple("1+t"))
    for p in GRID:
        assert gt.matrix(p).tolist() == [[p[0], 0.0], [0.0, 1.0]]


def test_transform_rejects_unnormalized_v():
    with pytest.raises(NormalizationError):
        transform(triple("1+x", V=VectorField.coordinate(CHART, 0, 2.0)))


def test_transform_gives_f_minus_one_on_v():
    T = gallery.get("kriele2d").triple
    gt = transform(T)
    for p in GRID:
        v = T.V.at(p)
        assert v @ gt.matrix(p) @ v == pytest.approx(T.f(list(p)) - 1.0, abs=1e-15)


def test_normalize_against():
    np.testing.assert_array_equal(normalize_against(MINK, VectorField.coordinate(CHART, 0, 3.0), (0, 0)), [1, 0])
    g4 = MetricField.diagonal(CHART, [-4, 1])
    v = normalize_against(g4, DT, (0, 0))
    assert v.tolist() == [0.5, 0.0]
    assert v @ g4.matrix((0, 0)) @ v == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(NotTimelike):
        normalize_against(MINK, VectorField.coordinate(CHART, 1), (0, 0))


def test_decompose_point_kriele():
    f, g = decompose_point(KRIELE_GT, DT, (0.0, 0.5))
    assert f == 1.5
    assert g.tolist() == [[-1.0, 0.0], [0.0, 1.0]]


def test_decompose_point_pure_lorentzian():
    f, g = decompose_point(MINK, DT, (0.3, 0.3))
    assert f == 0.0
    assert g.tolist() == MINK.matrix((0.3, 0.3)).tolist()


def test_decompose_point_transverse_round_trip():
    f, g = decompose_point(TRANSVERSE_GT, DT, (2.0, 0.0))
    assert f == 3.0
    assert g.tolist() == [[-1.0, 0.0], [0.0, 1.0]]
    v = np.array([1.0, 0.0])
    back = g + f * np.outer(g @ v, g @ v)
    np.testing.assert_allclose(back, TRANSVERSE_GT.matrix((2.0, 0.0)), atol=1e-10)


def test_decompose_point_near_h():
    with pytest.raises(NearHypersurface):
        decompose_point(KRIELE_GT, DT, (0.0, 1e-7))


def test_decompose_field_kriele_grid_including_h():
    pts = CHART.grid_points([10, 10]) + CHART.grid_points([11, 11])
    T = decompose_field(KRIELE_GT, DT, pts)
    for p in pts:
        assert abs(T.f(list(p)) - (1 + p[1])) <= 1e-10
        np.testing.assert_allclose(T.g.matrix(p), [[-1, 0], [0, 1]], atol=1e-10)


def test_extrapolated_g_on_h_transverse_case():
    g = MetricField.from_matrix(CHART, [["-1 - 0.2*x^2", "0.1*sin(t)"], ["0.1*sin(t)", "1 + 0.3*t"]])
    # g(V,V) = V0^2 * g00 = -1
    V = VectorField.from_specs(CHART, ["1/sqrt(1 + 0.2*x^2)", "0"])
    pts = CHART.grid_points([9, 9])
    T = Triple(g, V, CHART.parse("1 + 0.5*t"))
    gt = transform(T, pts)
    on_h = [(0.0, x) for x in np.linspace(-1, 1, 9)]
    rec = decompose_field(gt, V, on_h)
    for p in on_h:
        np.testing.assert_allclose(rec.g.matrix(p), g.matrix(p), atol=1e-8)
        _, _, near = recover_at(gt, V, p)
        assert near


def test_decompose_field_round_trip_gallery():
    for name in gallery.NAMES:
        item = gallery.get(name)
        T = item.triple
        pts = item.chart.grid_points(item.grid)
        gt = transform(T, pts)
        rec = decompose_field(gt, T.V, pts)
        for p in pts:
            assert abs(rec.f(list(p)) - T.f(list(p))) <= 1e-9
            if abs(T.f(list(p)) - 1) >= EPS_H:
                np.testing.assert_allclose(rec.g.matrix(p), T.g.matrix(p), atol=1e-9)


@pytest.mark.parametrize("phi", [0.5, 2.0, 3.0, -2.0])
def test_decompose_with_scaled_v_obeys_rescaling(phi):
    rec = decompose_field(KRIELE_GT, DT.scaled(phi), GRID)
    for p in GRID:
        assert rec.f(list(p)) == pytest.approx(1 + phi**2 * p[1], abs=1e-12)
        assert rec.f(list(p)) == pytest.approx(rescaling_image(1 + p[1], phi), abs=1e-12)


def test_decompose_field_rejects_spacelike_v_in_lorentz_sector():
    with pytest.raises(NotTimelikeInLorentzSector) as info:
        decompose_field(MINK, VectorField.coordinate(CHART, 1), [(0.0, 0.0)])
    assert info.value.point == [0.0, 0.0]


def test_extrapolation_fails_without_transversal():
    # gt(V,V) = x^2 - ... has a double zero: no transversal direction at x = 0
    gt = MetricField.from_matrix(CHART, [["x^2", "0"], ["0", "1"]])
    with pytest.raises(ExtrapolationFailure):
        decompose_field(gt, DT, [(0.0, 0.0)])


def test_rescaling_image():
    assert rescaling_image(1.0, 7.0) == 1.0
    assert rescaling_image(0.0, 2.0) == -3.0
    assert rescaling_image(1.5, 3.0) == 5.5
    with pytest.raises(ZeroScale):
        rescaling_image(1.0, 0.0)


def test_equivalence_under_v_negation():
    T = gallery.get("kriele2d").triple
    T2 = Triple(T.g, T.V.negated(), T.f)
    verdict = triples_equivalent(T, T2, GRID, 1e-15)
    assert verdict.equivalent
    assert verdict.max_deviation == 0.0
    assert verdict.witness_point is None


def test_equivalence_under_rescaling():
    T = gallery.get("transverse2d").triple
    gt = transform(T, GRID)
    T2 = decompose_field(gt, T.V.scaled(2.0), GRID)
    assert triples_equivalent(T, T2, GRID, 1e-9).equivalent


def test_perturbed_f_is_not_equivalent():
    T = gallery.get("kriele2d").triple
    T2 = Triple(T.g, T.V, CHART.parse("1.1+x"))
    verdict = triples_equivalent(T, T2, GRID, 1e-9)
    assert not verdict.equivalent
    assert verdict.max_deviation == pytest.approx(0.1, abs=1e-12)
    assert verdict.witness_point == GRID[0]


def test_frame_identities_gallery():
    for name in gallery.NAMES:
        item = gallery.get(name)
        assert frame_identity_deviation(item.triple, item.chart.grid_points(item.grid)) <= 1e-10


def test_sign_symmetry_random():
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        T, _ = random_comoving_triple(rng, n)
        pts = T.chart.random_points(rng, 30)
        a = transform(T, pts)
        b = transform(Triple(T.g, T.V.negated(), T.f), pts)
        for p in pts:
            np.testing.assert_allclose(a.matrix(p), b.matrix(p), rtol=0, atol=4e-16)


def test_f_is_continuous_across_h():
    T = gallery.get("transverse2d").triple
    gt = transform(T)
    rec = decompose_field(gt, T.V, [(0.5, 0.5)])
    for s in np.linspace(-1e-5, 1e-5, 41):
        p = [s, 0.3]
        v = T.V.at(p)
        assert rec.f(p) - (1 + v @ gt.matrix(p) @ v) == 0.0


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
@settings(max_examples=40, deadline=None)
def test_round_trip_random_triples(seed, n):
    rng = np.random.default_rng(seed)
    T, _ = random_comoving_triple(rng, n)
    pts = [p for p in T.chart.random_points(rng, 20) if abs(T.f(list(p)) - 1) >= EPS_H]
    gt = transform(T, pts)
    rec = decompose_field(gt, T.V, pts)
    for p in pts:
        assert abs(rec.f(list(p)) - T.f(list(p))) <= 1e-9
        np.testing.assert_allclose(rec.g.matrix(p), T.g.matrix(p), rtol=0, atol=1e-9)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_round_trip_with_tilted_v(seed):
    """Non-comoving V: boost the time direction of a constant Lorentzian g."""
    rng = np.random.default_rng(seed)
    beta = float(rng.uniform(-0.8, 0.8))
    gamma = float(1 / np.sqrt(1 - beta**2))
    V = VectorField.from_specs(CHART, [repr(gamma), repr(gamma * beta)])
    T = Triple(MINK, V, CHART.parse(f"{float(rng.uniform(0.5, 1.5))!r} + 0.7*t - 0.4*x"))
    pts = [p for p in CHART.random_points(rng, 20) if abs(T.f(list(p)) - 1) >= EPS_H]
    gt = transform(T, pts)
    rec = decompose_field(gt, V, pts)
    for p in pts:
        np.testing.assert_allclose(rec.g.matrix(p), MINK.matrix(p), rtol=0, atol=1e-9)
    assert frame_identity_deviation(T, pts) <= 1e-10
