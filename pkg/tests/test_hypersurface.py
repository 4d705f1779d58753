import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigflip import gallery
from sigflip.errors import (
    ClassificationMismatch,
    DegenerateRegion,
    KernelDimensionError,
    NotComoving,
    NotOnHypersurface,
    NotTransverseTypeChanging,
)
from sigflip.geometry import Chart, MetricField, VectorField, determinant_value
from sigflip.hypersurface import (
    RadicalClass,
    classify_radical,
    enrich,
    induced_metric_on_H,
    locate_hypersurface,
    positivity_check,
    positivity_margin,
    radical_at,
    verify_biconditional,
    verify_det_factorization,
)
from sigflip.randomized import random_comoving_triple
from sigflip.transform import Triple, transform

CHART = Chart(("t", "x"), [(-1, 1), (-1, 1)])
MINK = MetricField.diagonal(CHART, [-1, 1])
DT = VectorField.coordinate(CHART, 0)
KRIELE_GT = MetricField.from_matrix(CHART, [["x", "0"], ["0", "1"]])
TRANSVERSE_GT = MetricField.from_matrix(CHART, [["t", "0"], ["0", "1"]])


def test_locate_kriele_odd_grid():
    hs = locate_hypersurface(KRIELE_GT, [9, 9])
    assert len(hs) == 9
    for h in hs:
        assert abs(h.q[1]) <= 1e-10
        assert h.radical_class is RadicalClass.TANGENT
        assert h.induced_signature.counts == (0, 1, 0)
        assert h.radical_basis.tolist() == [1.0, 0.0]
        assert h.grid_index[-1] == 0  # node hit, not an edge root


def test_locate_minkowski_is_empty():
    assert locate_hypersurface(MINK, [9, 9]) == []


def test_locate_transverse():
    hs = locate_hypersurface(TRANSVERSE_GT, [9, 9])
    assert len(hs) == 9
    for h in hs:
        assert abs(h.q[0]) <= 1e-10
        assert h.radical_class is RadicalClass.TRANSVERSE
        assert h.induced_signature.counts == (0, 0, 1)


@pytest.mark.parametrize("gt, axis", [(KRIELE_GT, 1), (TRANSVERSE_GT, 0)])
def test_locate_even_grid_bisects(gt, axis):
    hs = locate_hypersurface(gt, [10, 10])
    assert len(hs) == 10
    for h in hs:
        assert h.grid_index[-1] == axis + 1
        assert abs(determinant_value(gt, h.q)) <= 1e-10
        assert abs(h.q[axis]) <= 1e-10


def test_locate_curved_hypersurface():
    # det = t - 0.3*sin(x): H is the graph t = 0.3 sin x
    gt = MetricField.from_matrix(CHART, [["t - 0.3*sin(x)", "0"], ["0", "1"]])
    hs = locate_hypersurface(gt, [12, 12])
    assert len(hs) >= 12
    for h in hs:
        assert abs(h.q[0] - 0.3 * np.sin(h.q[1])) <= 1e-10
        assert h.radical_class is RadicalClass.TRANSVERSE


def test_degenerate_region():
    gt = MetricField.from_matrix(CHART, [["0", "0"], ["0", "1"]])
    with pytest.raises(DegenerateRegion):
        locate_hypersurface(gt, [5, 5])


def test_locate_is_thread_count_independent():
    item = gallery.get("transverse3d")
    a = locate_hypersurface(item.gt_metric, item.grid, threads=1)
    b = locate_hypersurface(item.gt_metric, item.grid, threads=8)
    assert [h.to_json() for h in a] == [h.to_json() for h in b]


def test_radical_examples():
    assert radical_at(KRIELE_GT, (0.4, 0.0)).tolist() == [1.0, 0.0]
    assert radical_at(TRANSVERSE_GT, (0.0, -0.7)).tolist() == [1.0, 0.0]
    with pytest.raises(NotOnHypersurface):
        radical_at(KRIELE_GT, (0.0, 0.5))
    with pytest.raises(KernelDimensionError):
        radical_at(MetricField.diagonal(CHART, [0, 0]), (0.0, 0.0))


def test_radical_is_in_kernel_off_axis():
    # det = x - 0.5 vanishes at x = 0.5, where the kernel is not a coordinate axis
    gt = MetricField.from_matrix(CHART, [["x - 0.25", "0.5"], ["0.5", "1"]])
    q = (0.0, 0.5)
    r = radical_at(gt, q)
    assert np.linalg.norm(gt.matrix(q) @ r) <= 1e-12
    assert r[0] > 0


def test_classify_examples():
    assert classify_radical(KRIELE_GT, (0.0, 0.0)) is RadicalClass.TANGENT
    assert classify_radical(TRANSVERSE_GT, (0.0, 0.0)) is RadicalClass.TRANSVERSE
    with pytest.raises(NotTransverseTypeChanging):
        classify_radical(MetricField.from_matrix(CHART, [["x^2", "0"], ["0", "1"]]), (0.0, 0.0))


def test_classify_cross_check_with_df():
    assert classify_radical(KRIELE_GT, (0.2, 0.0), f=CHART.parse("1+x")) is RadicalClass.TANGENT
    with pytest.raises(ClassificationMismatch):
        classify_radical(KRIELE_GT, (0.0, 0.0), f=CHART.parse("1+t+x"))


@pytest.mark.parametrize(
    "gt, q, counts",
    [
        (KRIELE_GT, (0.0, 0.0), (0, 1, 0)),
        (TRANSVERSE_GT, (0.0, 0.3), (0, 0, 1)),
    ],
)
def test_induced_signature(gt, q, counts):
    assert induced_metric_on_H(gt, q).counts == counts


def test_induced_signature_3d():
    item = gallery.get("transverse3d")
    assert induced_metric_on_H(item.gt_metric, (0.0, 0.2, 0.3)).counts == (0, 0, 2)


def test_positivity_on_gallery_h():
    for name in gallery.NAMES:
        item = gallery.get(name)
        for h in locate_hypersurface(item.gt_metric, item.grid):
            assert positivity_check(item.gt_metric, h.q, radical=h.radical_basis)
            assert positivity_margin(item.gt_metric, h.q) > 0


def test_positivity_fails_in_lorentz_sector_direction():
    # gt = diag(0, -1) at the origin: semi-definite the wrong way
    gt = MetricField.from_matrix(CHART, [["x", "0"], ["0", "-1"]])
    assert not positivity_check(gt, (0.0, 0.0), trials=200)


def test_positivity_is_seeded():
    a = positivity_margin(TRANSVERSE_GT, (0.0, 0.1), 500, 7)
    b = positivity_margin(TRANSVERSE_GT, (0.0, 0.1), 500, 7)
    assert a == b


def test_biconditional_gallery():
    for name in gallery.NAMES:
        item = gallery.get(name)
        hs = locate_hypersurface(item.gt_metric, item.grid)
        assert hs
        assert verify_biconditional(item.triple, hs).verdict


def test_biconditional_counter_case_both_vanish():
    T = Triple(MINK, DT, CHART.parse("1 + x^2"))
    rep = verify_biconditional(T, [(0.0, 0.0), (0.5, 0.0)], tol=1e-6)
    assert rep.verdict
    assert all(r.det_gradient_norm == 0.0 and r.df_norm == 0.0 for r in rep.rows)
    gt = transform(T)
    # det = x^2 never changes sign: nothing to bisect on a grid that misses x = 0 ...
    assert locate_hypersurface(gt, [10, 10]) == []
    # ... and a grid line on x = 0 is a degenerate region, not a hypersurface
    with pytest.raises(DegenerateRegion):
        locate_hypersurface(gt, [9, 9])


def test_biconditional_vacuous_minkowski():
    T = Triple(MINK, DT, CHART.parse("0"))
    rep = verify_biconditional(T, [])
    assert rep.verdict and rep.rows == ()


def test_det_factorization_kriele():
    T = gallery.get("kriele2d").triple
    gt = transform(T)
    assert determinant_value(gt, (0.0, 0.5)) == 0.5
    rep = verify_det_factorization(T, [(0.0, 0.5)])
    assert rep.passed and rep.max_relative_deviation == 0.0


def test_det_factorization_random_comoving():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        T, _ = random_comoving_triple(rng, n)
        rep = verify_det_factorization(T, T.chart.random_points(rng, 100))
        assert rep.passed, rep


def test_det_factorization_needs_comoving():
    V = VectorField.from_specs(CHART, [2 / np.sqrt(3), 1 / np.sqrt(3)])
    with pytest.raises(NotComoving):
        verify_det_factorization(Triple(MINK, V, CHART.parse("1+x")), [(0.0, 0.0)])


def test_enrich_json_is_plain():
    h = enrich(KRIELE_GT, (0.1, 0.0), (3, 4, 0))
    js = h.to_json()
    assert js["radical_class"] == "Tangent"
    assert js["induced_signature"] == [0, 1, 0]
    assert js["grid_index"] == [3, 4, 0]


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 3))
@settings(max_examples=15, deadline=None)
def test_h_points_of_random_triples(seed, n):
    """On H, f = 1; the radical is V; off-radical directions are positive."""
    rng = np.random.default_rng(seed)
    T, _ = random_comoving_triple(rng, n)
    gt = transform(T)
    for h in locate_hypersurface(gt, [6] * n, f=T.f):
        assert abs(T.f(list(h.q)) - 1.0) <= 1e-9
        v = T.V.at(h.q)
        v = v / np.linalg.norm(v)
        assert min(np.linalg.norm(v - h.radical_basis), np.linalg.norm(v + h.radical_basis)) <= 1e-6
        assert positivity_check(gt, h.q, trials=200, radical=h.radical_basis)
        if h.radical_class is RadicalClass.TRANSVERSE:
            assert h.induced_signature.counts == (0, 0, n - 1)
