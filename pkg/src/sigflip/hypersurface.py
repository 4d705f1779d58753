"""The degeneracy hypersurface H = {det gt = 0}: location, radical, induced metric."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sigflip.errors import (
    ClassificationMismatch,
    DegenerateRegion,
    KernelDimensionError,
    NotComoving,
    NotOnHypersurface,
    NotTransverseTypeChanging,
)
from sigflip.expr import eval_dual
from sigflip.geometry import (
    DEFAULT_ZERO_TOL,
    MetricField,
    ScalarField,
    SignatureReport,
    determinant,
    determinant_value,
    metric_determinant,
    signature_of_matrix,
)
from sigflip.transform import Triple, transform

CLASSIFY_TOL = 1e-6
ON_H_TOL = 1e-8
GRADIENT_FLOOR = 1e-10
BISECTION_MAX_ITER = 60
BISECTION_XTOL = 1e-12


class RadicalClass(enum.Enum):
    TRANSVERSE = "Transverse"
    TANGENT = "Tangent"


@dataclass(frozen=True)
class HPoint:
    q: tuple[float, ...]
    grid_index: tuple[int, ...]
    det_value: float
    det_gradient: np.ndarray
    radical_basis: np.ndarray
    radical_class: RadicalClass
    pairing: float
    induced_signature: SignatureReport

    def to_json(self) -> dict:
        return {
            "q": list(self.q),
            "grid_index": list(self.grid_index),
            "det_value": self.det_value,
            "det_gradient": self.det_gradient.tolist(),
            "radical_basis": self.radical_basis.tolist(),
            "radical_class": self.radical_class.value,
            "pairing": self.pairing,
            "induced_signature": list(self.induced_signature.counts),
        }


def _threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SIGFLIP_THREADS")
    if env:
        return max(1, int(env))
    return 1


# ---------------------------------------------------------------------------
# radical and classification


def radical_at(gt: MetricField, q: Sequence[float], tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Unit basis vector of Rad_q = ker gt(q), first nonzero component positive."""
    G = gt.matrix(q)
    det = float(determinant(G.tolist()))
    if abs(det) > ON_H_TOL:
        raise NotOnHypersurface(f"|det| = {abs(det):.3e} exceeds {ON_H_TOL}", q)
    eig, vecs = np.linalg.eigh(G)
    band = tol * max(1.0, float(np.max(np.abs(eig))))
    kernel = np.flatnonzero(np.abs(eig) <= band)
    if kernel.size != 1:
        raise KernelDimensionError(f"kernel dimension {kernel.size}, expected 1", q)
    r = vecs[:, kernel[0]]
    r = r / np.linalg.norm(r)
    lead = np.flatnonzero(np.abs(r) > 1e-12)[0]
    return -r if r[lead] < 0 else r


def _classify(
    gt: MetricField,
    q: Sequence[float],
    radical: np.ndarray,
    tol: float,
    f: ScalarField | None,
) -> tuple[RadicalClass, np.ndarray, float]:
    grad = metric_determinant(gt, q).gradient
    size = float(np.linalg.norm(grad))
    if size <= GRADIENT_FLOOR:
        raise NotTransverseTypeChanging(f"|d(det)| = {size:.3e} on H", q)
    pairing = float(grad @ radical)
    cls = RadicalClass.TRANSVERSE if abs(pairing) > tol * size else RadicalClass.TANGENT
    if f is not None:
        df = eval_dual(f, q).gradient
        df_size = float(np.linalg.norm(df))
        via_f = (
            RadicalClass.TRANSVERSE
            if df_size > GRADIENT_FLOOR and abs(float(df @ radical)) > tol * df_size
            else RadicalClass.TANGENT
        )
        if via_f is not cls:
            raise ClassificationMismatch(
                f"d(det) says {cls.value} but df says {via_f.value}", q
            )
    return cls, grad, pairing


def classify_radical(
    gt: MetricField,
    q: Sequence[float],
    h_point_tol: float = CLASSIFY_TOL,
    f: ScalarField | None = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> RadicalClass:
    """Transverse iff the radical leaves ker d(det)_q = T_qH.

    With ``f`` given, the same test on df is run and must agree.
    """
    radical = radical_at(gt, q, zero_tol)
    return _classify(gt, q, radical, h_point_tol, f)[0]


def tangent_basis(grad: np.ndarray) -> np.ndarray:
    """Columns span the Euclidean orthogonal complement of ``grad``."""
    _, _, vt = np.linalg.svd(grad.reshape(1, -1))
    return vt[1:].T


def induced_metric_on_H(
    gt: MetricField, q: Sequence[float], tol: float = DEFAULT_ZERO_TOL
) -> SignatureReport:
    grad = metric_determinant(gt, q).gradient
    if np.linalg.norm(grad) <= GRADIENT_FLOOR:
        raise NotTransverseTypeChanging("d(det) vanishes; T_qH undefined", q)
    B = tangent_basis(grad)
    return signature_of_matrix(B.T @ gt.matrix(q) @ B, tol)


def positivity_margin(
    gt: MetricField,
    q: Sequence[float],
    trials: int = 1000,
    rng_seed: int = 42,
    radical: np.ndarray | None = None,
) -> float:
    """min of gt(x,x)/|x|^2 over random x with the radical component removed."""
    if radical is None:
        radical = radical_at(gt, q)
    rng = np.random.default_rng(rng_seed)
    X = rng.standard_normal((trials, gt.dim))
    X = X - np.outer(X @ radical, radical)
    norms = np.linalg.norm(X, axis=1)
    X = X[norms >= 1e-6]
    if X.shape[0] == 0:
        return float("inf")
    G = gt.matrix(q)
    ratios = np.einsum("ki,ij,kj->k", X, G, X) / np.einsum("ki,ki->k", X, X)
    return float(ratios.min())


def positivity_check(
    gt: MetricField,
    q: Sequence[float],
    trials: int = 1000,
    rng_seed: int = 42,
    radical: np.ndarray | None = None,
) -> bool:
    return positivity_margin(gt, q, trials, rng_seed, radical) > 0.0


# ---------------------------------------------------------------------------
# location


def _bisect(gt: MetricField, a: np.ndarray, b: np.ndarray, da: float) -> np.ndarray:
    for _ in range(BISECTION_MAX_ITER):
        m = 0.5 * (a + b)
        dm = determinant_value(gt, m)
        if dm == 0.0:
            return m
        if (dm < 0) == (da < 0):
            a, da = m, dm
        else:
            b = m
        if np.max(np.abs(b - a)) <= BISECTION_XTOL:
            break
    return 0.5 * (a + b)


def _node_sign(d: float) -> int:
    return 0 if d == 0.0 else (1 if d > 0 else -1)


def locate_hypersurface(
    gt: MetricField,
    grid: Sequence[int],
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    classify_tol: float = CLASSIFY_TOL,
    f: ScalarField | None = None,
    threads: int | None = None,
) -> list[HPoint]:
    """Find H on a grid: bisect every edge whose endpoint determinants have
    strictly opposite signs, and keep grid nodes where det is exactly zero
    and H genuinely crosses.

    Results are sorted by grid index (node index, then 1 + edge axis; 0 for a
    node hit), independent of the thread count.
    """
    chart = gt.chart
    axes = chart.grid(grid)
    shape = tuple(len(a) for a in axes)
    nodes = list(np.ndindex(*shape))

    def point(idx):
        return np.array([axes[k][i] for k, i in enumerate(idx)])

    nthreads = _threads(threads)

    def pmap(fn, items):
        if nthreads == 1:
            return [fn(it) for it in items]
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            return list(pool.map(fn, items))

    dets = dict(zip(nodes, pmap(lambda idx: determinant_value(gt, point(idx)), nodes)))
    signs = {idx: _node_sign(d) for idx, d in dets.items()}

    tasks = []
    for idx in nodes:
        for axis in range(chart.dim):
            if idx[axis] + 1 >= shape[axis]:
                continue
            nxt = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1:]
            sa, sb = signs[idx], signs[nxt]
            if sa * sb < 0:
                tasks.append((idx + (axis + 1,), idx, nxt))
            elif sa == 0 and sb == 0:
                mid = 0.5 * (point(idx) + point(nxt))
                if abs(determinant_value(gt, mid)) <= ON_H_TOL and (
                    np.linalg.norm(metric_determinant(gt, mid).gradient) <= GRADIENT_FLOOR
                ):
                    raise DegenerateRegion("det and d(det) vanish along a grid edge", mid)

    for idx in nodes:
        if signs[idx] != 0:
            continue
        crossing = False
        for axis in range(chart.dim):
            lo = idx[:axis] + (idx[axis] - 1,) + idx[axis + 1:]
            hi = idx[:axis] + (idx[axis] + 1,) + idx[axis + 1:]
            if idx[axis] > 0 and idx[axis] + 1 < shape[axis] and signs[lo] * signs[hi] < 0:
                crossing = True
        if not crossing:
            crossing = np.linalg.norm(metric_determinant(gt, point(idx)).gradient) > GRADIENT_FLOOR
        if crossing:
            tasks.append((idx + (0,), idx, None))

    def run(task):
        key, a, b = task
        if b is None:
            return key, point(a)
        return key, _bisect(gt, point(a), point(b), dets[a])

    roots = sorted(pmap(run, tasks), key=lambda kv: kv[0])
    return [enrich(gt, q, key, zero_tol=zero_tol, classify_tol=classify_tol, f=f) for key, q in roots]


def enrich(
    gt: MetricField,
    q: Sequence[float],
    grid_index: Sequence[int] = (),
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
    classify_tol: float = CLASSIFY_TOL,
    f: ScalarField | None = None,
) -> HPoint:
    q = tuple(float(c) for c in q)
    radical = radical_at(gt, q, zero_tol)
    cls, grad, pairing = _classify(gt, q, radical, classify_tol, f)
    return HPoint(
        q=q,
        grid_index=tuple(int(i) for i in grid_index),
        det_value=determinant_value(gt, q),
        det_gradient=grad,
        radical_basis=radical,
        radical_class=cls,
        pairing=pairing,
        induced_signature=induced_metric_on_H(gt, q, zero_tol),
    )


# ---------------------------------------------------------------------------
# theorem checks


@dataclass(frozen=True)
class BiconditionalRow:
    q: tuple[float, ...]
    det_gradient_norm: float
    df_norm: float
    agree: bool


@dataclass(frozen=True)
class BiconditionalReport:
    rows: tuple[BiconditionalRow, ...]
    verdict: bool


def verify_biconditional(T: Triple, hpoints: Sequence, tol: float = CLASSIFY_TOL) -> BiconditionalReport:
    """At each point compare |d(det gt)| > tol with |df| > tol.

    ``hpoints`` may hold :class:`HPoint` objects or bare coordinates, the
    latter for points where d(det) vanishes and no HPoint can be built.
    """
    qs = [tuple(getattr(h, "q", h)) for h in hpoints]
    gt = transform(T, qs or None)
    rows = []
    for q in qs:
        a = float(np.linalg.norm(metric_determinant(gt, q).gradient))
        b = float(np.linalg.norm(eval_dual(T.f, q).gradient))
        rows.append(BiconditionalRow(q, a, b, (a > tol) == (b > tol)))
    return BiconditionalReport(tuple(rows), all(r.agree for r in rows))


@dataclass(frozen=True)
class FactorizationReport:
    max_relative_deviation: float
    passed: bool
    witness_point: tuple[float, ...] | None


def is_comoving(T: Triple, samples: Sequence[Sequence[float]], tol: float = 1e-12) -> bool:
    return all(np.all(np.abs(T.V.at(p)[1:]) <= tol) for p in samples)


def verify_det_factorization(
    T: Triple, samples: Sequence[Sequence[float]], tol: float = 1e-10
) -> FactorizationReport:
    """det gt against (1 - f) * g_00 * det(h) with h_ij = g_ij - g_i0 g_j0 / g_00."""
    if not is_comoving(T, samples):
        raise NotComoving("V has spatial components; factorization needs co-moving form")
    gt = transform(T, samples)
    worst, witness = 0.0, None
    for p in samples:
        lhs = determinant_value(gt, p)
        G = T.g.matrix(p)
        h = G[1:, 1:] - np.outer(G[1:, 0], G[0, 1:]) / G[0, 0]
        rhs = (1.0 - T.f([float(c) for c in p])) * G[0, 0] * float(determinant(h.tolist()))
        dev = abs(lhs - rhs) / max(1.0, abs(lhs))
        if dev > worst:
            worst, witness = dev, tuple(float(c) for c in p)
    return FactorizationReport(worst, worst <= tol, witness)
