"""Building signature-changing metrics from (g, V, f) and taking them apart.

The forward map is ``gt = g + f * Vb (x) Vb`` with ``Vb = g(V, .)`` and
``g(V, V) = -1``. The inverse for a chosen V uses the closed form

    c = gt(V, V),   f = 1 + c,   u = -gt(V, .) / c,   g = gt - f * u (x) u

which follows from ``gt(V, .) = (1 - f) * Vb``. It is singular on the
degeneracy set c = 0, where g is extrapolated along a transversal line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from sigflip.dual import value_of
from sigflip.errors import (
    ExtrapolationFailure,
    NearHypersurface,
    NormalizationError,
    NotLorentzian,
    NotTimelike,
    NotTimelikeInLorentzSector,
    ZeroScale,
)
from sigflip.expr import eval_dual
from sigflip.geometry import (
    Chart,
    MetricField,
    ScalarField,
    VectorField,
    orthonormal_frame,
    signature_of_matrix,
)

EPS_H = 1e-6
NORMALIZATION_TOL = 1e-9
EXTRAPOLATION_RESIDUAL_TOL = 1e-6
_STEPS = np.array([-8.0, -4.0, -2.0, 2.0, 4.0, 8.0])
_DESIGN = np.stack([np.ones_like(_STEPS), _STEPS, _STEPS**2], axis=1)
_INTERCEPT_WEIGHTS = np.linalg.pinv(_DESIGN)[0]


@dataclass(frozen=True)
class Triple:
    """A representative (g, V, f) of the prescription."""

    g: MetricField
    V: VectorField
    f: ScalarField

    @property
    def chart(self) -> Chart:
        return self.g.chart

    def check(self, samples: Sequence[Sequence[float]], tol: float = NORMALIZATION_TOL) -> None:
        """Raise unless g is Lorentzian and g(V, V) = -1 at every sample."""
        n = self.g.dim
        for p in samples:
            G = self.g.matrix(p)
            v = self.V.at(p)
            if not np.any(v):
                raise NormalizationError("line element field vanishes", p)
            norm = float(v @ G @ v)
            if abs(norm + 1.0) > tol:
                raise NormalizationError(f"g(V,V) = {norm!r}, expected -1", p)
            if signature_of_matrix(G).counts != (1, 0, n - 1):
                raise NotLorentzian("g is not Lorentzian", p)


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    max_deviation: float
    witness_point: tuple[float, ...] | None


def _default_samples(chart: Chart) -> list[tuple[float, ...]]:
    return chart.grid_points([3] * chart.dim)


def _lowered(G: list[list], v: list) -> list:
    n = len(v)
    out = []
    for i in range(n):
        acc = 0.0
        for a in range(n):
            acc = acc + G[i][a] * v[a]
        out.append(acc)
    return out


def _quad(G: list[list], v: list):
    vl = _lowered(G, v)
    acc = 0.0
    for a in range(len(v)):
        acc = acc + vl[a] * v[a]
    return acc


def transform(T: Triple, samples: Sequence[Sequence[float]] | None = None) -> MetricField:
    """The prescription ``gt_mn = g_mn + f V_m V_n`` as a metric field.

    The triple is checked at ``samples`` (a coarse grid over the chart by
    default) and ``NormalizationError`` raised if g(V, V) != -1 there.
    """
    T.check(_default_samples(T.chart) if samples is None else samples)
    g, V, f = T.g, T.V, T.f
    n = g.dim

    def packed(x):
        G = g.generic_matrix(x)
        vl = _lowered(G, V.generic(x))
        fx = f(x)
        return [G[i][j] + fx * vl[i] * vl[j] for i in range(n) for j in range(i + 1)]

    return MetricField(g.chart, packed)


def normalize_against(g: MetricField, W: VectorField, p: Sequence[float]) -> np.ndarray:
    G = g.matrix(p)
    w = W.at(p)
    norm = float(w @ G @ w)
    if not norm < 0.0:
        raise NotTimelike(f"g(W,W) = {norm!r} is not negative", p)
    return w / math.sqrt(-norm)


def _closed_form(Gt: list[list], v: list, c) -> list:
    """Packed lower triangle of g = gt - (1 + c) u u, u = -gt(v, .)/c."""
    n = len(v)
    u = [-w / c for w in _lowered(Gt, v)]
    fx = 1.0 + c
    return [Gt[i][j] - fx * u[i] * u[j] for i in range(n) for j in range(i + 1)]


def decompose_point(
    gt: MetricField, V: VectorField, p: Sequence[float], eps_h: float = EPS_H
) -> tuple[float, np.ndarray]:
    G = gt.matrix(p)
    v = V.at(p)
    if not np.any(v):
        raise NormalizationError("line element field vanishes", p)
    c = float(v @ G @ v)
    if abs(c) < eps_h:
        raise NearHypersurface(f"|gt(V,V)| = {abs(c):.3e} below {eps_h}", p)
    u = -(G @ v) / c
    f_value = 1.0 + c
    return f_value, G - f_value * np.outer(u, u)


class _Decomposition:
    """Pointwise g for a fixed (gt, V), extrapolated across the band |c| < eps_h."""

    def __init__(self, gt: MetricField, V: VectorField, eps_h: float) -> None:
        self.gt = gt
        self.V = V
        self.eps_h = eps_h

    def c(self, x):
        return _quad(self.gt.generic_matrix(x), self.V.generic(x))

    def f(self, x):
        return 1.0 + self.c(x)

    def near(self, p: Sequence[float]) -> bool:
        return abs(value_of(self.c([float(v) for v in p]))) < self.eps_h

    def g_packed(self, x):
        Gt = self.gt.generic_matrix(x)
        v = self.V.generic(x)
        c = _quad(Gt, v)
        if abs(value_of(c)) >= self.eps_h:
            return _closed_form(Gt, v, c)
        return self._extrapolate(x)

    def _direction(self, p: list[float]) -> tuple[np.ndarray, float]:
        dc = eval_dual(self.c, p).gradient
        v = self.V.at(p)
        slope = float(dc @ v)
        if abs(slope) > 1e-6 * np.linalg.norm(dc) * np.linalg.norm(v) and slope != 0.0:
            return v, abs(slope)
        # V is tangent to the degeneracy set; step across it instead
        size = float(np.linalg.norm(dc))
        if size <= 1e-10:
            raise ExtrapolationFailure("gt(V,V) has vanishing differential; no transversal direction", p)
        return dc / size, size

    def _extrapolate(self, x):
        p = [value_of(v) for v in x]
        d, slope = self._direction(p)
        h = self.eps_h / slope
        samples = []
        for t in _STEPS:
            xs = [xi + t * h * di for xi, di in zip(x, d)]
            Gt = self.gt.generic_matrix(xs)
            v = self.V.generic(xs)
            c = _quad(Gt, v)
            if value_of(c) == 0.0:
                raise ExtrapolationFailure("extrapolation sample landed on the degeneracy set", p)
            samples.append(_closed_form(Gt, v, c))
        values = np.array([[value_of(e) for e in row] for row in samples])
        coef, *_ = np.linalg.lstsq(_DESIGN, values, rcond=None)
        residual = float(np.max(np.abs(values - _DESIGN @ coef)))
        if residual > EXTRAPOLATION_RESIDUAL_TOL:
            raise ExtrapolationFailure(f"quadratic fit residual {residual:.3e}", p)
        k = len(samples[0])
        out = []
        for j in range(k):
            acc = 0.0
            for w, row in zip(_INTERCEPT_WEIGHTS, samples):
                acc = acc + float(w) * row[j]
            out.append(acc)
        return out


def recover_at(
    gt: MetricField, V: VectorField, p: Sequence[float], eps_h: float = EPS_H
) -> tuple[float, np.ndarray, bool]:
    """(f, g matrix, extrapolated?) at a single point, valid on and off H."""
    dec = _Decomposition(gt, V, eps_h)
    g = MetricField(gt.chart, dec.g_packed)
    return float(dec.f([float(v) for v in p])), g.matrix(p), dec.near(p)


def decompose_field(
    gt: MetricField,
    V: VectorField,
    samples: Sequence[Sequence[float]],
    eps_h: float = EPS_H,
) -> Triple:
    """Recover the triple (g, V, f) representing ``gt`` for the chosen V.

    f = 1 + gt(V, V) everywhere. g comes from the closed form off the band
    |gt(V,V)| < eps_h and from quadratic extrapolation inside it. The
    result is validated at every sample.
    """
    dec = _Decomposition(gt, V, eps_h)
    g = MetricField(gt.chart, dec.g_packed)
    n = gt.dim
    for p in samples:
        Gt = gt.matrix(p)
        v = V.at(p)
        if not np.any(v):
            raise NormalizationError("line element field vanishes", p)
        c = float(v @ Gt @ v)
        if c >= 0.0 and signature_of_matrix(Gt).counts == (1, 0, n - 1):
            raise NotTimelikeInLorentzSector(f"gt(V,V) = {c!r} in the Lorentzian sector", p)
        G = g.matrix(p)
        if abs(c) >= eps_h:
            norm = float(v @ G @ v)
            if abs(norm + 1.0) > NORMALIZATION_TOL:
                raise NormalizationError(f"recovered g(V,V) = {norm!r}", p)
            if signature_of_matrix(G).counts != (1, 0, n - 1):
                raise NotLorentzian("recovered g is not Lorentzian", p)
    return Triple(g, V, dec.f)


def rescaling_image(f_value: float, phi: float) -> float:
    """f after rescaling V -> phi V; the degeneracy value f = 1 is fixed."""
    if phi == 0:
        raise ZeroScale("rescaling factor must be nonzero")
    return 1.0 + phi * phi * (f_value - 1.0)


def triples_equivalent(
    t1: Triple, t2: Triple, samples: Sequence[Sequence[float]], tol: float
) -> EquivalenceVerdict:
    m1 = transform(t1, samples)
    m2 = transform(t2, samples)
    worst, witness = -1.0, None
    for p in samples:
        dev = float(np.max(np.abs(m1.matrix(p) - m2.matrix(p))))
        if dev > worst:
            worst, witness = dev, tuple(float(c) for c in p)
    worst = max(worst, 0.0)
    equivalent = worst <= tol
    return EquivalenceVerdict(equivalent, worst, None if equivalent else witness)


def frame_identity_deviation(T: Triple, samples: Sequence[Sequence[float]]) -> float:
    """Largest violation of gt(E_i,E_j) = delta_ij, gt(V,E_j) = 0, gt(V,V) = f - 1.

    Frames are built from g with ``orthonormal_frame``.
    """
    gt = transform(T, samples)
    worst = 0.0
    for p in samples:
        frame = orthonormal_frame(T.g, p, T.V.at(p))
        B = np.array(frame.vectors()).T
        gram = B.T @ gt.matrix(p) @ B
        target = np.eye(T.g.dim)
        target[0, 0] = T.f([float(c) for c in p]) - 1.0
        worst = max(worst, float(np.max(np.abs(gram - target))))
    return worst


def df_at(f: ScalarField, p: Sequence[float]) -> np.ndarray:
    return eval_dual(f, p).gradient


__all__ = [
    "EPS_H",
    "EquivalenceVerdict",
    "Triple",
    "decompose_field",
    "decompose_point",
    "df_at",
    "frame_identity_deviation",
    "normalize_against",
    "recover_at",
    "rescaling_image",
    "transform",
    "triples_equivalent",
]
