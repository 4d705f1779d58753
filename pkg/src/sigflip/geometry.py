"""Charts, tensor fields, determinants and signature classification.

Scalar fields are plain callables taking a coordinate sequence. They must be
written generically so they accept both floats and dual numbers; parsed
:class:`~sigflip.expr.Expression` objects satisfy this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from sigflip import dual
from sigflip.dual import DualScalar, value_of
from sigflip.errors import (
    ConfigError,
    DegenerateMetric,
    EigenFailure,
    NotTimelike,
    PivotFailure,
)
from sigflip.expr import Const, Expression, parse

ScalarField = Callable[[Sequence], object]

DEFAULT_ZERO_TOL = 1e-8


def constant(c: float) -> ScalarField:
    c = float(c)
    return lambda x: c


@dataclass(frozen=True)
class Chart:
    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "domain", tuple((float(lo), float(hi)) for lo, hi in self.domain))
        if len(self.coords) < 2:
            raise ConfigError("chart dimension must be at least 2")
        if len(set(self.coords)) != len(self.coords):
            raise ConfigError(f"duplicate coordinate names in {self.coords}")
        if len(self.domain) != len(self.coords):
            raise ConfigError("domain needs one interval per coordinate")
        for name, (lo, hi) in zip(self.coords, self.domain):
            if not lo < hi:
                raise ConfigError(f"empty interval for {name}: [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def parse(self, source: str) -> Expression:
        return parse(source, self.coords)

    def field(self, spec) -> ScalarField:
        """Scalar field from an expression string, number, or callable."""
        if isinstance(spec, str):
            return self.parse(spec)
        if isinstance(spec, (int, float)):
            return Expression(Const(float(spec)), self.coords)
        if callable(spec):
            return spec
        raise TypeError(f"cannot build a scalar field from {spec!r}")

    def grid(self, resolution: Sequence[int]) -> list[np.ndarray]:
        """Per-axis sample coordinates, endpoints included."""
        if len(resolution) != self.dim:
            raise ConfigError("grid needs one resolution per axis")
        axes = []
        for (lo, hi), k in zip(self.domain, resolution):
            if int(k) < 2:
                raise ConfigError("grid resolution must be >= 2 per axis")
            axes.append(np.linspace(lo, hi, int(k)))
        return axes

    def grid_points(self, resolution: Sequence[int]) -> list[tuple[float, ...]]:
        axes = self.grid(resolution)
        mesh = np.meshgrid(*axes, indexing="ij")
        return [tuple(float(m[idx]) for m in mesh) for idx in np.ndindex(*mesh[0].shape)]

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return lo + (hi - lo) * rng.random((count, self.dim))


def _tri_index(i: int, j: int) -> int:
    if j > i:
        i, j = j, i
    return i * (i + 1) // 2 + j


class MetricField:
    """Symmetric (0,2)-tensor field; stores only the lower triangle.

    ``packed`` maps coordinates to the n(n+1)/2 lower-triangular entries in
    row order (00, 10, 11, 20, 21, 22, ...). Evaluation mirrors them, so the
    resulting matrix is symmetric exactly.
    """

    def __init__(self, chart: Chart, packed: Callable[[Sequence], Sequence]) -> None:
        self.chart = chart
        self.packed = packed

    @classmethod
    def from_components(cls, chart: Chart, lower: Sequence[ScalarField]) -> "MetricField":
        n = chart.dim
        if len(lower) != n * (n + 1) // 2:
            raise ConfigError(f"expected {n * (n + 1) // 2} lower-triangular components, got {len(lower)}")
        fields = tuple(lower)
        return cls(chart, lambda x: [c(x) for c in fields])

    @classmethod
    def from_matrix(cls, chart: Chart, rows: Sequence[Sequence]) -> "MetricField":
        """Build from a full n x n matrix of strings, numbers or callables.

        String/number entries above the diagonal must match their mirror.
        """
        n = chart.dim
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConfigError(f"metric must be a {n}x{n} matrix")
        lower = []
        for i in range(n):
            for j in range(i + 1):
                a, b = rows[i][j], rows[j][i]
                if i != j and not (callable(a) or callable(b)):
                    if chart.field(a) != chart.field(b):
                        raise ConfigError(f"metric is not symmetric at ({i},{j}): {a!r} vs {b!r}")
                lower.append(chart.field(a))
        return cls.from_components(chart, lower)

    @classmethod
    def diagonal(cls, chart: Chart, diag: Sequence) -> "MetricField":
        n = chart.dim
        rows = [[diag[i] if i == j else 0.0 for j in range(n)] for i in range(n)]
        return cls.from_matrix(chart, rows)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def generic_matrix(self, x: Sequence) -> list[list]:
        n = self.dim
        vals = self.packed(x)
        return [[vals[_tri_index(i, j)] for j in range(n)] for i in range(n)]

    def component(self, i: int, j: int) -> ScalarField:
        k = _tri_index(i, j)
        return lambda x: self.packed(x)[k]

    def matrix(self, p: Sequence[float]) -> np.ndarray:
        vals = [value_of(v) for v in self.packed([float(c) for c in p])]
        n = self.dim
        out = np.empty((n, n))
        for i in range(n):
            for j in range(i + 1):
                out[i, j] = out[j, i] = vals[_tri_index(i, j)]
        return out

    def dual_matrix(self, p: Sequence[float]) -> list[list[DualScalar]]:
        n = self.dim
        m = self.generic_matrix(dual.seed(p))
        return [[dual.promote(v, n) for v in row] for row in m]


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple

    @classmethod
    def from_specs(cls, chart: Chart, specs: Sequence) -> "VectorField":
        if len(specs) != chart.dim:
            raise ConfigError(f"vector field needs {chart.dim} components")
        return cls(chart, tuple(chart.field(s) for s in specs))

    @classmethod
    def coordinate(cls, chart: Chart, axis: int, scale: float = 1.0) -> "VectorField":
        comps = [constant(scale if i == axis else 0.0) for i in range(chart.dim)]
        return cls(chart, tuple(comps))

    def generic(self, x: Sequence) -> list:
        return [c(x) for c in self.components]

    def at(self, p: Sequence[float]) -> np.ndarray:
        x = [float(c) for c in p]
        return np.array([value_of(c(x)) for c in self.components])

    def scaled(self, phi: float) -> "VectorField":
        comps = tuple((lambda c: (lambda x: phi * c(x)))(c) for c in self.components)
        return VectorField(self.chart, comps)

    def negated(self) -> "VectorField":
        return self.scaled(-1.0)


@dataclass(frozen=True)
class SignatureReport:
    n_neg: int
    n_zero: int
    n_pos: int
    eigenvalues: tuple[float, ...] = field(compare=False)
    tol_used: float = field(compare=False)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n_neg, self.n_zero, self.n_pos)

    @property
    def kind(self) -> str:
        n = self.n_neg + self.n_zero + self.n_pos
        if self.counts == (0, 0, n):
            return "riemannian"
        if self.counts == (1, 0, n - 1):
            return "lorentzian"
        if self.n_zero:
            return "degenerate"
        return "other"


# ---------------------------------------------------------------------------
# pointwise operations


def evaluate_metric(M: MetricField, p: Sequence[float]) -> np.ndarray:
    return M.matrix(p)


def flat(M: MetricField, p: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """Index lowering: components g_ij(p) v^j of the covector v-flat."""
    return M.matrix(p) @ np.asarray(v, dtype=float)


def determinant(m: Sequence[Sequence]):
    """Determinant of a square matrix of floats or duals.

    Cofactor expansion for n <= 4, Gaussian elimination with partial pivoting
    (on values) beyond that.
    """
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n <= 4:
        total = 0.0
        for j in range(n):
            a = m[0][j]
            if isinstance(a, (int, float)) and a == 0:
                continue
            minor = [row[:j] + row[j + 1:] for row in m[1:]]
            term = a * determinant(minor)
            total = total + term if j % 2 == 0 else total - term
        return total
    return _lu_determinant(m)


def _lu_determinant(m: Sequence[Sequence]):
    a = [list(row) for row in m]
    n = len(a)
    det = 1.0
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(value_of(a[r][k])))
        if value_of(a[piv][k]) == 0.0:
            return 0.0 * a[k][k] if isinstance(a[k][k], DualScalar) else 0.0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det = det * a[k][k]
        for r in range(k + 1, n):
            factor = a[r][k] / a[k][k]
            for c in range(k + 1, n):
                a[r][c] = a[r][c] - factor * a[k][c]
    return det


def metric_determinant(M: MetricField, p: Sequence[float]) -> DualScalar:
    """det of the component matrix at p, with its exact differential."""
    return dual.promote(determinant(M.dual_matrix(p)), M.dim)


def determinant_value(M: MetricField, p: Sequence[float]) -> float:
    m = M.matrix(p)
    return float(determinant(m.tolist()))


def signature_of_matrix(mat: np.ndarray, tol: float = DEFAULT_ZERO_TOL) -> SignatureReport:
    if tol <= 0:
        raise ValueError("tol must be positive")
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return SignatureReport(0, 0, 0, (), tol)
    if not np.all(np.isfinite(mat)):
        raise EigenFailure("non-finite matrix entries")
    try:
        eig = np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    band = tol * max(1.0, float(np.max(np.abs(eig))))
    n_neg = int(np.sum(eig < -band))
    n_pos = int(np.sum(eig > band))
    return SignatureReport(n_neg, len(eig) - n_neg - n_pos, n_pos, tuple(float(v) for v in eig), tol)


def signature_at(M: MetricField, p: Sequence[float], tol: float = DEFAULT_ZERO_TOL) -> SignatureReport:
    return signature_of_matrix(M.matrix(p), tol)


@dataclass(frozen=True)
class Frame:
    timelike: np.ndarray
    spatial: tuple[np.ndarray, ...]

    def vectors(self) -> list[np.ndarray]:
        return [self.timelike, *self.spatial]


def _frame_from_matrix(G: np.ndarray, V: np.ndarray, pivot_tol: float = 1e-12) -> Frame:
    n = G.shape[0]
    sig = signature_of_matrix(G)
    if sig.n_zero:
        raise DegenerateMetric("metric is degenerate at this point")
    norm_v = float(V @ G @ V)
    if not norm_v < 0.0:
        raise NotTimelike(f"vector is not timelike: g(V,V) = {norm_v}")
    vhat = V / math.sqrt(-norm_v)
    candidates = [np.eye(n)[i] + float(np.eye(n)[i] @ G @ vhat) * vhat for i in range(n)]
    spatial = []
    for _ in range(n - 1):
        norms = [float(c @ G @ c) for c in candidates]
        k = int(np.argmax(np.abs(norms)))
        if abs(norms[k]) < pivot_tol:
            raise PivotFailure(f"Gram-Schmidt pivot norm {norms[k]:.3e} below {pivot_tol}")
        e = candidates.pop(k) / math.sqrt(abs(norms[k]))
        sign = math.copysign(1.0, norms[k])
        candidates = [c - sign * float(c @ G @ e) * e for c in candidates]
        spatial.append(e)
    return Frame(vhat, tuple(spatial))


def orthonormal_frame(M: MetricField, p: Sequence[float], V: Sequence[float]) -> Frame:
    """Orthonormal frame {V-hat, E_1, ..., E_{n-1}} with V-hat along V.

    Raises if the result's Gram matrix misses diag(-1, 1, ..., 1) by more
    than 1e-10.
    """
    G = M.matrix(p)
    frame = _frame_from_matrix(G, np.asarray(V, dtype=float))
    B = np.array(frame.vectors()).T
    gram = B.T @ G @ B
    target = np.diag([-1.0] + [1.0] * (M.dim - 1))
    if np.max(np.abs(gram - target)) > 1e-10:
        raise PivotFailure(f"frame Gram matrix off by {np.max(np.abs(gram - target)):.3e}", p)
    return frame
