"""Random triples in co-moving form, for property tests and sweeps."""

from __future__ import annotations

import numpy as np

from sigflip.geometry import Chart, MetricField, VectorField
from sigflip.transform import Triple

COORD_NAMES = ("t", "x", "y", "z")


def _term(rng: np.random.Generator, coords, scale: float) -> str:
    a, b, c = (float(v) for v in rng.uniform(-1.0, 1.0, 3) * scale)
    k, m = rng.integers(len(coords), size=2)
    return f"({a!r} + {b!r}*{coords[k]} + {c!r}*sin({coords[m]}))"


def random_comoving_triple(rng: np.random.Generator, n: int = 2, scale: float = 0.05):
    """A Lorentzian g = eta + small smooth perturbation, V = d_0 / sqrt(-g_00), random f.

    Per-entry perturbations are bounded by 3*scale, which keeps g Lorentzian
    for n <= 4 at the default scale. Returns (triple, sources).
    """
    coords = COORD_NAMES[:n]
    chart = Chart(coords, [(-1.0, 1.0)] * n)
    rows = [["0"] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            base = "-1" if i == j == 0 else ("1" if i == j else "0")
            rows[i][j] = rows[j][i] = f"{base} + {_term(rng, coords, scale)}"
    V = [f"1/sqrt(-({rows[0][0]}))"] + ["0"] * (n - 1)
    c = [float(v) for v in rng.uniform(-1.0, 1.0, 4)]
    c0 = float(rng.uniform(0.5, 1.5))
    f = (
        f"{c0!r} + {c[0]!r}*{coords[0]} + {c[1]!r}*{coords[-1]}"
        f" + {c[2]!r}*{coords[0]}*{coords[-1]} + {c[3]!r}*cos({coords[1]})"
    )
    triple = Triple(MetricField.from_matrix(chart, rows), VectorField.from_specs(chart, V), chart.parse(f))
    return triple, {"g": rows, "V": V, "f": f}
