"""Report assembly for the CLI commands.

Every function here is deterministic for a fixed config: sample order is the
grid order and random draws come from the config seed.
"""

from __future__ import annotations

import numpy as np

from sigflip import gallery
from sigflip.config import Config
from sigflip.geometry import MetricField, VectorField, determinant_value, signature_at
from sigflip.hypersurface import (
    RadicalClass,
    is_comoving,
    locate_hypersurface,
    positivity_margin,
    verify_biconditional,
    verify_det_factorization,
)
from sigflip.transform import (
    EPS_H,
    decompose_field,
    frame_identity_deviation,
    recover_at,
    rescaling_image,
    transform,
    triples_equivalent,
)

ROUND_TRIP_TOL = 1e-9
FRAME_TOL = 1e-10
FACTORIZATION_TOL = 1e-10
RESCALING_TOL = 1e-9
RESCALING_FACTORS = (0.5, 2.0, 3.0)
POSITIVITY_TRIALS = 1000


def _verdict(passed, max_deviation, **extra) -> dict:
    out = {"pass": passed, "max_deviation": max_deviation}
    out.update(extra)
    return out


def _skipped(reason: str) -> dict:
    return _verdict(None, None, skipped=reason)


def _metric_for(cfg: Config) -> tuple[MetricField, object]:
    if cfg.mode == "triple":
        T = cfg.triple()
        return transform(T, cfg.chart.grid_points(cfg.grid)), T
    return cfg.metric_field(), None


def signature_grid(gt: MetricField, points, tol: float) -> list[dict]:
    return [{"point": list(p), "signature": list(signature_at(gt, p, tol).counts)} for p in points]


def _positivity(gt, hpoints, seed: int) -> dict:
    if not hpoints:
        return _verdict(True, 0.0, min_ratio=None, points=0)
    margins = [positivity_margin(gt, h.q, POSITIVITY_TRIALS, seed, h.radical_basis) for h in hpoints]
    low = min(margins)
    return _verdict(low > 0.0, max(0.0, -low), min_ratio=low, points=len(hpoints))


def _biconditional(T, hpoints, tol: float) -> dict:
    rep = verify_biconditional(T, hpoints, tol)
    bad = [max(r.det_gradient_norm, r.df_norm) for r in rep.rows if not r.agree]
    return _verdict(rep.verdict, max(bad, default=0.0), points=len(rep.rows))


def _factorization(T, points) -> dict:
    if not is_comoving(T, points):
        return _skipped("V is not in co-moving form")
    rep = verify_det_factorization(T, points, FACTORIZATION_TOL)
    return _verdict(rep.passed, rep.max_relative_deviation)


def _round_trip(gt, T, points) -> dict:
    rec = decompose_field(gt, T.V, points)
    f_dev = max(abs(rec.f(list(p)) - T.f(list(p))) for p in points)
    off_h = [p for p in points if abs(T.f(list(p)) - 1.0) >= EPS_H]
    g_dev = max((float(np.max(np.abs(rec.g.matrix(p) - T.g.matrix(p)))) for p in off_h), default=0.0)
    worst = max(f_dev, g_dev)
    return _verdict(worst <= ROUND_TRIP_TOL, worst, f_max_deviation=f_dev, g_max_deviation_off_h=g_dev)


def _rescaling(gt, T, points) -> dict:
    worst_f, worst_eq, ok = 0.0, 0.0, True
    for phi in RESCALING_FACTORS:
        rec = decompose_field(gt, T.V.scaled(phi), points)
        dev = max(abs(rec.f(list(p)) - rescaling_image(T.f(list(p)), phi)) for p in points)
        eq = triples_equivalent(T, rec, points, RESCALING_TOL)
        worst_f = max(worst_f, dev)
        worst_eq = max(worst_eq, eq.max_deviation)
        ok = ok and eq.equivalent and dev <= RESCALING_TOL
    return _verdict(ok, max(worst_f, worst_eq), f_max_deviation=worst_f,
                    equivalence_max_deviation=worst_eq, factors=list(RESCALING_FACTORS))


def _h_location(T, hpoints, tol: float) -> dict:
    dev = max((abs(T.f(list(h.q)) - 1.0) for h in hpoints), default=0.0)
    return _verdict(dev <= tol, dev)


def _induced(hpoints) -> dict:
    ok = all(
        h.induced_signature.n_neg == 0
        and h.induced_signature.n_zero == (1 if h.radical_class is RadicalClass.TANGENT else 0)
        for h in hpoints
    )
    return _verdict(ok, None, points=len(hpoints))


def _gallery_truth(name: str, hpoints) -> dict:
    truth = gallery.get(name).truth
    classes = sorted({h.radical_class.value for h in hpoints})
    sigs = sorted({h.induced_signature.counts for h in hpoints})
    ok = bool(hpoints) and classes == [truth.radical_class.value] and sigs == [truth.induced_signature]
    return _verdict(ok, None, expected_class=truth.radical_class.value,
                    found_classes=classes, expected_induced=list(truth.induced_signature),
                    found_induced=[list(s) for s in sigs])


def _locate(cfg: Config, gt, T, threads):
    tol = cfg.tolerances
    return locate_hypersurface(
        gt, cfg.grid, zero_tol=tol.zero_eig, classify_tol=tol.classify,
        f=None if T is None else T.f, threads=threads,
    )


def run_analyze(cfg: Config, threads: int | None = None) -> dict:
    gt, T = _metric_for(cfg)
    points = cfg.chart.grid_points(cfg.grid)
    hpoints = _locate(cfg, gt, T, threads)
    verdicts = {}
    if T is None:
        no_triple = "metric mode has no triple"
        verdicts["biconditional"] = _skipped(no_triple)
        verdicts["det_factorization"] = _skipped(no_triple)
        verdicts["positivity"] = _positivity(gt, hpoints, cfg.seed)
        verdicts["round_trip"] = _skipped(no_triple)
    else:
        verdicts["biconditional"] = _biconditional(T, hpoints, cfg.tolerances.classify)
        verdicts["det_factorization"] = _factorization(T, points)
        verdicts["positivity"] = _positivity(gt, hpoints, cfg.seed)
        verdicts["round_trip"] = _round_trip(gt, T, points)
    return {
        "command": "analyze",
        "config_echo": cfg.echo(),
        "signature_grid": signature_grid(gt, points, cfg.tolerances.zero_eig),
        "h_points": [h.to_json() for h in hpoints],
        "verdicts": verdicts,
        "timings": {},
    }


def run_verify(cfg: Config, threads: int | None = None) -> tuple[dict, bool]:
    T = cfg.triple()
    points = cfg.chart.grid_points(cfg.grid)
    gt = transform(T, points)
    hpoints = _locate(cfg, gt, T, threads)
    verdicts = {
        "biconditional": _biconditional(T, hpoints, cfg.tolerances.classify),
        "det_factorization": _factorization(T, points),
        "positivity": _positivity(gt, hpoints, cfg.seed),
        "round_trip": _round_trip(gt, T, points),
        "frame_identities": (lambda d: _verdict(d <= FRAME_TOL, d))(frame_identity_deviation(T, points)),
        "rescaling": _rescaling(gt, T, points),
        "h_location": _h_location(T, hpoints, cfg.tolerances.h_point),
        "induced_metric": _induced(hpoints),
    }
    if cfg.gallery_name:
        verdicts["gallery_truth"] = _gallery_truth(cfg.gallery_name, hpoints)
    passed = all(v["pass"] is not False for v in verdicts.values())
    report = {
        "command": "verify",
        "config_echo": cfg.echo(),
        "signature_grid": signature_grid(gt, points, cfg.tolerances.zero_eig),
        "h_points": [h.to_json() for h in hpoints],
        "verdicts": verdicts,
        "passed": passed,
        "timings": {},
    }
    return report, passed


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def transform_table(cfg: Config) -> tuple[list[str], list[list[float]]]:
    T = cfg.triple()
    points = cfg.chart.grid_points(cfg.grid)
    gt = transform(T, points)
    pairs = _pairs(cfg.dimension)
    header = [*cfg.coords, *(f"gt_{i}{j}" for i, j in pairs), "f", "det_gt"]
    rows = []
    for p in points:
        G = gt.matrix(p)
        rows.append([*p, *(G[i, j] for i, j in pairs), T.f(list(p)), determinant_value(gt, p)])
    return header, rows


def decompose_table(cfg: Config, vector: list[str] | None) -> tuple[list[str], list[list[float]]]:
    gt = cfg.metric_field()
    specs = vector if vector is not None else cfg.V
    if specs is None:
        specs = ["1"] + ["0"] * (cfg.dimension - 1)
    V = VectorField.from_specs(cfg.chart, specs)
    points = cfg.chart.grid_points(cfg.grid)
    decompose_field(gt, V, points)  # validates every sample
    pairs = _pairs(cfg.dimension)
    header = [*cfg.coords, "f", *(f"g_{i}{j}" for i, j in pairs), "extrapolated"]
    rows = []
    for p in points:
        f_value, G, near = recover_at(gt, V, p)
        rows.append([*p, f_value, *(G[i, j] for i, j in pairs), int(near)])
    return header, rows
