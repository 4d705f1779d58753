"""Run configuration: JSON files or ``gallery:<name>`` shortcuts."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from sigflip import gallery
from sigflip.errors import ConfigError
from sigflip.geometry import Chart, MetricField, VectorField
from sigflip.transform import Triple

MODES = ("triple", "metric")


@dataclass(frozen=True)
class Tolerances:
    zero_eig: float = 1e-8
    h_point: float = 1e-8
    classify: float = 1e-6


@dataclass(frozen=True)
class Config:
    mode: str
    dimension: int
    coords: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]
    grid: tuple[int, ...]
    metric: tuple[tuple[str, ...], ...] | None = None
    g: tuple[tuple[str, ...], ...] | None = None
    V: tuple[str, ...] | None = None
    f: str | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 42
    source: str = ""

    @property
    def chart(self) -> Chart:
        return Chart(self.coords, self.domain)

    @property
    def gallery_name(self) -> str | None:
        return self.source[len("gallery:"):] if self.source.startswith("gallery:") else None

    def triple(self) -> Triple:
        if self.mode != "triple":
            raise ConfigError("this command needs mode 'triple'")
        chart = self.chart
        return Triple(
            MetricField.from_matrix(chart, self.g),
            VectorField.from_specs(chart, self.V),
            chart.parse(self.f),
        )

    def metric_field(self) -> MetricField:
        if self.mode != "metric":
            raise ConfigError("this command needs mode 'metric'")
        return MetricField.from_matrix(self.chart, self.metric)

    def echo(self) -> dict:
        out = {
            "source": self.source,
            "mode": self.mode,
            "dimension": self.dimension,
            "coords": list(self.coords),
            "domain": [list(d) for d in self.domain],
            "grid": list(self.grid),
        }
        if self.mode == "metric":
            out["metric"] = [list(r) for r in self.metric]
        else:
            out["g"] = [list(r) for r in self.g]
            out["V"] = list(self.V)
            out["f"] = self.f
        out["tolerances"] = asdict(self.tolerances)
        out["seed"] = self.seed
        return out


def _str_matrix(raw, n: int, key: str) -> tuple[tuple[str, ...], ...]:
    if not isinstance(raw, list) or len(raw) != n or any(not isinstance(r, list) or len(r) != n for r in raw):
        raise ConfigError(f"'{key}' must be a {n}x{n} array")
    return tuple(tuple(str(v) for v in row) for row in raw)


def from_dict(data: dict, source: str = "") -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    mode = data.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    try:
        coords = tuple(str(c) for c in data["coords"])
        n = int(data.get("dimension", len(coords)))
        domain = tuple((float(lo), float(hi)) for lo, hi in data["domain"])
        grid = tuple(int(k) for k in data["grid"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if not (len(coords) == len(domain) == len(grid) == n):
        raise ConfigError("coords, domain and grid must all have length 'dimension'")
    if any(k < 2 for k in grid):
        raise ConfigError("grid entries must be >= 2")
    tol_raw = data.get("tolerances", {})
    unknown = set(tol_raw) - {"zero_eig", "h_point", "classify"}
    if unknown:
        raise ConfigError(f"unknown tolerances: {sorted(unknown)}")
    tolerances = Tolerances(**{k: float(v) for k, v in tol_raw.items()})
    if min(tolerances.zero_eig, tolerances.h_point, tolerances.classify) <= 0:
        raise ConfigError("tolerances must be positive")
    kwargs = {}
    if mode == "metric":
        kwargs["metric"] = _str_matrix(data.get("metric"), n, "metric")
        if "V" in data:
            kwargs["V"] = tuple(str(v) for v in data["V"])
    else:
        kwargs["g"] = _str_matrix(data.get("g"), n, "g")
        V = data.get("V")
        if not isinstance(V, list) or len(V) != n:
            raise ConfigError(f"'V' must be a list of {n} expressions")
        kwargs["V"] = tuple(str(v) for v in V)
        if not isinstance(data.get("f"), (str, int, float)):
            raise ConfigError("'f' must be an expression string")
        kwargs["f"] = str(data["f"])
    cfg = Config(
        mode=mode, dimension=n, coords=coords, domain=domain, grid=grid,
        tolerances=tolerances, seed=int(data.get("seed", 42)), source=source, **kwargs,
    )
    # parse every expression now so bad input is a config error
    chart = cfg.chart
    if mode == "metric":
        cfg.metric_field()
        if cfg.V is not None:
            VectorField.from_specs(chart, cfg.V)
    else:
        cfg.triple()
    return cfg


def from_gallery(name: str) -> Config:
    item = gallery.get(name)
    return Config(
        mode="triple",
        dimension=item.chart.dim,
        coords=item.chart.coords,
        domain=item.chart.domain,
        grid=item.grid,
        g=tuple(tuple(r) for r in item.sources["g"]),
        V=tuple(item.sources["V"]),
        f=item.sources["f"],
        source=f"gallery:{name}",
    )


def load(source: str) -> Config:
    if source.startswith("gallery:"):
        return from_gallery(source[len("gallery:"):])
    path = Path(source)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {source}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {source}: {exc}") from exc
    return from_dict(data, source=str(path))
