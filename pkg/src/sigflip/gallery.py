"""Built-in signature-changing metrics with known answers."""

from __future__ import annotations

from dataclasses import dataclass

from sigflip.errors import UnknownGalleryItem
from sigflip.geometry import Chart, MetricField, VectorField
from sigflip.hypersurface import RadicalClass
from sigflip.transform import Triple


@dataclass(frozen=True)
class Truth:
    h_description: str
    radical_class: RadicalClass
    induced_signature: tuple[int, int, int]
    f_expression: str | None


@dataclass(frozen=True)
class GalleryItem:
    name: str
    chart: Chart
    triple: Triple | None
    gt_metric: MetricField
    truth: Truth
    grid: tuple[int, ...]
    # expression strings, echoed into configs and reports
    sources: dict


_SPECS = {
    # ds^2 = x dt^2 + dx^2: H = {x = 0} and the radical d_t is tangent to it
    "kriele2d": dict(
        coords=("t", "x"),
        g=[["-1", "0"], ["0", "1"]],
        V=["1", "0"],
        f="1+x",
        gt=[["x", "0"], ["0", "1"]],
        truth=Truth("x = 0", RadicalClass.TANGENT, (0, 1, 0), "1+x"),
        grid=(11, 11),
    ),
    "transverse2d": dict(
        coords=("t", "x"),
        g=[["-1", "0"], ["0", "1"]],
        V=["1", "0"],
        f="1+t",
        gt=[["t", "0"], ["0", "1"]],
        truth=Truth("t = 0", RadicalClass.TRANSVERSE, (0, 0, 1), "1+t"),
        grid=(11, 11),
    ),
    "transverse3d": dict(
        coords=("t", "x", "y"),
        g=[["-1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        V=["1", "0", "0"],
        f="1+t",
        gt=[["t", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        truth=Truth("t = 0", RadicalClass.TRANSVERSE, (0, 0, 2), "1+t"),
        grid=(7, 7, 7),
    ),
}

NAMES = tuple(_SPECS)


def get(name: str) -> GalleryItem:
    try:
        spec = _SPECS[name]
    except KeyError:
        raise UnknownGalleryItem(f"unknown gallery item {name!r}; choose from {', '.join(NAMES)}") from None
    coords = spec["coords"]
    chart = Chart(coords, [(-1.0, 1.0)] * len(coords))
    triple = Triple(
        MetricField.from_matrix(chart, spec["g"]),
        VectorField.from_specs(chart, spec["V"]),
        chart.parse(spec["f"]),
    )
    return GalleryItem(
        name=name,
        chart=chart,
        triple=triple,
        gt_metric=MetricField.from_matrix(chart, spec["gt"]),
        truth=spec["truth"],
        grid=spec["grid"],
        sources={"g": spec["g"], "V": spec["V"], "f": spec["f"], "gt": spec["gt"]},
    )
