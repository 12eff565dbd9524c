"""Deterministic SVG rendering of sets, sphere chains, and cube decompositions.

Every figure lives in a fixed unit-square viewBox (0 0 1000 1000) with the
mathematical y axis pointing up. Output depends only on the report contents:
fixed float formatting, fixed element order, legend embedded as a comment.
"""

from __future__ import annotations

import math

from .errors import ReportKindError

VIEW = 1000.0

_STYLE = {
    "site": 'fill="#000000"',
    "sphere": 'fill="none" stroke="#cc2222" stroke-width="2"',
    "dense": 'fill="#6699cc" fill-opacity="0.45" stroke="#335577" stroke-width="1"',
    "heavy": 'fill="#dd8833" fill-opacity="0.55" stroke="#884400" stroke-width="1"',
    "outline": 'fill="none" stroke="#888888" stroke-width="1"',
}

_KIND_OPS = {
    "mask": {"set"},
    "spheres": {"spheres"},
    "cubes": {"decompose", "dense", "split", "content"},
    "demo": {"straighten-demo"},
}


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _px(x: float, y: float) -> tuple[str, str]:
    return _fmt(VIEW * x), _fmt(VIEW * (1.0 - y))


def _circle(x: float, y: float, r: float, style: str) -> str:
    cx, cy = _px(x, y)
    return f'<circle cx="{cx}" cy="{cy}" r="{_fmt(r)}" {style}/>'


def _path(vertices, closed: bool, style: str) -> str:
    parts = []
    for i, (x, y) in enumerate(vertices):
        px, py = _px(float(x), float(y))
        parts.append(f"{'M' if i == 0 else 'L'} {px} {py}")
    if closed:
        parts.append("Z")
    return f'<path d="{" ".join(parts)}" {style}/>'


def _rect(level: int, coords, style: str) -> str:
    side = 2.0 ** -level
    x0 = coords[0] * side
    y0 = coords[1] * side
    px, py = _px(x0, y0 + side)  # upper-left corner after the y flip
    w = _fmt(VIEW * side)
    return f'<rect x="{px}" y="{py}" width="{w}" height="{w}" {style}/>'


def _document(body: list[str], legend: str) -> str:
    head = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 1000">',
        f"<!-- legend: {legend} -->",
        f'<rect x="0" y="0" width="1000" height="1000" fill="#ffffff"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _sites_svg(sites) -> list[str]:
    return [_circle(float(p[0]), float(p[1]), 3.0, _STYLE["site"]) for p in sites]


def render_svg(report: dict, kind: str) -> str:
    """Render a report of the matching kind to an SVG document string."""
    if kind not in _KIND_OPS:
        raise ReportKindError(f"unknown render kind {kind!r}")
    op = report.get("op")
    if op not in _KIND_OPS[kind]:
        raise ReportKindError(f"report op {op!r} does not match render kind {kind!r}")

    if kind == "mask":
        body = _sites_svg(report.get("sites", []))
        return _document(body, "sites=black dots")

    if kind == "spheres":
        body = _sites_svg(report.get("sites", []))
        for chain in report.get("chains", []):
            body.append(_path(chain["vertices"], bool(chain["closed"]), _STYLE["sphere"]))
        return _document(body, "sites=black dots; sphere chains=red paths")

    if kind == "cubes":
        body = []
        for entry in report.get("dense_cubes", []):
            cube = entry["cube"] if "cube" in entry else entry
            body.append(_rect(int(cube["level"]), cube["coords"], _STYLE["dense"]))
        for cube in report.get("light_cubes", []):
            if not any(cube == (e.get("cube") or e) for e in report.get("dense_cubes", [])):
                body.append(_rect(int(cube["level"]), cube["coords"], _STYLE["dense"]))
        for cube in report.get("heavy_cubes", []):
            body.append(_rect(int(cube["level"]), cube["coords"], _STYLE["heavy"]))
        body.extend(_sites_svg(report.get("sites", [])))
        return _document(body, "dense/light cubes=blue; heavy cubes=orange; sites=black dots")

    # demo: one panel of the straightening figure
    panel = report.get("panel")
    body = []
    if panel == "domain":
        outline = _annulus_outline()
        body.append(_path(outline, True, _STYLE["outline"]))
        for chain in report.get("chains", []):
            body.append(_path(chain["vertices"], bool(chain["closed"]), _STYLE["sphere"]))
        legend = "annulus outline=gray; sphere samples=red"
    elif panel == "image":
        rect = [(0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 1.0)]
        body.append(_path(rect, True, _STYLE["outline"]))
        for chain in report.get("chains", []):
            body.append(_path(chain["vertices"], bool(chain["closed"]), _STYLE["sphere"]))
        legend = "image of the annulus=gray box; straightened spheres=red; vertical axis = angle/(pi/2)"
    else:
        raise ReportKindError(f"demo report needs panel 'domain' or 'image', got {panel!r}")
    return _document(body, legend)


def _annulus_outline(steps: int = 128) -> list[tuple[float, float]]:
    """Quarter annulus 1/2 <= |p| <= 1 in the first quadrant as one closed polyline."""
    outer = [
        (math.cos(t), math.sin(t))
        for t in (k * (math.pi / 2) / steps for k in range(steps + 1))
    ]
    inner = [
        (0.5 * math.cos(t), 0.5 * math.sin(t))
        for t in (k * (math.pi / 2) / steps for k in range(steps, -1, -1))
    ]
    return outer + inner
