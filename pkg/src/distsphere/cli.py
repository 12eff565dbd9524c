"""Command-line front end and pipeline orchestration.

Commands: gen, field, spheres, dense, content, decompose, porosity,
demo-straighten, render, pipeline. All flags are long-form. Exit codes:
0 success, 1 usage/validation error, 2 certificate failure. Reports are
canonical JSON (sorted keys, 17-significant-digit floats), so repeated runs
are byte-identical.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .canonical import canonical_dumps, write_report
from .dyadic import band_region, c_d, decompose, dense_region, mapping_content
from .errors import CertificateError, DistsphereError, UsageError
from .field import DistanceField, edt_grid, lipschitz_audit, read_dsf, write_dsf
from .porosity import empty_dense_check, porosity_estimate
from .render import render_svg
from .sets import (
    SetSpec,
    load_set,
    make_set,
    rasterize,
    save_set,
    set_spec_to_json,
)
from .spheres import extract_sphere
from .straighten import straightening_audit

LIPSCHITZ_TOL = 1e-12


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit(2); usage errors must be 1
        raise UsageError(message)


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_points(text: str) -> list[tuple[float, ...]]:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            pts.append(tuple(float(tok) for tok in chunk.split(",")))
    return pts


def _spec_from_args(args) -> SetSpec:
    kind = args.kind
    if kind == "carpet":
        kind = "sierpinski-carpet"
    if kind == "finite":
        if not args.points:
            raise UsageError("--points is required for --kind finite")
        pts = _parse_points(args.points)
        if not pts:
            raise UsageError("no points given")
        return SetSpec(kind="finite", d=len(pts[0]), points=tuple(pts))
    if kind in ("cantor-dust", "sierpinski-carpet"):
        if args.depth is None:
            raise UsageError("--depth is required for fractal kinds")
        d = 2 if kind == "sierpinski-carpet" else args.d
        return SetSpec(kind=kind, d=d, depth=args.depth)
    if kind == "grid-mask":
        if not args.source_set or args.mask_level is None:
            raise UsageError("--source-set and --mask-level are required for --kind grid-mask")
        sites = make_set(load_set(args.source_set))
        return rasterize(sites, args.mask_level)
    raise UsageError(f"unknown kind {kind!r}")


def _sites_report(sites) -> dict:
    return {"op": "set", "d": sites.d, "sites": [list(p) for p in sites.points()]}


def _spheres_report(poly, sites=None) -> dict:
    obj = {
        "op": "spheres",
        "params": {"r": poly.radius},
        "chains": [
            {"closed": bool(c), "vertices": [[float(x), float(y)] for x, y in verts]}
            for verts, c in zip(poly.chains, poly.closed)
        ],
        "total_length": poly.total_length(),
    }
    if sites is not None:
        obj["sites"] = [list(p) for p in sites.points()]
    return obj


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PipelineConfig:
    set_spec: SetSpec
    level: int
    eps: float
    max_level: int
    radii: tuple[float, ...]
    outdir: Path
    band: tuple[float, float] = (0.5, 0.5 + 2.0**-6)
    samples: int = 8
    audit_level: int | None = None
    render: bool = True

    def validate(self) -> None:
        if self.eps <= 0:
            raise UsageError("eps must be positive")
        if self.max_level < 0 or self.level < self.max_level:
            raise UsageError("need field level >= max-level >= 0")
        top = math.sqrt(self.set_spec.d)
        if any(not (0 <= r <= top) for r in self.radii):
            raise UsageError("radii must lie in [0, sqrt(d)]")
        if not (0 <= self.band[0] <= self.band[1]):
            raise UsageError("band must satisfy 0 <= r0 <= r1")
        if self.samples < 1:
            raise UsageError("samples must be >= 1")


@dataclass
class PipelineResult:
    outdir: Path
    summary: dict
    certificates_ok: bool
    files: list[str] = dc_field(default_factory=list)


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """set -> field -> spheres -> dense region -> decomposition -> porosity.

    Writes canonical JSON reports plus SVG figures into the output directory
    and aggregates certificate verdicts. Validation happens before anything is
    written.
    """
    config.validate()
    sites = make_set(config.set_spec)
    out = Path(config.outdir)
    out.mkdir(parents=True, exist_ok=True)
    files: list[str] = []
    verdicts: dict[str, bool] = {}

    def emit(name: str, obj) -> None:
        write_report(out / name, obj)
        files.append(name)

    def emit_svg(name: str, report: dict, kind: str) -> None:
        (out / name).write_text(render_svg(report, kind), encoding="ascii")
        files.append(name)

    save_set(config.set_spec, out / "set.json")
    files.append("set.json")

    field = edt_grid(sites, config.level)
    write_dsf(field, out / "field.dsf")
    files.append("field.dsf")
    slope = lipschitz_audit(field)
    verdicts["lipschitz_ok"] = slope <= 1.0 + LIPSCHITZ_TOL

    set_report = _sites_report(sites)
    if config.render and sites.d == 2:
        emit_svg("mask.svg", set_report, "mask")

    sphere_reports = []
    if sites.d == 2:
        for i, r in enumerate(config.radii):
            poly = extract_sphere(field, r)
            rep = _spheres_report(poly, sites)
            emit(f"spheres_{i}.json", rep)
            if config.render:
                emit_svg(f"spheres_{i}.svg", rep, "spheres")
            sphere_reports.append(rep)

    audit_level = config.audit_level
    if audit_level is None:
        audit_level = min(config.max_level + 3, 12)
    region = dense_region(sites, config.eps, config.max_level, audit_level)
    emit("dense.json", region.to_report())

    band = band_region(field, config.band[0], config.band[1])
    split = decompose(field, sites, band, config.eps, config.max_level,
                      audit_level=audit_level, require_small=False)
    dec_report = split.to_report()
    dec_report["sites"] = [list(p) for p in sites.points()]
    dec_report["band"] = [config.band[0], config.band[1]]
    emit("decompose.json", dec_report)
    verdicts["content_ok"] = split.content_ok
    verdicts["remainder_ok"] = split.remainder_ok
    verdicts["dense_ok"] = bool(split.dense_ok)
    if config.render and sites.d == 2:
        emit_svg("cubes.svg", dec_report, "cubes")

    por_level = max(3, min(config.level, 8))
    por = porosity_estimate(sites, config.samples, por_level)
    check = empty_dense_check(sites, 0.45 * por.c_hat, config.max_level, audit_level)
    por_report = por.to_report()
    por_report["op"] = "porosity"
    por_report["corollary"] = check.to_report()
    emit("porosity.json", por_report)

    summary = {
        "op": "pipeline",
        "params": {
            "eps": config.eps,
            "gamma": (config.eps / c_d(sites.d)) ** 2,
            "c_d": c_d(sites.d),
            "field_level": config.level,
            "max_level": config.max_level,
            "audit_level": audit_level,
            "radii": list(config.radii),
            "band": [config.band[0], config.band[1]],
        },
        "set": {"kind": config.set_spec.kind, "d": sites.d, "sites": len(sites)},
        "max_slope": slope,
        "dense_measure": region.cells.measure,
        "G_measure": split.remainder_measure,
        "porosity_c_hat": por.c_hat,
        "verdicts": verdicts,
        "files": sorted(files) + ["summary.json"],
    }
    emit("summary.json", summary)
    return PipelineResult(outdir=out, summary=summary,
                          certificates_ok=all(verdicts.values()), files=files)


# ---------------------------------------------------------------------------
# commands


def _build_parser() -> _Parser:
    parser = _Parser(prog="distsphere", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a set file")
    p.add_argument("--kind", required=True,
                   choices=["finite", "cantor-dust", "carpet", "grid-mask"])
    p.add_argument("--depth", type=int)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--points", help="finite kind: 'x,y;x,y;...'")
    p.add_argument("--source-set", help="grid-mask kind: set file to rasterize")
    p.add_argument("--mask-level", type=int, help="grid-mask kind: rasterization level")
    p.add_argument("--out", required=True)

    p = sub.add_parser("field", help="compute a distance field")
    p.add_argument("--set", required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("spheres", help="extract a distance sphere (d=2)")
    p.add_argument("--field", required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("dense", help="certified dense region")
    p.add_argument("--set", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-level", type=int, required=True)
    p.add_argument("--audit-level", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("content", help="optimal dyadic cover cost of a region")
    p.add_argument("--set", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--max-level", type=int, required=True)
    p.add_argument("--band", help="region = cells with node values in r0,r1 (default: all cells)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("decompose", help="certified dense-plus-remainder decomposition")
    p.add_argument("--set", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-level", type=int, required=True)
    p.add_argument("--audit-level", type=int)
    p.add_argument("--band", help="region r0,r1 (default: all cells)")
    p.add_argument("--allow-large-content", action="store_true",
                   help="report instead of failing when the cover cost is too large")
    p.add_argument("--out", required=True)

    p = sub.add_parser("porosity", help="porosity estimate and empty-dense-region check")
    p.add_argument("--set", required=True)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--max-level", type=int, required=True)
    p.add_argument("--eps", type=float, help="defaults to 0.45 * c_hat")
    p.add_argument("--audit-level", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo-straighten", help="polar straightening audit for K={(0,0)}")
    p.add_argument("--radii", required=True, help="comma-separated radii in [1/2, 1]")
    p.add_argument("--level", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--render-dir", help="also write domain/image SVG panels here")

    p = sub.add_parser("render", help="render a report to SVG")
    p.add_argument("--report", required=True)
    p.add_argument("--kind", required=True, choices=["mask", "spheres", "cubes", "demo"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("pipeline", help="run the full analysis pipeline")
    p.add_argument("--set", help="set file (alternative to --kind)")
    p.add_argument("--kind", choices=["finite", "cantor-dust", "carpet", "grid-mask"])
    p.add_argument("--depth", type=int)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--points")
    p.add_argument("--source-set")
    p.add_argument("--mask-level", type=int)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-level", type=int, required=True)
    p.add_argument("--radii", default="0.2,0.3,0.4")
    p.add_argument("--band", default=None)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--audit-level", type=int)
    p.add_argument("--outdir", required=True)
    p.add_argument("--no-render", action="store_true")
    return parser


def _region_from_band(field: DistanceField, band_arg: str | None):
    if band_arg is None:
        from .dyadic import CellSet

        return CellSet.full(field.level, field.d)
    r0, r1 = _parse_floats(band_arg)
    return band_region(field, r0, r1)


def _cmd_gen(args) -> int:
    save_set(_spec_from_args(args), args.out)
    return 0


def _cmd_field(args) -> int:
    sites = make_set(load_set(args.set))
    write_dsf(edt_grid(sites, args.level), args.out)
    return 0


def _cmd_spheres(args) -> int:
    field = read_dsf(args.field)
    poly = extract_sphere(field, args.r)
    write_report(args.out, _spheres_report(poly))
    return 0


def _cmd_dense(args) -> int:
    sites = make_set(load_set(args.set))
    audit = args.audit_level if args.audit_level is not None else min(args.max_level + 3, 12)
    region = dense_region(sites, args.eps, args.max_level, audit)
    write_report(args.out, region.to_report())
    return 0


def _cmd_content(args) -> int:
    sites = make_set(load_set(args.set))
    field = read_dsf(args.field)
    region = _region_from_band(field, args.band)
    value, cover = mapping_content(field, region, args.max_level)
    report = {
        "op": "content",
        "params": {"max_level": args.max_level, "region_cells": region.count,
                   "region_level": region.level},
        "value": value,
        "cover": cover.to_report()["cover"],
        "sites": [list(p) for p in sites.points()],
        "notes": ["value is an upper bound; cover truncated at max_level"],
    }
    write_report(args.out, report)
    return 0


def _cmd_decompose(args) -> int:
    sites = make_set(load_set(args.set))
    field = read_dsf(args.field)
    region = _region_from_band(field, args.band)
    split = decompose(field, sites, region, args.eps, args.max_level,
                      audit_level=args.audit_level,
                      require_small=not args.allow_large_content)
    report = split.to_report()
    report["sites"] = [list(p) for p in sites.points()]
    write_report(args.out, report)
    return 0 if split.all_ok else 2


def _cmd_porosity(args) -> int:
    sites = make_set(load_set(args.set))
    est = porosity_estimate(sites, args.samples, args.max_level)
    eps = args.eps if args.eps is not None else 0.45 * est.c_hat
    audit = args.audit_level if args.audit_level is not None else min(args.max_level + 3, 12)
    check = empty_dense_check(sites, eps, args.max_level, audit)
    report = est.to_report()
    report["op"] = "porosity"
    report["corollary"] = check.to_report()
    write_report(args.out, report)
    return 0


def _cmd_demo(args) -> int:
    from .sets import site_set

    radii = _parse_floats(args.radii)
    sites = site_set([(0.0, 0.0)])
    field = edt_grid(sites, args.level)
    audit = straightening_audit(field, radii)
    write_report(args.out, audit.to_report())
    if args.render_dir:
        rd = Path(args.render_dir)
        rd.mkdir(parents=True, exist_ok=True)
        domain_chains = []
        image_chains = []
        for r in radii:
            poly = extract_sphere(field, r)
            for verts, closed in zip(poly.chains, poly.closed):
                keep = [v for v in verts if _in_annulus_report(v)]
                if len(keep) < 2:
                    continue
                domain_chains.append({"closed": False, "vertices": [[float(v[0]), float(v[1])] for v in keep]})
                from .straighten import polar_map

                img = [polar_map(v) for v in keep]
                image_chains.append({
                    "closed": False,
                    "vertices": [[rho, theta / (math.pi / 2)] for rho, theta in img],
                })
        dom = {"op": "straighten-demo", "panel": "domain", "chains": domain_chains}
        img = {"op": "straighten-demo", "panel": "image", "chains": image_chains}
        write_report(rd / "demo_domain.json", dom)
        write_report(rd / "demo_image.json", img)
        (rd / "demo_domain.svg").write_text(render_svg(dom, "demo"), encoding="ascii")
        (rd / "demo_image.svg").write_text(render_svg(img, "demo"), encoding="ascii")
    return 0


def _in_annulus_report(v) -> bool:
    from .straighten import in_annulus

    return in_annulus((float(v[0]), float(v[1])), tol=1e-6)


def _cmd_render(args) -> int:
    import json

    report = json.loads(Path(args.report).read_text(encoding="ascii"))
    Path(args.out).write_text(render_svg(report, args.kind), encoding="ascii")
    return 0


def _cmd_pipeline(args) -> int:
    if args.set:
        spec = load_set(args.set)
    elif args.kind:
        spec = _spec_from_args(args)
    else:
        raise UsageError("pipeline needs --set or --kind")
    band = (0.5, 0.5 + 2.0**-6) if args.band is None else tuple(_parse_floats(args.band))
    config = PipelineConfig(
        set_spec=spec,
        level=args.level,
        eps=args.eps,
        max_level=args.max_level,
        radii=tuple(_parse_floats(args.radii)),
        outdir=Path(args.outdir),
        band=band,  # type: ignore[arg-type]
        samples=args.samples,
        audit_level=args.audit_level,
        render=not args.no_render,
    )
    result = run_pipeline(config)
    return 0 if result.certificates_ok else 2


_COMMANDS = {
    "gen": _cmd_gen,
    "field": _cmd_field,
    "spheres": _cmd_spheres,
    "dense": _cmd_dense,
    "content": _cmd_content,
    "decompose": _cmd_decompose,
    "porosity": _cmd_porosity,
    "demo-straighten": _cmd_demo,
    "render": _cmd_render,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CertificateError as exc:
        print(f"certificate failure [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except DistsphereError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


def console() -> None:
    sys.exit(main())
