"""Finite site models of subsets of the unit cube.

Every set is realized as a finite list of sites in [0,1]^d: explicit points,
centers of occupied grid cells, or canonical middle-thirds fractal
approximations. Distance to a finite set equals distance to its closure, so
the finite realization makes every downstream certificate exactly checkable.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptySetError, ResourceGuardError

MAX_FRACTAL_DEPTH = 12
MAX_SITES = 1 << 22
MAX_MASK_LEVEL = 12

KINDS = ("finite", "cantor-dust", "sierpinski-carpet", "grid-mask")


@dataclass(frozen=True)
class SiteSet:
    """A nonempty, duplicate-free, lexicographically sorted site list."""

    coords: np.ndarray  # shape (m, d), float64, read-only

    def __post_init__(self):
        c = self.coords
        if c.ndim != 2 or c.shape[0] == 0:
            raise EmptySetError("site set is empty")
        c.setflags(write=False)

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.coords.shape[0]

    def points(self) -> list[tuple[float, ...]]:
        return [tuple(row) for row in self.coords]

    def in_box(self, lo, hi) -> "SiteSet | None":
        """Sites inside the closed box [lo, hi]; None if there are none."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        keep = np.all((self.coords >= lo) & (self.coords <= hi), axis=1)
        if not keep.any():
            return None
        return SiteSet(self.coords[keep])


def site_set(points, d: int | None = None) -> SiteSet:
    """Canonicalize a point list: validate range, dedupe, sort lexicographically."""
    coords = np.asarray(points, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    if coords.size == 0:
        raise EmptySetError("site set is empty")
    if d is not None and coords.shape[1] != d:
        raise DomainError(f"expected dimension {d}, got {coords.shape[1]}")
    if coords.shape[0] > MAX_SITES:
        raise ResourceGuardError(f"site count {coords.shape[0]} exceeds guard {MAX_SITES}")
    if np.any(coords < 0.0) or np.any(coords > 1.0) or not np.all(np.isfinite(coords)):
        raise DomainError("site coordinates must lie in [0,1]^d")
    # unique(axis=0) also sorts rows lexicographically
    coords = np.unique(coords, axis=0)
    return SiteSet(coords)


@dataclass(frozen=True)
class SetSpec:
    """Declarative description of a set; realize with make_set()."""

    kind: str
    d: int
    points: tuple[tuple[float, ...], ...] | None = None
    depth: int | None = None
    mask_level: int | None = None
    mask_bits: np.ndarray | None = None  # bool, shape (2**mask_level,)*d

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown set kind {self.kind!r}")
        if self.d < 1:
            raise DomainError("dimension must be >= 1")
        if self.kind == "finite":
            if self.points is None:
                raise DomainError("finite kind requires points")
        elif self.kind in ("cantor-dust", "sierpinski-carpet"):
            if self.depth is None or self.depth < 0:
                raise DomainError("fractal kind requires depth >= 0")
            if self.depth > MAX_FRACTAL_DEPTH:
                raise ResourceGuardError(f"fractal depth {self.depth} exceeds guard {MAX_FRACTAL_DEPTH}")
            if self.kind == "sierpinski-carpet" and self.d != 2:
                raise DomainError("sierpinski-carpet is two-dimensional")
        elif self.kind == "grid-mask":
            if self.mask_level is None or self.mask_bits is None:
                raise DomainError("grid-mask kind requires mask_level and mask_bits")
            if self.mask_level < 0 or self.mask_level > MAX_MASK_LEVEL:
                raise ResourceGuardError(f"mask level {self.mask_level} out of guard range")
            n = 1 << self.mask_level
            if self.mask_bits.shape != (n,) * self.d:
                raise DomainError("mask_bits shape does not match mask_level and d")
            self.mask_bits.setflags(write=False)


def _cantor_interval_starts(depth: int) -> np.ndarray:
    """Integer left endpoints (over denominator 3**depth) of the retained intervals."""
    starts = np.array([0], dtype=np.int64)
    for _ in range(depth):
        starts = np.concatenate([3 * starts, 3 * starts + 2])
    starts.sort()
    return starts


def cantor_dust(depth: int, d: int) -> SiteSet:
    """Centers of the generation-`depth` middle-thirds construction, d-fold product.

    Interval length is 3**-depth; the site count is 2**(d*depth).
    """
    if d not in (1, 2, 3):
        raise DomainError("cantor dust supports d in {1, 2, 3}")
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if depth > MAX_FRACTAL_DEPTH or (1 << (d * depth)) > MAX_SITES:
        raise ResourceGuardError("cantor dust size exceeds guard")
    starts = _cantor_interval_starts(depth)
    centers = (2 * starts + 1) / (2.0 * 3**depth)
    grids = np.meshgrid(*([centers] * d), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    return site_set(coords, d=d)


def sierpinski_carpet(depth: int) -> SiteSet:
    """Centers of the 8**depth squares retained by the depth-generation carpet (d=2)."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if depth > MAX_FRACTAL_DEPTH or 8**depth > MAX_SITES:
        raise ResourceGuardError("carpet size exceeds guard")
    cells = np.zeros((1, 2), dtype=np.int64)
    keep = [(i, j) for i in range(3) for j in range(3) if not (i == 1 and j == 1)]
    for _ in range(depth):
        cells = np.concatenate([3 * cells + np.array(off, dtype=np.int64) for off in keep])
    centers = (cells + 0.5) / float(3**depth)
    return site_set(centers, d=2)


def make_set(spec: SetSpec) -> SiteSet:
    """Canonical finite realization of a SetSpec (sites sorted lexicographically)."""
    if spec.kind == "finite":
        if not spec.points:
            raise EmptySetError("finite set has no points")
        return site_set(spec.points, d=spec.d)
    if spec.kind == "cantor-dust":
        return cantor_dust(spec.depth, spec.d)
    if spec.kind == "sierpinski-carpet":
        return sierpinski_carpet(spec.depth)
    # grid-mask: centers of occupied cells
    occupied = np.argwhere(spec.mask_bits)
    if occupied.shape[0] == 0:
        raise EmptySetError("grid mask has no occupied cells")
    centers = (occupied + 0.5) * (2.0 ** -spec.mask_level)
    return site_set(centers, d=spec.d)


def rasterize(sites: SiteSet, level: int) -> SetSpec:
    """Occupancy mask at the given level.

    Cells are half-open, [i*2^-level, (i+1)*2^-level), except the top faces of
    the unit cube, which are closed so the cells partition [0,1]^d.
    """
    if level < 0:
        raise DomainError("level must be >= 0")
    if level > MAX_MASK_LEVEL:
        raise ResourceGuardError(f"mask level {level} exceeds guard {MAX_MASK_LEVEL}")
    n = 1 << level
    idx = np.minimum(np.floor(sites.coords * n).astype(np.int64), n - 1)
    bits = np.zeros((n,) * sites.d, dtype=bool)
    bits[tuple(idx.T)] = True
    return SetSpec(kind="grid-mask", d=sites.d, mask_level=level, mask_bits=bits)


def _bits_to_b64(bits: np.ndarray) -> str:
    packed = np.packbits(bits.ravel(order="C").astype(np.uint8))
    return base64.b64encode(packed.tobytes()).decode("ascii")


def _b64_to_bits(s: str, level: int, d: int) -> np.ndarray:
    n = 1 << level
    total = n**d
    raw = np.frombuffer(base64.b64decode(s.encode("ascii")), dtype=np.uint8)
    flat = np.unpackbits(raw)[:total].astype(bool)
    return flat.reshape((n,) * d)


def set_spec_to_json(spec: SetSpec) -> dict:
    obj: dict = {"kind": spec.kind, "d": spec.d}
    if spec.kind == "finite":
        obj["points"] = [list(p) for p in spec.points]
    elif spec.kind in ("cantor-dust", "sierpinski-carpet"):
        obj["depth"] = spec.depth
    else:
        obj["mask"] = {"level": spec.mask_level, "bits": _bits_to_b64(spec.mask_bits)}
    return obj


def set_spec_from_json(obj: dict) -> SetSpec:
    kind = obj["kind"]
    d = int(obj["d"])
    if kind == "finite":
        return SetSpec(kind=kind, d=d, points=tuple(tuple(float(x) for x in p) for p in obj["points"]))
    if kind in ("cantor-dust", "sierpinski-carpet"):
        return SetSpec(kind=kind, d=d, depth=int(obj["depth"]))
    if kind == "grid-mask":
        level = int(obj["mask"]["level"])
        bits = _b64_to_bits(obj["mask"]["bits"], level, d)
        return SetSpec(kind=kind, d=d, mask_level=level, mask_bits=bits)
    raise DomainError(f"unknown set kind {kind!r}")


def save_set(spec: SetSpec, path: str | Path) -> None:
    from .canonical import canonical_dumps

    Path(path).write_text(canonical_dumps(set_spec_to_json(spec)) + "\n", encoding="ascii")


def load_set(path: str | Path) -> SetSpec:
    return set_spec_from_json(json.loads(Path(path).read_text(encoding="ascii")))
