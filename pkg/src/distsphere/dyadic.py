"""Dyadic-cube analysis of a distance field.

Certified oscillation enclosures, density classification of cubes, an exact
dynamic program for optimal dyadic covers, and the light/heavy split built
from it.

All enclosures lean on one fact: a distance field is 1-Lipschitz, so its
extrema over the nodes inside a cube bracket its true extrema over the cube
within slack h*sqrt(d)/2 (every point is at most that far from a node). The
image of a cube under a continuous function on a compact connected set is a
compact interval, so the 1-dimensional content of f(Q) equals the
oscillation max f - min f, and the node enclosure [osc_lo, osc_hi] brackets
it. Costs always use the conservative upper end osc_hi, so every certificate
holds for the true field, not just the sampled one.

Dyadic cubes are restricted to subcubes of the unit cube: a larger cube never
decreases a cover cost, since both the oscillation and the side factor grow.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    CertificateError,
    ContentNotSmallError,
    DomainError,
    ResolutionError,
    ResourceGuardError,
)
from .field import DistanceField, grid_site_distances
from .sets import SiteSet

MAX_CELLS = 1 << 24


def c_d(d: int) -> float:
    """Dimension constant sqrt(d) + 1 linking small oscillation to density."""
    return math.sqrt(d) + 1.0


@dataclass(frozen=True, order=True)
class DyadicCube:
    """The closed cube prod_k [a_k * 2^-level, (a_k + 1) * 2^-level]."""

    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise DomainError("cube level must be >= 0")
        n = 1 << self.level
        if any(not (0 <= a < n) for a in self.coords):
            raise DomainError("cube coordinates out of range for level")

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    def lo(self) -> tuple[float, ...]:
        return tuple(a * self.side for a in self.coords)

    def hi(self) -> tuple[float, ...]:
        return tuple((a + 1) * self.side for a in self.coords)

    def children(self) -> list["DyadicCube"]:
        out = []
        for off in itertools.product((0, 1), repeat=self.d):
            out.append(DyadicCube(self.level + 1, tuple(2 * a + o for a, o in zip(self.coords, off))))
        return out

    def block(self, finer_level: int) -> tuple[slice, ...]:
        """Index block of this cube among level-`finer_level` cells (or node blocks)."""
        f = 1 << (finer_level - self.level)
        return tuple(slice(a * f, (a + 1) * f) for a in self.coords)

    def to_report(self) -> dict:
        return {"level": self.level, "coords": list(self.coords)}


@dataclass(frozen=True)
class CubeStats:
    """Node extrema over a cube plus the Lipschitz enclosure of the true oscillation."""

    cube: DyadicCube
    f_min_nodes: float
    f_max_nodes: float
    slack: float  # h * sqrt(d) / 2 of the sampling grid

    @property
    def osc_lo(self) -> float:
        return self.f_max_nodes - self.f_min_nodes

    @property
    def osc_hi(self) -> float:
        return self.osc_lo + 2.0 * self.slack


class CellSet:
    """A region stored as a set of fixed-level dyadic cells with exact measure."""

    def __init__(self, level: int, mask: np.ndarray):
        n = 1 << level
        if mask.dtype != bool or mask.shape != (n,) * mask.ndim:
            raise DomainError("cell mask shape does not match level")
        if mask.size > MAX_CELLS:
            raise ResourceGuardError("cell count exceeds guard")
        mask.setflags(write=False)
        self.level = level
        self.mask = mask

    @classmethod
    def empty(cls, level: int, d: int) -> "CellSet":
        return cls(level, np.zeros(((1 << level),) * d, dtype=bool))

    @classmethod
    def full(cls, level: int, d: int) -> "CellSet":
        return cls(level, np.ones(((1 << level),) * d, dtype=bool))

    @classmethod
    def from_cells(cls, level: int, d: int, cells) -> "CellSet":
        mask = np.zeros(((1 << level),) * d, dtype=bool)
        for c in cells:
            mask[tuple(c)] = True
        return cls(level, mask)

    @property
    def d(self) -> int:
        return self.mask.ndim

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        # cell count times an exact power of two: exact in double precision
        return self.count * 2.0 ** (-self.d * self.level)

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def cells(self) -> list[tuple[int, ...]]:
        return [tuple(c) for c in np.argwhere(self.mask)]

    def at_level(self, level: int) -> "CellSet":
        if level < self.level:
            raise DomainError("can only refine a cell set, not coarsen it")
        m = self.mask
        f = 1 << (level - self.level)
        for axis in range(self.d):
            m = np.repeat(m, f, axis=axis)
        return CellSet(level, m.copy())

    def __and__(self, other: "CellSet") -> "CellSet":
        if other.level != self.level:
            raise DomainError("cell sets at different levels")
        return CellSet(self.level, self.mask & other.mask)

    def __or__(self, other: "CellSet") -> "CellSet":
        if other.level != self.level:
            raise DomainError("cell sets at different levels")
        return CellSet(self.level, self.mask | other.mask)

    def subset_of(self, other: "CellSet") -> bool:
        if other.level != self.level:
            raise DomainError("cell sets at different levels")
        return bool(np.all(other.mask | ~self.mask))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CellSet)
            and other.level == self.level
            and np.array_equal(self.mask, other.mask)
        )

    def __repr__(self) -> str:
        return f"CellSet(level={self.level}, count={self.count})"


def _corner_extrema(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Min and max over the 2^d corner nodes of every grid cell."""
    d = values.ndim
    mn = mx = None
    for off in itertools.product((0, 1), repeat=d):
        sl = tuple(slice(o, values.shape[k] - 1 + o) for k, o in enumerate(off))
        sub = values[sl]
        if mn is None:
            mn, mx = sub.copy(), sub.copy()
        else:
            np.minimum(mn, sub, out=mn)
            np.maximum(mx, sub, out=mx)
    return mn, mx


def _block_reduce(arr: np.ndarray, op) -> np.ndarray:
    """Reduce each 2^d block to one value, halving every axis."""
    for axis in range(arr.ndim):
        even = tuple(slice(0, None, 2) if k == axis else slice(None) for k in range(arr.ndim))
        odd = tuple(slice(1, None, 2) if k == axis else slice(None) for k in range(arr.ndim))
        arr = op(arr[even], arr[odd])
    return arr


class StatsPyramid:
    """Node extrema of a field for every dyadic cube of levels 0..field.level.

    mins[l][a] / maxs[l][a] are the extrema over all field nodes in the closed
    level-l cube with coordinates a. Children blocks overlap their parents on
    shared faces, so a pairwise min/max reduction is exact.
    """

    def __init__(self, field: DistanceField):
        self.field = field
        self.slack = field.h * math.sqrt(field.d) / 2.0
        mn, mx = _corner_extrema(field.values)
        mins = {field.level: mn}
        maxs = {field.level: mx}
        for lev in range(field.level - 1, -1, -1):
            mn = _block_reduce(mn, np.minimum)
            mx = _block_reduce(mx, np.maximum)
            mins[lev] = mn
            maxs[lev] = mx
        self.mins = mins
        self.maxs = maxs

    def osc_lo(self, level: int) -> np.ndarray:
        return self.maxs[level] - self.mins[level]

    def osc_hi(self, level: int) -> np.ndarray:
        return self.osc_lo(level) + 2.0 * self.slack

    def stats(self, cube: DyadicCube) -> CubeStats:
        if cube.level > self.field.level:
            raise ResolutionError("cube is finer than the field")
        idx = tuple(cube.coords)
        return CubeStats(
            cube=cube,
            f_min_nodes=float(self.mins[cube.level][idx]),
            f_max_nodes=float(self.maxs[cube.level][idx]),
            slack=self.slack,
        )


def cube_stats(field: DistanceField, cube: DyadicCube) -> CubeStats:
    """Node extrema over the closed cube, computed directly from the field."""
    if cube.level > field.level:
        raise ResolutionError("cube is finer than the field")
    f = 1 << (field.level - cube.level)
    block = tuple(slice(a * f, (a + 1) * f + 1) for a in cube.coords)
    sub = field.values[block]
    return CubeStats(
        cube=cube,
        f_min_nodes=float(sub.min()),
        f_max_nodes=float(sub.max()),
        slack=field.h * math.sqrt(field.d) / 2.0,
    )


def h1_image_content(field: DistanceField, cube: DyadicCube) -> tuple[float, float]:
    """Certified enclosure of the 1-content of f(Q).

    f(Q) is a compact interval [min f, max f], whose 1-dimensional content is
    its length, i.e. the oscillation of f over Q.
    """
    st = cube_stats(field, cube)
    return (st.osc_lo, st.osc_hi)


# ---------------------------------------------------------------------------
# density


@dataclass(frozen=True)
class DensityVerdict:
    verdict: str  # "dense" | "not-dense" | "undetermined"
    m_star: float  # max over audit nodes of dist(node, K ∩ Q); inf if K ∩ Q is empty
    witness: tuple[float, ...]
    eps: float
    audit_level: int
    slack: float

    def to_report(self) -> dict:
        return {
            "verdict": self.verdict,
            "m_star": None if math.isinf(self.m_star) else self.m_star,
            "witness": list(self.witness),
            "eps": self.eps,
            "audit_level": self.audit_level,
            "slack": self.slack,
        }


def covering_radius(sites: SiteSet, cube: DyadicCube, audit_level: int,
                    _cache: dict | None = None) -> tuple[float, tuple[float, ...]]:
    """Max over level-`audit_level` nodes in Q of the distance to K ∩ Q (closed cube).

    Returns (+inf, cube corner) when K ∩ Q is empty. The witness is the first
    extremal audit node in C order.
    """
    if audit_level < cube.level:
        raise DomainError("audit level must be at least the cube level")
    key = (cube.level, cube.coords, audit_level)
    if _cache is not None and key in _cache:
        return _cache[key]
    lo = np.array(cube.lo())
    hi = np.array(cube.hi())
    restricted = sites.in_box(lo, hi)
    if restricted is None:
        result = (math.inf, tuple(lo))
    else:
        spacing = 2.0 ** -audit_level
        n = (1 << (audit_level - cube.level)) + 1
        dist = grid_site_distances(restricted.coords, lo, spacing, (n,) * cube.d)
        flat = int(np.argmax(dist))
        idx = np.unravel_index(flat, dist.shape)
        witness = tuple(float(lo[k] + idx[k] * spacing) for k in range(cube.d))
        result = (float(dist.max()), witness)
    if _cache is not None:
        _cache[key] = result
    return result


def is_eps_dense(sites: SiteSet, cube: DyadicCube, eps: float, audit_level: int,
                 _cache: dict | None = None) -> DensityVerdict:
    """Three-valued density verdict for a cube.

    dense: certified (audit slack accounted for) that every point of Q is
    within eps*side(Q) of K ∩ Q. not-dense: some audit node is a certified
    counterexample. undetermined: the sampling slack straddles the threshold.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    m, witness = covering_radius(sites, cube, audit_level, _cache=_cache)
    slack = 2.0 ** -audit_level * math.sqrt(cube.d) / 2.0
    threshold = eps * cube.side
    if m >= threshold:
        verdict = "not-dense"
    elif m + slack < threshold:
        verdict = "dense"
    else:
        verdict = "undetermined"
    return DensityVerdict(verdict=verdict, m_star=m, witness=witness, eps=eps,
                          audit_level=audit_level, slack=slack)


@dataclass(frozen=True)
class DenseRegion:
    """Certified inner approximation of the union of eps-dense cubes."""

    cells: CellSet
    cubes: tuple[DyadicCube, ...]  # maximal dense cubes found by the scan
    eps: float
    max_level: int
    audit_level: int

    def to_report(self) -> dict:
        return {
            "op": "dense",
            "params": {"eps": self.eps, "max_level": self.max_level, "audit_level": self.audit_level},
            "dense_cubes": [q.to_report() for q in self.cubes],
            "measure": self.cells.measure,
            "cell_level": self.cells.level,
            "cell_count": self.cells.count,
            "notes": [
                "density uses the closed-cube convention for K∩Q",
                f"scan truncated at cube level {self.max_level}; certified inner approximation only",
            ],
        }


def dense_region(sites: SiteSet, eps: float, max_level: int, audit_level: int,
                 _cache: dict | None = None) -> DenseRegion:
    """Union of all certified-dense dyadic cubes of levels 0..max_level.

    Monotone in eps by set inclusion; descendants of a certified cube are
    skipped (they add no new cells).
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if audit_level < max_level:
        raise DomainError("audit level must be at least max_level")
    d = sites.d
    dense: list[DyadicCube] = []

    def scan(cube: DyadicCube):
        v = is_eps_dense(sites, cube, eps, audit_level, _cache=_cache)
        if v.verdict == "dense":
            dense.append(cube)
            return
        if cube.level < max_level:
            for child in cube.children():
                scan(child)

    scan(DyadicCube(0, (0,) * d))
    mask = np.zeros(((1 << audit_level),) * d, dtype=bool)
    for q in dense:
        mask[q.block(audit_level)] = True
    return DenseRegion(cells=CellSet(audit_level, mask), cubes=tuple(dense), eps=eps,
                       max_level=max_level, audit_level=audit_level)


# ---------------------------------------------------------------------------
# optimal covers


@dataclass(frozen=True)
class CubeCover:
    """A dyadic cover of a region together with its per-cube costs."""

    cubes: tuple[DyadicCube, ...]
    costs: tuple[float, ...]
    value: float  # optimal cover cost as computed by the tree recursion
    covered: CellSet
    max_level: int

    @property
    def total(self) -> float:
        return float(sum(self.costs))

    def to_report(self) -> dict:
        return {
            "cover": [
                {"level": q.level, "coords": list(q.coords), "cost": c}
                for q, c in zip(self.cubes, self.costs)
            ],
            "value": self.value,
            "max_level": self.max_level,
        }


def _children_sum(arr: np.ndarray) -> np.ndarray:
    """Sum of the 2^d children values per parent, accumulated in C order."""
    d = arr.ndim
    total = None
    for off in itertools.product((0, 1), repeat=d):
        sl = tuple(slice(o, None, 2) for o in off)
        sub = arr[sl]
        total = sub.astype(float) if total is None else total + sub
    return total


def _region_masks(region: CellSet, max_level: int) -> dict[int, np.ndarray]:
    """Nonempty-intersection masks for cubes of every level 0..max_level.

    A cube intersects the region iff it contains a region cell (coarser cubes)
    or its ancestor cell belongs to the region (finer cubes); shared faces do
    not count as intersection.
    """
    masks = {region.level: region.mask}
    m = region.mask
    for lev in range(region.level - 1, -1, -1):
        m = _block_reduce(m, np.logical_or)
        masks[lev] = m
    m = region.mask
    for lev in range(region.level + 1, max_level + 1):
        for axis in range(region.d):
            m = np.repeat(m, 2, axis=axis)
        masks[lev] = m
    return masks


def mapping_content(field: DistanceField, region: CellSet, max_level: int,
                    pyramid: StatsPyramid | None = None,
                    return_cover: bool = True) -> tuple[float, CubeCover | None]:
    """Minimum cost of a dyadic cover of the region, cost = osc_hi(Q) * side(Q)^(d-1).

    Exact minimum over all covers by dyadic cubes of level <= max_level, by a
    bottom-up tree recursion: a cube not meeting the region costs nothing; at
    max_level the cube itself must be taken; otherwise take the cheaper of the
    cube and the sum of its children, preferring the cube on ties. The value
    is an upper bound for the untruncated infimum and is non-increasing in
    max_level.
    """
    if max_level > field.level:
        raise ResolutionError("max_level is finer than the field")
    if region.level > max_level:
        raise ResolutionError("region cells are finer than max_level")
    if region.d != field.d:
        raise DomainError("region and field dimensions differ")
    d = field.d
    if pyramid is None:
        pyramid = StatsPyramid(field)
    inter = _region_masks(region, max_level)
    costs = {
        lev: pyramid.osc_hi(lev) * (2.0 ** -lev) ** (d - 1)
        for lev in range(max_level + 1)
    }
    best = np.where(inter[max_level], costs[max_level], 0.0)
    take = {max_level: inter[max_level].copy()}
    for lev in range(max_level - 1, -1, -1):
        child_sum = _children_sum(best)
        take[lev] = inter[lev] & (costs[lev] <= child_sum)
        best = np.where(inter[lev], np.minimum(costs[lev], child_sum), 0.0)
    value = float(best.reshape(-1)[0])
    if not return_cover:
        return value, None

    cubes: list[DyadicCube] = []
    cube_costs: list[float] = []

    def visit(cube: DyadicCube):
        idx = tuple(cube.coords)
        if not inter[cube.level][idx]:
            return
        if cube.level == max_level or take[cube.level][idx]:
            cubes.append(cube)
            cube_costs.append(float(costs[cube.level][idx]))
            return
        for child in cube.children():
            visit(child)

    visit(DyadicCube(0, (0,) * d))
    cover = CubeCover(cubes=tuple(cubes), costs=tuple(cube_costs), value=value,
                      covered=region, max_level=max_level)
    return value, cover


def band_region(field: DistanceField, r0: float, r1: float) -> CellSet:
    """Cells of the field grid whose corner node values all lie in [r0, r1]."""
    if not (0 <= r0 <= r1):
        raise DomainError("need 0 <= r0 <= r1")
    mn, mx = _corner_extrema(field.values)
    return CellSet(field.level, (mn >= r0) & (mx <= r1))


# ---------------------------------------------------------------------------
# light/heavy splits


@dataclass
class SplitReport:
    """Outcome of a certified light/heavy split of a cover.

    Light cubes satisfy osc_hi < threshold * side; the remainder is the part
    of the region covered only by heavy cubes. When the cover cost is below
    delta, the remainder measure is guaranteed below sqrt(delta).
    """

    params: dict
    value: float
    cover: CubeCover
    light: tuple[DyadicCube, ...]
    heavy: tuple[DyadicCube, ...]
    remainder: CellSet
    remainder_measure: float
    content_ok: bool
    remainder_ok: bool
    density: tuple[DensityVerdict, ...] | None = None
    dense_ok: bool | None = None
    notes: list[str] = dc_field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        checks = [self.content_ok, self.remainder_ok]
        if self.dense_ok is not None:
            checks.append(self.dense_ok)
        return all(checks)

    def to_report(self) -> dict:
        obj = {
            "op": self.params.get("op", "split"),
            "params": {k: v for k, v in self.params.items() if k != "op"},
            "value": self.value,
            "cover": self.cover.to_report()["cover"],
            "light_cubes": [q.to_report() for q in self.light],
            "heavy_cubes": [q.to_report() for q in self.heavy],
            "G_measure": self.remainder_measure,
            "verdicts": {
                "content_ok": self.content_ok,
                "remainder_ok": self.remainder_ok,
            },
            "notes": list(self.notes),
        }
        if self.density is not None:
            obj["dense_cubes"] = [
                {"cube": q.to_report(), "certificate": v.to_report()}
                for q, v in zip(self.light, self.density)
            ]
            obj["verdicts"]["dense_ok"] = self.dense_ok
        return obj


def light_heavy_split(field: DistanceField, region: CellSet, delta: float, max_level: int,
                      require_small: bool = True,
                      pyramid: StatsPyramid | None = None) -> SplitReport:
    """Split the optimal cover into light cubes (osc_hi < sqrt(delta) * side) and the rest.

    With cover cost below delta, the region cells covered only by heavy cubes
    have total measure below sqrt(delta): each heavy cube has cost at least
    sqrt(delta) * side^d = sqrt(delta) * |Q|, so their total volume is below
    delta / sqrt(delta).
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    if pyramid is None:
        pyramid = StatsPyramid(field)
    value, cover = mapping_content(field, region, max_level, pyramid=pyramid)
    content_ok = value < delta
    if require_small and not content_ok:
        raise ContentNotSmallError(f"cover cost {value!r} is not below delta {delta!r}")
    root = math.sqrt(delta)
    light: list[DyadicCube] = []
    heavy: list[DyadicCube] = []
    for q in cover.cubes:
        if pyramid.stats(q).osc_hi < root * q.side:
            light.append(q)
        else:
            heavy.append(q)
    fine = region.at_level(max_level)
    heavy_mask = np.zeros_like(fine.mask)
    for q in heavy:
        heavy_mask[q.block(max_level)] = True
    remainder = CellSet(max_level, fine.mask & heavy_mask)
    remainder_ok = remainder.measure < root
    if content_ok and not remainder_ok:
        raise CertificateError("remainder measure bound failed despite small cover cost")
    return SplitReport(
        params={"op": "split", "delta": delta, "sqrt_delta": root, "max_level": max_level},
        value=value,
        cover=cover,
        light=tuple(light),
        heavy=tuple(heavy),
        remainder=remainder,
        remainder_measure=remainder.measure,
        content_ok=content_ok,
        remainder_ok=remainder_ok,
        notes=[f"cover truncated at level {max_level}; value is an upper bound"],
    )


def decompose(field: DistanceField, sites: SiteSet, region: CellSet, eps: float,
              max_level: int, audit_level: int | None = None,
              require_small: bool = True,
              pyramid: StatsPyramid | None = None) -> SplitReport:
    """Certified decomposition of a region: dense cubes plus a small remainder.

    Runs the light/heavy split with delta = (eps / c_d)^2. Light cubes have
    osc_hi < (eps/c_d) * side, hence true oscillation below (eps/c_d) * side,
    which certifies them eps-dense (small oscillation forces a nearby site for
    every point); each one is re-audited directly. The remainder G has measure
    below eps/c_d < eps whenever the cover cost is below delta.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    cd = c_d(field.d)
    gamma = (eps / cd) ** 2
    if audit_level is None:
        audit_level = field.level + 2
    split = light_heavy_split(field, region, gamma, max_level,
                              require_small=require_small, pyramid=pyramid)
    cache: dict = {}
    verdicts = tuple(is_eps_dense(sites, q, eps, audit_level, _cache=cache) for q in split.light)
    dense_ok = all(v.verdict == "dense" for v in verdicts)
    split.params = {
        "op": "decompose",
        "eps": eps,
        "gamma": gamma,
        "c_d": cd,
        "eps_over_c_d": eps / cd,
        "max_level": max_level,
        "audit_level": audit_level,
    }
    split.density = verdicts
    split.dense_ok = dense_ok
    split.remainder_ok = split.remainder_measure < eps / cd
    split.notes.append("density certificates use the closed-cube convention for K∩Q")
    return split


# ---------------------------------------------------------------------------
# oscillation/density audit


@dataclass(frozen=True)
class DensityAudit:
    """Full-scan audit: every low-oscillation cube must be certified dense."""

    delta: float
    eps: float
    max_level: int
    audit_level: int
    qualifying: tuple[DyadicCube, ...]
    not_dense: tuple[tuple[DyadicCube, DensityVerdict], ...]
    undetermined: tuple[tuple[DyadicCube, DensityVerdict], ...]

    @property
    def qualifying_count(self) -> int:
        return len(self.qualifying)

    @property
    def undetermined_rate(self) -> float:
        if not self.qualifying:
            return 0.0
        return len(self.undetermined) / len(self.qualifying)

    def to_report(self) -> dict:
        return {
            "op": "density-audit",
            "params": {
                "delta": self.delta,
                "eps": self.eps,
                "max_level": self.max_level,
                "audit_level": self.audit_level,
            },
            "qualifying": len(self.qualifying),
            "not_dense": [
                {"cube": q.to_report(), "certificate": v.to_report()} for q, v in self.not_dense
            ],
            "undetermined": len(self.undetermined),
        }


def density_audit(field: DistanceField, sites: SiteSet, delta: float, max_level: int,
                  audit_level: int, pyramid: StatsPyramid | None = None,
                  _cache: dict | None = None) -> DensityAudit:
    """Audit every cube with osc_hi(Q) < delta * side(Q) for (c_d * delta)-density.

    Small oscillation of a distance field over a cube forces a site near every
    point of the cube, so a not-dense verdict here indicates an implementation
    bug, not a property of the input.
    """
    if delta <= 0:
        raise DomainError("delta must be positive")
    if max_level > field.level:
        raise ResolutionError("max_level is finer than the field")
    if pyramid is None:
        pyramid = StatsPyramid(field)
    eps = c_d(field.d) * delta
    qualifying: list[DyadicCube] = []
    not_dense = []
    undetermined = []
    for lev in range(max_level + 1):
        osc_hi = pyramid.osc_hi(lev)
        side = 2.0 ** -lev
        hits = np.argwhere(osc_hi < delta * side)
        for coords in hits:
            cube = DyadicCube(lev, tuple(int(c) for c in coords))
            qualifying.append(cube)
            v = is_eps_dense(sites, cube, eps, audit_level, _cache=_cache)
            if v.verdict == "not-dense":
                not_dense.append((cube, v))
            elif v.verdict == "undetermined":
                undetermined.append((cube, v))
    return DensityAudit(
        delta=delta,
        eps=eps,
        max_level=max_level,
        audit_level=audit_level,
        qualifying=tuple(qualifying),
        not_dense=tuple(not_dense),
        undetermined=tuple(undetermined),
    )
