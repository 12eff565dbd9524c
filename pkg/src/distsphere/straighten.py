"""Polar straightening of circular distance spheres on an annulus.

For the one-point set K = {(0,0)}, the map g(x, y) = (sqrt(x^2+y^2),
arctan(y/x)) sends every sphere {dist = r} intersected with the annulus
E = {1/2 <= |p| <= 1} ∩ [0,1]^2 onto a vertical segment {r} x [0, pi/2]:
the first image coordinate of a sphere sample is the radius itself. The
audit samples extracted sphere chains, maps them through g, and measures
how vertical the images are, how well the first coordinate tracks r, and a
local bi-Lipschitz ratio estimate. The differential of g on the annulus has
singular values 1 and 1/rho <= 2, so nearby sample pairs should never
stretch by more than a factor of about 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptySampleError, SingularPointError
from .field import DistanceField
from .spheres import extract_sphere

ANNULUS_INNER = 0.5
ANNULUS_OUTER = 1.0


def polar_map(p) -> tuple[float, float]:
    """(x, y) -> (|p|, arctan(y/x)), extended continuously to x = 0 as pi/2.

    Defined on the closed right half-plane minus the origin.
    """
    x, y = float(p[0]), float(p[1])
    if x == 0.0 and y == 0.0:
        raise SingularPointError("polar map is singular at the origin")
    if x < 0.0:
        raise DomainError("polar map restricted to first coordinate >= 0")
    return (math.hypot(x, y), math.atan2(y, x))


def from_polar(rho: float, theta: float) -> tuple[float, float]:
    return (rho * math.cos(theta), rho * math.sin(theta))


def in_annulus(p, tol: float = 0.0) -> bool:
    """Membership in E = {1/2 <= |p| <= 1} ∩ [0,1]^2, with optional slack."""
    x, y = float(p[0]), float(p[1])
    if not (-tol <= x <= 1 + tol and -tol <= y <= 1 + tol):
        return False
    rho = math.hypot(x, y)
    return ANNULUS_INNER - tol <= rho <= ANNULUS_OUTER + tol


@dataclass(frozen=True)
class StraighteningAudit:
    """Sampled evidence that the polar map straightens the spheres over the annulus."""

    phi_table: tuple[tuple[float, float], ...]  # (r, observed first coordinate)
    spreads: tuple[float, ...]                  # per radius: max - min of first coordinates
    injective: bool
    l_hat: float                                # max over local pairs of max(ratio, 1/ratio)
    roundtrip_max: float
    level_consistent: bool                      # equal f-values iff equal first coordinates
    sample_counts: tuple[int, ...]

    def to_report(self) -> dict:
        return {
            "op": "straighten-audit",
            "phi": [{"r": r, "phi": p} for r, p in self.phi_table],
            "spreads": list(self.spreads),
            "injective": self.injective,
            "L_hat": self.l_hat,
            "roundtrip_max": self.roundtrip_max,
            "level_consistent": self.level_consistent,
            "sample_counts": list(self.sample_counts),
        }


def _lattice_points_in_annulus(step: float, margin: float) -> np.ndarray:
    xs = np.arange(0.0, 1.0 + step / 2, step)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    rho = np.linalg.norm(pts, axis=1)
    keep = (rho >= ANNULUS_INNER + margin) & (rho <= ANNULUS_OUTER - margin)
    keep &= (pts[:, 0] >= margin) & (pts[:, 1] >= 0)
    return pts[keep]


def straightening_audit(field: DistanceField, radii, clip_tol: float = 1e-6,
                        pair_step: float = 1 / 64, pair_offset: float = 1e-3) -> StraighteningAudit:
    """Audit the polar straightening against extracted sphere chains.

    Sphere samples come from the field's marching-squares chains, clipped to
    the annulus with tolerance clip_tol (vertices sit within interpolation
    error of the true sphere, so an exact clip would drop boundary radii).
    The bi-Lipschitz ratio is estimated on nearby pairs (offset pair_offset)
    from a deterministic lattice: the singular-value bound applies to the
    differential, so the estimate uses local pairs, not far-apart ones.
    """
    radii = [float(r) for r in radii]
    if any(not (ANNULUS_INNER <= r <= ANNULUS_OUTER) for r in radii):
        raise DomainError("radii must lie within the annulus range [1/2, 1]")

    phi_table: list[tuple[float, float]] = []
    spreads: list[float] = []
    counts: list[int] = []
    roundtrip = 0.0
    level_consistent = True
    tol = 1e-9

    for r in radii:
        poly = extract_sphere(field, r)
        samples = []
        for verts in poly.chains:
            for v in verts:
                if in_annulus(v, tol=clip_tol):
                    samples.append((float(v[0]), float(v[1])))
        if not samples:
            raise EmptySampleError(f"no sphere samples inside the annulus at r={r}")
        images = [polar_map(p) for p in samples]
        firsts = np.array([im[0] for im in images])
        phi_table.append((r, float(firsts.mean())))
        spreads.append(float(firsts.max() - firsts.min()))
        counts.append(len(samples))
        for (px, py), (rho, theta) in zip(samples, images):
            bx, by = from_polar(rho, theta)
            roundtrip = max(roundtrip, math.hypot(bx - px, by - py))
            # equal distance values must coincide with equal first coordinates
            f_here = math.hypot(px, py)
            if (abs(f_here - rho) <= tol) != (abs(rho - f_here) <= tol):
                level_consistent = False

    phis = [p for _, p in phi_table]
    injective = len(set(phis)) == len(phis) and all(
        phis[i] < phis[i + 1] for i in range(len(phis) - 1)
    ) if len(phis) > 1 else True

    base = _lattice_points_in_annulus(pair_step, margin=2 * pair_offset)
    dirs = [
        (math.cos(2 * math.pi * k / 8), math.sin(2 * math.pi * k / 8)) for k in range(8)
    ]
    l_hat = 1.0
    for p in base:
        gp = polar_map(p)
        for ux, uy in dirs:
            q = (p[0] + pair_offset * ux, p[1] + pair_offset * uy)
            if not in_annulus(q):
                continue
            gq = polar_map(q)
            src = math.hypot(q[0] - p[0], q[1] - p[1])
            img = math.hypot(gq[0] - gp[0], gq[1] - gp[1])
            ratio = img / src
            l_hat = max(l_hat, ratio, 1.0 / ratio)

    return StraighteningAudit(
        phi_table=tuple(phi_table),
        spreads=tuple(spreads),
        injective=bool(injective),
        l_hat=float(l_hat),
        roundtrip_max=float(roundtrip),
        level_consistent=level_consistent,
        sample_counts=tuple(counts),
    )
