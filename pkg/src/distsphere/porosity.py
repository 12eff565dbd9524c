"""Porosity estimation and the empty-dense-region check.

A set is porous with constant c when every ball B(p, r) contains a site-free
ball of radius c*r. The estimator searches a deterministic low-discrepancy
sample of centers, with radii on a dyadic schedule, and reports the worst
certified ratio; it never claims a global constant. For a porous set and
eps below half the porosity constant, no dyadic cube is eps-dense, so the
certified dense region must come back empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DenseRegion, DyadicCube, dense_region
from .errors import DomainError
from .sets import SiteSet


@dataclass(frozen=True)
class PorositySample:
    center: tuple[float, ...]
    radius: float
    rho: float
    witness: tuple[float, ...]

    @property
    def ratio(self) -> float:
        return self.rho / self.radius

    def to_report(self) -> dict:
        return {
            "p": list(self.center),
            "r": self.radius,
            "rho": self.rho,
            "ratio": self.ratio,
            "witness": list(self.witness),
        }


@dataclass(frozen=True)
class PorosityEstimate:
    """Certified lower bounds on empty-ball ratios at sampled centers and scales."""

    c_hat: float
    samples: tuple[PorositySample, ...]

    def to_report(self) -> dict:
        return {
            "c_hat": self.c_hat,
            "samples": [s.to_report() for s in self.samples],
            "notes": [
                "sampled centers and dyadic radii only; not a global porosity constant",
                "centers restricted to the unit cube",
            ],
        }


def empty_ball_radius(sites: SiteSet, p, r: float,
                      candidate_level: int | None = None) -> tuple[float, tuple[float, ...]]:
    """Certified lower bound on the largest site-free ball inside B(p, r).

    Candidates are p itself plus the grid nodes of `candidate_level` inside
    B(p, r); each candidate q certifies the ball B(q, min(dist(q, K), r - |q - p|)).
    """
    if r <= 0:
        raise DomainError("radius must be positive")
    p = np.asarray(p, dtype=float)
    d = sites.d
    if candidate_level is None:
        # keep roughly 2^(5d) candidates regardless of r
        candidate_level = max(2, min(12, math.ceil(math.log2(1.0 / r)) + 5))
    spacing = 2.0 ** -candidate_level
    axes = []
    for k in range(d):
        lo = max(0, math.ceil((p[k] - r) / spacing))
        hi = min(1 << candidate_level, math.floor((p[k] + r) / spacing))
        axes.append(np.arange(lo, hi + 1) * spacing)
    if all(len(a) for a in axes):
        grids = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        inside = np.linalg.norm(nodes - p, axis=1) <= r
        nodes = nodes[inside]
    else:
        nodes = np.empty((0, d))
    candidates = np.concatenate([p.reshape(1, d), nodes])
    # dist from every candidate to the nearest site
    diff = candidates[:, None, :] - sites.coords[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).min(axis=1))
    slackless = np.minimum(dist, r - np.linalg.norm(candidates - p, axis=1))
    best = int(np.argmax(slackless))
    return float(slackless[best]), tuple(candidates[best])


def _kronecker_alpha(d: int) -> np.ndarray:
    """Irrational step vector for the low-discrepancy center lattice."""
    # unique positive root of x^(d+1) = x + 1
    x = 1.5
    for _ in range(64):
        x = x - (x ** (d + 1) - x - 1.0) / ((d + 1) * x**d - 1.0)
    return np.array([x ** -(k + 1) for k in range(d)])


def porosity_estimate(sites: SiteSet, samples: int, max_level: int,
                      candidate_offset: int = 5) -> PorosityEstimate:
    """Deterministic porosity estimate: min empty-ball ratio over the sample set.

    Centers follow a Kronecker lattice in the unit cube; radii run over
    2^-j for j = 1..max_level-2.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    if max_level < 3:
        raise DomainError("max_level must be at least 3")
    alpha = _kronecker_alpha(sites.d)
    out: list[PorositySample] = []
    for k in range(samples):
        center = (0.5 + (k + 1) * alpha) % 1.0
        for j in range(1, max_level - 1):
            r = 2.0 ** -j
            rho, witness = empty_ball_radius(
                sites, center, r, candidate_level=min(12, j + candidate_offset)
            )
            out.append(PorositySample(center=tuple(center), radius=r, rho=float(rho),
                                      witness=witness))
    c_hat = min(s.ratio for s in out)
    return PorosityEstimate(c_hat=float(c_hat), samples=tuple(out))


@dataclass(frozen=True)
class EmptyDenseCheck:
    """Result of checking that no dyadic cube is eps-dense."""

    eps: float
    passed: bool
    witness: DyadicCube | None
    region: DenseRegion

    def to_report(self) -> dict:
        return {
            "eps": self.eps,
            "pass": self.passed,
            "witness": None if self.witness is None else self.witness.to_report(),
        }


def empty_dense_check(sites: SiteSet, eps: float, max_level: int,
                      audit_level: int) -> EmptyDenseCheck:
    """Verify that the certified dense region is empty at this eps."""
    region = dense_region(sites, eps, max_level, audit_level)
    witness = region.cubes[0] if region.cubes else None
    return EmptyDenseCheck(eps=eps, passed=region.cells.is_empty, witness=witness,
                           region=region)
