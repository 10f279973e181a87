"""Numerical study of the twistor discriminant locus of a surface.

The locus of {f = 0} is the set of base points whose fiber meets the surface
in fewer than deg(f) points: tangent fibers, fibers through singular points,
and fibers contained in the surface.  Everything here works on finite chart
samples: pointwise discriminant values, Gauss-Newton zero extraction, seeded
deterministic sampling, box-counting dimension, partition censuses, and
chordal/Hausdorff set comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import engine
from .algebra import (
    HomogeneousPolynomial,
    Partition,
    binary_discriminant,
    partition_of,
    restrict_polynomial,
)
from .engine import SurfaceBatch
from .errors import EmptyCloud, InputError, TooFewPoints
from .twistor import ConformalMap, S4Point, embed5_batch, fiber


class _Sentinel:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


LINE_CONTAINED = _Sentinel("LINE_CONTAINED")
FAILED = _Sentinel("FAILED")
DIVERGED = _Sentinel("DIVERGED")

DEFAULT_BOX = ((-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0))
DEFAULT_ZERO_TOL = 1e-8
DEFAULT_CLUSTER_TOL = 1e-6


def _box_array(box) -> np.ndarray:
    b = np.asarray(box if box is not None else DEFAULT_BOX, dtype=float).reshape(4, 2)
    if np.any(b[:, 1] <= b[:, 0]):
        raise InputError("chart box must have lo < hi in every coordinate")
    return b


# ---------------------------------------------------------------------------
# point clouds

@dataclass
class PointCloud:
    """Finite sample of S^4 in chart coordinates with provenance metadata.

    Stored columnar: chart values q1, q2 (complex arrays), an infinity mask,
    and |disc| per point (0 where the fiber is contained, NaN where unknown).
    """

    q1: np.ndarray
    q2: np.ndarray
    inf: np.ndarray
    absdisc: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.q1 = np.asarray(self.q1, dtype=complex)
        self.q2 = np.asarray(self.q2, dtype=complex)
        self.inf = np.asarray(self.inf, dtype=bool)
        self.absdisc = np.asarray(self.absdisc, dtype=float)
        n = len(self.q1)
        if not (len(self.q2) == len(self.inf) == len(self.absdisc) == n):
            raise InputError("cloud columns must have equal length")
        finite_vals = np.concatenate(
            [self.q1.view(float), self.q2.view(float)]
        )
        if n and not np.all(np.isfinite(finite_vals)):
            raise InputError("cloud contains non-finite chart coordinates")

    def __len__(self):
        return len(self.q1)

    def point(self, i: int) -> S4Point:
        if self.inf[i]:
            return S4Point.infinity()
        return S4Point(complex(self.q1[i]), complex(self.q2[i]))

    def points(self):
        return [self.point(i) for i in range(len(self))]

    def embed5(self) -> np.ndarray:
        return embed5_batch(self.q1, self.q2, self.inf)

    def subset(self, mask) -> "PointCloud":
        return PointCloud(
            self.q1[mask], self.q2[mask], self.inf[mask], self.absdisc[mask], dict(self.meta)
        )

    @staticmethod
    def from_points(points, meta=None) -> "PointCloud":
        q1 = np.array([p.q1 for p in points], dtype=complex)
        q2 = np.array([p.q2 for p in points], dtype=complex)
        inf = np.array([p.infinite for p in points], dtype=bool)
        return PointCloud(q1, q2, inf, np.full(len(points), np.nan), meta or {})

    @staticmethod
    def concatenate(clouds, meta=None) -> "PointCloud":
        clouds = list(clouds)
        return PointCloud(
            np.concatenate([c.q1 for c in clouds]),
            np.concatenate([c.q2 for c in clouds]),
            np.concatenate([c.inf for c in clouds]),
            np.concatenate([c.absdisc for c in clouds]),
            meta or {},
        )


# ---------------------------------------------------------------------------
# reports

@dataclass
class CensusReport:
    """Histogram of section partitions over sampled fibers."""

    histogram: dict
    total: int
    cluster_tol: float
    seed: int
    n_failed: int = 0

    def fraction(self, partition: Partition) -> float:
        if self.total == 0:
            return 0.0
        return self.histogram.get(partition, 0) / self.total


@dataclass
class DimensionEstimate:
    """Box-counting slope over dyadic scales of the chart box."""

    value: float
    method: str
    scales: tuple
    counts: tuple
    fit_residual: float
    n_points: int
    n_distinct: int


# ---------------------------------------------------------------------------
# pointwise values

def disc_value(f: HomogeneousPolynomial, q: S4Point, null_tol: float = 1e-10):
    """Normalized discriminant of the fiber restriction, or LINE_CONTAINED.

    Degree-1 restrictions never have repeated roots; their value is the
    constant 1, so hyperplane loci consist of the contained fiber alone.
    """
    p = restrict_polynomial(f, fiber(q))
    if p.is_null(null_tol):
        return LINE_CONTAINED
    if f.degree == 1:
        return 1.0 + 0j
    return binary_discriminant(p)


def chordal_distance(a: S4Point, b: S4Point) -> float:
    """Round metric of S^4 = H u {inf} via the stereographic embedding in R^5."""
    return float(np.linalg.norm(a.embed5() - b.embed5()))


# ---------------------------------------------------------------------------
# refinement and sampling

def refine_zero(
    f: HomogeneousPolynomial,
    q0: S4Point,
    max_iter: int = 80,
    tol: float = DEFAULT_ZERO_TOL,
):
    """Gauss-Newton pull of a single chart point onto the discriminant locus.

    Returns the refined S4Point, or FAILED / DIVERGED.
    """
    if q0.infinite:
        raise InputError("refine_zero needs a finite chart start")
    sb = SurfaceBatch(f)
    x0 = np.array([q0.chart_reals()])
    x, status, _, _ = engine.refine_batch(sb, x0, tol=tol, max_iter=max_iter)
    if status[0] == engine.CONVERGED:
        return S4Point(complex(x[0, 0], x[0, 1]), complex(x[0, 2], x[0, 3]))
    if status[0] == engine.DIVERGED_STATUS:
        return DIVERGED
    return FAILED


def _sample_pass(f, budget, seed, tol, box, max_iter, threads):
    """One chart pass of sample_disc; returns columnar arrays of successes."""
    sb = SurfaceBatch(f)
    starts = engine.stratified_starts(budget, seed, box)

    def worker(a, b):
        x, status, absdisc, is_null = engine.refine_batch(
            sb, starts[a:b], tol=tol, max_iter=max_iter
        )
        ok = status == engine.CONVERGED
        return x[ok], absdisc[ok], is_null[ok]

    parts = engine.run_chunked(worker, budget, threads)
    xs = np.concatenate([p[0] for p in parts])
    ad = np.concatenate([p[1] for p in parts])
    nl = np.concatenate([p[2] for p in parts])
    q1 = xs[:, 0] + 1j * xs[:, 1]
    q2 = xs[:, 2] + 1j * xs[:, 3]
    return q1, q2, ad, nl


def sample_disc(
    f: HomogeneousPolynomial,
    budget: int,
    seed: int = 0,
    tol: float = DEFAULT_ZERO_TOL,
    box=None,
    flip: bool = True,
    threads: int = 1,
    max_iter: int = 80,
) -> PointCloud:
    """Deterministic Monte Carlo sample of the discriminant locus.

    Starts are a jittered lattice keyed by (seed, index); each is refined by
    Gauss-Newton and kept iff |disc| < tol or the fiber restriction is null.
    With flip=True a second pass runs on the chart-flipped surface (infinity
    moved to the origin) and is merged back, so loci near infinity are kept.
    """
    if budget < 1:
        raise InputError("budget must be >= 1")
    b = _box_array(box)
    q1, q2, ad, nl = _sample_pass(f, budget, seed, tol, b, max_iter, threads)
    inf = np.zeros(len(q1), dtype=bool)
    if flip:
        from .algebra import poly_linear_substitute

        flip_map = ConformalMap.chart_flip()
        f2 = poly_linear_substitute(f, flip_map.lift)
        g1, g2, gad, _ = _sample_pass(f2, budget, seed + 1, tol, b, max_iter, threads)
        # back through the flip: q -> q^-1, with 0 mapping to infinity
        m1, m2, minf = flip_map.moebius_batch(g1, g2, np.zeros(len(g1), dtype=bool))
        q1 = np.concatenate([q1, m1])
        q2 = np.concatenate([q2, m2])
        inf = np.concatenate([inf, minf])
        ad = np.concatenate([ad, gad])
    meta = {
        "seed": seed,
        "budget": budget,
        "tol": tol,
        "box": b.tolist(),
        "flip": bool(flip),
        "generator": "stratified-philox",
        "surface_norm": f.norm(),
    }
    return PointCloud(q1, q2, inf, ad, meta)


def transform_cloud(cloud: PointCloud, cmap: ConformalMap) -> PointCloud:
    """Pointwise Moebius image of a cloud."""
    q1, q2, inf = cmap.moebius_batch(cloud.q1, cloud.q2, cloud.inf)
    return PointCloud(q1, q2, inf, cloud.absdisc.copy(), dict(cloud.meta))


# ---------------------------------------------------------------------------
# set comparisons

def directed_hausdorff(a: PointCloud, b: PointCloud) -> float:
    """sup over a of the chordal distance to the nearest point of b."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("directed Hausdorff needs nonempty clouds")
    tree = cKDTree(b.embed5())
    d, _ = tree.query(a.embed5(), k=1)
    return float(np.max(d))


def hausdorff(a: PointCloud, b: PointCloud) -> float:
    """Symmetric Hausdorff distance under the chordal metric."""
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


# ---------------------------------------------------------------------------
# dimension estimation

def estimate_dimension(
    cloud: PointCloud, box=None, scales=(2, 3, 4, 5, 6)
) -> DimensionEstimate:
    """Box-counting dimension over dyadic scales of the chart box.

    Occupied-cell counts are taken at cell sizes 2^-k of the box edge for k in
    `scales`; the slope of log N against log 2^k is the estimate.  Points
    outside the box (e.g. flip-merged points far out in the chart) are
    ignored; near-duplicate points collapse before the distinctness check.
    """
    b = _box_array(box)
    x = np.stack(
        [cloud.q1.real, cloud.q1.imag, cloud.q2.real, cloud.q2.imag], axis=1
    )
    x = x[~cloud.inf]
    inside = np.all((x >= b[:, 0]) & (x <= b[:, 1]), axis=1)
    x = x[inside]
    n_points = x.shape[0]
    distinct = np.unique(np.round(x / 1e-9).astype(np.int64), axis=0).shape[0]
    if distinct < 32:
        raise TooFewPoints(f"only {distinct} distinct points inside the box")
    widths = b[:, 1] - b[:, 0]
    counts = []
    for k in scales:
        cells = np.floor((x - b[:, 0]) / (widths * 2.0**-k)).astype(np.int64)
        cells = np.minimum(cells, 2**k - 1)
        counts.append(np.unique(cells, axis=0).shape[0])
    logn = np.log(np.array(counts, dtype=float))
    logs = np.array(scales, dtype=float) * math.log(2.0)
    coef = np.polyfit(logs, logn, 1)
    fit = np.polyval(coef, logs)
    value = float(min(4.0, max(0.0, coef[0])))
    return DimensionEstimate(
        value=value,
        method="box-counting/dyadic",
        scales=tuple(int(k) for k in scales),
        counts=tuple(int(c) for c in counts),
        fit_residual=float(np.max(np.abs(fit - logn))),
        n_points=n_points,
        n_distinct=int(distinct),
    )


# ---------------------------------------------------------------------------
# partition censuses

def _tally(parts_list):
    hist = {}
    for parts, contained in parts_list:
        key = Partition(parts, line_contained=contained)
        hist[key] = hist.get(key, 0) + 1
    return hist


def partition_census(
    f: HomogeneousPolynomial,
    n_samples: int,
    seed: int = 0,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    box=None,
    threads: int = 1,
) -> CensusReport:
    """Histogram of section partitions over uniform random fibers."""
    if n_samples < 1:
        raise InputError("n_samples must be >= 1")
    b = _box_array(box)
    sb = SurfaceBatch(f)
    u = engine.philox_uniforms(seed, np.arange(n_samples), 4)
    x = b[:, 0] + u * (b[:, 1] - b[:, 0])

    def worker(lo, hi):
        q1 = x[lo:hi, 0] + 1j * x[lo:hi, 1]
        q2 = x[lo:hi, 2] + 1j * x[lo:hi, 3]
        a = sb.restrict_fiber(q1, q2)
        scale, _ = sb.fiber_scale(q1, q2)
        return engine.partition_counts(a, scale, cluster_tol)

    parts = [p for chunk in engine.run_chunked(worker, n_samples, threads) for p in chunk]
    return CensusReport(_tally(parts), n_samples, cluster_tol, seed)


def conditioned_census(
    f: HomogeneousPolynomial,
    disc_cloud: PointCloud,
    n: int,
    seed: int = 0,
    cluster_tol: float = 1e-4,
    jitter: float = 1e-4,
    refine_tol: float = 1e-12,
    max_iter: int = 120,
    threads: int = 1,
) -> CensusReport:
    """Partition census conditioned on the discriminant locus.

    Draws points of the cloud, jitters them in the chart, re-refines onto the
    locus at `refine_tol`, and tallies partitions there.  The defaults pair a
    deep refine with a cluster tolerance of 1e-4 because a double root at
    |disc| = eps has chordal separation of order sqrt(eps).
    """
    if len(disc_cloud) == 0:
        raise EmptyCloud("conditioned census needs a nonempty cloud")
    finite = np.where(~disc_cloud.inf)[0]
    if finite.size == 0:
        raise EmptyCloud("conditioned census needs finite chart points")
    u = engine.philox_uniforms(seed, np.arange(n), 5)
    pick = finite[(u[:, 0] * finite.size).astype(int) % finite.size]
    x0 = np.stack(
        [
            disc_cloud.q1[pick].real,
            disc_cloud.q1[pick].imag,
            disc_cloud.q2[pick].real,
            disc_cloud.q2[pick].imag,
        ],
        axis=1,
    )
    x0 = x0 + jitter * (2.0 * u[:, 1:] - 1.0)
    sb = SurfaceBatch(f)

    def worker(lo, hi):
        x, status, _, _ = engine.refine_batch(
            sb, x0[lo:hi], tol=refine_tol, max_iter=max_iter
        )
        ok = status == engine.CONVERGED
        q1 = x[ok, 0] + 1j * x[ok, 1]
        q2 = x[ok, 2] + 1j * x[ok, 3]
        a = sb.restrict_fiber(q1, q2)
        scale, _ = sb.fiber_scale(q1, q2)
        return engine.partition_counts(a, scale, cluster_tol), int(np.sum(~ok))

    rets = engine.run_chunked(worker, n, threads)
    parts = [p for chunk, _ in rets for p in chunk]
    n_failed = sum(nf for _, nf in rets)
    return CensusReport(_tally(parts), len(parts), cluster_tol, seed, n_failed=n_failed)
