"""Cones in CP^3: vertex detection, plane sections, dual-variety sampling,
singular rulings, and the decomposition of the discriminant locus as
eta(dual variety) union pi(singular locus minus vertex).

A cone's tangent planes are constant along rulings, so its dual variety is
the curve of tangent planes of any plane section; sampling the Gauss map at
smooth surface points therefore samples the dual exactly.  Singular points of
the section correspond to singular rulings, each of which projects to a round
2-sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from . import engine
from .algebra import (
    BinaryForm,
    HomogeneousPolynomial,
    ProjectivePlane,
    ProjectivePoint,
    binary_discriminant,
    binary_roots,
    plane_section,
    poly_gradient,
    restrict_span,
)
from .engine import SurfaceBatch
from .errors import (
    DegreeTooHigh,
    InputError,
    InternalInconsistency,
    NoSmoothPoints,
    NotACone,
    NotIntegral,
)
from .locus import PointCloud, directed_hausdorff, sample_disc
from .twistor import S4Point, eta_batch, fiber, project

SMOOTH_THRESHOLD = 1e-6
SECTION_DEGREE_CAP = 6


class _Sentinel:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


NOT_A_CONE = _Sentinel("NOT_A_CONE")
MULTIPLE_VERTICES = _Sentinel("MULTIPLE_VERTICES")


# ---------------------------------------------------------------------------
# reports

@dataclass
class ConeReport:
    vertex: ProjectivePoint
    section_plane: ProjectivePlane
    contains_vertex_twistor_line: bool
    vertex_residual: float


@dataclass
class DecompositionReport:
    """Directed Hausdorff comparison of the disc cloud with eta(dual) u sing."""

    d_disc_to_union: float
    d_union_to_disc: float
    n_disc: int
    n_eta: int
    n_sing: int
    set_tol: float
    passed: bool
    disc_cloud: PointCloud = field(repr=False, default=None)
    eta_cloud: PointCloud = field(repr=False, default=None)
    sing_cloud: PointCloud = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# vertex detection

def cone_vertex(f: HomogeneousPolynomial):
    """Vertex of a cone, or NOT_A_CONE / MULTIPLE_VERTICES.

    o is a vertex iff the directional derivative sum_i o_i df/dz_i vanishes
    identically, a linear condition on o; the kernel of the stacked gradient
    coefficient columns decides.
    """
    if f.degree < 2:
        raise InputError("cone detection needs degree >= 2")
    grads = poly_gradient(f)
    keys = sorted(set().union(*[set(g.terms) for g in grads]))
    mat = np.zeros((max(len(keys), 4), 4), dtype=complex)
    for r, k in enumerate(keys):
        for i in range(4):
            mat[r, i] = grads[i].terms.get(k, 0j)
    _, s, vh = np.linalg.svd(mat)
    nullity = int(np.sum(s <= 1e-10 * s[0]))
    if nullity == 0:
        return NOT_A_CONE
    if nullity >= 2:
        return MULTIPLE_VERTICES
    return ProjectivePoint(np.conj(vh[-1]))


def vertex_residual(f: HomogeneousPolynomial, o: ProjectivePoint) -> float:
    """Coefficient norm of sum_i o_i df/dz_i, relative to ||f|| |o|."""
    grads = poly_gradient(f)
    oz = o.z / np.linalg.norm(o.z)
    acc = HomogeneousPolynomial(f.degree - 1, {}, 4)
    for i in range(4):
        acc = acc.add(grads[i].scale(oz[i]))
    return acc.norm() / max(f.norm(), 1e-300)


def vertex_twistor_line_contained(f: HomogeneousPolynomial, o: ProjectivePoint) -> bool:
    """True iff the twistor line through the vertex lies in the surface."""
    if vertex_residual(f, o) > 1e-8:
        raise InputError("o is not a vertex of f")
    p = restrict_span(f, *_fiber_cols(o))
    return p.is_null()


def _fiber_cols(o: ProjectivePoint):
    line = fiber(project(o))
    return line.basis[:, 0], line.basis[:, 1]


# ---------------------------------------------------------------------------
# integrality checks

def _squarefree_check(f: HomogeneousPolynomial, seed: int) -> None:
    """Random line restrictions of a non-reduced surface have zero discriminant."""
    bad = 0
    for k in range(3):
        gen = np.random.Generator(np.random.Philox(key=(seed << 8) + k))
        u = gen.normal(size=4) + 1j * gen.normal(size=4)
        v = gen.normal(size=4) + 1j * gen.normal(size=4)
        p = restrict_span(f, u, v)
        if p.is_null() or abs(binary_discriminant(p)) < 1e-10:
            bad += 1
    if bad >= 2:
        raise NotIntegral("surface has a repeated factor (line discriminants vanish)")


def _bivar_from_ternary(g: HomogeneousPolynomial, chart: int) -> np.ndarray:
    """Coefficient matrix C[i, j] of x^i y^j after setting variable `chart` = 1."""
    d = g.degree
    c = np.zeros((d + 1, d + 1), dtype=complex)
    rest = [k for k in range(3) if k != chart]
    for e, coeff in g.terms.items():
        c[e[rest[0]], e[rest[1]]] += coeff
    return c


def _poly2_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return convolve2d(a, b)


def _poly2_dx(a: np.ndarray) -> np.ndarray:
    if a.shape[0] == 1:
        return np.zeros((1, a.shape[1]), dtype=complex)
    return a[1:, :] * np.arange(1, a.shape[0])[:, None]


def _poly2_dy(a: np.ndarray) -> np.ndarray:
    if a.shape[1] == 1:
        return np.zeros((a.shape[0], 1), dtype=complex)
    return a[:, 1:] * np.arange(1, a.shape[1])[None, :]


def absolute_factor_count(c: np.ndarray) -> int:
    """Number of absolutely irreducible factors of a squarefree bivariate poly.

    Counts the solution space of the differential identity
    f u_y - u f_y = f v_x - v f_x over coefficient boxes deg_x(u) <= m-1,
    deg_y(u) <= n, deg_x(v) <= m, deg_y(v) <= n-1.
    """
    c = np.asarray(c, dtype=complex)
    rows = np.where(np.any(np.abs(c) > 1e-13 * np.max(np.abs(c)), axis=1))[0]
    cols = np.where(np.any(np.abs(c) > 1e-13 * np.max(np.abs(c)), axis=0))[0]
    m, n = int(rows.max()), int(cols.max())
    if m == 0 or n == 0:
        raise InputError("factor count needs positive degree in both variables")
    c = c[: m + 1, : n + 1]
    fx, fy = _poly2_dx(c), _poly2_dy(c)
    u_basis = [(i, j) for i in range(m) for j in range(n + 1)]
    v_basis = [(i, j) for i in range(m + 1) for j in range(n)]
    out_shape = (2 * m + 1, 2 * n + 1)
    cols_list = []
    for (i, j) in u_basis:
        mono = np.zeros((i + 1, j + 1), dtype=complex)
        mono[i, j] = 1.0
        term = _pad2(_poly2_mul(c, _poly2_dy(mono)), out_shape) - _pad2(
            _poly2_mul(mono, fy), out_shape
        )
        cols_list.append(term.ravel())
    for (i, j) in v_basis:
        mono = np.zeros((i + 1, j + 1), dtype=complex)
        mono[i, j] = 1.0
        term = -_pad2(_poly2_mul(c, _poly2_dx(mono)), out_shape) + _pad2(
            _poly2_mul(mono, fx), out_shape
        )
        cols_list.append(term.ravel())
    mat = np.stack(cols_list, axis=1)
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s <= 1e-7 * s[0]))


def _pad2(a: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    out[: a.shape[0], : a.shape[1]] = a
    return out


def check_integral(f: HomogeneousPolynomial, seed: int = 0) -> None:
    """Raise NotIntegral on a repeated factor or a reducible surface."""
    _squarefree_check(f, seed)
    gen = np.random.Generator(np.random.Philox(key=(seed << 8) + 77))
    a = gen.normal(size=4) + 1j * gen.normal(size=4)
    g, _ = plane_section(f, ProjectivePlane(a))
    r = absolute_factor_count(_bivar_from_ternary(g, 2))
    if r >= 2:
        raise NotIntegral(f"surface is reducible ({r} absolute factors in a section)")
    if r == 0:
        raise InternalInconsistency("factor count returned 0")


# ---------------------------------------------------------------------------
# plane-curve elimination

def _formal_ydeg(c: np.ndarray) -> int:
    mags = np.max(np.abs(c), axis=0)
    live = np.where(mags > 1e-13 * max(np.max(mags), 1e-300))[0]
    return int(live.max()) if live.size else 0


def _sylvester_nodes(pv: np.ndarray, qv: np.ndarray) -> np.ndarray:
    """Determinants of Sylvester matrices for stacked univariate coefficient
    rows pv (K, m+1), qv (K, n+1), coefficients in increasing degree."""
    k, m1 = pv.shape
    n1 = qv.shape[1]
    m, n = m1 - 1, n1 - 1
    size = m + n
    if size == 0:
        return np.ones(k, dtype=complex)
    mat = np.zeros((k, size, size), dtype=complex)
    pr = pv[:, ::-1]
    qr = qv[:, ::-1]
    for i in range(n):
        mat[:, i, i : i + m + 1] = pr
    for i in range(m):
        mat[:, n + i, i : i + n + 1] = qr
    return np.linalg.det(mat)


def _resultant_in_y(cp: np.ndarray, cq: np.ndarray, nodes: int = 256) -> np.ndarray:
    """Coefficients (increasing degree) of Res_y(P, Q) as a polynomial in x."""
    dyp, dyq = _formal_ydeg(cp), _formal_ydeg(cq)
    xs = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    powx_p = xs[:, None] ** np.arange(cp.shape[0])[None, :]
    powx_q = xs[:, None] ** np.arange(cq.shape[0])[None, :]
    pv = powx_p @ cp[:, : dyp + 1]
    qv = powx_q @ cq[:, : dyq + 1]
    vals = _sylvester_nodes(pv, qv)
    coeffs = np.fft.fft(vals) / nodes
    bound = (cp.shape[0] - 1) * dyq + (cq.shape[0] - 1) * dyp + 1
    return coeffs[: min(bound + 1, nodes)]


def _poly_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of sum c_k x^k with relative stripping of tiny leading terms."""
    mags = np.abs(coeffs)
    top = mags.max()
    if top <= 0:
        return np.zeros(0, dtype=complex)
    deg = len(coeffs) - 1
    while deg > 0 and mags[deg] <= 1e-10 * top:
        deg -= 1
    if deg == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs[: deg + 1][::-1])


def _univar_at(c: np.ndarray, x0: complex) -> np.ndarray:
    """Coefficients in y of P(x0, y)."""
    powx = x0 ** np.arange(c.shape[0])
    return powx @ c


def _polish_system(mats, x0: complex, y0: complex, iters: int = 60):
    """Damped least-squares Newton for simultaneous zeros of bivariate polys."""
    from numpy.polynomial.polynomial import polyval2d

    z = np.array([x0.real, x0.imag, y0.real, y0.imag], dtype=float)

    def residual(zz):
        x = zz[0] + 1j * zz[1]
        y = zz[2] + 1j * zz[3]
        vals = np.array([polyval2d(x, y, m) for m in mats])
        return np.concatenate([vals.real, vals.imag])

    r = residual(z)
    for _ in range(iters):
        h = 1e-7 * (1.0 + np.abs(z))
        jac = np.empty((len(r), 4))
        for i in range(4):
            e = np.zeros(4)
            e[i] = h[i]
            jac[:, i] = (residual(z + e) - residual(z - e)) / (2 * h[i])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        lam = 1.0
        for _ in range(6):
            cand = z - lam * step
            rc = residual(cand)
            if np.linalg.norm(rc) < np.linalg.norm(r):
                z, r = cand, rc
                break
            lam *= 0.5
        else:
            break
        if np.linalg.norm(r) < 1e-14:
            break
    return complex(z[0], z[1]), complex(z[2], z[3]), float(np.linalg.norm(r))


def _common_zeros_chart(cp: np.ndarray, cq: np.ndarray, extra=None, res_tol=1e-7):
    """Common zeros of P and Q in one affine chart, polished on all equations."""
    mats = [cp, cq] + list(extra or [])
    scale = max(float(np.max(np.abs(m))) for m in mats)
    res = _resultant_in_y(cp, cq)
    if np.max(np.abs(res)) <= 1e-12 * max(scale, 1.0) ** 2:
        raise InternalInconsistency(
            "vanishing resultant: curves share a component"
        )
    out = []
    for x0 in _poly_roots(res):
        ycands = []
        for c in (cp, cq):
            ycands.extend(_poly_roots(_univar_at(c, x0)))
        for y0 in ycands:
            if abs(x0) > 1e8 or abs(y0) > 1e8:
                continue
            x1, y1, r = _polish_system(mats, x0, y0, iters=80)
            pt_scale = scale * max(1.0, abs(x1), abs(y1)) ** max(
                m.shape[0] + m.shape[1] for m in mats
            )
            if r <= res_tol * pt_scale:
                out.append((x1, y1))
    return out


def _chart_embed(chart: int, x: complex, y: complex) -> np.ndarray:
    w = np.zeros(3, dtype=complex)
    rest = [k for k in range(3) if k != chart]
    w[chart] = 1.0
    w[rest[0]] = x
    w[rest[1]] = y
    return w / np.linalg.norm(w)


def _dedupe_projective(points, tol=1e-6):
    uniq = []
    for w in points:
        wn = w / np.linalg.norm(w)
        dup = False
        for u in uniq:
            if np.linalg.norm(wn - np.vdot(u, wn) * u) < tol:
                dup = True
                break
        if not dup:
            uniq.append(wn)
    return uniq


def plane_curves_common_points(
    g: HomogeneousPolynomial, h: HomogeneousPolynomial, filters=(), res_tol=1e-7
):
    """Common zeros in P^2 of two ternary forms, by chartwise elimination.

    `filters` holds further ternary forms whose vanishing is required (used to
    cut critical points down to curve points); all equations enter the polish.
    """
    if g.nvars != 3 or h.nvars != 3:
        raise InputError("expected ternary forms")
    found = []
    for chart in range(3):
        cg = _bivar_from_ternary(g, chart)
        ch = _bivar_from_ternary(h, chart)
        extra = [_bivar_from_ternary(e, chart) for e in filters]
        try:
            sols = _common_zeros_chart(cg, ch, extra, res_tol=res_tol)
        except InternalInconsistency:
            raise
        for x1, y1 in sols:
            found.append(_chart_embed(chart, x1, y1))
    return _dedupe_projective(found)


def plane_curve_singular_points(g: HomogeneousPolynomial, res_tol=1e-7):
    """Singular points of the plane curve {g = 0} (common zeros of the gradient)."""
    if g.degree > SECTION_DEGREE_CAP:
        raise DegreeTooHigh(
            f"section degree {g.degree} beyond the elimination cap {SECTION_DEGREE_CAP}"
        )
    gx, gy, gz = poly_gradient(g)
    return plane_curves_common_points(gx, gy, filters=(gz, g), res_tol=res_tol)


# ---------------------------------------------------------------------------
# dual-variety sampling

def _roots_points_batch(sb: SurfaceBatch, u: np.ndarray, v: np.ndarray):
    """Intersection points of the surface with the lines span(u_i, v_i).

    Returns stacked points (K, 4); lines whose restriction degenerates
    (vanishing leading coefficient or null form) are dropped.
    """
    d = sb.degree
    a = sb.restrict_line(u, v)  # (M, d+1)
    amax = np.max(np.abs(a), axis=1)
    ok = (amax > 0) & (np.abs(a[:, d]) > 1e-8 * amax)
    a, u, v = a[ok], u[ok], v[ok]
    m = a.shape[0]
    if m == 0:
        return np.zeros((0, 4), dtype=complex)
    comp = np.zeros((m, d, d), dtype=complex)
    comp[:, 0, :] = -a[:, :d][:, ::-1] / a[:, d][:, None]
    if d > 1:
        comp[:, np.arange(1, d), np.arange(0, d - 1)] = 1.0
    roots = np.linalg.eigvals(comp)  # (m, d)
    pts = roots[:, :, None] * u[:, None, :] + v[:, None, :]
    pts = pts.reshape(-1, 4)
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def dual_surface_samples(
    f: HomogeneousPolynomial,
    n: int,
    seed: int = 0,
    check: bool = True,
    threads: int = 1,
):
    """Sample the dual variety through the Gauss map at smooth surface points.

    Random lines are intersected with the surface; at each smooth intersection
    the tangent plane has dual coordinates grad f.  Returns (eta-image cloud,
    plane dual array (K, 4)).
    """
    if f.degree < 2:
        raise InputError("dual sampling needs degree >= 2")
    if check:
        check_integral(f, seed)
    sb = SurfaceBatch(f)
    m = max(1, -(-n // f.degree))
    u8 = engine.philox_uniforms(seed, np.arange(2 * m), 8).reshape(m, 16)
    from scipy.special import ndtri

    gauss = ndtri(np.clip(u8, 1e-12, 1 - 1e-12))
    u = gauss[:, 0:4] + 1j * gauss[:, 4:8]
    v = gauss[:, 8:12] + 1j * gauss[:, 12:16]

    def worker(lo, hi):
        pts = _roots_points_batch(sb, u[lo:hi], v[lo:hi])
        if pts.shape[0] == 0:
            return np.zeros((0, 4), dtype=complex)
        grad = sb.gradient_at(pts)
        gn = np.linalg.norm(grad, axis=1)
        smooth = gn > SMOOTH_THRESHOLD * sb.fnorm
        return grad[smooth]

    parts = engine.run_chunked(worker, m, threads)
    duals = np.concatenate(parts, axis=0)
    if duals.shape[0] == 0:
        raise NoSmoothPoints("no smooth surface points found above the threshold")
    duals = duals / np.linalg.norm(duals, axis=1)[:, None]
    q1, q2, inf = eta_batch(duals)
    cloud = PointCloud(
        q1,
        q2,
        inf,
        np.full(len(q1), np.nan),
        {"seed": seed, "n": n, "kind": "eta-dual"},
    )
    return cloud, duals


def section_dual_samples(g: HomogeneousPolynomial, n: int, seed: int = 0):
    """Tangent-line duals of a plane curve at sampled smooth points (K, 3)."""
    if g.nvars != 3:
        raise InputError("expected a ternary form")
    grads = [gg.coefficient_array() for gg in poly_gradient(g)]
    gen = np.random.Generator(np.random.Philox(key=seed))
    duals = []
    gnorm = max(g.norm(), 1e-300)
    tries = 0
    while len(duals) < n and tries < 50:
        tries += 1
        m = max(8, (n - len(duals)) // max(1, g.degree))
        u = gen.normal(size=(m, 3)) + 1j * gen.normal(size=(m, 3))
        v = gen.normal(size=(m, 3)) + 1j * gen.normal(size=(m, 3))
        for k in range(m):
            p = restrict_span(g, u[k], v[k])
            if p.is_null():
                continue
            for root, mult in binary_roots(p):
                if mult != 1:
                    continue
                w = u[k] if root is None else root * u[k] + v[k]
                w = w / np.linalg.norm(w)
                gr = np.array([engine._eval_table(e, c, w) for e, c in grads])
                if np.linalg.norm(gr) > SMOOTH_THRESHOLD * gnorm:
                    duals.append(gr / np.linalg.norm(gr))
            if len(duals) >= n:
                break
    if not duals:
        raise NoSmoothPoints("no smooth curve points sampled")
    return np.array(duals[:n])


# ---------------------------------------------------------------------------
# singular rulings

def draw_section_plane(f: HomogeneousPolynomial, o: ProjectivePoint, seed: int = 0) -> ProjectivePlane:
    """Seeded plane away from the vertex (redrawn until comfortably so)."""
    on = o.z / np.linalg.norm(o.z)
    for k in range(64):
        gen = np.random.Generator(np.random.Philox(key=(seed << 16) + 3000 + k))
        a = gen.normal(size=4) + 1j * gen.normal(size=4)
        a = a / np.linalg.norm(a)
        if abs(np.dot(a, on)) > 0.2:
            return ProjectivePlane(a)
    raise InternalInconsistency("could not draw a plane avoiding the vertex")


def singular_samples(
    f: HomogeneousPolynomial,
    o: ProjectivePoint,
    n: int,
    seed: int = 0,
    section_plane: ProjectivePlane = None,
) -> PointCloud:
    """pi-image samples of the singular rulings of a cone.

    Singular points of the plane section correspond to singular lines through
    the vertex; each such line is sampled at n chordal-uniform parameters and
    projected.  A smooth section yields the empty cloud.
    """
    if vertex_residual(f, o) > 1e-8:
        raise InputError("o is not a vertex of f")
    if f.degree > SECTION_DEGREE_CAP:
        raise DegreeTooHigh(f"section degree {f.degree} beyond {SECTION_DEGREE_CAP}")
    h = section_plane or draw_section_plane(f, o, seed)
    if h.contains(o, tol=1e-8):
        raise InputError("section plane passes through the vertex")
    g, basis = plane_section(f, h)
    sing = plane_curve_singular_points(g)
    if not sing:
        return PointCloud(
            np.zeros(0, complex),
            np.zeros(0, complex),
            np.zeros(0, bool),
            np.zeros(0),
            {"seed": seed, "kind": "singular-rulings", "n_singular_points": 0},
        )
    on = o.z / np.linalg.norm(o.z)
    q1s, q2s, infs = [], [], []
    for idx, w in enumerate(sing):
        s_pt = basis @ w  # singular point of X on the section
        u = engine.philox_uniforms((seed << 8) + idx, np.arange(n), 4)
        from scipy.special import ndtri

        gauss = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        lam = (gauss[:, 0] + 1j * gauss[:, 1]) / (gauss[:, 2] + 1j * gauss[:, 3])
        pts = s_pt[None, :] + lam[:, None] * on[None, :]
        from .twistor import project_batch

        q1, q2, inf = project_batch(pts)
        q1s.append(q1)
        q2s.append(q2)
        infs.append(inf)
    q1 = np.concatenate(q1s)
    q2 = np.concatenate(q2s)
    inf = np.concatenate(infs)
    return PointCloud(
        q1,
        q2,
        inf,
        np.full(len(q1), np.nan),
        {"seed": seed, "kind": "singular-rulings", "n_singular_points": len(sing)},
    )


# ---------------------------------------------------------------------------
# tangent planes through the vertex twistor line

def tangent_planes_through_vertex_line(
    f: HomogeneousPolynomial,
    o: ProjectivePoint,
    section_plane: ProjectivePlane = None,
    seed: int = 0,
):
    """Tangent planes of the cone containing the twistor line through the vertex.

    Works in a section: tangent lines of the section curve through the point
    where the vertex fiber punctures the section plane (a polar intersection,
    hence at most d(d-1) of them).  Returns a list of ProjectivePlane.
    """
    if vertex_residual(f, o) > 1e-8:
        raise InputError("o is not a vertex of f")
    h = section_plane or draw_section_plane(f, o, seed)
    g, basis = plane_section(f, h)
    u, v = _fiber_cols(o)
    s, t = np.dot(h.a, v), -np.dot(h.a, u)
    p0 = s * u + t * v
    if np.linalg.norm(p0) < 1e-12:
        raise InternalInconsistency("vertex fiber appears to lie in the section plane")
    w0 = basis.conj().T @ p0
    w0 = w0 / np.linalg.norm(w0)
    grads = poly_gradient(g)
    polar = HomogeneousPolynomial(g.degree - 1, {}, 3)
    for i in range(3):
        polar = polar.add(grads[i].scale(w0[i]))
    pts = plane_curves_common_points(g, polar)
    planes = []
    sb = SurfaceBatch(f)
    for w in pts:
        p = basis @ w
        p = p / np.linalg.norm(p)
        gr = sb.gradient_at(p[None, :])[0]
        if np.linalg.norm(gr) <= SMOOTH_THRESHOLD * sb.fnorm:
            continue
        planes.append(ProjectivePlane(gr / np.linalg.norm(gr)))
    uniq = _dedupe_projective([pl.a for pl in planes], tol=1e-6)
    return [ProjectivePlane(a) for a in uniq]


# ---------------------------------------------------------------------------
# the decomposition

def cone_report(f: HomogeneousPolynomial, seed: int = 0) -> ConeReport:
    vertex = cone_vertex(f)
    if vertex is NOT_A_CONE:
        raise NotACone("surface has no vertex")
    if vertex is MULTIPLE_VERTICES:
        raise NotACone("vertex locus is positive-dimensional; outside scope")
    h = draw_section_plane(f, vertex, seed)
    return ConeReport(
        vertex=vertex,
        section_plane=h,
        contains_vertex_twistor_line=vertex_twistor_line_contained(f, vertex),
        vertex_residual=vertex_residual(f, vertex),
    )


def verify_decomposition(
    f: HomogeneousPolynomial,
    budget: int,
    seed: int = 0,
    tol: float = 1e-8,
    set_tol: float = 2e-2,
    n_eta: int = None,
    n_sing: int = None,
    threads: int = 1,
) -> DecompositionReport:
    """Compare the sampled discriminant locus against eta(dual) u pi(sing).

    Both directed Hausdorff distances must fall below set_tol to pass; the
    tolerance is dominated by cloud density rather than numerics.
    """
    report = cone_report(f, seed)
    check_integral(f, seed)
    disc_cloud = sample_disc(f, budget, seed=seed, tol=tol, threads=threads)
    eta_cloud, _ = dual_surface_samples(
        f, n_eta or 2 * budget, seed=seed + 101, check=False, threads=threads
    )
    sing_cloud = singular_samples(
        f, report.vertex, n_sing or max(budget // 2, 1000), seed=seed + 202,
        section_plane=report.section_plane,
    )
    parts = [eta_cloud] + ([sing_cloud] if len(sing_cloud) else [])
    union = PointCloud.concatenate(parts, {"kind": "eta+sing"})
    d1 = directed_hausdorff(disc_cloud, union)
    d2 = directed_hausdorff(union, disc_cloud)
    return DecompositionReport(
        d_disc_to_union=d1,
        d_union_to_disc=d2,
        n_disc=len(disc_cloud),
        n_eta=len(eta_cloud),
        n_sing=len(sing_cloud),
        set_tol=set_tol,
        passed=bool(d1 < set_tol and d2 < set_tol),
        disc_cloud=disc_cloud,
        eta_cloud=eta_cloud,
        sing_cloud=sing_cloud,
    )
