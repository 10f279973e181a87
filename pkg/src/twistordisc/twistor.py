"""The twistor fibration CP^3 -> S^4 and its companions.

Conventions: S^4 is the left quaternionic projective line with [a, b] ~
[la, lb]; the fibration sends [z0, z1, z2, z3] to [z0 + z1*j, z2 + z3*j],
and the chart value of a finite point [1, q] is q = q1 + q2*j.  2x2
quaternionic matrices act on row vectors from the right, which descends to
complex-linear maps of C^4 commuting with the involution j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    HomogeneousPolynomial,
    ProjectiveLine,
    ProjectivePlane,
    ProjectivePoint,
    Quaternion,
    plane_meet,
    quat_inverse,
    quat_mul,
)
from .errors import InputError, InternalInconsistency, SingularMatrix


# ---------------------------------------------------------------------------
# points of S^4

@dataclass(frozen=True)
class S4Point:
    """Point of S^4 = H u {inf}: chart value q1 + q2*j, or the infinity point."""

    q1: complex = 0j
    q2: complex = 0j
    infinite: bool = False

    def __post_init__(self):
        if self.infinite and (self.q1 != 0 or self.q2 != 0):
            object.__setattr__(self, "q1", 0j)
            object.__setattr__(self, "q2", 0j)

    @staticmethod
    def infinity() -> "S4Point":
        return S4Point(0j, 0j, True)

    def as_quaternion(self) -> Quaternion:
        if self.infinite:
            raise InputError("infinity has no chart quaternion")
        return Quaternion(self.q1, self.q2)

    def chart_reals(self):
        return (self.q1.real, self.q1.imag, self.q2.real, self.q2.imag)

    def embed5(self) -> np.ndarray:
        """Stereographic embedding into the unit sphere of R^5 (inf -> north pole)."""
        if self.infinite:
            return np.array([0.0, 0.0, 0.0, 0.0, 1.0])
        x = np.array(self.chart_reals())
        n2 = float(x @ x)
        return np.append(2.0 * x, n2 - 1.0) / (n2 + 1.0)


S4_INFINITY = S4Point.infinity()


def embed5_batch(q1, q2, inf_mask) -> np.ndarray:
    """Vectorized stereographic embedding; returns shape (N, 5)."""
    q1 = np.asarray(q1, dtype=complex)
    q2 = np.asarray(q2, dtype=complex)
    inf_mask = np.asarray(inf_mask, dtype=bool)
    n2 = np.abs(q1) ** 2 + np.abs(q2) ** 2
    out = np.empty(q1.shape + (5,), dtype=float)
    denom = n2 + 1.0
    out[..., 0] = 2.0 * q1.real / denom
    out[..., 1] = 2.0 * q1.imag / denom
    out[..., 2] = 2.0 * q2.real / denom
    out[..., 3] = 2.0 * q2.imag / denom
    out[..., 4] = (n2 - 1.0) / denom
    out[inf_mask] = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
    return out


# ---------------------------------------------------------------------------
# projection and involution

def project(p: ProjectivePoint) -> S4Point:
    """pi[z0,z1,z2,z3] = [z0 + z1*j, z2 + z3*j]; chart value (z0+z1j)^-1 (z2+z3j)."""
    z = p.z
    a = Quaternion(z[0], z[1])
    if a.norm_sq() <= 1e-300 * (abs(z[2]) ** 2 + abs(z[3]) ** 2):
        return S4_INFINITY
    q = quat_mul(quat_inverse(a), Quaternion(z[2], z[3]))
    return S4Point(q.q1, q.q2)


def project_batch(z: np.ndarray):
    """Vectorized projection of rows of z (N, 4) -> (q1, q2, inf_mask)."""
    z = np.asarray(z, dtype=complex)
    a1, a2, b1, b2 = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    na = np.abs(a1) ** 2 + np.abs(a2) ** 2
    nb = np.abs(b1) ** 2 + np.abs(b2) ** 2
    inf_mask = na <= 1e-300 * nb
    safe = np.where(inf_mask, 1.0, na)
    # (a1 + a2 j)^-1 (b1 + b2 j) with inverse conj/|a|^2
    i1, i2 = np.conj(a1) / safe, -a2 / safe
    q1 = i1 * b1 - i2 * np.conj(b2)
    q2 = i1 * b2 + i2 * np.conj(b1)
    q1 = np.where(inf_mask, 0j, q1)
    q2 = np.where(inf_mask, 0j, q2)
    return q1, q2, inf_mask


def involution_coords(z: np.ndarray) -> np.ndarray:
    """j on homogeneous coordinates: (-conj z1, conj z0, -conj z3, conj z2)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    out[..., 0] = -np.conj(z[..., 1])
    out[..., 1] = np.conj(z[..., 0])
    out[..., 2] = -np.conj(z[..., 3])
    out[..., 3] = np.conj(z[..., 2])
    return out


def involution(p: ProjectivePoint) -> ProjectivePoint:
    """The fixed-point-free anti-holomorphic involution of CP^3."""
    return ProjectivePoint(involution_coords(p.z))


def fiber(q: S4Point) -> ProjectiveLine:
    """Twistor line over q; for finite q the span of [1,0,q1,q2], [0,1,-conj q2, conj q1]."""
    if q.infinite:
        basis = np.array([[0, 0], [0, 0], [1, 0], [0, 1]], dtype=complex)
        return ProjectiveLine(basis)
    u = np.array([1.0, 0.0, q.q1, q.q2], dtype=complex)
    v = np.array([0.0, 1.0, -np.conj(q.q2), np.conj(q.q1)], dtype=complex)
    return ProjectiveLine(np.stack([u, v], axis=1))


def fiber_basis_batch(q1, q2):
    """Vectorized fiber bases: returns (u, v) arrays of shape (N, 4)."""
    q1 = np.asarray(q1, dtype=complex)
    q2 = np.asarray(q2, dtype=complex)
    n = q1.shape
    u = np.empty(n + (4,), dtype=complex)
    v = np.empty(n + (4,), dtype=complex)
    u[..., 0] = 1.0
    u[..., 1] = 0.0
    u[..., 2] = q1
    u[..., 3] = q2
    v[..., 0] = 0.0
    v[..., 1] = 1.0
    v[..., 2] = -np.conj(q2)
    v[..., 3] = np.conj(q1)
    return u, v


def is_twistor_line(line: ProjectiveLine, tol: float = 1e-8) -> bool:
    """True iff the involution preserves the span of the line."""
    b = line.orthonormal_basis()
    jb = involution_coords(b.T).T
    stacked = np.hstack([b, jb])
    s = np.linalg.svd(stacked, compute_uv=False)
    return bool(s[2] <= tol * s[0])


# ---------------------------------------------------------------------------
# the dual fibration

def plane_involution(h: ProjectivePlane) -> ProjectivePlane:
    """Action of j on planes: dual coordinates (conj a1, -conj a0, conj a3, -conj a2)."""
    a = h.a
    return ProjectivePlane(
        [np.conj(a[1]), -np.conj(a[0]), np.conj(a[3]), -np.conj(a[2])]
    )


def eta(h: ProjectivePlane) -> S4Point:
    """Dual twistor fibration: the base point of the unique twistor line in h.

    No plane is j-invariant, so L = h ^ j(h) is always a well-defined line;
    it is fixed by j, hence the twistor line contained in h.
    """
    line = plane_meet(h, plane_involution(h))
    if not is_twistor_line(line, tol=1e-8):
        raise InternalInconsistency("h ^ j(h) failed the twistor-line test")
    return project(ProjectivePoint(line.basis[:, 0]))


def eta_batch(duals: np.ndarray):
    """Vectorized eta on rows of dual coordinates (N, 4) -> (q1, q2, inf_mask)."""
    a = np.asarray(duals, dtype=complex)
    ja = np.empty_like(a)
    ja[:, 0] = np.conj(a[:, 1])
    ja[:, 1] = -np.conj(a[:, 0])
    ja[:, 2] = np.conj(a[:, 3])
    ja[:, 3] = -np.conj(a[:, 2])
    stacked = np.stack([a, ja], axis=1)  # (N, 2, 4)
    _, s, vh = np.linalg.svd(stacked)
    if np.any(s[:, 1] <= 1e-12 * s[:, 0]):
        raise InternalInconsistency("degenerate plane pair in eta_batch")
    basis = np.conj(vh[:, 2:, :]).transpose(0, 2, 1)  # (N, 4, 2)
    jcols = np.stack([basis[:, :, 0], basis[:, :, 1]], axis=1)
    jcols = np.stack(
        [
            -np.conj(jcols[..., 1]),
            np.conj(jcols[..., 0]),
            -np.conj(jcols[..., 3]),
            np.conj(jcols[..., 2]),
        ],
        axis=-1,
    )
    check = np.concatenate([basis, jcols.transpose(0, 2, 1)], axis=2)  # (N, 4, 4)
    sc = np.linalg.svd(check, compute_uv=False)
    if np.any(sc[:, 2] > 1e-8 * sc[:, 0]):
        raise InternalInconsistency("eta_batch produced a non-twistor line")
    return project_batch(basis[:, :, 0])


# ---------------------------------------------------------------------------
# surfaces under the involution

def surface_involution_pullback(f: HomogeneousPolynomial) -> HomogeneousPolynomial:
    """f^j(z) = conj(f(j z)); its zero set is the j-image of {f = 0}."""
    if f.nvars != 4:
        raise InputError("involution pullback needs a form on C^4")
    terms = {}
    for (e0, e1, e2, e3), c in f.terms.items():
        sign = -1.0 if (e0 + e2) % 2 else 1.0
        e = (e1, e0, e3, e2)
        terms[e] = terms.get(e, 0j) + sign * np.conj(c)
    return HomogeneousPolynomial(f.degree, terms, 4)


def is_surface_j_invariant(f: HomogeneousPolynomial, tol: float = 1e-8) -> bool:
    """True iff f^j is a scalar multiple of f (coefficient vectors parallel)."""
    fj = surface_involution_pullback(f)
    keys = sorted(set(f.terms) | set(fj.terms))
    u = np.array([f.terms.get(k, 0j) for k in keys])
    v = np.array([fj.terms.get(k, 0j) for k in keys])
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return False
    return abs(abs(np.vdot(u, v)) - nu * nv) <= tol * nu * nv


# ---------------------------------------------------------------------------
# conformal transformations

def _quat_block(q: Quaternion) -> np.ndarray:
    """Right multiplication by q on H = C^2: the block [[q1, -conj q2], [q2, conj q1]]."""
    return np.array(
        [[q.q1, -np.conj(q.q2)], [q.q2, np.conj(q.q1)]], dtype=complex
    )


@dataclass(frozen=True, eq=False)
class ConformalMap:
    """Moebius transformation of HP^1 with its complex lift to C^4.

    `a` is the 2x2 quaternionic matrix ((a00, a01), (a10, a11)) acting on row
    vectors from the right; `lift` is the induced 4x4 complex matrix on
    coordinates (z0, z1, z2, z3) grouped as (z0 + z1 j, z2 + z3 j).
    """

    a: tuple
    lift: np.ndarray

    def moebius(self, q: S4Point) -> S4Point:
        (a00, a01), (a10, a11) = self.a
        if q.infinite:
            den, num = a10, a11
        else:
            qq = q.as_quaternion()
            den = a00 + quat_mul(qq, a10)
            num = a01 + quat_mul(qq, a11)
        if den.norm_sq() <= 1e-280 * max(num.norm_sq(), 1.0):
            return S4_INFINITY
        r = quat_mul(quat_inverse(den), num)
        return S4Point(r.q1, r.q2)

    def moebius_batch(self, q1, q2, inf_mask):
        """Vectorized Moebius action on chart arrays; returns (q1, q2, inf)."""
        (a00, a01), (a10, a11) = self.a
        q1 = np.asarray(q1, dtype=complex)
        q2 = np.asarray(q2, dtype=complex)
        inf_mask = np.asarray(inf_mask, dtype=bool)

        def qmul(x1, x2, b: Quaternion):
            return (
                x1 * b.q1 - x2 * np.conj(b.q2),
                x1 * b.q2 + x2 * np.conj(b.q1),
            )

        d1, d2 = qmul(q1, q2, a10)
        d1, d2 = d1 + a00.q1, d2 + a00.q2
        n1, n2 = qmul(q1, q2, a11)
        n1, n2 = n1 + a01.q1, n2 + a01.q2
        d1 = np.where(inf_mask, a10.q1, d1)
        d2 = np.where(inf_mask, a10.q2, d2)
        n1 = np.where(inf_mask, a11.q1, n1)
        n2 = np.where(inf_mask, a11.q2, n2)
        nd = np.abs(d1) ** 2 + np.abs(d2) ** 2
        nn = np.abs(n1) ** 2 + np.abs(n2) ** 2
        out_inf = nd <= 1e-280 * np.maximum(nn, 1.0)
        safe = np.where(out_inf, 1.0, nd)
        i1, i2 = np.conj(d1) / safe, -d2 / safe
        r1 = i1 * n1 - i2 * np.conj(n2)
        r2 = i1 * n2 + i2 * np.conj(n1)
        r1 = np.where(out_inf, 0j, r1)
        r2 = np.where(out_inf, 0j, r2)
        return r1, r2, out_inf

    def inverse(self) -> "ConformalMap":
        inv = np.linalg.inv(self.lift)
        return _conformal_from_lift(inv)

    @staticmethod
    def identity() -> "ConformalMap":
        one = Quaternion(1 + 0j, 0j)
        zero = Quaternion(0j, 0j)
        return lift_conformal(((one, zero), (zero, one)))

    @staticmethod
    def chart_flip() -> "ConformalMap":
        """[a, b] -> [b, a]; swaps 0 and infinity (chart value q -> q^-1)."""
        one = Quaternion(1 + 0j, 0j)
        zero = Quaternion(0j, 0j)
        return lift_conformal(((zero, one), (one, zero)))


def _coerce_quat_matrix(a) -> tuple:
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            entry = a[i][j]
            if not isinstance(entry, Quaternion):
                entry = Quaternion(complex(entry[0]), complex(entry[1]))
            row.append(entry)
        rows.append(tuple(row))
    return tuple(rows)


def _conformal_from_lift(lift: np.ndarray) -> ConformalMap:
    """Rebuild the quaternionic entries from a block-structured lift."""
    entries = [[None, None], [None, None]]
    for i in range(2):
        for jj in range(2):
            block = lift[2 * jj : 2 * jj + 2, 2 * i : 2 * i + 2]
            q = Quaternion(block[0, 0], block[1, 0])
            ref = _quat_block(q)
            if np.max(np.abs(block - ref)) > 1e-9 * max(1.0, np.max(np.abs(block))):
                raise InternalInconsistency("lift lost its quaternionic block structure")
            entries[i][jj] = q
    return ConformalMap((tuple(entries[0]), tuple(entries[1])), lift)


def lift_conformal(a) -> ConformalMap:
    """Lift an invertible 2x2 quaternionic matrix to a j-commuting map of C^4.

    Each entry acts by right multiplication as the block [[a, -conj b], [b,
    conj a]]; the blocks are arranged so that new (z0, z1) collects the a00
    and a10 contributions.
    """
    a = _coerce_quat_matrix(a)
    (a00, a01), (a10, a11) = a
    lift = np.zeros((4, 4), dtype=complex)
    lift[0:2, 0:2] = _quat_block(a00)
    lift[0:2, 2:4] = _quat_block(a10)
    lift[2:4, 0:2] = _quat_block(a01)
    lift[2:4, 2:4] = _quat_block(a11)
    s = np.linalg.svd(lift, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularMatrix("quaternionic matrix is not invertible")
    return ConformalMap(a, lift)


# ---------------------------------------------------------------------------
# orthogonal complex structures

@dataclass(frozen=True, eq=False)
class OCSMatrix:
    """Pointwise orthogonal complex structure: skew, orthogonal, squares to -I."""

    matrix: np.ndarray
    z1: complex

    def residuals(self):
        """Max-norms of J^2 + I, J + J^T, J^T J - I."""
        j = self.matrix
        eye = np.eye(4)
        return (
            float(np.max(np.abs(j @ j + eye))),
            float(np.max(np.abs(j + j.T))),
            float(np.max(np.abs(j.T @ j - eye))),
        )


def ocs_matrix(z1: complex) -> OCSMatrix:
    """The OCS attached to the twistor-space point [1, z1, ., .] over the chart."""
    z1 = complex(z1)
    x, y = z1.real, z1.imag
    r2 = x * x + y * y
    w = 1.0 - r2
    m = np.array(
        [
            [0.0, w, 2 * y, -2 * x],
            [-w, 0.0, -2 * x, -2 * y],
            [-2 * y, 2 * x, 0.0, w],
            [2 * x, 2 * y, -w, 0.0],
        ]
    )
    return OCSMatrix(-m / (1.0 + r2), z1)


def ocs_matrix_batch(z1):
    """Vectorized OCS matrices; returns shape (N, 4, 4)."""
    z1 = np.asarray(z1, dtype=complex)
    x, y = z1.real, z1.imag
    r2 = x * x + y * y
    w = 1.0 - r2
    zero = np.zeros_like(x)
    m = np.stack(
        [
            np.stack([zero, w, 2 * y, -2 * x], axis=-1),
            np.stack([-w, zero, -2 * x, -2 * y], axis=-1),
            np.stack([-2 * y, 2 * x, zero, w], axis=-1),
            np.stack([2 * x, 2 * y, -w, zero], axis=-1),
        ],
        axis=-2,
    )
    return -m / (1.0 + r2)[..., None, None]


# ---------------------------------------------------------------------------
# graph surfaces

def graph_surface(z_terms) -> HomogeneousPolynomial:
    """Surface cut out by homogenizing z(X2, X3) - X1 with respect to X0.

    `z_terms` maps bivariate exponents (a, b) to complex coefficients of
    q1^a q2^b.  The point [1, z(q1, q2), q1, q2] lies on the result for every
    (q1, q2).
    """
    z_terms = {(int(a), int(b)): complex(c) for (a, b), c in dict(z_terms).items()}
    m = max((a + b for (a, b), c in z_terms.items() if c != 0), default=0)
    deg = max(m, 1)
    terms = {}
    for (a, b), c in z_terms.items():
        if c == 0:
            continue
        e = (deg - a - b, 0, a, b)
        terms[e] = terms.get(e, 0j) + c
    e1 = (deg - 1, 1, 0, 0)
    terms[e1] = terms.get(e1, 0j) - 1.0
    return HomogeneousPolynomial(deg, terms, 4)
