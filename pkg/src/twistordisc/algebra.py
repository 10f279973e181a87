"""Quaternionic, projective and polynomial arithmetic.

Everything here is exact-formula numerics over complex floats: quaternions as
pairs (q1, q2) with q = q1 + q2*j, points/planes of CP^3 as 4-vectors, lines
as 4x2 basis matrices, homogeneous forms as sparse exponent->coefficient maps,
and binary forms carrying the root-multiplicity structure of line sections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoincidentPlanes,
    InputError,
    NullForm,
    SingularMatrix,
    ZeroQuaternion,
)

# Relative magnitude below which a coefficient counts as zero.
NULL_TOL = 1e-10


# ---------------------------------------------------------------------------
# quaternions

@dataclass(frozen=True)
class Quaternion:
    """q = q1 + q2*j with complex q1, q2; multiplication uses j*z = conj(z)*j."""

    q1: complex
    q2: complex

    @staticmethod
    def from_reals(w, x, y, z):
        """Build w + x*i + y*j + z*k."""
        return Quaternion(complex(w, x), complex(y, z))

    def reals(self):
        """Components (w, x, y, z) along the basis 1, i, j, k."""
        return (self.q1.real, self.q1.imag, self.q2.real, self.q2.imag)

    def conjugate(self):
        return Quaternion(self.q1.conjugate(), -self.q2)

    def norm_sq(self):
        return abs(self.q1) ** 2 + abs(self.q2) ** 2

    def norm(self):
        return math.sqrt(self.norm_sq())

    def __add__(self, other):
        return Quaternion(self.q1 + other.q1, self.q2 + other.q2)

    def __sub__(self, other):
        return Quaternion(self.q1 - other.q1, self.q2 - other.q2)

    def __neg__(self):
        return Quaternion(-self.q1, -self.q2)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        return Quaternion(self.q1 * other, self.q2 * other)

    def __rmul__(self, other):
        # other is a scalar (complex scalars act on the left of H = C + Cj)
        return Quaternion(other * self.q1, other * self.q2)

    def isclose(self, other, tol=1e-12):
        return (self - other).norm() <= tol * max(1.0, self.norm(), other.norm())


QUAT_ONE = Quaternion(1 + 0j, 0j)
QUAT_I = Quaternion(1j, 0j)
QUAT_J = Quaternion(0j, 1 + 0j)
QUAT_K = Quaternion(0j, 1j)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """(a1 + a2*j)(b1 + b2*j) = (a1*b1 - a2*conj(b2)) + (a1*b2 + a2*conj(b1))*j."""
    return Quaternion(
        a.q1 * b.q1 - a.q2 * b.q2.conjugate(),
        a.q1 * b.q2 + a.q2 * b.q1.conjugate(),
    )


def quat_inverse(q: Quaternion) -> Quaternion:
    """Inverse conj(q)/|q|^2; raises ZeroQuaternion at machine scale."""
    n2 = q.norm_sq()
    if n2 < 1e-300:
        raise ZeroQuaternion("cannot invert a zero quaternion")
    c = q.conjugate()
    return Quaternion(c.q1 / n2, c.q2 / n2)


# ---------------------------------------------------------------------------
# projective points, planes, lines

def _as_c4(z) -> np.ndarray:
    arr = np.asarray(z, dtype=complex).reshape(4)
    return arr


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """Point of CP^3 as a nonzero homogeneous 4-vector."""

    z: np.ndarray

    def __init__(self, z):
        arr = _as_c4(z)
        n = np.linalg.norm(arr)
        if n == 0.0 or not np.all(np.isfinite(arr.view(float))):
            raise InputError("projective point must be a finite nonzero 4-vector")
        object.__setattr__(self, "z", arr)

    def canonical(self) -> np.ndarray:
        """Unit-norm representative with first significant coordinate real positive."""
        v = self.z / np.linalg.norm(self.z)
        idx = int(np.argmax(np.abs(v) > 1e-12))
        phase = v[idx] / abs(v[idx])
        return v / phase

    def proj_distance(self, other: "ProjectivePoint") -> float:
        """Sine of the Fubini-Study angle between the spans (accurate near 0)."""
        u = self.z / np.linalg.norm(self.z)
        v = other.z / np.linalg.norm(other.z)
        w = v - np.vdot(u, v) * u
        return float(np.linalg.norm(w))

    def isclose(self, other, tol=1e-9):
        return self.proj_distance(other) <= tol


@dataclass(frozen=True, eq=False)
class ProjectivePlane:
    """Plane {a . z = 0} of CP^3, stored by its dual 4-vector a."""

    a: np.ndarray

    def __init__(self, a):
        arr = _as_c4(a)
        if np.linalg.norm(arr) == 0.0:
            raise InputError("plane dual vector must be nonzero")
        object.__setattr__(self, "a", arr)

    def contains(self, p: ProjectivePoint, tol=1e-9) -> bool:
        return self.residual(p.z) <= tol

    def residual(self, z) -> float:
        z = np.asarray(z, dtype=complex)
        return abs(np.dot(self.a, z)) / (np.linalg.norm(self.a) * np.linalg.norm(z))


@dataclass(frozen=True, eq=False)
class ProjectiveLine:
    """Line of CP^3 spanned by the two columns of a full-rank 4x2 basis.

    The basis is stored verbatim: restrictions of polynomials use the given
    columns, so coefficient-level identities (e.g. for twistor fibers) hold
    exactly.  Span comparisons orthonormalize first.
    """

    basis: np.ndarray

    def __init__(self, basis):
        arr = np.asarray(basis, dtype=complex).reshape(4, 2)
        if np.linalg.matrix_rank(arr, tol=1e-12) != 2:
            raise InputError("line basis must have rank 2")
        object.__setattr__(self, "basis", arr)

    def orthonormal_basis(self) -> np.ndarray:
        q, _ = np.linalg.qr(self.basis)
        return q

    def spans_equal(self, other: "ProjectiveLine", tol=1e-9) -> bool:
        stacked = np.hstack([self.orthonormal_basis(), other.orthonormal_basis()])
        s = np.linalg.svd(stacked, compute_uv=False)
        return s[2] <= tol * s[0]

    def point(self, s: complex, t: complex) -> ProjectivePoint:
        return ProjectivePoint(s * self.basis[:, 0] + t * self.basis[:, 1])


def plane_meet(h1: ProjectivePlane, h2: ProjectivePlane) -> ProjectiveLine:
    """Line of intersection of two distinct planes (kernel of the stacked duals)."""
    m = np.vstack([h1.a, h2.a])
    _, s, vh = np.linalg.svd(m)
    if s[1] <= 1e-12 * s[0]:
        raise CoincidentPlanes("planes are projectively equal")
    return ProjectiveLine(vh[2:, :].conj().T)


# ---------------------------------------------------------------------------
# homogeneous polynomials

def monomial_exponents(degree: int, nvars: int = 4):
    """All exponent tuples of the given total degree, lexicographic order."""
    if nvars == 1:
        return [(degree,)]
    out = []
    for e0 in range(degree, -1, -1):
        for rest in monomial_exponents(degree - e0, nvars - 1):
            out.append((e0,) + rest)
    return out


class HomogeneousPolynomial:
    """Homogeneous form of fixed degree in `nvars` complex variables.

    Stored sparsely as exponent tuple -> complex coefficient; explicit zeros
    are dropped.  The zero polynomial (no terms) is allowed so that gradients
    and other derived objects are closed under the arithmetic here; loaders of
    user surfaces reject it.
    """

    __slots__ = ("degree", "nvars", "terms")

    def __init__(self, degree: int, terms, nvars: int = 4):
        if degree < 0:
            raise InputError("degree must be nonnegative")
        clean = {}
        for e, c in dict(terms).items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars or any(x < 0 for x in e):
                raise InputError(f"bad exponent tuple {e}")
            if sum(e) != degree:
                raise InputError(f"exponents {e} do not sum to degree {degree}")
            c = complex(c)
            if c != 0:
                clean[e] = clean.get(e, 0j) + c
        self.degree = degree
        self.nvars = nvars
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        if not self.terms:
            return 0.0
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def coefficient_array(self):
        """(exponents (T, nvars) int array, coefficients (T,) complex array)."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0, dtype=complex)
        keys = sorted(self.terms)
        return np.array(keys, dtype=int), np.array([self.terms[k] for k in keys])

    def __repr__(self):
        return f"HomogeneousPolynomial(degree={self.degree}, nvars={self.nvars}, nterms={len(self.terms)})"

    # -- arithmetic ---------------------------------------------------------

    def scale(self, c: complex) -> "HomogeneousPolynomial":
        return HomogeneousPolynomial(
            self.degree, {e: c * v for e, v in self.terms.items()}, self.nvars
        )

    def add(self, other: "HomogeneousPolynomial") -> "HomogeneousPolynomial":
        if other.degree != self.degree or other.nvars != self.nvars:
            raise InputError("can only add forms of equal degree and arity")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0j) + c
        return HomogeneousPolynomial(self.degree, out, self.nvars)

    def mul(self, other: "HomogeneousPolynomial") -> "HomogeneousPolynomial":
        if other.nvars != self.nvars:
            raise InputError("arity mismatch")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0j) + c1 * c2
        return HomogeneousPolynomial(self.degree + other.degree, out, self.nvars)

    def evaluate(self, points):
        """Evaluate at points of shape (..., nvars); returns shape (...)."""
        pts = np.asarray(points, dtype=complex)
        exps, coeffs = self.coefficient_array()
        if exps.shape[0] == 0:
            return np.zeros(pts.shape[:-1], dtype=complex)
        # power tables keep the cost linear in max exponent
        maxe = int(exps.max())
        pows = [None] * self.nvars
        for i in range(self.nvars):
            col = pts[..., i]
            table = [np.ones_like(col)]
            for _ in range(maxe):
                table.append(table[-1] * col)
            pows[i] = table
        acc = np.zeros(pts.shape[:-1], dtype=complex)
        for t in range(exps.shape[0]):
            term = np.full(pts.shape[:-1], coeffs[t])
            for i in range(self.nvars):
                e = exps[t, i]
                if e:
                    term = term * pows[i][e]
            acc += term
        return acc

    def substitute(self, matrix) -> "HomogeneousPolynomial":
        """Form g(x) = f(B @ x) for B of shape (nvars, k); result has arity k."""
        b = np.asarray(matrix, dtype=complex)
        if b.shape[0] != self.nvars:
            raise InputError("substitution matrix must have nvars rows")
        k = b.shape[1]
        linear = []
        for i in range(self.nvars):
            terms = {}
            for jj in range(k):
                if b[i, jj] != 0:
                    e = tuple(1 if m == jj else 0 for m in range(k))
                    terms[e] = b[i, jj]
            linear.append(HomogeneousPolynomial(1, terms, k))
        one = HomogeneousPolynomial(0, {(0,) * k: 1.0}, k)
        # cache powers of each linear form
        power_cache = [[one] for _ in range(self.nvars)]
        out = HomogeneousPolynomial(self.degree, {}, k)
        for e, c in self.terms.items():
            term = one.scale(c)
            for i, ei in enumerate(e):
                while len(power_cache[i]) <= ei:
                    power_cache[i].append(power_cache[i][-1].mul(linear[i]))
                term = term.mul(power_cache[i][ei])
            out = out.add(term)
        return out


def poly_gradient(f: HomogeneousPolynomial):
    """Formal partial derivatives (one form of degree d-1 per variable)."""
    if f.degree < 1:
        raise InputError("gradient needs degree >= 1")
    grads = []
    for i in range(f.nvars):
        terms = {}
        for e, c in f.terms.items():
            if e[i] > 0:
                e2 = tuple(x - 1 if m == i else x for m, x in enumerate(e))
                terms[e2] = terms.get(e2, 0j) + e[i] * c
        grads.append(HomogeneousPolynomial(f.degree - 1, terms, f.nvars))
    return grads


def poly_linear_substitute(f: HomogeneousPolynomial, matrix) -> HomogeneousPolynomial:
    """Form f(M z) for an invertible square matrix M."""
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (f.nvars, f.nvars):
        raise InputError("matrix must be square of size nvars")
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularMatrix("substitution matrix is numerically singular")
    return f.substitute(m)


def random_polynomial(degree: int, seed: int, nvars: int = 4) -> HomogeneousPolynomial:
    """Dense random form with standard complex normal coefficients (Philox-keyed)."""
    gen = np.random.Generator(np.random.Philox(key=seed))
    exps = monomial_exponents(degree, nvars)
    vals = gen.normal(size=(len(exps), 2))
    return HomogeneousPolynomial(
        degree, {e: complex(v[0], v[1]) for e, v in zip(exps, vals)}, nvars
    )


# ---------------------------------------------------------------------------
# binary forms

@dataclass(frozen=True)
class BinaryForm:
    """Binary form sum_k coeffs[k] s^k t^(d-k) of formal degree d.

    `ref_scale` is the magnitude a restriction of this origin ought to have
    (coefficient norm of the parent surface times the basis growth); the null
    test compares against it so that restrictions of contained lines are
    recognized at the right relative scale.
    """

    degree: int
    coeffs: tuple
    ref_scale: float = None

    def __init__(self, degree, coeffs, ref_scale=None):
        coeffs = tuple(complex(c) for c in coeffs)
        if len(coeffs) != degree + 1:
            raise InputError("binary form needs degree+1 coefficients")
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "ref_scale", ref_scale)

    def coeff_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeff_array()))

    def scale_for_null(self) -> float:
        if self.ref_scale is not None and self.ref_scale > 0:
            return self.ref_scale
        return max(self.norm(), 1e-300)

    def is_null(self, tol: float = NULL_TOL) -> bool:
        return max(abs(c) for c in self.coeffs) < tol * self.scale_for_null()

    def evaluate(self, s, t):
        s = np.asarray(s, dtype=complex)
        t = np.asarray(t, dtype=complex)
        acc = np.zeros(np.broadcast(s, t).shape, dtype=complex)
        for k, c in enumerate(self.coeffs):
            acc = acc + c * s**k * t ** (self.degree - k)
        return acc


def restrict_polynomial(f: HomogeneousPolynomial, line: ProjectiveLine) -> BinaryForm:
    """Binary form p(s, t) = f(s*u + t*v) for the stored basis columns u, v."""
    return restrict_span(f, line.basis[:, 0], line.basis[:, 1])


def restrict_span(f: HomogeneousPolynomial, u, v) -> BinaryForm:
    """Binary form f(s*u + t*v) for arbitrary ambient arity."""
    u = np.asarray(u, dtype=complex).reshape(f.nvars)
    v = np.asarray(v, dtype=complex).reshape(f.nvars)
    g = f.substitute(np.stack([u, v], axis=1))
    coeffs = [0j] * (f.degree + 1)
    for e, c in g.terms.items():
        coeffs[e[0]] = c
    scale = max(float(np.linalg.norm(u)), float(np.linalg.norm(v)))
    return BinaryForm(f.degree, coeffs, ref_scale=f.norm() * scale**f.degree)


def plane_section(f: HomogeneousPolynomial, plane: ProjectivePlane):
    """Ternary form of the section X cap H and the orthonormal 4x3 basis used."""
    _, _, vh = np.linalg.svd(plane.a.reshape(1, 4))
    basis = vh[1:, :].conj().T  # columns span the plane
    return f.substitute(basis), basis


# ---------------------------------------------------------------------------
# discriminants and roots

def _derivative_coeffs(a: np.ndarray):
    """Coefficient vectors of dp/ds and dp/dt for stacked coeff rows a (..., d+1)."""
    d = a.shape[-1] - 1
    ks = np.arange(1, d + 1)
    b = a[..., 1:] * ks          # b_j = (j+1) a_{j+1}
    c = a[..., :d] * (d - np.arange(d))  # c_j = (d-j) a_j
    return b, c


def sylvester_resultant(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Resultant of two stacked binary forms of equal formal degree m.

    b, c have shape (..., m+1) with entry k the coefficient of s^k t^(m-k).
    Returns the determinant of the (2m x 2m) Sylvester matrix per row.
    """
    m = b.shape[-1] - 1
    if m == 0:
        return np.ones(b.shape[:-1], dtype=complex)
    lead = b.shape[:-1]
    size = 2 * m
    mat = np.zeros(lead + (size, size), dtype=complex)
    br = b[..., ::-1]
    cr = c[..., ::-1]
    for i in range(m):
        mat[..., i, i : i + m + 1] = br
        mat[..., m + i, i : i + m + 1] = cr
    return np.linalg.det(mat)


def binary_discriminant(p: BinaryForm) -> complex:
    """Res(dp/ds, dp/dt) normalized by ||p||^(2(d-1)); zero iff a repeated root.

    The projective resultant of the two partials avoids special cases at
    [0:1] and [1:0]; degree-1 forms have no repeated roots and return 1.
    """
    if p.is_null():
        raise NullForm("discriminant of the null form")
    a = p.coeff_array()
    d = p.degree
    if d == 1:
        return 1.0 + 0j
    b, c = _derivative_coeffs(a)
    res = sylvester_resultant(b, c)
    return complex(res / p.norm() ** (2 * (d - 1)))


INFINITY_ROOT = None  # marker for the root [1:0] in affine coordinates s/t


def chordal_cp1(x, y) -> float:
    """Chordal metric on CP^1 (diameter 2); INFINITY_ROOT marks [1:0]."""
    if x is INFINITY_ROOT and y is INFINITY_ROOT:
        return 0.0
    if x is INFINITY_ROOT:
        return 2.0 / math.sqrt(1.0 + abs(y) ** 2)
    if y is INFINITY_ROOT:
        return 2.0 / math.sqrt(1.0 + abs(x) ** 2)
    return 2.0 * abs(x - y) / math.sqrt((1.0 + abs(x) ** 2) * (1.0 + abs(y) ** 2))


@dataclass(frozen=True)
class Partition:
    """Non-increasing multiplicity profile of a line section; sums to d unless
    the line is contained in the surface (then parts is empty)."""

    parts: tuple
    line_contained: bool = False

    def __init__(self, parts=(), line_contained=False):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if line_contained and parts:
            raise InputError("contained-line partition carries no parts")
        if not line_contained and any(p <= 0 for p in parts):
            raise InputError("parts must be positive")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "line_contained", bool(line_contained))

    def __str__(self):
        if self.line_contained:
            return "LINE_CONTAINED"
        return "(" + ",".join(str(p) for p in self.parts) + ")"


LINE_CONTAINED_PARTITION = Partition((), line_contained=True)


def _cluster_roots(roots, cluster_tol):
    """Single-linkage clustering of CP^1 points under the chordal metric."""
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if chordal_cp1(roots[i], roots[j]) < cluster_tol:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        vals = [roots[i] for i in members]
        if any(v is INFINITY_ROOT for v in vals):
            rep = INFINITY_ROOT
        else:
            # weight by inverse chart growth so huge values do not dominate
            rep = sum(vals) / len(vals)
        out.append((rep, len(members)))
    out.sort(key=lambda rm: -rm[1])
    return out


def binary_roots(p: BinaryForm, cluster_tol: float = 1e-6):
    """Projective roots with multiplicities; clusters merged below cluster_tol.

    Roots are affine values x = s/t, with INFINITY_ROOT for [1:0].  Found via
    companion-matrix eigenvalues of the dehomogenized polynomial; trailing
    degree drop contributes the root at infinity.  Multiplicities sum to d.
    """
    if p.is_null():
        raise NullForm("roots of the null form")
    a = p.coeff_array()
    d = p.degree
    maxmag = float(np.max(np.abs(a)))
    # strip only working-precision zeros at the top; near-zero leading
    # coefficients yield huge eigenvalues that cluster with infinity anyway
    m = d
    while m > 0 and abs(a[m]) <= 1e-14 * maxmag:
        m -= 1
    roots = [INFINITY_ROOT] * (d - m)
    if m > 0:
        eigs = np.roots(a[: m + 1][::-1])
        # treat astronomically large eigenvalues as the infinity root
        for x in eigs:
            if abs(x) > 1e12:
                roots.append(INFINITY_ROOT)
            else:
                roots.append(complex(x))
    return _cluster_roots(roots, cluster_tol)


def partition_of(p: BinaryForm, cluster_tol: float = 1e-6) -> Partition:
    """Partition of the section divisor; LINE_CONTAINED for the null form."""
    if p.is_null():
        return LINE_CONTAINED_PARTITION
    return Partition([m for _, m in binary_roots(p, cluster_tol)])


def form_from_roots(roots, ref_scale=None) -> BinaryForm:
    """Binary form with the prescribed CP^1 roots (INFINITY_ROOT allowed)."""
    coeffs = np.array([1.0 + 0j])
    degree = len(roots)
    for r in roots:
        if r is INFINITY_ROOT:
            factor = np.array([1.0 + 0j, 0j])      # t
        else:
            factor = np.array([-r, 1.0 + 0j])      # s - r t  (coeff of t^1 then s^1)
        coeffs = np.convolve(coeffs, factor)
    return BinaryForm(degree, list(coeffs), ref_scale=ref_scale)
