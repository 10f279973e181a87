"""Vectorized evaluation and refinement machinery behind the locus samplers.

The samplers batch thousands of chart points at once: restrictions to fibers
are recovered by evaluating the surface at d+1 roots-of-unity combinations of
the fiber basis and inverting the DFT, resultants come from stacked Sylvester
determinants, and Gauss-Newton steps use batched pseudo-inverses.

Refinement objective: the discriminant normalized by the coefficient norm of
the restriction cannot vanish where the fiber is contained in the surface (the
restriction itself collapses), so the residual driven to zero here is the
resultant of the partials normalized by the *fiber scale* ||f|| * s^(d(d-1)),
which vanishes exactly on the discriminant locus, including contained lines.
Near-null restrictions switch to a finishing phase on the normalized
coefficient vector, which vanishes linearly on contained-line loci.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .algebra import sylvester_resultant
from .twistor import fiber_basis_batch

CHUNK = 8192

# refine_batch status codes
RUNNING = 0
CONVERGED = 1
FAILED_STATUS = 2
DIVERGED_STATUS = 3


# ---------------------------------------------------------------------------
# counter-based randomness

def philox_uniforms(seed: int, indices, n: int) -> np.ndarray:
    """Uniforms in [0,1) keyed by (seed, index): order- and thread-independent."""
    indices = np.asarray(indices, dtype=np.uint64)
    out = np.empty((len(indices), n))
    base = (int(seed) & 0xFFFFFFFFFFFFFFFF) << 64
    for row in range(len(indices)):
        gen = np.random.Generator(np.random.Philox(key=base + int(indices[row])))
        out[row] = gen.random(n)
    return out


def stratified_starts(budget: int, seed: int, box: np.ndarray) -> np.ndarray:
    """Jittered-lattice starting points in the chart box, keyed by (seed, index).

    The lattice gives quasi-uniform coverage (no Poisson gaps), the jitter the
    usual genericity; the result depends only on (seed, index), never on
    execution order.
    """
    box = np.asarray(box, dtype=float).reshape(4, 2)
    side = max(1, int(np.ceil(budget ** 0.25)))
    u = philox_uniforms(seed, np.arange(budget), 4)
    idx = np.arange(budget) % side**4
    cells = np.stack([(idx // side**k) % side for k in range(4)], axis=1)
    width = (box[:, 1] - box[:, 0]) / side
    return box[:, 0] + (cells + u) * width


def run_chunked(worker, n: int, threads: int = 1):
    """Apply worker(start, stop) over fixed-size chunks; merge in index order.

    Chunk boundaries are independent of the thread count, so outputs are
    bitwise identical for any pool size.
    """
    spans = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if threads <= 1 or len(spans) <= 1:
        return [worker(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: worker(*ab), spans))


# ---------------------------------------------------------------------------
# batched surface evaluation

class SurfaceBatch:
    """Precomputed tables for vectorized work with a fixed surface."""

    def __init__(self, f):
        self.f = f
        self.degree = f.degree
        self.exps, self.coeffs = f.coefficient_array()
        self.fnorm = max(f.norm(), 1e-300)
        d = f.degree
        self.nodes = np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
        self._grad = None

    def eval_points(self, z: np.ndarray) -> np.ndarray:
        """Evaluate f at points of shape (..., 4)."""
        return _eval_table(self.exps, self.coeffs, z)

    def gradient_at(self, z: np.ndarray) -> np.ndarray:
        """Gradient rows (..., 4) at points (..., 4)."""
        if self._grad is None:
            from .algebra import poly_gradient

            self._grad = [g.coefficient_array() for g in poly_gradient(self.f)]
        outs = [_eval_table(e, c, z) for e, c in self._grad]
        return np.stack(outs, axis=-1)

    def restrict_line(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Coefficients (..., d+1) of f(s u + t v) for basis rows u, v (..., 4)."""
        d = self.degree
        z = self.nodes[:, None] * u[..., None, :] + v[..., None, :]
        vals = self.eval_points(z)  # (..., d+1)
        return np.fft.fft(vals, axis=-1) / (d + 1)

    def restrict_fiber(self, q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
        u, v = fiber_basis_batch(q1, q2)
        return self.restrict_line(u, v)

    def fiber_scale(self, q1, q2) -> np.ndarray:
        """Natural magnitude of fiber-restriction coefficients at q."""
        s2 = 1.0 + np.abs(q1) ** 2 + np.abs(q2) ** 2
        return self.fnorm * s2 ** (self.degree / 2.0), s2


def _eval_table(exps: np.ndarray, coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Sparse-form evaluation with per-variable power tables."""
    z = np.asarray(z, dtype=complex)
    lead = z.shape[:-1]
    if exps.shape[0] == 0:
        return np.zeros(lead, dtype=complex)
    maxe = int(exps.max())
    pows = []
    for i in range(z.shape[-1]):
        col = z[..., i]
        table = [np.ones(lead, dtype=complex)]
        for _ in range(maxe):
            table.append(table[-1] * col)
        pows.append(table)
    acc = np.zeros(lead, dtype=complex)
    for t in range(exps.shape[0]):
        term = pows[0][exps[t, 0]]
        for i in range(1, z.shape[-1]):
            e = exps[t, i]
            if e:
                term = term * pows[i][e]
        acc = acc + coeffs[t] * term
    return acc


# ---------------------------------------------------------------------------
# discriminants of stacked restrictions

def resultant_of_partials(a: np.ndarray) -> np.ndarray:
    """Res(dp/ds, dp/dt) for stacked coefficient rows a (..., d+1)."""
    d = a.shape[-1] - 1
    if d == 1:
        return np.ones(a.shape[:-1], dtype=complex)
    ks = np.arange(1, d + 1)
    b = a[..., 1:] * ks
    c = a[..., :d] * (d - np.arange(d))
    return sylvester_resultant(b, c)


def normalized_disc(a: np.ndarray) -> np.ndarray:
    """Discriminant values normalized by the restriction coefficient norm."""
    d = a.shape[-1] - 1
    if d == 1:
        return np.ones(a.shape[:-1], dtype=complex)
    anorm = np.linalg.norm(a, axis=-1)
    anorm = np.where(anorm > 0, anorm, 1.0)
    return resultant_of_partials(a) / anorm ** (2 * (d - 1))


# ---------------------------------------------------------------------------
# Gauss-Newton refinement

def _objective(sb: SurfaceBatch, x: np.ndarray, coeff_mode: bool):
    """Residual rows for chart points x (M, 4); also returns (coeffs, scale)."""
    q1 = x[:, 0] + 1j * x[:, 1]
    q2 = x[:, 2] + 1j * x[:, 3]
    a = sb.restrict_fiber(q1, q2)
    scale, s2 = sb.fiber_scale(q1, q2)
    d = sb.degree
    if coeff_mode or d == 1:
        r = a / scale[:, None]
        res = np.concatenate([r.real, r.imag], axis=1)
    else:
        res_c = resultant_of_partials(a) / (
            sb.fnorm ** (2 * (d - 1)) * s2 ** (d * (d - 1))
        )
        res = np.stack([res_c.real, res_c.imag], axis=1)
    return res, a, scale


def _gn_step(sb, x, coeff_mode):
    """One damped Gauss-Newton update for a homogeneous subset.

    Returns (x_new, res_norm_new, step_norms, improved_mask).
    """
    m = x.shape[0]
    r0, _, _ = _objective(sb, x, coeff_mode)
    n0 = np.linalg.norm(r0, axis=1)
    h = 1e-6 * (1.0 + np.abs(x))  # (m, 4)
    # central-difference Jacobian, all 8 shifted evaluations in one batch
    shifts = np.zeros((8, m, 4))
    for i in range(4):
        shifts[2 * i, :, i] = h[:, i]
        shifts[2 * i + 1, :, i] = -h[:, i]
    pts = (x[None, :, :] + shifts).reshape(8 * m, 4)
    rs, _, _ = _objective(sb, pts, coeff_mode)
    rs = rs.reshape(8, m, -1)
    jac = np.empty((m, rs.shape[-1], 4))
    for i in range(4):
        jac[:, :, i] = (rs[2 * i] - rs[2 * i + 1]) / (2.0 * h[:, i])[:, None]
    step = np.einsum("mij,mj->mi", np.linalg.pinv(jac, rcond=1e-12), r0)
    step_norm = np.linalg.norm(step, axis=1)

    lam = np.ones(m)
    best_x = x - step
    best_n, _, _ = _objective(sb, best_x, coeff_mode)
    best_n = np.linalg.norm(best_n, axis=1)
    for _ in range(3):
        worse = best_n >= n0
        if not np.any(worse):
            break
        lam[worse] *= 0.5
        cand = x[worse] - lam[worse, None] * step[worse]
        rn, _, _ = _objective(sb, cand, coeff_mode)
        rn = np.linalg.norm(rn, axis=1)
        better = rn < best_n[worse]
        idx = np.where(worse)[0][better]
        best_x[idx] = cand[better]
        best_n[idx] = rn[better]
    improved = best_n < n0 * (1.0 - 1e-12)
    return best_x, best_n, step_norm, improved


def refine_batch(
    sb: SurfaceBatch,
    x0: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 80,
    null_tol: float = 1e-10,
    switch_scale: float = 1e-4,
):
    """Drive chart points onto the discriminant locus of the batch's surface.

    Returns (x, status, absdisc, is_null): status uses the module codes, and
    absdisc is |disc| normalized by the restriction norm (0 where null).
    Acceptance is |disc| < tol or a null restriction; everything else fails.
    """
    x = np.array(x0, dtype=float).copy()
    n = x.shape[0]
    d = sb.degree
    status = np.full(n, RUNNING, dtype=np.int8)
    mode = np.zeros(n, dtype=bool)
    if d == 1:
        mode[:] = True
    stall = np.zeros(n, dtype=np.int8)
    trust = np.full(n, np.nan)
    absdisc = np.full(n, np.nan)
    is_null = np.zeros(n, dtype=bool)

    def classify(idx):
        """Evaluate acceptance data at current points idx; update terminal states."""
        if idx.size == 0:
            return
        q1 = x[idx, 0] + 1j * x[idx, 1]
        q2 = x[idx, 2] + 1j * x[idx, 3]
        a = sb.restrict_fiber(q1, q2)
        scale, _ = sb.fiber_scale(q1, q2)
        amax = np.max(np.abs(a), axis=1)
        null = amax < null_tol * scale
        vals = np.abs(normalized_disc(a))
        vals = np.where(null, 0.0, vals)
        absdisc[idx] = vals
        is_null[idx] = null
        ok = null | (vals < tol)
        status[idx[ok]] = CONVERGED
        near = (~ok) & (amax < switch_scale * scale)
        mode[idx[near]] = True

    classify(np.where(status == RUNNING)[0])
    for _ in range(max_iter):
        active = np.where(status == RUNNING)[0]
        if active.size == 0:
            break
        for m_flag in (False, True):
            sel = active[mode[active] == m_flag]
            if sel.size == 0:
                continue
            new_x, _, step_norm, improved = _gn_step(sb, x[sel], m_flag or d == 1)
            first = np.isnan(trust[sel])
            trust[sel[first]] = 10.0 * np.maximum(step_norm[first], 0.05)
            x[sel] = new_x
            stall[sel] = np.where(improved, 0, stall[sel] + 1)
        active = np.where(status == RUNNING)[0]
        classify(active)
        active = np.where(status == RUNNING)[0]
        if active.size:
            diverged = np.max(np.abs(x[active]), axis=1) > 1e6
            status[active[diverged]] = DIVERGED_STATUS
            wander = np.linalg.norm(x[active] - x0[active], axis=1) > trust[active]
            stalled = stall[active] >= 3
            status[active[(wander | stalled) & ~diverged]] = FAILED_STATUS
    status[status == RUNNING] = FAILED_STATUS
    return x, status, absdisc, is_null


# ---------------------------------------------------------------------------
# batched root partitions

def partition_counts(a: np.ndarray, scales: np.ndarray, cluster_tol: float, null_tol: float = 1e-10):
    """Partition profile per restriction row.

    Returns a list of (parts tuple, line_contained) per row of a.  Rows whose
    companion path is unreliable (vanishing leading coefficient) fall back to
    the scalar root finder.
    """
    from .algebra import BinaryForm, binary_roots

    n, dp1 = a.shape
    d = dp1 - 1
    amax = np.max(np.abs(a), axis=1)
    null = amax < null_tol * scales
    out = [None] * n
    for i in np.where(null)[0]:
        out[i] = ((), True)
    live = np.where(~null)[0]
    if live.size == 0:
        return out
    if d == 0:
        for i in live:
            out[i] = ((), False)
        return out
    lead_ok = np.abs(a[live, d]) > 1e-10 * amax[live]
    main = live[lead_ok]
    odd = live[~lead_ok]
    if main.size:
        comp = np.zeros((main.size, d, d), dtype=complex)
        comp[:, 0, :] = -a[main, :d][:, ::-1] / a[main, d][:, None]
        if d > 1:
            comp[:, np.arange(1, d), np.arange(0, d - 1)] = 1.0
        roots = np.linalg.eigvals(comp)  # (M, d)
        dmat = _chordal_matrix(roots)
        adj = dmat < cluster_tol
        for _ in range(3):
            adj = adj | (np.matmul(adj.astype(np.uint8), adj.astype(np.uint8)) > 0)
        labels = np.argmax(adj, axis=2)
        for row, i in enumerate(main):
            _, counts = np.unique(labels[row], return_counts=True)
            out[i] = (tuple(sorted(counts.tolist(), reverse=True)), False)
    for i in odd:
        bf = BinaryForm(d, a[i], ref_scale=float(scales[i]))
        rm = binary_roots(bf, cluster_tol)
        out[i] = (tuple(sorted((m for _, m in rm), reverse=True)), False)
    return out


def _chordal_matrix(roots: np.ndarray) -> np.ndarray:
    """Pairwise CP^1 chordal distances for stacked root rows (M, d)."""
    g = 1.0 + np.abs(roots) ** 2
    diff = np.abs(roots[:, :, None] - roots[:, None, :])
    return 2.0 * diff / np.sqrt(g[:, :, None] * g[:, None, :])
