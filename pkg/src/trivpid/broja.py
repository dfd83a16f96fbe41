"""Bivariate PID of one target against two sources.

Redundancy, unique and synergistic information follow the
Bertschinger-Rauh-Olbrich-Jost-Ay definition: find the distribution q that
keeps the (T, A) and (T, B) pairwise marginals of p and minimises
I_q(T : (A, B)).  Then

    CI       = I_p(T:(A,B)) - I_q(T:(A,B))
    UI(A\\B) = I_q(T:A|B)
    UI(B\\A) = I_q(T:B|A)
    SI       = I(T:A) - UI(A\\B)

Since H(T) is fixed on the feasible set, minimising I_q(T:(A,B)) is the same
as maximising H_q(T|A,B).  For each target value t the feasible slice
q(t, ., .) is a transportation polytope (fixed row and column sums) whose
tangent space is spanned by exchange moves
e(t,a,b) + e(t,a',b') - e(t,a,b') - e(t,a',b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dist import ROLES, JointDist3, entropy, role_index
from .errors import ConsistencyError, SolverError, ValidationError

LN2 = math.log(2.0)
ATOM_CLAMP = 1e-9
# reduced dimension above which the dense Newton path is replaced by MM
DENSE_LIMIT = 1500


def sources_of(target) -> tuple[str, str]:
    t = role_index(target)
    a, b = (r for i, r in enumerate(ROLES) if i != t)
    return a, b


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules for :func:`solve_pid`.

    ``tol_bits`` bounds the optimality gap of the returned objective,
    ``marginal_tol`` the per-cell violation of the pairwise constraints.
    """

    tol_bits: float = 1e-10
    max_iters: int = 100_000
    marginal_tol: float = 1e-8
    method: str = "auto"
    backend: str | None = None

    def __post_init__(self):
        if not (self.tol_bits > 0 and self.max_iters > 0 and self.marginal_tol > 0):
            raise ValidationError("solver tolerances and iteration cap must be strictly positive")
        if self.method not in ("auto", "newton", "mm"):
            raise ValidationError(f"unknown solver method {self.method!r}")


@dataclass(frozen=True)
class PidAtoms:
    target: str
    sources: tuple[str, str]
    si: float
    ui_a: float
    ui_b: float
    ci: float

    def as_dict(self) -> dict:
        a, b = self.sources
        return {
            "target": self.target,
            "SI": self.si,
            f"UI_{a}": self.ui_a,
            f"UI_{b}": self.ui_b,
            "CI": self.ci,
        }

    def ui(self, source) -> float:
        s = ROLES[role_index(source)]
        if s == self.sources[0]:
            return self.ui_a
        if s == self.sources[1]:
            return self.ui_b
        raise ValidationError(f"{s} is the target of this decomposition, not a source")


@dataclass(frozen=True)
class PolytopePoint:
    """Optimising distribution, axes in the input's X, Y, Z order."""

    q: np.ndarray
    objective: float
    iterations: int = 0
    gap: float = 0.0
    method: str = ""
    trace: tuple = field(default=(), repr=False)


def clamp_atom(value: float, name: str) -> float:
    if value >= 0:
        return value
    if value >= -ATOM_CLAMP:
        return 0.0
    raise ConsistencyError(f"{name} = {value!r} is negative beyond solver noise")


def _oriented(dist: JointDist3, target) -> tuple[np.ndarray, tuple[int, int, int]]:
    t = role_index(target)
    order = (t,) + tuple(i for i in range(3) if i != t)
    return np.transpose(dist.probs, order), order


def _mi_bits(q3: np.ndarray) -> float:
    """I(T : (A,B)) of a (T, A, B) table."""
    return entropy(q3.sum(axis=(1, 2))) + entropy(q3.sum(axis=0)) - entropy(q3)


def _atoms_from_q(p3: np.ndarray, q3: np.ndarray, target: str, sources) -> PidAtoms:
    """Atoms of p from an optimiser q, both as (T, A, B) tables."""
    i_ta = entropy(p3.sum(2).sum(1)) + entropy(p3.sum((0, 2))) - entropy(p3.sum(2))
    i_p = _mi_bits(p3)
    i_q = _mi_bits(q3)
    ht_b = entropy(q3.sum(1)) - entropy(q3.sum((0, 1)))          # H_q(T|B)
    ht_a = entropy(q3.sum(2)) - entropy(q3.sum((0, 2)))          # H_q(T|A)
    ht_ab = entropy(q3) - entropy(q3.sum(0))                      # H_q(T|A,B)
    ui_a = clamp_atom(ht_b - ht_ab, f"UI({target}:{sources[0]}\\{sources[1]})")
    ui_b = clamp_atom(ht_a - ht_ab, f"UI({target}:{sources[1]}\\{sources[0]})")
    si = clamp_atom(i_ta - ui_a, f"SI({target})")
    ci = clamp_atom(i_p - i_q, f"CI({target})")
    return PidAtoms(target, tuple(sources), si, ui_a, ui_b, ci)


# --------------------------------------------------------------------------
# polytope geometry
# --------------------------------------------------------------------------

def _zero_sum_basis(m: int) -> np.ndarray:
    """Orthonormal (Helmert) basis of {v in R^m : sum v = 0}, shape (m, m-1)."""
    h = np.zeros((m, m - 1))
    for j in range(1, m):
        h[:j, j - 1] = 1.0
        h[j, j - 1] = -float(j)
        h[:, j - 1] /= math.sqrt(j * (j + 1))
    return h


class _Polytope:
    """Support cells, start point and tangent basis of the marginal polytope."""

    def __init__(self, p3: np.ndarray):
        self.p3 = p3
        self.shape = p3.shape
        nT, nA, nB = p3.shape
        self.pta = p3.sum(axis=2)
        self.ptb = p3.sum(axis=1)
        pt = p3.sum(axis=(1, 2))

        cells, blocks = [], []
        for t in range(nT):
            if pt[t] <= 0:
                continue
            rows = np.flatnonzero(self.pta[t] > 0)
            cols = np.flatnonzero(self.ptb[t] > 0)
            start = len(cells)
            cells.extend((t, a, b) for a in rows for b in cols)
            blocks.append((t, start, rows.size, cols.size))
        self.cells = np.array(cells, dtype=np.int64).reshape(-1, 3)
        self.blocks = blocks
        n = len(cells)
        self.n = n
        pair = self.cells[:, 1] * nB + self.cells[:, 2]
        used, group = np.unique(pair, return_inverse=True)
        self.group = group.astype(np.int64)
        self.n_groups = used.size
        # product point p(t,a) p(t,b) / p(t): feasible and strictly positive
        tt, aa, bb = self.cells.T
        self.q0 = self.pta[tt, aa] * self.ptb[tt, bb] / pt[tt]
        self.dim = sum((ma - 1) * (mb - 1) for _, _, ma, mb in blocks)

    def basis(self) -> np.ndarray:
        """Dense orthonormal basis of the tangent space, shape (n, dim)."""
        N = np.zeros((self.n, self.dim))
        col = 0
        for _, start, ma, mb in self.blocks:
            k = (ma - 1) * (mb - 1)
            if k:
                N[start:start + ma * mb, col:col + k] = np.kron(_zero_sum_basis(ma), _zero_sum_basis(mb))
            col += k
        return N

    def dense(self, q: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.cells[:, 0], self.cells[:, 1], self.cells[:, 2]] = q
        return out

    def marginal_error(self, q3: np.ndarray) -> float:
        return max(float(np.max(np.abs(q3.sum(2) - self.pta))), float(np.max(np.abs(q3.sum(1) - self.ptb))))


# --------------------------------------------------------------------------
# solvers
# --------------------------------------------------------------------------

def _newton_barrier(poly: _Polytope, cfg: SolverConfig, kern):
    """Primal log-barrier method with Newton steps in the tangent space.

    Returns (q, iterations, gap_nats, trace) where ``trace`` holds the true
    objective at the end of every barrier stage (non-increasing along the
    central path).
    """
    q = poly.q0.copy()
    group, ng = poly.group, poly.n_groups
    if poly.dim == 0:
        return q, 0, 0.0, (kern.objective(q, group, ng),)
    N = poly.basis()
    NG = np.zeros((ng, poly.dim))
    np.add.at(NG, group, N)

    n = poly.n
    tol_nats = cfg.tol_bits * LN2
    mu = 1e-3
    iters = 0
    trace = [kern.objective(q, group, ng)]
    while True:
        final = n * mu <= 0.5 * tol_nats
        # centring for the current mu
        for _ in range(200):
            iters += 1
            if iters > cfg.max_iters:
                raise SolverError(
                    f"barrier method exceeded {cfg.max_iters} Newton iterations",
                    best_objective=kern.objective(q, group, ng) / LN2,
                    gap=n * mu / LN2,
                )
            Q = kern.group_sums(q, group, ng)
            grad = kern.gradient(q, group, ng) - mu / q
            g = N.T @ grad
            w = 1.0 / q + mu / (q * q)
            H = N.T @ (w[:, None] * N) - NG.T @ (NG / Q[:, None])
            try:
                L = np.linalg.cholesky(H)
                dx = -np.linalg.solve(L.T, np.linalg.solve(L, g))
            except np.linalg.LinAlgError:
                evals, evecs = np.linalg.eigh(H)
                evals = np.maximum(evals, 1e-12 * max(evals.max(), 1.0))
                dx = -evecs @ ((evecs.T @ g) / evals)
            dec2 = -float(g @ dx)
            if dec2 <= 0:
                break
            if dec2 / 2 <= (1e-3 * mu if not final else 1e-16):
                break
            dq = N @ dx
            step = kern.max_step(q, dq, 0.99)
            f0 = kern.barrier_objective(q, group, ng, mu)
            accepted = False
            while step > 1e-14:
                trial = q + step * dq
                f1 = kern.barrier_objective(trial, group, ng, mu)
                if f1 <= f0 - 0.25 * step * dec2:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            q = trial
        trace.append(kern.objective(q, group, ng))
        if final:
            break
        mu *= 0.1
    return q, iters, n * mu, tuple(trace)


def _sinkhorn(K, pta, ptb, u, v, tol, max_iter):
    """Scale q = u[t,a] K[a,b] v[t,b] to the target marginals."""
    with np.errstate(divide="ignore", invalid="ignore"):
        for it in range(max_iter):
            kv = v @ K.T
            u = np.where(pta > 0, pta / kv, 0.0)
            ku = u @ K
            v = np.where(ptb > 0, ptb / ku, 0.0)
            rows = u * (v @ K.T)
            if np.max(np.abs(rows - pta)) <= tol:
                return u, v, it + 1
    return u, v, max_iter


def _majorize_minimize(poly: _Polytope, cfg: SolverConfig, kern):
    """Monotone MM iteration for large systems.

    The concave term H_q(A,B) is replaced by its tangent at the current q;
    the resulting surrogate is KL(q || q_k(a,b)) over the polytope, solved
    exactly by Sinkhorn scaling of each target slice.
    """
    pta, ptb = poly.pta, poly.ptb
    q3 = poly.dense(poly.q0)
    u = np.ones_like(pta)
    v = np.ones_like(ptb)
    ng = q3.shape[1] * q3.shape[2]
    group = np.tile(np.arange(ng), q3.shape[0])

    def obj(t3):
        return kern.objective(t3.ravel(), group, ng)

    f = obj(q3)
    trace = [f]
    tol_nats = cfg.tol_bits * LN2
    iters = 0
    while True:
        iters += 1
        if iters > cfg.max_iters:
            raise SolverError(
                f"MM iteration exceeded {cfg.max_iters} steps",
                best_objective=f / LN2,
                gap=(trace[-2] - trace[-1]) / LN2 if len(trace) > 1 else None,
            )
        K = q3.sum(axis=0)
        u, v, _ = _sinkhorn(K, pta, ptb, u, v, 0.01 * cfg.marginal_tol, 10_000)
        new = u[:, :, None] * K[None, :, :] * v[:, None, :]
        f_new = obj(new)
        trace.append(f_new)
        q3 = new
        if f - f_new <= tol_nats:
            f = f_new
            break
        f = f_new
    cells = poly.cells
    return q3[cells[:, 0], cells[:, 1], cells[:, 2]], iters, max(trace[-2] - trace[-1], 0.0), tuple(trace)


def solve_pid(dist: JointDist3, target="X", cfg: SolverConfig | None = None):
    """PID atoms of ``target`` against the other two variables.

    Returns ``(PidAtoms, PolytopePoint)``.  Sources are the remaining roles in
    X, Y, Z order, so target ``"Y"`` has sources ``("X", "Z")``.
    """
    cfg = cfg or SolverConfig()
    kern = _kernels.get_backend(cfg.backend)
    target = ROLES[role_index(target)]
    sources = sources_of(target)
    p3, order = _oriented(dist, target)
    poly = _Polytope(np.ascontiguousarray(p3))

    method = cfg.method
    if method == "auto":
        method = "newton" if poly.dim <= DENSE_LIMIT else "mm"
    try:
        if method == "newton":
            q, iters, gap, trace = _newton_barrier(poly, cfg, kern)
        else:
            q, iters, gap, trace = _majorize_minimize(poly, cfg, kern)
    except SolverError as exc:
        exc.target = target
        raise

    q3 = poly.dense(np.maximum(q, 0.0))
    err = poly.marginal_error(q3)
    if err > cfg.marginal_tol:
        raise ConsistencyError(
            f"optimiser for target {target} violates the pairwise marginals by {err:.3g}"
        )
    atoms = _atoms_from_q(p3, q3, target, sources)
    inverse = np.argsort(order)
    h_t = entropy(p3.sum(axis=(1, 2)))
    point = PolytopePoint(
        q=np.transpose(q3, inverse),
        objective=_mi_bits(q3),
        iterations=iters,
        gap=gap / LN2,
        method=method,
        # kernels track -H(T|A,B); shift by H(T) to report I_q(T:(A,B))
        trace=tuple(h_t + t / LN2 for t in trace),
    )
    return atoms, point


# --------------------------------------------------------------------------
# brute-force oracle
# --------------------------------------------------------------------------

def _batch_mi(Q: np.ndarray) -> np.ndarray:
    """I(T:(A,B)) for a batch of (T, A, B) tables, shape (m, T, A, B)."""

    def H(x, axes):
        flat = x.reshape(x.shape[0], -1) if axes is None else x.sum(axis=axes).reshape(x.shape[0], -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(flat > 0, flat * np.log2(np.where(flat > 0, flat, 1.0)), 0.0)
        return -terms.sum(axis=1)

    return H(Q, (2, 3)) + H(Q, 1) - H(Q, None)


def _golden(f, lo, hi, tol):
    """Minimise a convex scalar function on [lo, hi]; returns (x, f(x))."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    cands = [(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)]
    fx, x = min(cands)
    return x, fx


def brute_force_pid(dist: JointDist3, target="X", resolution: float = 1e-9,
                    max_dim: int = 4) -> PidAtoms:
    """Exhaustive scan oracle for small polytopes.

    In each target slice the top-left (rows-1) x (cols-1) cells are free
    coordinates; the last row and column absorb the marginal constraints, so
    every cell is an affine function of the free coordinates.  With at most
    two free coordinates the scan is a nested golden-section search over the
    exact feasible intervals; with three or four it is a regular grid that is
    recentred and refined around the best point until the spacing falls
    below ``resolution``.
    """
    target = ROLES[role_index(target)]
    sources = sources_of(target)
    p3, _ = _oriented(dist, target)
    nT, nA, nB = p3.shape
    pta, ptb = p3.sum(2), p3.sum(1)
    pt = p3.sum((1, 2))

    slices = []
    for t in range(nT):
        if pt[t] <= 0:
            continue
        slices.append((t, np.flatnonzero(pta[t] > 0), np.flatnonzero(ptb[t] > 0)))
    free = [(t, a, b) for t, rows, cols in slices for a in rows[:-1] for b in cols[:-1]]
    dim = len(free)
    if dim > max_dim:
        raise ValidationError(f"polytope has {dim} free coordinates; brute force allows at most {max_dim}")

    def fill(X):
        """Complete free coordinates (m, dim) into full tables (m, T, A, B)."""
        m = X.shape[0]
        Q = np.zeros((m, nT, nA, nB))
        for k, (t, a, b) in enumerate(free):
            Q[:, t, a, b] = X[:, k]
        for t, rows, cols in slices:
            ra, cb = rows[-1], cols[-1]
            for a in rows[:-1]:
                Q[:, t, a, cb] = pta[t, a] - Q[:, t, a, cols[:-1]].sum(axis=1)
            for b in cols[:-1]:
                Q[:, t, ra, b] = ptb[t, b] - Q[:, t, rows[:-1], b].sum(axis=1)
            Q[:, t, ra, cb] = ptb[t, cb] - Q[:, t, rows[:-1], cb].sum(axis=1)
        return Q

    base = fill(np.zeros((1, dim)))[0]
    if dim == 0:
        return _atoms_from_q(p3, np.maximum(base, 0.0), target, sources)
    dirs = fill(np.eye(dim)) - base

    def table(x):
        return base + np.tensordot(x, dirs, axes=1)

    def interval(x, k):
        """Feasible range of coordinate k with coordinates < k fixed and > k at 0."""
        c0 = table(x).ravel()
        ck = dirs[k].ravel()
        lo, hi = -np.inf, np.inf
        pos, neg = ck > 1e-15, ck < -1e-15
        if np.any(pos):
            lo = max(lo, float(np.max(-c0[pos] / ck[pos])))
        if np.any(neg):
            hi = min(hi, float(np.min(-c0[neg] / ck[neg])))
        return x[k] + lo, x[k] + hi

    if dim <= 2:
        def objective(x):
            return float(_batch_mi(np.maximum(table(x), 0.0)[None])[0])

        def inner(x0):
            x = np.array([x0, 0.0])
            lo, hi = interval(x, 1)
            if hi < lo:
                return np.inf, x
            s, fs = _golden(lambda s: objective(np.array([x0, s])), lo, hi, resolution)
            return fs, np.array([x0, s])

        if dim == 1:
            lo, hi = interval(np.zeros(1), 0)
            s, _ = _golden(lambda s: objective(np.array([s])), lo, hi, resolution)
            best_x = np.array([s])
        else:
            # feasible range of the first coordinate: project the polygon
            lo0, hi0 = _first_coordinate_range(fill, dim, free, pta, ptb)
            s, _ = _golden(lambda s: inner(s)[0], lo0, hi0, resolution)
            best_x = inner(s)[1]
        return _atoms_from_q(p3, np.maximum(table(best_x), 0.0), target, sources)

    lo = np.zeros(dim)
    hi = np.array([min(pta[t, a], ptb[t, b]) for t, a, b in free])
    full_lo, full_hi = lo.copy(), hi.copy()
    pts, margin = 11, 2
    best_x, best_f = None, np.inf
    while True:
        axes = [np.linspace(l, h, pts) for l, h in zip(lo, hi)]
        X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        if best_x is not None:
            X = np.vstack([X, best_x[None]])
        Q = fill(X)
        feasible = np.all(Q.reshape(Q.shape[0], -1) >= -1e-15, axis=1)
        f = np.full(X.shape[0], np.inf)
        if np.any(feasible):
            f[feasible] = _batch_mi(np.maximum(Q[feasible], 0.0))
        k = int(np.argmin(f))
        if f[k] <= best_f:
            best_f, best_x = f[k], X[k].copy()
        step = (hi - lo) / (pts - 1)
        if np.all(step <= resolution):
            break
        lo = np.maximum(best_x - margin * step, full_lo)
        hi = np.minimum(best_x + margin * step, full_hi)
    if not np.isfinite(best_f):
        raise ConsistencyError("brute-force scan found no feasible point")
    return _atoms_from_q(p3, np.maximum(table(best_x), 0.0), target, sources)


def _first_coordinate_range(fill, dim, free, pta, ptb):
    """Range of the first free coordinate over the 2-D feasible polygon.

    The polygon's vertices lie on the constraint lines; enumerate pairwise
    intersections of the cell constraints and keep the feasible ones.
    """
    base = fill(np.zeros((1, dim)))[0].ravel()
    dirs = (fill(np.eye(dim)) - fill(np.zeros((1, dim)))).reshape(dim, -1)
    rows = [(dirs[:, i], base[i]) for i in range(base.size) if np.any(np.abs(dirs[:, i]) > 1e-15)]
    xs = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            A = np.array([rows[i][0], rows[j][0]])
            if abs(np.linalg.det(A)) < 1e-15:
                continue
            x = np.linalg.solve(A, -np.array([rows[i][1], rows[j][1]]))
            cells = base + x @ dirs
            if np.all(cells >= -1e-12):
                xs.append(x[0])
    if not xs:
        raise ConsistencyError("brute-force scan found no feasible point")
    return min(xs), max(xs)
