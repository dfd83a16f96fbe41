"""Hot loops of the polytope solver.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  Set ``TRIVPID_NUMBA=0`` to force numpy
(numba is also skipped automatically when it cannot be imported).

Cells are flat arrays ``q[i]`` with ``group[i]`` the index of the source
pair (a, b) the cell belongs to.  Everything here works in nats.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


# ---------------------------------------------------------------- numpy ---

def _np_group_sums(q, group, n_groups):
    return np.bincount(group, weights=q, minlength=n_groups)


def _np_objective(q, group, n_groups):
    """sum q log q - sum_g Q_g log Q_g  (= -H(T|A,B) in nats)."""
    Q = _np_group_sums(q, group, n_groups)
    qp = q[q > 0]
    Qp = Q[Q > 0]
    return float(np.dot(qp, np.log(qp)) - np.dot(Qp, np.log(Qp)))


def _np_barrier_objective(q, group, n_groups, mu):
    """Objective minus mu * sum log q; +inf outside the open orthant."""
    if np.any(q <= 0):
        return np.inf
    Q = _np_group_sums(q, group, n_groups)
    logq = np.log(q)
    return float(np.dot(q, logq) - np.dot(Q, np.log(Q)) - mu * logq.sum())


def _np_gradient(q, group, n_groups):
    """d/dq of the objective: log q - log Q_group (requires q > 0)."""
    Q = _np_group_sums(q, group, n_groups)
    return np.log(q) - np.log(Q[group])


def _np_max_step(q, dq, fraction):
    neg = dq < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, fraction * float(np.min(-q[neg] / dq[neg])))


# ---------------------------------------------------------------- numba ---

if numba is not None:
    _jit = numba.njit(cache=True, fastmath=False)

    @_jit
    def _nb_group_sums(q, group, n_groups):
        Q = np.zeros(n_groups)
        for i in range(q.size):
            Q[group[i]] += q[i]
        return Q

    @_jit
    def _nb_objective(q, group, n_groups):
        Q = _nb_group_sums(q, group, n_groups)
        s = 0.0
        for i in range(q.size):
            if q[i] > 0.0:
                s += q[i] * np.log(q[i])
        for g in range(n_groups):
            if Q[g] > 0.0:
                s -= Q[g] * np.log(Q[g])
        return s

    @_jit
    def _nb_barrier_objective(q, group, n_groups, mu):
        for i in range(q.size):
            if q[i] <= 0.0:
                return np.inf
        Q = _nb_group_sums(q, group, n_groups)
        s = 0.0
        for i in range(q.size):
            lq = np.log(q[i])
            s += q[i] * lq - mu * lq
        for g in range(n_groups):
            s -= Q[g] * np.log(Q[g])
        return s

    @_jit
    def _nb_gradient(q, group, n_groups):
        Q = _nb_group_sums(q, group, n_groups)
        out = np.empty(q.size)
        for i in range(q.size):
            out[i] = np.log(q[i]) - np.log(Q[group[i]])
        return out

    @_jit
    def _nb_max_step(q, dq, fraction):
        best = np.inf
        for i in range(q.size):
            if dq[i] < 0.0:
                r = -q[i] / dq[i]
                if r < best:
                    best = r
        if best == np.inf:
            return 1.0
        return min(1.0, fraction * best)


NUMPY = SimpleNamespace(
    name="numpy",
    group_sums=_np_group_sums,
    objective=_np_objective,
    barrier_objective=_np_barrier_objective,
    gradient=_np_gradient,
    max_step=_np_max_step,
)

NUMBA = None
if numba is not None:
    NUMBA = SimpleNamespace(
        name="numba",
        group_sums=_nb_group_sums,
        objective=_nb_objective,
        barrier_objective=_nb_barrier_objective,
        gradient=_nb_gradient,
        max_step=_nb_max_step,
    )


def _env_wants_numba() -> bool:
    return os.environ.get("TRIVPID_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def get_backend(name: str | None = None) -> SimpleNamespace:
    """Kernel namespace by name (``"numba"``/``"numpy"``), or the env default."""
    if name is None:
        name = "numba" if (_env_wants_numba() and NUMBA is not None) else "numpy"
    if name == "numba":
        if NUMBA is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return NUMBA
    if name == "numpy":
        return NUMPY
    raise ValueError(f"unknown kernel backend {name!r}")


DEFAULT = get_backend()
