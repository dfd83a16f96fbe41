"""Closed-form PID for trivariate jointly Gaussian systems.

With a univariate target every reasonable redundancy measure reduces to the
smaller of the two target-source mutual informations, so the atoms, the
source/non-source split and all Shannon inputs come straight from the
covariance matrix.  ``discretize`` turns a covariance into a binned
``JointDist3`` for cross-checking against the numerical solver.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .broja import PidAtoms, sources_of
from .dist import ROLES, JointDist3, role_index
from .errors import DegenerateError, ValidationError
from .subatoms import RedundancySplit

SYMMETRY_TOL = 1e-12
PD_RATIO = 1e-12


@dataclass(frozen=True)
class GaussianCov:
    """Symmetric positive-definite 3x3 covariance over (X, Y, Z)."""

    cov: np.ndarray

    def __post_init__(self):
        c = np.array(self.cov, dtype=float)
        if c.shape != (3, 3) or not np.all(np.isfinite(c)):
            raise ValidationError("covariance must be a finite 3x3 matrix")
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(c - c.T)) > SYMMETRY_TOL * scale:
            raise ValidationError("covariance must be symmetric")
        c = 0.5 * (c + c.T)
        eig = np.linalg.eigvalsh(c)
        if eig[-1] <= 0 or eig[0] <= PD_RATIO * eig[-1]:
            raise DegenerateError(
                f"covariance is not positive definite (eigenvalues {eig[0]:.3g} .. {eig[-1]:.3g})"
            )
        c.setflags(write=False)
        object.__setattr__(self, "cov", c)

    @classmethod
    def from_correlations(cls, rho_xy, rho_xz, rho_yz, sd=(1.0, 1.0, 1.0)) -> "GaussianCov":
        r = np.array([[1.0, rho_xy, rho_xz], [rho_xy, 1.0, rho_yz], [rho_xz, rho_yz, 1.0]])
        s = np.asarray(sd, dtype=float)
        return cls(r * np.outer(s, s))

    @classmethod
    def from_json(cls, obj) -> "GaussianCov":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or "cov" not in obj:
            raise ValidationError("Gaussian spec must be an object with a 'cov' field")
        return cls(np.array(obj["cov"], dtype=float))

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.cov))
        return self.cov / np.outer(sd, sd)


def _pair_mi(g: GaussianCov, a: int, b: int) -> float:
    rho2 = g.cov[a, b] ** 2 / (g.cov[a, a] * g.cov[b, b])
    if rho2 >= 1.0:
        raise DegenerateError(f"|rho({ROLES[a]},{ROLES[b]})| = 1 gives infinite information")
    return max(0.0, float(-0.5 * np.log2(1.0 - rho2)))


def _joint_mi(g: GaussianCov, t: int) -> float:
    """I(t : the other two) from the Schur complement Var(t | rest)."""
    rest = [i for i in range(3) if i != t]
    c = g.cov
    cross = c[t, rest]
    cond = c[t, t] - cross @ np.linalg.solve(c[np.ix_(rest, rest)], cross)
    if cond <= PD_RATIO * c[t, t]:
        raise DegenerateError(f"Var({ROLES[t]} | rest) vanishes; information is infinite")
    return max(0.0, float(0.5 * np.log2(c[t, t] / cond)))


def gaussian_mutual_informations(g: GaussianCov) -> dict:
    """Pairwise ``I_XY``, ``I_XZ``, ``I_YZ`` and joint-source ``I_X:YZ`` etc. in bits."""
    out = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        out[f"I_{ROLES[a]}{ROLES[b]}"] = _pair_mi(g, a, b)
    for t in range(3):
        rest = "".join(ROLES[i] for i in range(3) if i != t)
        out[f"I_{ROLES[t]}:{rest}"] = _joint_mi(g, t)
    return out


def _mi_lookup(mis, a, b):
    return mis["I_" + "".join(sorted(a + b))]


def gaussian_pid(g: GaussianCov, target="X") -> PidAtoms:
    """SI = min[I(T:A), I(T:B)]; the rest follows from the MI identities."""
    t = ROLES[role_index(target)]
    a, b = sources_of(t)
    mis = gaussian_mutual_informations(g)
    i_ta, i_tb = _mi_lookup(mis, t, a), _mi_lookup(mis, t, b)
    i_tab = mis[f"I_{t}:{a}{b}"]
    si = min(i_ta, i_tb)
    ui_a, ui_b = i_ta - si, i_tb - si
    ci = max(0.0, i_tab - i_ta - i_tb + si)
    return PidAtoms(t, (a, b), si, ui_a, ui_b, ci)


def gaussian_sr_nsr(g: GaussianCov, target="X") -> RedundancySplit:
    """SR = min[I(T:A), I(T:B), I(A:B)] and NSR = SI - SR."""
    t = ROLES[role_index(target)]
    a, b = sources_of(t)
    mis = gaussian_mutual_informations(g)
    si = min(_mi_lookup(mis, t, a), _mi_lookup(mis, t, b))
    i_ab = _mi_lookup(mis, a, b)
    if i_ab >= si:
        return RedundancySplit(t, si, 0.0)
    return RedundancySplit(t, i_ab, si - i_ab)


def discretize(g: GaussianCov, bins: int = 40, span: float = 4.0) -> JointDist3:
    """Bin the density on a ``bins``-per-axis grid over +-``span`` sd.

    Each cell gets the density at its midpoint; the table is renormalised,
    so mass beyond the grid is dropped.
    """
    if bins < 2 or span <= 0:
        raise ValidationError("need at least 2 bins and a positive span")
    sd = np.sqrt(np.diag(g.cov))
    centers = []
    for s in sd:
        edges = np.linspace(-span * s, span * s, bins + 1)
        centers.append(0.5 * (edges[1:] + edges[:-1]))
    pts = np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1)
    prec = np.linalg.inv(g.cov)
    w = np.exp(-0.5 * np.einsum("...i,ij,...j->...", pts, prec, pts))
    return JointDist3.normalized(w)
