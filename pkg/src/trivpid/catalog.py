"""Generators for the benchmark systems: copy, AND, XOR, dice sum, dyadic,
triadic, Markov chains and two parallel channels.

Input pairs are correlated through a hidden uniform bit W driving each
input with ``p(v|w) = lam/2 + (1 - lam) * [v == w]``; W is summed out.
``lam = 0`` gives identical inputs, ``lam = 1`` independent ones.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .dist import JointDist3
from .errors import ValidationError

KINDS = ("copy", "and", "xor", "dice", "dyadic", "triadic", "markov", "parallel")

_DYADIC_ROWS = [
    (0, 0, 0), (0, 2, 1), (1, 0, 2), (1, 2, 3),
    (2, 1, 0), (2, 3, 1), (3, 1, 2), (3, 3, 3),
]
_TRIADIC_ROWS = [
    (0, 0, 0), (1, 1, 1), (0, 2, 2), (1, 3, 3),
    (2, 0, 2), (3, 1, 3), (2, 2, 0), (3, 3, 1),
]


def _check_lambda(lam, name="lambda"):
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {lam}")
    return lam


def coupling_channel(lam: float) -> np.ndarray:
    """2x2 matrix ``c[w, v] = p(v|w)`` of the lambda-controlled binary channel."""
    lam = _check_lambda(lam)
    return np.full((2, 2), lam / 2) + (1 - lam) * np.eye(2)


def coupled_pair(lam: float) -> np.ndarray:
    """Joint p(y, z) of two bits both driven by one hidden uniform bit."""
    c = coupling_channel(lam)
    return 0.5 * c.T @ c


def make_copy(lam: float) -> JointDist3:
    """X = (Y, Z) as a four-symbol variable."""
    pyz = coupled_pair(lam)
    p = np.zeros((4, 2, 2))
    for y, z in product(range(2), range(2)):
        p[2 * y + z, y, z] = pyz[y, z]
    return JointDist3(p, [("00", "01", "10", "11"), ("0", "1"), ("0", "1")])


def make_and(lam: float) -> JointDist3:
    pyz = coupled_pair(lam)
    p = np.zeros((2, 2, 2))
    for y, z in product(range(2), range(2)):
        p[y & z, y, z] = pyz[y, z]
    return JointDist3(p)


def make_xor() -> JointDist3:
    p = np.zeros((2, 2, 2))
    for y, z in product(range(2), range(2)):
        p[y ^ z, y, z] = 0.25
    return JointDist3(p)


def make_dice(lam: float, alpha: int) -> JointDist3:
    """Two correlated dice Y, Z and X = y + alpha * z.

    ``p(y, z) = lam/36 + (1 - lam)/6 [y == z]``.  The X alphabet lists only
    sums reachable from some face pair.
    """
    lam = _check_lambda(lam)
    if int(alpha) != alpha or not 1 <= alpha <= 6:
        raise ValidationError(f"alpha must be an integer in 1..6, got {alpha}")
    alpha = int(alpha)
    faces = range(1, 7)
    sums = sorted({y + alpha * z for y in faces for z in faces})
    pos = {s: i for i, s in enumerate(sums)}
    p = np.zeros((len(sums), 6, 6))
    for y, z in product(faces, faces):
        p[pos[y + alpha * z], y - 1, z - 1] = lam / 36 + (1 - lam) / 6 * (y == z)
    labels = [str(s) for s in sums]
    faces_l = [str(f) for f in faces]
    return JointDist3(p / p.sum(), [labels, faces_l, faces_l])


def _from_rows(rows):
    p = np.zeros((4, 4, 4))
    for r in rows:
        p[r] = 1 / 8
    return JointDist3(p)


def make_dyadic() -> JointDist3:
    return _from_rows(_DYADIC_ROWS)


def make_triadic() -> JointDist3:
    return _from_rows(_TRIADIC_ROWS)


def dyadic_from_bits() -> JointDist3:
    """Dyadic table regenerated from X1=Y2, Y1=Z2, Z1=X2 (value = 2*V1 + V2)."""
    rows = set()
    for a, b, c in product(range(2), repeat=3):
        # a = X1 = Y2, b = Y1 = Z2, c = Z1 = X2
        rows.add((2 * a + c, 2 * b + a, 2 * c + b))
    return _from_rows(sorted(rows))


def triadic_from_bits() -> JointDist3:
    """Triadic table regenerated from X1 = Y1 xor Z1, X2 = Y2 = Z2."""
    rows = set()
    for y1, z1, s in product(range(2), repeat=3):
        rows.add((2 * (y1 ^ z1) + s, 2 * y1 + s, 2 * z1 + s))
    return _from_rows(sorted(rows))


def _stochastic(m, name):
    m = np.array(m, dtype=float)
    if m.ndim != 2 or np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} must be a non-negative matrix")
    if np.any(np.abs(m.sum(axis=1) - 1) > 1e-9):
        raise ValidationError(f"{name} rows must sum to 1")
    return m


def make_markov(pz, x_given_z, y_given_z) -> JointDist3:
    """Chain X <- Z -> Y: p(x, y, z) = p(z) p(x|z) p(y|z).

    ``x_given_z[z, x]`` and ``y_given_z[z, y]`` are row-stochastic.
    """
    pz = np.array(pz, dtype=float)
    if pz.ndim != 1 or np.any(pz < 0) or abs(pz.sum() - 1) > 1e-9:
        raise ValidationError("pz must be a probability vector")
    xz = _stochastic(x_given_z, "x_given_z")
    yz = _stochastic(y_given_z, "y_given_z")
    if xz.shape[0] != pz.size or yz.shape[0] != pz.size:
        raise ValidationError("conditional tables need one row per z value")
    p = np.einsum("z,zx,zy->xyz", pz, xz, yz)
    return JointDist3(p / p.sum())


def make_parallel(lam1: float, lam2: float, lam3: float) -> JointDist3:
    """X = (X1, X2), Y = (Y1, Y2) linked by X1 - Z - Y1 and X2 - Y2.

    Z is a uniform bit that drives X1 (at lam1) and Y1 (at lam2) through the
    coupling channel; X2 and Y2 share a hidden uniform driver at lam3.
    """
    c1, c2 = coupling_channel(lam1), coupling_channel(lam2)
    p22 = coupled_pair(_check_lambda(lam3, "lambda3"))
    p = np.zeros((4, 4, 2))
    for x1, x2, y1, y2, z in product(range(2), repeat=5):
        p[2 * x1 + x2, 2 * y1 + y2, z] += 0.5 * c1[z, x1] * c2[z, y1] * p22[x2, y2]
    pair = ("00", "01", "10", "11")
    return JointDist3(p / p.sum(), [pair, pair, ("0", "1")])


def random_distribution(rng: np.random.Generator, shape=(2, 2, 2), concentration=1.0) -> JointDist3:
    """Dirichlet draw over all cells of ``shape``."""
    w = rng.dirichlet(np.full(int(np.prod(shape)), concentration)).reshape(shape)
    return JointDist3.normalized(w)


def random_markov(rng: np.random.Generator, max_alphabet=4) -> JointDist3:
    nx, ny, nz = rng.integers(2, max_alphabet + 1, size=3)
    pz = rng.dirichlet(np.ones(nz))
    return make_markov(pz, rng.dirichlet(np.ones(nx), size=nz), rng.dirichlet(np.ones(ny), size=nz))


@dataclass(frozen=True)
class SystemSpec:
    """Serialisable description of a catalog system."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown system kind {self.kind!r}; choose from {', '.join(KINDS)}")

    @classmethod
    def from_json(cls, obj) -> "SystemSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ValidationError("system spec must be an object with a 'kind' field")
        return cls(obj["kind"], dict(obj.get("params", {})))

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    def _get(self, name, default=None):
        if name in self.params:
            return self.params[name]
        if default is None:
            raise ValidationError(f"system {self.kind!r} needs parameter {name!r}")
        return default

    def build(self) -> JointDist3:
        k = self.kind
        if k == "copy":
            return make_copy(self._get("lambda"))
        if k == "and":
            return make_and(self._get("lambda"))
        if k == "xor":
            return make_xor()
        if k == "dice":
            return make_dice(self._get("lambda"), self._get("alpha"))
        if k == "dyadic":
            return make_dyadic()
        if k == "triadic":
            return make_triadic()
        if k == "markov":
            return make_markov(self._get("pz"), self._get("x_given_z"), self._get("y_given_z"))
        return make_parallel(self._get("lambda1"), self._get("lambda2"), self._get("lambda3"))
