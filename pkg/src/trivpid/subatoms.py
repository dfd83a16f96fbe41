"""Target-invariant structure of the three PIDs of a trivariate system.

Rotating the target through X, Y and Z gives three four-atom lattices.  They
share the pairwise Shannon quantities, so the twelve atoms collapse onto
seven non-negative pieces:

* ``rsi`` / ``rci``: smallest redundancy and smallest synergy,
* ``rui`` for each pair: the unique information both directions agree on,
* ``irsi_first`` / ``irsi_second``: the two redundancy increments obtained
  by sorting the targets by redundancy.

Notation used in labels: ``RSI(A<-C->B)`` is the reversible shared
information of A and B with C kept in the middle; ``IRSI(H<-C-T)`` is the
piece of redundancy present with H as target but not with T.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .broja import PidAtoms, SolverConfig, clamp_atom, solve_pid, sources_of
from .dist import (
    ROLES,
    JointDist3,
    co_information,
    conditional_entropy,
    entropy,
    mutual_information,
    role_index,
)
from .errors import ConsistencyError, SolverError, ValidationError

SUBATOM_CLAMP = 1e-9
RESIDUAL_LIMIT = 1e-6
PAIRS = ("XY", "XZ", "YZ")
COEFFICIENTS = {
    "rsi": 1,
    "rci": 2,
    "rui_XY": 1,
    "rui_XZ": 1,
    "rui_YZ": 1,
    "irsi_first": 3,
    "irsi_second": 2,
}


def _role(r) -> str:
    return ROLES[role_index(r)]


def _third(a, b) -> str:
    (c,) = set(ROLES) - {a, b}
    return c


def _pair_key(a, b) -> str:
    return "".join(sorted((a, b)))


def _nonneg(value, name):
    if value >= 0:
        return value
    if value >= -SUBATOM_CLAMP:
        return 0.0
    raise ConsistencyError(f"{name} = {value!r} is negative beyond solver noise")


@dataclass(frozen=True)
class ThreePids:
    """The PIDs for targets X, Y and Z, with synergies tied to coI."""

    by_target: dict
    coi: float
    points: dict = field(default_factory=dict, repr=False)

    def si(self, target) -> float:
        return self.by_target[_role(target)].si

    def ci(self, target) -> float:
        return self.by_target[_role(target)].ci

    def ui(self, target, source) -> float:
        """UI(target : {source \\ other})."""
        return self.by_target[_role(target)].ui(source)

    def cross_lattice_residual(self, dist: JointDist3) -> float:
        """Largest violation of the pairwise MI/CMI identities across lattices."""
        worst = 0.0
        for a, b in combinations(ROLES, 2):
            i_ab = mutual_information(dist, a, b)
            i_abc = i_ab - self.coi
            for t, s in ((a, b), (b, a)):
                worst = max(worst, abs(self.si(t) + self.ui(t, s) - i_ab))
                worst = max(worst, abs(self.ci(t) + self.ui(t, s) - i_abc))
        return worst


def three_pids(dist: JointDist3, cfg: SolverConfig | None = None, jobs: int = 1) -> ThreePids:
    """Run the solver for each target and recompute CI_t = SI_t - coI."""
    cfg = cfg or SolverConfig()

    def one(t):
        try:
            return solve_pid(dist, t, cfg)
        except SolverError as exc:
            exc.target = t
            raise SolverError(f"target {t}: {exc}", target=t, best_objective=exc.best_objective,
                              gap=exc.gap) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, 3)) as pool:
            results = list(pool.map(one, ROLES))
    else:
        results = [one(t) for t in ROLES]

    coi = co_information(dist)
    by_target, points = {}, {}
    for t, (atoms, point) in zip(ROLES, results):
        ci = clamp_atom(atoms.si - coi, f"CI({t})")
        by_target[t] = PidAtoms(t, atoms.sources, atoms.si, atoms.ui_a, atoms.ui_b, ci)
        points[t] = point
    pids = ThreePids(by_target, coi, points)
    residual = pids.cross_lattice_residual(dist)
    if residual > RESIDUAL_LIMIT:
        raise ConsistencyError(f"cross-lattice identities violated by {residual:.3g} bits")
    return pids


# --------------------------------------------------------------------------
# pairwise subatoms
# --------------------------------------------------------------------------

def rsi_between(pids: ThreePids, a, b) -> float:
    """min[SI(a:{b;c}), SI(b:{a;c})]: redundancy both endpoints agree on."""
    a, b = _role(a), _role(b)
    if a == b:
        raise ValidationError("rsi_between needs two distinct roles")
    return min(pids.si(a), pids.si(b))


def rci_between(pids: ThreePids, a, b) -> float:
    a, b = _role(a), _role(b)
    if a == b:
        raise ValidationError("rci_between needs two distinct roles")
    return min(pids.ci(a), pids.ci(b))


def rui_between(pids: ThreePids, a, b) -> float:
    """min[UI(a:{b\\c}), UI(b:{a\\c})]."""
    a, b = _role(a), _role(b)
    if a == b:
        raise ValidationError("rui_between needs two distinct roles")
    return min(pids.ui(a, b), pids.ui(b, a))


def irsi_directed(pids: ThreePids, head, tail) -> float:
    """Redundancy about ``head`` that is not redundancy about ``tail``."""
    head, tail = _role(head), _role(tail)
    if head == tail:
        raise ValidationError("irsi_directed needs two distinct roles")
    return _nonneg(pids.si(head) - min(pids.si(head), pids.si(tail)), f"IRSI({head}<-{tail})")


# --------------------------------------------------------------------------
# minimal set
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimalSet:
    """Seven invariant subatoms plus the redundancy ordering t1, t2, t3."""

    ordering: tuple
    rsi: float
    rci: float
    rui: dict
    irsi_first: float
    irsi_second: float

    @property
    def irsi_first_label(self):
        """(head, tail, middle) of the first increment."""
        t1, t2, t3 = self.ordering
        return (t2, t1, t3)

    @property
    def irsi_second_label(self):
        t1, t2, t3 = self.ordering
        return (t3, t2, t1)

    @property
    def rsi_label(self):
        """(endpoint, endpoint, middle) shared by rsi and rci."""
        t1, t2, t3 = self.ordering
        return (t1, t2, t3)

    def values(self) -> dict:
        out = {"rsi": self.rsi, "rci": self.rci}
        out.update({f"rui_{k}": self.rui[k] for k in PAIRS})
        out["irsi_first"] = self.irsi_first
        out["irsi_second"] = self.irsi_second
        return out

    def labels(self) -> dict:
        a, b, m = self.rsi_label
        h1, l1, m1 = self.irsi_first_label
        h2, l2, m2 = self.irsi_second_label
        out = {"rsi": f"RSI({a}<-{m}->{b})", "rci": f"RCI({a}<-{m}->{b})"}
        for k in PAIRS:
            out[f"rui_{k}"] = f"RUI({k[0]}<-{_third(k[0], k[1])}->{k[1]})"
        out["irsi_first"] = f"IRSI({h1}<-{m1}-{l1})"
        out["irsi_second"] = f"IRSI({h2}<-{m2}-{l2})"
        return out

    def reconstruct(self) -> dict:
        """Rebuild all twelve atoms: {target: {"SI", "CI", "UI_<source>"}}."""
        t1, t2, t3 = self.ordering
        si = {t1: self.rsi, t2: self.rsi + self.irsi_first, t3: self.rsi + self.irsi_first + self.irsi_second}
        ci = {t1: self.rci, t2: self.rci + self.irsi_first, t3: self.rci + self.irsi_first + self.irsi_second}
        rank = {t1: 0, t2: 1, t3: 2}
        increments = (self.irsi_first, self.irsi_second)
        out = {}
        for t in ROLES:
            atoms = {"SI": si[t], "CI": ci[t]}
            for s in sources_of(t):
                ui = self.rui[_pair_key(t, s)]
                if rank[t] < rank[s]:
                    ui += sum(increments[rank[t]:rank[s]])
                atoms[f"UI_{s}"] = ui
            out[t] = atoms
        return out

    def residual(self, pids: ThreePids) -> float:
        worst = 0.0
        for t, atoms in self.reconstruct().items():
            ref = pids.by_target[t]
            worst = max(worst, abs(atoms["SI"] - ref.si), abs(atoms["CI"] - ref.ci))
            for s in ref.sources:
                worst = max(worst, abs(atoms[f"UI_{s}"] - ref.ui(s)))
        return worst


def redundancy_order(pids: ThreePids) -> tuple:
    """Targets sorted by SI ascending; ties keep X < Y < Z."""
    return tuple(sorted(ROLES, key=lambda r: (pids.si(r), ROLES.index(r))))


def minimal_set(pids: ThreePids) -> MinimalSet:
    t1, t2, t3 = redundancy_order(pids)
    rui = {}
    for k in PAIRS:
        rui[k] = _nonneg(rui_between(pids, k[0], k[1]), f"RUI({k})")
    mset = MinimalSet(
        ordering=(t1, t2, t3),
        rsi=_nonneg(pids.si(t1), "RSI"),
        rci=_nonneg(pids.ci(t1), "RCI"),
        rui=rui,
        irsi_first=_nonneg(pids.si(t2) - pids.si(t1), "IRSI first"),
        irsi_second=_nonneg(pids.si(t3) - pids.si(t2), "IRSI second"),
    )
    res = mset.residual(pids)
    if res > RESIDUAL_LIMIT:
        raise ConsistencyError(f"minimal set reconstructs the atoms with residual {res:.3g} bits")
    return mset


# --------------------------------------------------------------------------
# source / non-source redundancy
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RedundancySplit:
    target: str
    sr: float
    nsr: float


def source_redundancy(pids: ThreePids, target) -> RedundancySplit:
    """SR = max over sources s of min[SI(target), SI(s)]; NSR = SI - SR."""
    t = _role(target)
    si_t = pids.si(t)
    sr = max(min(si_t, pids.si(s)) for s in sources_of(t))
    nsr = _nonneg(si_t - sr, f"NSR({t})")
    return RedundancySplit(t, sr, nsr)


# --------------------------------------------------------------------------
# entropy decomposition
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyDecomposition:
    h1_terms: dict
    dtc: float
    coefficients: dict
    subatoms: dict
    total: float

    @property
    def h1(self) -> float:
        return sum(self.h1_terms.values())

    def reconstructed(self) -> float:
        return self.h1 + sum(self.coefficients[k] * v for k, v in self.subatoms.items())

    @property
    def residual(self) -> float:
        return abs(self.reconstructed() - self.total)


def entropy_decomposition(dist: JointDist3, mset: MinimalSet) -> EntropyDecomposition:
    """H(X,Y,Z) = H_(1) + rsi + 2 rci + sum rui + 3 irsi_first + 2 irsi_second."""
    h1 = {r: conditional_entropy(dist, r, "".join(s for s in ROLES if s != r)) for r in ROLES}
    total = entropy(dist)
    dec = EntropyDecomposition(
        h1_terms=h1,
        dtc=total - sum(h1.values()),
        coefficients=dict(COEFFICIENTS),
        subatoms=mset.values(),
        total=total,
    )
    if dec.residual > RESIDUAL_LIMIT:
        raise ConsistencyError(f"entropy decomposition misses H(X,Y,Z) by {dec.residual:.3g} bits")
    return dec


# --------------------------------------------------------------------------
# whole-system bundle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    dist: JointDist3
    pids: ThreePids
    minimal: MinimalSet
    splits: dict
    entropy: EntropyDecomposition


def decompose(dist: JointDist3, cfg: SolverConfig | None = None, jobs: int = 1) -> Decomposition:
    pids = three_pids(dist, cfg, jobs=jobs)
    mset = minimal_set(pids)
    splits = {t: source_redundancy(pids, t) for t in ROLES}
    return Decomposition(dist, pids, mset, splits, entropy_decomposition(dist, mset))


# --------------------------------------------------------------------------
# extending the middle variable
# --------------------------------------------------------------------------

def _collapse(p4: np.ndarray, endpoints, middle, extension, merge: bool) -> JointDist3:
    p4 = np.asarray(p4, dtype=float)
    order = tuple(endpoints) + (middle, extension)
    q = np.transpose(p4, order)
    if merge:
        q = q.reshape(q.shape[0], q.shape[1], q.shape[2] * q.shape[3])
    else:
        q = q.sum(axis=3)
    return JointDist3.normalized(q)


def rsi_middle_extension(p4, middle=2, extension=3, cfg: SolverConfig | None = None):
    """RSI of the two endpoint axes with middle Z and with middle (Z, Z').

    ``p4`` is a four-axis probability table; the endpoints are the axes that
    are neither ``middle`` nor ``extension``, in axis order.
    """
    p4 = np.asarray(p4, dtype=float)
    if p4.ndim != 4:
        raise ValidationError("extended system must have four axes")
    if middle == extension or not {middle, extension} <= {0, 1, 2, 3}:
        raise ValidationError("middle and extension must be two distinct axes")
    endpoints = tuple(i for i in range(4) if i not in (middle, extension))
    values = []
    for merge in (False, True):
        d = _collapse(p4, endpoints, middle, extension, merge)
        si = [solve_pid(d, t, cfg)[0].si for t in ("X", "Y")]
        values.append(min(si))
    return values[0], values[1]


def verify_monotonicity(p4, middle=2, extension=3, cfg: SolverConfig | None = None,
                        tol: float = 1e-9) -> bool:
    """True iff extending the middle variable never lowers the endpoint RSI."""
    before, after = rsi_middle_extension(p4, middle, extension, cfg)
    return after >= before - tol
