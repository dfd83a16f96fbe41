"""Finite trivariate distributions and the Shannon quantities built on them.

All information values are in bits.  Zero-probability cells are skipped
(0 log 0 = 0), never smoothed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, ValidationError

ROLES = ("X", "Y", "Z")
NORM_TOL = 1e-9
CLAMP_TOL = 1e-12
MAX_CELLS = 10**6


def role_index(role) -> int:
    if isinstance(role, (int, np.integer)) and 0 <= role < 3:
        return int(role)
    if isinstance(role, str) and role in ROLES:
        return ROLES.index(role)
    raise ValidationError(f"unknown variable role {role!r}; expected one of X, Y, Z")


def _role_set(spec) -> tuple[int, ...]:
    """'X' -> (0,), 'YZ' -> (1, 2), ('X', 'Z') -> (0, 2)."""
    if isinstance(spec, str):
        items = list(spec)
    elif isinstance(spec, (int, np.integer)):
        items = [spec]
    else:
        items = list(spec)
    idx = [role_index(r) for r in items]
    if not idx:
        raise ValidationError("empty variable set")
    if len(set(idx)) != len(idx):
        raise ValidationError(f"repeated role in {spec!r}")
    return tuple(sorted(idx))


@dataclass(frozen=True)
class Alphabet:
    """Ordered, duplicate-free outcome labels of one variable."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            raise ValidationError("alphabet must be non-empty")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"alphabet labels must be unique: {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(str(label))

    @classmethod
    def range(cls, n: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(n)))


class JointDist3:
    """Immutable probability table p(x, y, z) over three finite alphabets."""

    __slots__ = ("_probs", "_alphabets")

    def __init__(self, probs, alphabets: Sequence[Alphabet | Sequence[str]] | None = None):
        p = np.array(probs, dtype=float)
        if p.ndim != 3:
            raise ValidationError(f"probability table must have 3 axes, got {p.ndim}")
        if p.size == 0:
            raise ValidationError("no outcomes")
        if p.size > MAX_CELLS:
            raise ValidationError(f"table has {p.size} cells; limit is {MAX_CELLS}")
        if not np.all(np.isfinite(p)):
            raise ValidationError("probabilities must be finite")
        if np.any(p < 0):
            cell = tuple(int(i) for i in np.argwhere(p < 0)[0])
            raise ValidationError(f"negative probability at cell {cell}")
        total = float(p.sum())
        if abs(total - 1.0) > NORM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1 (tolerance {NORM_TOL})")
        if alphabets is None:
            alphabets = [Alphabet.range(n) for n in p.shape]
        alphabets = tuple(a if isinstance(a, Alphabet) else Alphabet(tuple(a)) for a in alphabets)
        if len(alphabets) != 3 or tuple(len(a) for a in alphabets) != p.shape:
            raise ValidationError(
                f"alphabet sizes {[len(a) for a in alphabets]} do not match table shape {p.shape}"
            )
        p.setflags(write=False)
        self._probs = p
        self._alphabets = alphabets

    @classmethod
    def normalized(cls, weights, alphabets=None) -> "JointDist3":
        """Build from non-negative weights, rescaling them to sum to one."""
        w = np.array(weights, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite and non-negative")
        s = w.sum()
        if s <= 0:
            raise ValidationError("no outcomes")
        return cls(w / s, alphabets)

    @classmethod
    def from_outcomes(cls, records: Iterable[tuple], alphabets=None) -> "JointDist3":
        """Build from ``(x, y, z, p)`` records; unlisted outcomes get zero mass.

        Without explicit alphabets, labels are ordered by first appearance.
        """
        records = [(str(x), str(y), str(z), float(p)) for x, y, z, p in records]
        if not records:
            raise ValidationError("no outcomes")
        if alphabets is None:
            seen = ([], [], [])
            for rec in records:
                for axis in range(3):
                    if rec[axis] not in seen[axis]:
                        seen[axis].append(rec[axis])
            alphabets = [Alphabet(tuple(s)) for s in seen]
        else:
            alphabets = [a if isinstance(a, Alphabet) else Alphabet(tuple(a)) for a in alphabets]
        shape = tuple(len(a) for a in alphabets)
        if math.prod(shape) > MAX_CELLS:
            raise ValidationError(f"table would have {math.prod(shape)} cells; limit is {MAX_CELLS}")
        p = np.zeros(shape)
        for line, (x, y, z, prob) in enumerate(records, 1):
            try:
                idx = tuple(alphabets[k].index(v) for k, v in enumerate((x, y, z)))
            except ValueError:
                raise ValidationError(f"outcome {line} ({x}, {y}, {z}) is not in the declared alphabets")
            p[idx] += prob
        return cls(p, alphabets)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def alphabets(self) -> tuple[Alphabet, Alphabet, Alphabet]:
        return self._alphabets

    @property
    def shape(self) -> tuple[int, int, int]:
        return self._probs.shape

    def permuted(self, order: Sequence) -> "JointDist3":
        """Return the distribution with axes reordered; ``order[k]`` becomes role k."""
        idx = [role_index(r) for r in order]
        if sorted(idx) != [0, 1, 2]:
            raise ValidationError(f"not a permutation of the roles: {order!r}")
        return JointDist3(np.transpose(self._probs, idx), [self._alphabets[i] for i in idx])

    def records(self):
        """Yield ``(x, y, z, p)`` for every outcome with non-zero mass."""
        for idx in zip(*np.nonzero(self._probs)):
            yield tuple(self._alphabets[k].labels[i] for k, i in enumerate(idx)) + (float(self._probs[idx]),)

    def to_json(self) -> dict:
        return {
            "alphabets": {r: list(a.labels) for r, a in zip(ROLES, self._alphabets)},
            "pmf": [{"x": x, "y": y, "z": z, "p": p} for x, y, z, p in self.records()],
        }

    def __eq__(self, other):
        if not isinstance(other, JointDist3):
            return NotImplemented
        return self._alphabets == other._alphabets and np.array_equal(self._probs, other._probs)

    def __hash__(self):
        return hash((self._alphabets, self._probs.tobytes()))

    def __repr__(self):
        return f"JointDist3(shape={self.shape}, support={int(np.count_nonzero(self._probs))})"


# --------------------------------------------------------------------------
# Shannon quantities
# --------------------------------------------------------------------------

def marginal(dist: JointDist3, keep) -> np.ndarray:
    """Probability table over the kept roles, axes in X, Y, Z order."""
    kept = _role_set(keep)
    drop = tuple(i for i in range(3) if i not in kept)
    return dist.probs.sum(axis=drop) if drop else dist.probs.copy()


def entropy(table) -> float:
    """Shannon entropy in bits of a probability table (any shape)."""
    p = table.probs if isinstance(table, JointDist3) else np.asarray(table, dtype=float)
    nz = p[p > 0]
    h = -float(np.sum(nz * np.log2(nz)))
    return h if h > 0 else 0.0


def _clamp(value: float, what: str) -> float:
    if value >= 0:
        return value
    if value >= -CLAMP_TOL:
        return 0.0
    raise ConsistencyError(f"{what} evaluated to {value!r} < 0")


def joint_entropy(dist: JointDist3, roles) -> float:
    return entropy(marginal(dist, roles))


def mutual_information(dist: JointDist3, a, b) -> float:
    """I(a : b); either side may be a pair of roles such as ``"YZ"``."""
    ia, ib = _role_set(a), _role_set(b)
    if set(ia) & set(ib):
        raise ValidationError(f"mutual information needs disjoint arguments, got {a!r} and {b!r}")
    value = joint_entropy(dist, ia) + joint_entropy(dist, ib) - joint_entropy(dist, ia + ib)
    return _clamp(value, f"I({a}:{b})")


def conditional_mutual_information(dist: JointDist3, a, b, c) -> float:
    """I(a : b | c) for three distinct roles."""
    ia, ib, ic = role_index(a), role_index(b), role_index(c)
    if len({ia, ib, ic}) != 3:
        raise ValidationError(f"conditional mutual information needs distinct roles, got {a}, {b}, {c}")
    value = (
        joint_entropy(dist, (ia, ic))
        + joint_entropy(dist, (ib, ic))
        - joint_entropy(dist, (ia, ib, ic))
        - joint_entropy(dist, (ic,))
    )
    return _clamp(value, f"I({a}:{b}|{c})")


def conditional_entropy(dist: JointDist3, a, given) -> float:
    ia, ig = _role_set(a), _role_set(given)
    return _clamp(joint_entropy(dist, ia + ig) - joint_entropy(dist, ig), f"H({a}|{given})")


def co_information(dist: JointDist3) -> float:
    """coI(X;Y;Z) = I(X:Y) - I(X:Y|Z); signed."""
    h = {r: joint_entropy(dist, r) for r in ("X", "Y", "Z", "XY", "XZ", "YZ", "XYZ")}
    return h["X"] + h["Y"] + h["Z"] - h["XY"] - h["XZ"] - h["YZ"] + h["XYZ"]


def shannon_summary(dist: JointDist3) -> dict:
    """All pairwise and conditional MIs, co-information and entropies."""
    return {
        "H_XYZ": entropy(dist),
        "I_XY": mutual_information(dist, "X", "Y"),
        "I_XZ": mutual_information(dist, "X", "Z"),
        "I_YZ": mutual_information(dist, "Y", "Z"),
        "I_XY|Z": conditional_mutual_information(dist, "X", "Y", "Z"),
        "I_XZ|Y": conditional_mutual_information(dist, "X", "Z", "Y"),
        "I_YZ|X": conditional_mutual_information(dist, "Y", "Z", "X"),
        "coI": co_information(dist),
    }


# --------------------------------------------------------------------------
# pmf files
# --------------------------------------------------------------------------

def parse_pmf_text(text: str) -> JointDist3:
    """Parse ``x y z p`` lines; ``#`` starts a comment."""
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValidationError(f"line {lineno}: expected 4 fields 'x y z p', got {len(fields)}")
        try:
            prob = float(fields[3])
        except ValueError:
            raise ValidationError(f"line {lineno}: probability {fields[3]!r} is not a number")
        records.append((fields[0], fields[1], fields[2], prob))
    if not records:
        raise ValidationError("no outcomes")
    return JointDist3.from_outcomes(records)


def parse_pmf_json(obj) -> JointDist3:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "pmf" not in obj:
        raise ValidationError("pmf JSON must be an object with a 'pmf' list")
    alph = obj.get("alphabets")
    alphabets = None
    if alph is not None:
        try:
            alphabets = [Alphabet(tuple(str(s) for s in alph[r])) for r in ROLES]
        except KeyError as exc:
            raise ValidationError(f"alphabets missing role {exc}")
    try:
        records = [(e["x"], e["y"], e["z"], float(e["p"])) for e in obj["pmf"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed pmf entry: {exc}")
    if not records:
        raise ValidationError("no outcomes")
    return JointDist3.from_outcomes(records, alphabets)


def load_pmf(path) -> JointDist3:
    """Read a pmf from a whitespace table or a JSON file (chosen by content)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}")
    if text.lstrip().startswith("{"):
        try:
            return parse_pmf_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc.msg})")
    return parse_pmf_text(text)
