"""Report assembly and formatting shared by the CLI.

Reports are plain nested dicts of floats, strings and lists so they can be
dumped as JSON verbatim.  Every report built from a decomposition is checked
against the reconstruction identities before it is handed out.
"""
from __future__ import annotations

import csv
import io
import json

from .dist import ROLES, mutual_information, shannon_summary
from .errors import ConsistencyError
from .subatoms import PAIRS, RESIDUAL_LIMIT, Decomposition

SWEEP_COLUMNS = (
    "target", "SI", "SR", "NSR", "CI",
    "rsi", "rci", "rui_XY", "rui_XZ", "rui_YZ", "irsi_first", "irsi_second",
    "I_sources", "ordering",
)
MAX_PRECISION = 15


def round_sig(x: float, precision: int) -> float:
    """``x`` rounded to ``precision`` significant digits (and -0.0 folded to 0.0)."""
    return float(f"{float(x):.{precision}g}") + 0.0


def rounded(obj, precision: int):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, precision)
    if isinstance(obj, dict):
        return {k: rounded(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v, precision) for v in obj]
    return round_sig(obj, precision)  # numpy scalars


def _atoms_dict(atoms) -> dict:
    a, b = atoms.sources
    return {
        "sources": list(atoms.sources),
        "SI": float(atoms.si),
        f"UI_{a}": float(atoms.ui_a),
        f"UI_{b}": float(atoms.ui_b),
        "CI": float(atoms.ci),
    }


def check_decomposition(dec: Decomposition) -> dict:
    """Recompute every identity residual; raise if any exceeds the limit."""
    residuals = {
        "cross_lattice": dec.pids.cross_lattice_residual(dec.dist),
        "atom_reconstruction": dec.minimal.residual(dec.pids),
        "entropy_reconstruction": dec.entropy.residual,
        "co_information": max(abs(dec.pids.si(t) - dec.pids.ci(t) - dec.pids.coi) for t in ROLES),
    }
    for name, value in residuals.items():
        if value > RESIDUAL_LIMIT:
            raise ConsistencyError(f"refusing to emit report: {name} residual {value:.3g} bits")
    return residuals


def decomposition_report(dec: Decomposition, descriptor: dict, targets=ROLES) -> dict:
    residuals = check_decomposition(dec)
    ms = dec.minimal
    ent = dec.entropy
    points = dec.pids.points
    return {
        "input": descriptor,
        "shannon": {k: float(v) for k, v in shannon_summary(dec.dist).items()},
        "pids": {t: _atoms_dict(dec.pids.by_target[t]) for t in targets},
        "minimal_set": {
            "ordering": list(ms.ordering),
            "values": ms.values(),
            "labels": ms.labels(),
        },
        "splits": {t: {"SR": float(dec.splits[t].sr), "NSR": float(dec.splits[t].nsr)} for t in targets},
        "entropy": {
            "H_XYZ": ent.total,
            "H1_terms": dict(ent.h1_terms),
            "H1": ent.h1,
            "DTC": ent.dtc,
            "coefficients": dict(ent.coefficients),
            "reconstructed": ent.reconstructed(),
        },
        "diagnostics": {
            "method": {t: points[t].method for t in ROLES if t in points},
            "iterations": {t: points[t].iterations for t in ROLES if t in points},
            "gap_bits": {t: float(points[t].gap) for t in ROLES if t in points},
            "residuals": residuals,
        },
    }


def sweep_rows(dec: Decomposition, targets=("X",)) -> list[dict]:
    """One CSV-ready row (without parameter columns) per requested target."""
    check_decomposition(dec)
    values = dec.minimal.values()
    rows = []
    for t in targets:
        a, b = (r for r in ROLES if r != t)
        row = {
            "target": t,
            "SI": dec.pids.si(t),
            "SR": dec.splits[t].sr,
            "NSR": dec.splits[t].nsr,
            "CI": dec.pids.ci(t),
        }
        row.update(values)
        row["I_sources"] = mutual_information(dec.dist, a, b)
        row["ordering"] = "".join(dec.minimal.ordering)
        rows.append(row)
    return rows


def to_json(report: dict, precision: int) -> str:
    return json.dumps(rounded(report, precision), indent=2)


def to_csv(rows: list[dict], columns, precision: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            f"{round_sig(row[c], precision):.{precision}g}" if isinstance(row[c], float) else row[c]
            for c in columns
        )
    return buf.getvalue()


def to_table(report: dict, precision: int) -> str:
    """Aligned two-column text, one block per top-level section."""
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(obj, (list, tuple)):
            lines.append((prefix, " ".join(str(v) for v in obj)))
        elif isinstance(obj, float):
            lines.append((prefix, f"{round_sig(obj, precision):.{precision}g}"))
        else:
            lines.append((prefix, str(obj)))

    out = []
    for section, body in report.items():
        lines.clear()
        walk("", body)
        out.append(f"[{section}]")
        width = max((len(k) for k, _ in lines), default=0)
        out.extend(f"  {k.ljust(width)}  {v}" for k, v in lines)
    return "\n".join(out) + "\n"


__all__ = [
    "PAIRS",
    "SWEEP_COLUMNS",
    "check_decomposition",
    "decomposition_report",
    "sweep_rows",
    "to_csv",
    "to_json",
    "to_table",
]
