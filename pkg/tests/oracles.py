"""Stdlib-only reference computations for the frozen expected values.

Nothing here imports trivpid or numpy: distributions are built as
``{(x, y, z): Fraction}`` dicts straight from their defining rules and the
Shannon quantities use ``math.log2``.  ``FROZEN`` holds the values these
functions produced, rounded to 12 decimals; ``test_oracles.py`` checks the
oracle still reproduces them and that the package agrees.
"""
from __future__ import annotations

import math
from collections import defaultdict
from fractions import Fraction
from itertools import product


def coupled_bits(lam: Fraction):
    """p(y, z) for two bits driven by one hidden fair bit."""
    out = defaultdict(Fraction)
    for w, y, z in product(range(2), repeat=3):
        py = lam / 2 + (1 - lam) * (y == w)
        pz = lam / 2 + (1 - lam) * (z == w)
        out[y, z] += Fraction(1, 2) * py * pz
    return dict(out)


def and_gate(lam):
    return {(y & z, y, z): p for (y, z), p in coupled_bits(Fraction(lam)).items() if p}


def copy_gate(lam):
    return {(2 * y + z, y, z): p for (y, z), p in coupled_bits(Fraction(lam)).items() if p}


def xor_gate():
    return {(y ^ z, y, z): Fraction(1, 4) for y, z in product(range(2), repeat=2)}


def dyadic():
    rows = set()
    for a, b, c in product(range(2), repeat=3):
        rows.add((2 * a + c, 2 * b + a, 2 * c + b))
    return {r: Fraction(1, 8) for r in rows}


def triadic():
    rows = set()
    for y1, z1, s in product(range(2), repeat=3):
        rows.add((2 * (y1 ^ z1) + s, 2 * y1 + s, 2 * z1 + s))
    return {r: Fraction(1, 8) for r in rows}


def marg(pmf, keep):
    out = defaultdict(Fraction)
    for k, p in pmf.items():
        out[tuple(k[i] for i in keep)] += p
    return out


def H(pmf, keep=(0, 1, 2)):
    return -sum(float(p) * math.log2(p) for p in marg(pmf, keep).values() if p > 0)


def I(pmf, a, b):
    return H(pmf, a) + H(pmf, b) - H(pmf, tuple(a) + tuple(b))


def cmi(pmf, a, b, c):
    return H(pmf, (a, c)) + H(pmf, (b, c)) - H(pmf, (a, b, c)) - H(pmf, (c,))


def coi(pmf):
    return I(pmf, (0,), (1,)) - cmi(pmf, 0, 1, 2)


def gauss_pair_mi(rho):
    return -0.5 * math.log2(1 - rho * rho)


def compute_all() -> dict:
    a1 = and_gate(1)
    return {
        # Shannon
        "xor_cmi_XY_given_Z": cmi(xor_gate(), 0, 1, 2),
        "xor_coi": coi(xor_gate()),
        "triadic_coi": coi(triadic()),
        "dyadic_I_XY": I(dyadic(), (0,), (1,)),
        "dyadic_H": H(dyadic()),
        "triadic_H": H(triadic()),
        "and1_cmi_YZ_given_X": cmi(a1, 1, 2, 0),
        "and1_H": H(a1),
        "and1_H1": sum(H(a1) - H(a1, tuple(j for j in range(3) if j != i)) for i in range(3)),
        # AND at lambda=1: SI(X) saturates I(X:Y) (both UIs vanish by symmetry)
        "and1_I_XY": I(a1, (0,), (1,)),
        "and1_I_X_YZ": I(a1, (0,), (1, 2)),
        "and0_I_YZ": I(and_gate(0), (1,), (2,)),
        "copy1_I_X_Y": I(copy_gate(1), (0,), (1,)),
        # Gaussian closed forms
        "gauss_rho05_I": gauss_pair_mi(0.5),
        "gauss_I_XY_06": gauss_pair_mi(0.6),
        "gauss_I_XZ_03": gauss_pair_mi(0.3),
        "gauss_I_YZ_01": gauss_pair_mi(0.1),
    }


FROZEN = {
    "xor_cmi_XY_given_Z": 1.0,
    "xor_coi": -1.0,
    "triadic_coi": 0.0,
    "dyadic_I_XY": 1.0,
    "dyadic_H": 3.0,
    "triadic_H": 3.0,
    "and1_cmi_YZ_given_X": 0.188721875541,
    "and1_H": 2.0,
    "and1_H1": 1.0,
    "and1_I_XY": 0.311278124459,
    "and1_I_X_YZ": 0.811278124459,
    "and0_I_YZ": 1.0,
    "copy1_I_X_Y": 1.0,
    "gauss_rho05_I": 0.207518749639,
    "gauss_I_XY_06": 0.321928094887,
    "gauss_I_XZ_03": 0.068030774788,
    "gauss_I_YZ_01": 0.007249784848,
}


if __name__ == "__main__":
    for k, v in compute_all().items():
        print(f'    "{k}": {round(v, 12)!r},')
