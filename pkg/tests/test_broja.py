import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trivpid.broja import (
    DENSE_LIMIT,
    SolverConfig,
    _mi_bits,
    _oriented,
    _Polytope,
    brute_force_pid,
    clamp_atom,
    solve_pid,
    sources_of,
)
from trivpid.catalog import make_and, make_copy, make_dice, make_dyadic, make_triadic, make_xor
from trivpid.catalog import random_distribution
from trivpid.dist import JointDist3, co_information, conditional_mutual_information, mutual_information
from trivpid.errors import ConsistencyError, SolverError, ValidationError

from oracles import FROZEN


def _check_identities(d, atoms, tol):
    t = atoms.target
    a, b = atoms.sources
    assert atoms.si + atoms.ui_a == pytest.approx(mutual_information(d, t, a), abs=tol)
    assert atoms.si + atoms.ui_b == pytest.approx(mutual_information(d, t, b), abs=tol)
    assert atoms.ci + atoms.ui_a == pytest.approx(conditional_mutual_information(d, t, a, b), abs=tol)
    assert atoms.ci + atoms.ui_b == pytest.approx(conditional_mutual_information(d, t, b, a), abs=tol)
    assert atoms.si - atoms.ci == pytest.approx(co_information(d), abs=tol)


def test_sources_order():
    assert sources_of("X") == ("Y", "Z")
    assert sources_of("Y") == ("X", "Z")
    assert sources_of(2) == ("X", "Y")


def test_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(tol_bits=0)
    with pytest.raises(ValidationError):
        SolverConfig(max_iters=0)
    with pytest.raises(ValidationError):
        SolverConfig(method="simplex")


def test_clamp_atom():
    assert clamp_atom(-5e-10, "x") == 0.0
    with pytest.raises(ConsistencyError):
        clamp_atom(-2e-9, "x")


# -- reference systems ------------------------------------------------------

def test_and_lambda1():
    atoms, point = solve_pid(make_and(1.0), "X")
    assert atoms.si == pytest.approx(0.311, abs=1e-3)
    assert atoms.si == pytest.approx(FROZEN["and1_I_XY"], abs=1e-8)
    q = point.q
    assert q.sum() == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(q.sum(axis=2), make_and(1.0).probs.sum(axis=2), atol=1e-8)
    np.testing.assert_allclose(q.sum(axis=1), make_and(1.0).probs.sum(axis=1), atol=1e-8)


def test_xor():
    atoms, _ = solve_pid(make_xor(), "X")
    assert (atoms.si, atoms.ui_a, atoms.ui_b) == pytest.approx((0, 0, 0), abs=1e-9)
    assert atoms.ci == pytest.approx(1.0, abs=1e-9)


def test_copy_lambda1():
    atoms, _ = solve_pid(make_copy(1.0), "X")
    assert (atoms.si, atoms.ui_a, atoms.ui_b, atoms.ci) == pytest.approx((0, 1, 1, 0), abs=1e-8)
    ref = brute_force_pid(make_copy(1.0), "X")
    assert (ref.si, ref.ui_a, ref.ui_b, ref.ci) == pytest.approx((0, 1, 1, 0), abs=1e-8)


@pytest.mark.parametrize("lam", [0.0, 0.4, 1.0])
def test_dice_alpha6_si_is_source_mi(lam):
    d = make_dice(lam, 6)
    atoms, _ = solve_pid(d, "X")
    assert atoms.si == pytest.approx(mutual_information(d, "Y", "Z"), abs=1e-6)


def test_dyadic_triadic():
    for t in "XYZ":
        a, _ = solve_pid(make_dyadic(), t)
        assert (a.si, a.ui_a, a.ui_b, a.ci) == pytest.approx((0, 1, 1, 0), abs=1e-8)
        a, _ = solve_pid(make_triadic(), t)
        assert (a.si, a.ui_a, a.ui_b, a.ci) == pytest.approx((1, 0, 0, 1), abs=1e-8)


def test_degenerate_point_mass():
    p = np.zeros((2, 2, 2))
    p[1, 0, 1] = 1.0
    atoms, point = solve_pid(JointDist3(p), "Z")
    assert (atoms.si, atoms.ui_a, atoms.ui_b, atoms.ci) == (0, 0, 0, 0)
    assert point.iterations == 0


# -- solver properties --------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2, 2), (3, 2, 2), (2, 3, 4), (3, 3, 3)]),
       st.sampled_from([1.0, 0.3]), st.sampled_from("XYZ"))
def test_consistency_and_monotone_trace(seed, shape, conc, target):
    d = random_distribution(np.random.default_rng(seed), shape, conc)
    cfg = SolverConfig()
    atoms, point = solve_pid(d, target, cfg)
    _check_identities(d, atoms, 10 * cfg.tol_bits + 1e-12)
    assert all(b <= a + 1e-12 for a, b in zip(point.trace, point.trace[1:]))
    assert point.trace[-1] == pytest.approx(point.objective, abs=1e-9)
    assert point.gap <= cfg.tol_bits


def test_tangent_basis_preserves_marginals():
    d = random_distribution(np.random.default_rng(1), (3, 4, 3))
    p3, _ = _oriented(d, "X")
    poly = _Polytope(p3)
    N = poly.basis()
    np.testing.assert_allclose(N.T @ N, np.eye(poly.dim), atol=1e-12)
    for k in range(poly.dim):
        move = poly.dense(N[:, k])
        assert np.max(np.abs(move.sum(axis=2))) < 1e-12
        assert np.max(np.abs(move.sum(axis=1))) < 1e-12
    q3 = poly.dense(poly.q0)
    assert poly.marginal_error(q3) < 1e-15


def test_midpoint_convexity():
    rng = np.random.default_rng(2)
    for _ in range(20):
        d = random_distribution(rng, (3, 3, 2))
        p3, _ = _oriented(d, "X")
        poly = _Polytope(p3)
        N = poly.basis()
        # two random feasible points on the segment from q0 towards random directions
        pts = []
        for _ in range(2):
            dq = N @ rng.normal(size=poly.dim)
            neg = dq < 0
            step = 0.9 * np.min(-poly.q0[neg] / dq[neg]) if neg.any() else 1.0
            pts.append(poly.dense(poly.q0 + step * rng.uniform() * dq))
        mid = 0.5 * (pts[0] + pts[1])
        assert _mi_bits(mid) <= 0.5 * (_mi_bits(pts[0]) + _mi_bits(pts[1])) + 1e-12


def test_optimum_beats_feasible_points():
    rng = np.random.default_rng(3)
    d = random_distribution(rng, (2, 3, 3))
    _, point = solve_pid(d, "X")
    p3, _ = _oriented(d, "X")
    poly = _Polytope(p3)
    N = poly.basis()
    for _ in range(50):
        dq = N @ rng.normal(size=poly.dim)
        neg = dq < 0
        step = rng.uniform() * np.min(-poly.q0[neg] / dq[neg])
        assert _mi_bits(poly.dense(poly.q0 + step * dq)) >= point.objective - 1e-10


def test_mm_matches_newton():
    rng = np.random.default_rng(4)
    d = random_distribution(rng, (3, 3, 3))
    a, _ = solve_pid(d, "X", SolverConfig(method="newton"))
    b, pt = solve_pid(d, "X", SolverConfig(method="mm", tol_bits=1e-12))
    assert pt.method == "mm"
    # Sinkhorn projections are exact only to ~1e-10, so allow that much jitter
    assert all(y <= x + 1e-10 for x, y in zip(pt.trace, pt.trace[1:]))
    assert a.si == pytest.approx(b.si, abs=1e-6)
    assert DENSE_LIMIT > 36 * 5 * 5


def test_non_convergence_reports_progress():
    with pytest.raises(SolverError) as info:
        solve_pid(make_and(0.5), "X", SolverConfig(max_iters=2))
    err = info.value
    assert err.target == "X"
    assert err.best_objective is not None and err.gap > 0


# -- oracle -------------------------------------------------------------------

def test_oracle_examples():
    assert brute_force_pid(make_and(1.0)).si == pytest.approx(0.3113, abs=1e-4)
    assert brute_force_pid(make_xor()).ci == pytest.approx(1.0, abs=1e-12)


def test_oracle_dimension_guard():
    with pytest.raises(ValidationError):
        brute_force_pid(random_distribution(np.random.default_rng(0), (3, 3, 3)), "X")


def test_oracle_grid_path():
    # two target slices of (3-1)(2-1) free cells: dim 4 takes the grid path
    d = random_distribution(np.random.default_rng(9), (2, 3, 2))
    ref = brute_force_pid(d, "X", resolution=1e-7)
    got, _ = solve_pid(d, "X")
    assert ref.si == pytest.approx(got.si, abs=1e-4)
    assert ref.ci == pytest.approx(got.ci, abs=1e-4)


@pytest.mark.parametrize("seed", range(8))
def test_oracle_agrees_on_skewed_binary(seed):
    d = random_distribution(np.random.default_rng(100 + seed), (2, 2, 2), 0.1)
    for t in "XYZ":
        ref = brute_force_pid(d, t)
        got, _ = solve_pid(d, t)
        for f in ("si", "ui_a", "ui_b", "ci"):
            assert getattr(got, f) == pytest.approx(getattr(ref, f), abs=1e-6)
