import numpy as np
import pytest

from trivpid.broja import SolverConfig, solve_pid
from trivpid.dist import ROLES, mutual_information
from trivpid.errors import DegenerateError, ValidationError
from trivpid.gaussian import (
    GaussianCov,
    discretize,
    gaussian_mutual_informations,
    gaussian_pid,
    gaussian_sr_nsr,
)

from oracles import FROZEN


def random_cov(rng):
    A = rng.normal(size=(3, 3))
    return A @ A.T + 0.05 * np.eye(3)


def test_identity_is_all_zero():
    g = GaussianCov(np.eye(3))
    assert all(v == 0 for v in gaussian_mutual_informations(g).values())
    for t in ROLES:
        a = gaussian_pid(g, t)
        assert (a.si, a.ui_a, a.ui_b, a.ci) == (0, 0, 0, 0)


def test_pairwise_value():
    g = GaussianCov.from_correlations(0.5, 0.0, 0.0)
    assert gaussian_mutual_informations(g)["I_XY"] == pytest.approx(FROZEN["gauss_rho05_I"], abs=1e-12)


def test_degenerate_inputs():
    with pytest.raises(DegenerateError):
        GaussianCov.from_correlations(1.0, 0.0, 0.0)
    with pytest.raises(DegenerateError):
        GaussianCov(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(ValidationError):
        GaussianCov(np.array([[1, 0.2, 0], [0.1, 1, 0], [0, 0, 1]]))
    with pytest.raises(ValidationError):
        GaussianCov(np.eye(2))
    with pytest.raises(ValidationError):
        GaussianCov.from_json({"covariance": []})


def test_pid_example():
    g = GaussianCov.from_correlations(0.6, 0.3, 0.0)
    a = gaussian_pid(g, "X")
    assert a.si == pytest.approx(FROZEN["gauss_I_XZ_03"], abs=1e-12)
    assert a.ui_b == 0.0
    assert a.ui_a > 0


def test_symmetric_correlations_no_unique():
    a = gaussian_pid(GaussianCov.from_correlations(0.4, 0.4, 0.2), "X")
    assert a.ui_a == pytest.approx(0, abs=1e-15) and a.ui_b == pytest.approx(0, abs=1e-15)


def test_split_examples():
    # I(Y:Z) >= SI: no non-source redundancy
    s = gaussian_sr_nsr(GaussianCov.from_correlations(0.3, 0.3, 0.8), "X")
    assert s.nsr == 0.0
    s = gaussian_sr_nsr(GaussianCov.from_correlations(0.6, 0.3, 0.0), "X")
    assert s.sr == 0.0 and s.nsr == pytest.approx(FROZEN["gauss_I_XZ_03"], abs=1e-12)
    s = gaussian_sr_nsr(GaussianCov.from_correlations(0.6, 0.3, 0.1), "X")
    assert s.sr == pytest.approx(FROZEN["gauss_I_YZ_01"], abs=1e-12)
    assert s.nsr == pytest.approx(FROZEN["gauss_I_XZ_03"] - FROZEN["gauss_I_YZ_01"], abs=1e-12)


def test_scale_invariance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = random_cov(rng)
        s = np.diag(rng.uniform(0.1, 10, size=3))
        g1, g2 = GaussianCov(c), GaussianCov(s @ c @ s)
        for t in ROLES:
            a, b = gaussian_pid(g1, t), gaussian_pid(g2, t)
            assert (a.si, a.ui_a, a.ui_b, a.ci) == pytest.approx((b.si, b.ui_a, b.ui_b, b.ci), abs=1e-10)


def test_json_roundtrip():
    g = GaussianCov.from_json('{"cov": [[2, 0.5, 0], [0.5, 1, 0.1], [0, 0.1, 3]]}')
    np.testing.assert_allclose(g.correlation().diagonal(), 1.0)


def test_discretize_reproduces_pairwise_mi():
    g = GaussianCov.from_correlations(0.6, 0.3, 0.1)
    d = discretize(g)
    assert d.shape == (40, 40, 40)
    mis = gaussian_mutual_informations(g)
    assert mutual_information(d, "X", "Y") == pytest.approx(mis["I_XY"], abs=0.01)


def test_discretized_solver_cross_check():
    g = GaussianCov.from_correlations(0.6, 0.3, 0.1)
    got, point = solve_pid(discretize(g), "X", SolverConfig(tol_bits=1e-6))
    ref = gaussian_pid(g, "X")
    assert point.method == "mm"
    for f in ("si", "ui_a", "ui_b", "ci"):
        assert getattr(got, f) == pytest.approx(getattr(ref, f), abs=0.02)
