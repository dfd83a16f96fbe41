import json

import numpy as np
import pytest

from trivpid.catalog import (
    SystemSpec,
    coupled_pair,
    dyadic_from_bits,
    make_and,
    make_copy,
    make_dice,
    make_dyadic,
    make_markov,
    make_parallel,
    make_triadic,
    make_xor,
    random_markov,
    triadic_from_bits,
)
from trivpid.dist import conditional_entropy, entropy, marginal, mutual_information
from trivpid.errors import ValidationError


def test_copy_endpoints():
    assert mutual_information(make_copy(0.0), "Y", "Z") == pytest.approx(1.0, abs=1e-12)
    assert mutual_information(make_copy(1.0), "Y", "Z") == pytest.approx(0.0, abs=1e-12)
    for lam in (0.0, 0.3, 1.0):
        assert conditional_entropy(make_copy(lam), "X", "YZ") == pytest.approx(0.0, abs=1e-12)


def test_and_endpoints():
    assert marginal(make_and(1.0), "X")[1] == pytest.approx(0.25)
    p = make_and(0.0).probs
    assert p[0, 0, 0] == pytest.approx(0.5) and p[1, 1, 1] == pytest.approx(0.5)


@pytest.mark.parametrize("lam", [0.0, 0.25, 0.8, 1.0])
def test_copy_and_share_inputs(lam):
    np.testing.assert_allclose(marginal(make_copy(lam), "YZ"), marginal(make_and(lam), "YZ"), atol=1e-15)
    np.testing.assert_allclose(marginal(make_and(lam), "YZ"), coupled_pair(lam), atol=1e-15)


def test_lambda_range():
    for bad in (-0.1, 1.1):
        with pytest.raises(ValidationError):
            make_copy(bad)
        with pytest.raises(ValidationError):
            make_parallel(0.5, 0.5, bad)


def test_xor():
    d = make_xor()
    for r in "XYZ":
        np.testing.assert_allclose(marginal(d, r), [0.5, 0.5])
    assert mutual_information(d, "X", "Y") == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(d, "X", "YZ") == pytest.approx(1.0, abs=1e-12)


def test_dice():
    d0 = make_dice(0.0, 3)
    assert np.count_nonzero(marginal(d0, "YZ") - np.diag(np.diag(marginal(d0, "YZ")))) == 0
    d6 = make_dice(1.0, 6)
    assert d6.shape == (36, 6, 6)
    np.testing.assert_allclose(marginal(d6, "X"), np.full(36, 1 / 36))
    for a in range(1, 7):
        assert mutual_information(make_dice(1.0, a), "Y", "Z") == pytest.approx(0.0, abs=1e-12)
    assert make_dice(0.5, 1).alphabets[0].labels[0] == "2"
    with pytest.raises(ValidationError):
        make_dice(0.5, 7)


def test_dyadic_triadic_tables():
    assert make_dyadic().probs[0, 2, 1] == 1 / 8
    assert make_triadic().probs[3, 1, 3] == 1 / 8
    assert entropy(make_dyadic()) == pytest.approx(3.0)
    assert entropy(make_triadic()) == pytest.approx(3.0)
    assert dyadic_from_bits() == make_dyadic()
    assert triadic_from_bits() == make_triadic()


def test_markov():
    eye = np.eye(3)
    d = make_markov([0.2, 0.3, 0.5], eye, eye)
    assert entropy(d) == pytest.approx(entropy([0.2, 0.3, 0.5]))
    u = np.full((3, 2), 0.5)
    assert mutual_information(make_markov([0.2, 0.3, 0.5], u, u), "X", "Y") == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        make_markov([0.5, 0.5], [[0.5, 0.4], [0.5, 0.5]], eye[:2, :2])


def test_markov_factorises():
    rng = np.random.default_rng(11)
    pz = rng.dirichlet(np.ones(3))
    xz, yz = rng.dirichlet(np.ones(2), 3), rng.dirichlet(np.ones(4), 3)
    d = make_markov(pz, xz, yz)
    expect = np.einsum("z,zx,zy->xyz", pz, xz, yz)
    assert np.max(np.abs(d.probs - expect)) < 1e-15


def test_parallel():
    d = make_parallel(0.3, 0.6, 1.0)
    assert d.shape == (4, 4, 2)
    c1 = np.full((2, 2), 0.15) + 0.7 * np.eye(2)
    c2 = np.full((2, 2), 0.3) + 0.4 * np.eye(2)
    p11 = 0.5 * c1.T @ c2
    i11 = entropy(p11.sum(1)) + entropy(p11.sum(0)) - entropy(p11)
    # lambda3 = 1 cuts the second channel, leaving only X1 - Z - Y1
    assert mutual_information(d, "X", "Y") == pytest.approx(i11, abs=1e-12)
    # lambda1 = lambda2 = 0 copies Z into X1 and Y1
    d0 = make_parallel(0.0, 0.0, 0.5)
    assert conditional_entropy(d0, "Z", "X") == pytest.approx(0.0, abs=1e-12)
    assert conditional_entropy(d0, "Z", "Y") == pytest.approx(0.0, abs=1e-12)


def test_parallel_mi_additive():
    lam = (0.2, 0.4, 0.3)
    d = make_parallel(*lam)
    p22 = coupled_pair(lam[2])
    i22 = entropy(p22.sum(1)) + entropy(p22.sum(0)) - entropy(p22)
    d_no2 = make_parallel(lam[0], lam[1], 1.0)
    assert mutual_information(d, "X", "Y") == pytest.approx(mutual_information(d_no2, "X", "Y") + i22, abs=1e-12)


def test_random_markov_shapes():
    rng = np.random.default_rng(0)
    for _ in range(10):
        d = random_markov(rng)
        assert all(2 <= n <= 4 for n in d.shape)


def test_spec_roundtrip():
    s = SystemSpec.from_json('{"kind": "and", "params": {"lambda": 0.5}}')
    assert s.build() == make_and(0.5)
    assert SystemSpec.from_json(json.dumps(s.to_json())) == s
    with pytest.raises(ValidationError):
        SystemSpec("nand")
    with pytest.raises(ValidationError):
        SystemSpec("and").build()
