import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisohardy.dilation import validate_dilation
from anisohardy.errors import BadRatio, ContractionFailed, EmptySamples, ZeroVector
from anisohardy.quasinorm import (
    build_quasinorm,
    doubling_estimate,
    dual_quasinorm,
    rho,
    sample_vectors,
    step_index,
    verify_comparison,
)

from conftest import DIAG23, ISO2, SHEAR

vectors = st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)).filter(lambda v: max(map(abs, v)) > 1e-4)


def _scan(Q, x, lo=-60, hi=60):
    # smallest m with x in B_m, found by brute force
    return next(m for m in range(lo, hi + 1) if Q.contains(x, m)[0]) - 1


def test_isotropic_series_closed_form():
    D = validate_dilation(ISO2)
    Q = build_quasinorm(D)
    r2 = D.lambda_minus
    J = Q.series_terms
    diag = sum((r2 / 4.0) ** j for j in range(J + 1))
    assert np.allclose(Q.form, diag * np.eye(2), rtol=1e-14, atol=0)
    assert Q.level == pytest.approx(diag / math.pi, rel=1e-14)
    assert Q.volume(0) == pytest.approx(1.0, rel=1e-12)
    # frozen defaults
    assert J == 20
    assert Q.series_ratio == pytest.approx(1.4093207551420195, rel=1e-15)


def test_diagonal_series_and_volumes():
    D = validate_dilation(DIAG23)
    Q = build_quasinorm(D)
    r2 = Q.series_ratio**2
    J = Q.series_terms
    expected = np.diag([sum((r2 / 4) ** j for j in range(J + 1)), sum((r2 / 9) ** j for j in range(J + 1))])
    assert np.allclose(Q.form, expected, rtol=1e-14, atol=1e-300)
    for k in range(-3, 4):
        assert Q.volume(k) == pytest.approx(6.0**k, rel=1e-10)


def test_shear_frozen_form():
    Q = build_quasinorm(validate_dilation(SHEAR))
    assert Q.series_terms == 21
    assert Q.level == pytest.approx(0.5385909479969937, rel=1e-12)
    assert Q.form[0, 1] == pytest.approx(-0.49144215432293137, rel=1e-12)
    assert Q.certificate_min_eig() >= -1e-10 * np.linalg.norm(Q.form, 2)


def test_bad_ratio_and_truncation():
    D = validate_dilation(SHEAR)
    with pytest.raises(BadRatio):
        build_quasinorm(D, r=D.lambda_minus)
    with pytest.raises(BadRatio):
        build_quasinorm(D, r=1.0)
    with pytest.raises(ContractionFailed):
        build_quasinorm(D, r=1.9, J=1)


def test_step_index_brute_force_isotropic():
    Q = build_quasinorm(validate_dilation(ISO2))
    x = np.array([1000.0, 0.0])
    assert step_index(Q, x) == _scan(Q, x) == 10


def test_step_index_shell_boundary():
    Q = build_quasinorm(validate_dilation(SHEAR))
    # a point just outside B_0 along an axis of the form
    w, V = np.linalg.eigh(Q.form)
    x = V[:, 0] * math.sqrt(Q.level / w[0]) * (1 + 1e-9)
    assert step_index(Q, x) == 0
    assert step_index(Q, x * (1 - 2e-9)) == -1


def test_step_index_zero_vector():
    Q = build_quasinorm(validate_dilation(SHEAR))
    with pytest.raises(ZeroVector):
        step_index(Q, [0.0, 0.0])
    assert rho(Q, [0.0, 0.0]) == 0.0


@given(x=vectors)
def test_step_index_matches_scan(x):
    Q = build_quasinorm(validate_dilation(SHEAR))
    assert step_index(Q, np.array(x)) == _scan(Q, np.array(x))


@given(x=vectors, k=st.integers(-20, 20))
def test_exact_homogeneity(x, k):
    D = validate_dilation(SHEAR)
    Q = build_quasinorm(D)
    x = np.array(x)
    assert step_index(Q, D.power(k) @ x) == step_index(Q, x) + k
    # rho = b^j is a float power, so the product can differ from it by one rounding
    assert rho(Q, D.entries @ x) == pytest.approx(D.b * rho(Q, x), rel=1e-15)


def test_vectorised_step_index_matches_scalar(rng):
    Q = build_quasinorm(validate_dilation(SHEAR))
    X = sample_vectors(rng, 2, 300, log_radius=12)
    batch = step_index(Q, X)
    assert all(batch[i] == step_index(Q, X[i]) for i in range(len(X)))


def test_nesting(rng):
    Q = build_quasinorm(validate_dilation(SHEAR))
    X = sample_vectors(rng, 2, 10_000, log_radius=4)
    for m in range(-4, 5):
        inside = Q.contains(X, m)
        assert np.all(Q.contains(X[inside], m + 1))


def test_monte_carlo_volumes(rng):
    Q = build_quasinorm(validate_dilation(SHEAR))
    for k in range(-2, 3):
        h = Q.bounding_halfwidths(k)
        X = rng.uniform(-h, h, size=(1_000_000, 2))
        est = np.mean(Q.contains(X, k)) * np.prod(2 * h)
        assert est == pytest.approx(6.0**k, rel=0.02)


def test_isotropic_rho_vs_euclidean(rng):
    Q = build_quasinorm(validate_dilation(ISO2))
    X = sample_vectors(rng, 2, 10_000, log_radius=10)
    ratio = rho(Q, X) / np.sum(X**2, axis=1)
    assert ratio.max() / ratio.min() <= 4.0 + 1e-9


def test_comparison_fit_stable_isotropic():
    Q = build_quasinorm(validate_dilation(ISO2))
    c1, v1 = verify_comparison(Q, sample_vectors(np.random.default_rng(1), 2, 10_000))
    c2, v2 = verify_comparison(Q, sample_vectors(np.random.default_rng(2), 2, 10_000))
    assert v1 == v2 == 0
    assert c1 == pytest.approx(c2, rel=0.10)


def test_comparison_singleton_and_empty():
    Q = build_quasinorm(validate_dilation(SHEAR))
    x = np.array([[3.0, -1.0]])
    c, v = verify_comparison(Q, x)
    r = rho(Q, x)[0]
    nx = np.linalg.norm(x)
    D = Q.dilation
    assert c == max(r**D.zeta_minus / nx, nx / r**D.zeta_plus)
    assert v == 0
    with pytest.raises(EmptySamples):
        verify_comparison(Q, np.zeros((0, 2)))


def test_doubling_examples(rng):
    Q = build_quasinorm(validate_dilation(DIAG23))
    x = np.array([1.5, -0.2])
    assert doubling_estimate(Q, [[x, -x]]) == 0.0
    assert doubling_estimate(Q, [[x, np.zeros(2)]]) == 1.0
    pairs = sample_vectors(rng, 2, 20_000).reshape(10_000, 2, 2)
    c = doubling_estimate(Q, pairs)
    assert 1.0 <= c < np.inf


def test_dual_shares_eccentricities(rng):
    Q = build_quasinorm(validate_dilation(SHEAR))
    Qs = dual_quasinorm(Q)
    assert (Qs.dilation.zeta_minus, Qs.dilation.zeta_plus) == (Q.dilation.zeta_minus, Q.dilation.zeta_plus)
    X = sample_vectors(rng, 2, 2000)
    assert np.array_equal(step_index(Qs, X @ Qs.dilation.entries.T), step_index(Qs, X) + 1)
