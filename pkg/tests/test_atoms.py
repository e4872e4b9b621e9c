import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisohardy.atom_io import load_atom, save_atom
from anisohardy.atoms import (
    AdmissibleTriplet,
    AtomicCombination,
    check_atom,
    dilate_atom,
    make_atom,
    min_moment_order,
    moment_residuals,
    multi_indices,
    project_moments,
    _moment_basis,
)
from anisohardy.dilation import validate_dilation
from anisohardy.errors import BadExponent, PowerOutOfRange, TooCoarse
from anisohardy.fourier import ft
from anisohardy.quasinorm import build_quasinorm

from conftest import DIAG23, ISO2


def test_min_moment_order_examples(shear):
    assert min_moment_order(1.0, shear[0]) == 0
    assert min_moment_order(0.5, 0.45) == 2
    with pytest.raises(BadExponent):
        min_moment_order(0.0, shear[0])
    # frozen values for the shear matrix (zeta_- = 0.99 ln2/ln6)
    assert [min_moment_order(p, shear[0]) for p in (1.0, 0.5, 0.3)] == [0, 2, 6]


def test_triplet_validation(shear):
    with pytest.raises(BadExponent):
        AdmissibleTriplet(0.5, 0.5, 2)
    with pytest.raises(BadExponent):
        AdmissibleTriplet.for_dilation(0.5, 2.0, 1, shear[0])
    assert AdmissibleTriplet.for_dilation(0.5, math.inf, "auto", shear[0]).label() == "(0.5,inf,2)"


def test_constraint_count():
    for n, s in [(2, 0), (2, 2), (2, 6), (3, 2)]:
        assert len(multi_indices(n, s)) == math.comb(n + s, n)


def test_generated_atom_contract(unit_atom):
    rep = check_atom(unit_atom)
    assert rep.ok
    assert rep.max_moment_residual <= 1e-8
    assert rep.size_ratio == pytest.approx(1.0, abs=1e-10)
    assert rep.support_leak == 0.0


def test_frozen_atom_values(unit_atom):
    # seed 7, k = 0, grid_res 64 on the shear matrix
    assert int(unit_atom.support_mask.sum()) == 2956
    assert unit_atom.samples[32, 32] == pytest.approx(0.6132841639917548, rel=1e-10)


def test_deterministic_per_seed(shear, half_triplet):
    a = make_atom(shear[1], half_triplet, k=1, grid_res=32, seed=3)
    b = make_atom(shear[1], half_triplet, k=1, grid_res=32, seed=3)
    c = make_atom(shear[1], half_triplet, k=1, grid_res=32, seed=4)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


@given(seed=st.integers(0, 10_000), k=st.integers(-4, 4), q=st.sampled_from([1.5, 2.0, 4.0, math.inf]))
def test_contract_any_seed(shear, seed, k, q):
    t = AdmissibleTriplet.for_dilation(0.5, q, "auto", shear[0])
    a = make_atom(shear[1], t, x0=[0.5, -1.0], k=k, grid_res=24, seed=seed)
    assert check_atom(a).ok


def test_p_one_zero_mean(iso):
    t = AdmissibleTriplet.for_dilation(1.0, 2.0, "auto", iso[0])
    a = make_atom(iso[1], t, k=0, seed=1)
    assert t.s == 0
    assert abs(ft(a, [[0.0, 0.0]]).values[0]) <= 1e-14


def test_too_coarse(shear, half_triplet):
    with pytest.raises(TooCoarse):
        make_atom(shear[1], half_triplet, grid_res=8)
    with pytest.raises(PowerOutOfRange):
        make_atom(shear[1], half_triplet, k=65, grid_res=16)


def test_perturbed_moment_fails(unit_atom):
    X = unit_atom.lattice()
    bump = np.where(unit_atom.support_mask.ravel(), X[:, 0], 0.0).reshape(unit_atom.samples.shape)
    bad = replace(unit_atom, field=unit_atom.field.with_samples(unit_atom.samples + 1e-3 * bump))
    assert not check_atom(bad).moments_ok


def test_zero_samples_flagged(unit_atom):
    zero = replace(unit_atom, field=unit_atom.field.with_samples(np.zeros_like(unit_atom.samples)))
    rep = check_atom(zero)
    assert rep.degenerate and not rep.size_ok and not rep.ok


def test_projection_idempotent(unit_atom):
    mask = unit_atom.support_mask.ravel()
    U = unit_atom.field.u_points()[mask]
    basis = _moment_basis(U, unit_atom.quasinorm.bounding_halfwidths(0), unit_atom.triplet.s)
    v = unit_atom.samples.ravel()[mask]
    again = project_moments(v, basis)
    assert np.max(np.abs(again - v)) <= 1e-12 * np.max(np.abs(v))
    assert np.linalg.matrix_rank(basis) == basis.shape[1]


def test_dilation_examples(unit_atom):
    assert dilate_atom(unit_atom, 0) is unit_atom
    big = dilate_atom(unit_atom, -2)
    assert big.k == 2
    assert check_atom(big).ok
    back = dilate_atom(big, 2)
    assert np.max(np.abs(back.samples - unit_atom.samples)) <= 1e-12 * np.max(np.abs(unit_atom.samples))
    assert back.cell_measure == pytest.approx(unit_atom.cell_measure, rel=1e-15)


@given(j=st.integers(-5, 5))
def test_dilation_preserves_contract(small_atoms, j):
    for a in small_atoms:
        d = dilate_atom(a, j)
        assert d.k == a.k - j
        rep = check_atom(d)
        assert rep.moments_ok and rep.size_ok


def test_combination_norm(small_atoms):
    lam = np.array([1.0, -2.0, 0.5, 3.0, -0.25])
    c = AtomicCombination(small_atoms, lam)
    assert c.lp_norm == pytest.approx(np.sum(np.abs(lam) ** 0.5) ** 2, rel=1e-12)
    assert c.lp_sum() == pytest.approx(np.sum(np.abs(lam) ** 0.5), rel=1e-12)
    with pytest.raises(ValueError):
        AtomicCombination(small_atoms, lam[:2])


def test_diagonal_isotropic_residuals():
    for M in (DIAG23, ISO2):
        D = validate_dilation(M)
        Q = build_quasinorm(D)
        t = AdmissibleTriplet.for_dilation(0.4, 2.0, "auto", D)
        a = make_atom(Q, t, k=-1, grid_res=48, seed=11)
        assert max(moment_residuals(a).values()) <= 1e-8


@pytest.mark.parametrize("fmt", ["binary", "text"])
def test_atom_file_roundtrip(tmp_path, shear, half_triplet, fmt):
    a = make_atom(shear[1], half_triplet, x0=[0.25, -1.5], k=2, grid_res=20, seed=9)
    path = save_atom(a, tmp_path / f"a.{fmt}", fmt=fmt)
    b = load_atom(path)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.center, b.center)
    assert b.k == a.k and b.seed == a.seed and b.triplet == a.triplet
    assert b.cell_measure == a.cell_measure
    assert np.array_equal(b.quasinorm.form, a.quasinorm.form)


def test_atom_file_binary_layout(tmp_path, shear, half_triplet):
    a = make_atom(shear[1], half_triplet, k=0, grid_res=16, seed=2)
    raw = save_atom(a, tmp_path / "a.bin").read_bytes()
    head, body = raw.split(b"\n", 1)
    assert len(body) == 8 * a.samples.size
    assert np.array_equal(np.frombuffer(body, dtype="<f8").reshape(a.samples.shape), a.samples)
