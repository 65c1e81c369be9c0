import cmath

import numpy as np
import pytest
from hypothesis import given, settings

from b3rep import rep_builder as rb
from b3rep import spectra as sp
from b3rep.algebra_tools import mu_numeric_row
from b3rep.errors import (
    ConstructionFailed,
    ContractError,
    NonCentralError,
    NotSimpleError,
)

from conftest import random_spectrum, spectra

CUBE = (0.0, 1 / 3, 2 / 3)


def d2_pair(l1, l2):
    return np.array([[l1, l1], [0, l2]]), np.array([[l2, 0], [-l2, l1]])


# -- build_d2 -------------------------------------------------------------------------

def test_build_d2_example():
    s = sp.spectrum_from_angles(2, [0, 0.5])
    r = rb.build_d2(s)
    assert r.braid_residual < 1e-15
    ABA = r.A @ r.B @ r.A
    l1, l2 = s.lambdas
    assert np.allclose(ABA, [[0, l1**2 * l2], [-l1 * l2**2, 0]])
    assert abs(rb.extract_delta(r) - 1) < 1e-15
    assert np.allclose(r.A @ r.B, [[0, 1], [-1, -1]])


def test_build_d2_rejects():
    with pytest.raises(NotSimpleError):
        rb.build_d2(sp.spectrum_from_angles(2, [0, 1 / 6]))
    with pytest.raises(ContractError):
        rb.build_d2(sp.spectrum_from_angles(3, CUBE))


@given(spectra(dims=(2,), min_sep=1e-3))
def test_build_d2_invariants(s):
    r = rb.build_d2(s)
    assert r.braid_residual <= rb.BRAID_TOL
    assert r.spectrum_residual <= rb.SPECTRUM_TOL
    assert abs(r.delta ** 2 - np.prod(s.lambdas) ** 6) <= 1e-8


def test_reppair_is_immutable():
    r = rb.build_d2(sp.spectrum_from_angles(2, [0, 0.5]))
    with pytest.raises(ValueError):
        r.A[0, 0] = 5


# -- build_newton ---------------------------------------------------------------------------

def test_newton_d2_matches_closed_form():
    s = sp.spectrum_from_angles(2, [0, 0.5])
    for seed in (0, 1, 7):
        r = rb.build_newton(s, seed=seed)
        assert abs(r.delta - 1) <= 1e-9
        assert mu_numeric_row(r, s) == pytest.approx([0.75], abs=1e-8)
        assert r.seed == seed


def test_newton_d2_agrees_with_build_d2(rng):
    for _ in range(20):
        s = random_spectrum(rng, 2, min_sep=1e-2)
        a, b = rb.build_d2(s), rb.build_newton(s, seed=int(rng.integers(1 << 31)))
        assert abs(a.delta - b.delta) <= 1e-8
        assert np.allclose(mu_numeric_row(a, s), mu_numeric_row(b, s), rtol=1e-8, atol=1e-8)


def test_newton_cube_roots():
    s = sp.spectrum_from_angles(3, CUBE)
    r = rb.build_newton(s, seed=0)
    assert abs(r.delta ** 3 - 1) <= 1e-9
    assert mu_numeric_row(r, s) == pytest.approx([4 / 9, 4 / 9], abs=1e-8)


def test_newton_rejects_non_simple():
    with pytest.raises(NotSimpleError):
        rb.build_newton(sp.spectrum_from_angles(2, [0, 1 / 6]))


def test_newton_rejects_bad_delta():
    s = sp.spectrum_from_angles(4, (0.0, 0.1, 0.35, 0.7), 0)
    with pytest.raises(ContractError):
        rb.build_newton(s, delta_target=1j * rb.delta_roots(s)[0] * cmath.exp(0.1j))
    with pytest.raises(ContractError):
        rb.build_newton(s, gauge="upper")


def test_newton_is_deterministic():
    s = sp.spectrum_from_angles(3, (0.0, 0.21, 0.64))
    a, b = rb.build_newton(s, seed=3), rb.build_newton(s, seed=3)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.B, b.B)
    assert a.restart == b.restart


@pytest.mark.parametrize("d", [4, 5])
def test_newton_echoes_delta_target(d, rng):
    s = random_spectrum(rng, d, branch=0, min_sep=5e-2)
    delta = rb.delta_for_branch(s)
    r = rb.build_newton(s, delta_target=delta, seed=1)
    assert abs(rb.extract_delta(r) - delta) <= 1e-9


def test_diagonal_gauge():
    s = sp.spectrum_from_angles(3, (0.0, 0.3, 0.55))
    r = rb.build_newton(s, seed=0, gauge="diagonal")
    assert np.allclose(r.A, np.diag(s.lambdas), atol=1e-14)
    bal = rb.build_newton(s, seed=0)
    assert la_norm(bal.A) + la_norm(bal.B) <= la_norm(r.A) + la_norm(r.B) + 1e-9
    assert np.allclose(mu_numeric_row(r, s), mu_numeric_row(bal, s), rtol=1e-8)


def la_norm(m):
    return float(np.linalg.norm(m))


@settings(max_examples=10)
@given(spectra(min_sep=5e-2))
def test_newton_pair_invariants(s):
    r = rb.build_newton(s, seed=0)
    assert r.braid_residual <= rb.BRAID_TOL
    assert r.spectrum_residual <= rb.SPECTRUM_TOL
    assert r.central_residual <= rb.CENTRAL_TOL
    assert abs(r.delta ** s.d - np.prod(s.lambdas) ** 6) <= 1e-8
    assert rb.verify_rep(r, s).passed


# -- delta ----------------------------------------------------------------------------

def test_extract_delta_detects_noise(rng):
    r = rb.build_d2(sp.spectrum_from_angles(2, [0, 0.5]))
    noisy = rb.RepPair(r.A, r.B + 1e-3 * rng.standard_normal((2, 2)), r.delta, 0.0, 0.0)
    with pytest.raises(NonCentralError):
        rb.extract_delta(noisy)


@given(spectra(dims=(4, 5), min_sep=1e-3))
def test_delta_roots_satisfy_determinant(s):
    prod6 = np.prod(s.lambdas) ** 6
    roots = rb.delta_roots(s)
    assert len(roots) == s.d
    for delta in roots:
        assert abs(delta ** s.d - prod6) <= 1e-9
    assert min(abs(rb.delta_for_branch(s) - x) for x in roots) <= 1e-12


def test_make_rep_rejects_wrong_spectrum():
    s = sp.spectrum_from_angles(2, [0, 0.5])
    with pytest.raises(ConstructionFailed):
        rb.make_rep(np.eye(2), np.eye(2), s)


# -- branch matching ------------------------------------------------------------------------

def test_match_branch_d2_is_contract_error():
    r = rb.build_d2(sp.spectrum_from_angles(2, [0, 0.5]))
    with pytest.raises(ContractError):
        rb.match_branch((0.0, 0.5), r)


def test_match_branch_d4_roots():
    s = sp.spectrum_from_angles(4, (0.0, 0.13, 0.41, 0.77), 0)
    found = {}
    for k, delta in enumerate(rb.delta_roots(s)):
        try:
            r = rb.build_newton(s, delta, seed=0)
        except (rb.ReconstructionFailed, NotSimpleError):
            continue
        found[k] = rb.match_branch(s.angles, r)
    assert len(set(found.values())) == 2


@pytest.mark.parametrize("d", [4, 5])
def test_match_branch_inverts_delta_for_branch(d, rng):
    for b in range(sp.n_branches(d)):
        s = random_spectrum(rng, d, branch=b, min_sep=5e-2)
        r = rb.build_newton(s, seed=0)
        assert rb.match_branch(s.angles, r) == b


def test_match_branch_propagates_invariant_error():
    s = sp.spectrum_from_angles(4, (0.0, 0.13, 0.41, 0.77), 0)
    r = rb.build_newton(s, seed=0)
    broken = rb.RepPair(r.A, r.B + 1e-3, r.delta, 0.0, 0.0)
    with pytest.raises(ConstructionFailed):
        rb.match_branch(s.angles, broken)


# -- verification ------------------------------------------------------------------------

def test_verify_rep_d2_example():
    s = sp.spectrum_from_angles(2, [0, 0.5])
    rep = rb.verify_rep(rb.build_d2(s), s)
    assert rep.passed and rep.basis_rank == 4


def test_verify_rep_non_simple_forced():
    s = sp.spectrum_from_angles(2, [0, 1 / 6])
    A, B = d2_pair(*s.lambdas)
    r = rb.RepPair(A, B, 1.0, rb.braid_residual(A, B), 0.0)
    rep = rb.verify_rep(r, s)
    assert rep.braid_residual < 1e-14
    assert rep.basis_rank < 4 and not rep.passed


def test_verify_rep_identity_pair():
    s = sp.spectrum_from_angles(2, [0, 0.5])
    r = rb.RepPair(np.eye(2), np.eye(2), 1.0, 0.0, 0.0)
    rep = rb.verify_rep(r, s)
    assert rep.braid_residual == 0.0
    assert rep.spectrum_residual > rb.SPECTRUM_TOL
    assert not rep.passed


def test_charpoly_coeffs():
    B = np.array([[2, 1], [0, 3]], dtype=complex)
    # t^2 - 5t + 6
    assert np.allclose(rb.charpoly_coeffs(B), np.poly(B)[1:])
