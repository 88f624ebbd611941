import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schwarzmaps.ensembles import ginibre, random_psd, rng_for, unit_vector
from schwarzmaps.numerics import (
    DimensionError,
    NotPSDError,
    ToleranceConfig,
    basis_matrix,
    hermitian_eig,
    hermitize,
    is_pd,
    is_psd,
    kernel_basis,
    kernel_included,
    kron,
    outer,
    partial_trace_first,
    pinv_psd,
    psd_power,
    range_projector,
    schur_block_psd,
    unvec,
    vec,
)


def test_tolerance_config_rejects_nonpositive():
    with pytest.raises(ValueError):
        ToleranceConfig(psd_tol=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(kernel_tol=-1.0)


def test_hermitian_eig_identity():
    w, V = hermitian_eig(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])
    np.testing.assert_allclose(V.conj().T @ V, np.eye(3), atol=1e-14)


def test_hermitian_eig_diagonal():
    w, V = hermitian_eig(np.diag([2.0, 0.0]))
    np.testing.assert_allclose(w, [2, 0])
    np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_hermitian_eig_reconstructs(seed):
    rng = np.random.default_rng(seed)
    G = ginibre(4, 4, rng)
    M = G + G.conj().T
    dec = hermitian_eig(M)
    assert np.all(np.diff(dec.eigenvalues) <= 0)
    assert np.abs(dec.reconstruct() - M).max() <= 1e-10


def test_hermitize_rejects_large_asymmetry():
    M = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        hermitize(M)
    # roundoff-sized asymmetry is absorbed
    H = hermitize(np.array([[1.0, 1e-13], [0.0, 1.0]]))
    np.testing.assert_allclose(H, H.conj().T)


def test_pinv_trivial_cases():
    np.testing.assert_allclose(pinv_psd(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(pinv_psd(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    v = unit_vector(3, np.random.default_rng(0))
    P = outer(v, v)
    np.testing.assert_allclose(pinv_psd(P), P, atol=1e-12)


def test_pinv_rejects_non_psd():
    with pytest.raises(NotPSDError):
        pinv_psd(np.diag([1.0, -1.0]))


def test_pinv_projector_property_500_matrices():
    rng = rng_for(11, "pinv-projector")
    worst = 0.0
    for _ in range(500):
        dim = int(rng.integers(1, 9))
        rank = int(rng.integers(1, dim + 1))
        M = random_psd(dim, rng, rank=rank)
        Mp = pinv_psd(M)
        P = range_projector(M)
        scale = 1 + np.linalg.norm(M, 2) * np.linalg.norm(Mp, 2)
        worst = max(
            worst,
            np.abs(M @ Mp - P).max() / scale,
            np.abs(Mp @ M - P).max() / scale,
            np.abs(P @ P - P).max(),
        )
        assert np.linalg.matrix_rank(P, tol=1e-8) == rank
    assert worst <= 1e-9


def test_psd_power_pseudo_inverse_semantics():
    M = np.diag([4.0, 0.0])
    np.testing.assert_allclose(psd_power(M, -0.5), np.diag([0.5, 0.0]))
    np.testing.assert_allclose(psd_power(M, 0.5), np.diag([2.0, 0.0]))


def test_kernel_basis_examples():
    assert kernel_basis(np.eye(2)).shape == (2, 0)
    ker = kernel_basis(np.diag([1.0, 0.0]))
    assert ker.shape == (2, 1)
    np.testing.assert_allclose(np.abs(ker[:, 0]), [0, 1], atol=1e-14)
    v = unit_vector(3, np.random.default_rng(1))
    ker = kernel_basis(outer(v, v))
    assert ker.shape == (3, 2)
    assert np.abs(v.conj() @ ker).max() <= 1e-12
    np.testing.assert_allclose(ker.conj().T @ ker, np.eye(2), atol=1e-12)


def test_kernel_included_examples():
    rng = np.random.default_rng(2)
    assert kernel_included(np.eye(2), ginibre(2, 2, rng))
    assert not kernel_included(np.diag([1.0, 0.0]), np.eye(2))
    u, v = unit_vector(3, rng), unit_vector(3, rng)
    # ker(|v><v|) is v-perp, and |u><v| annihilates it
    assert kernel_included(outer(v, v), outer(u, v))
    assert not kernel_included(outer(v, v), outer(v, u))


def test_kernel_included_dimension_check():
    with pytest.raises(DimensionError):
        kernel_included(np.eye(2), np.eye(3))


@pytest.mark.parametrize("seed", range(20))
def test_kernel_included_matches_epsilon_limit(seed):
    rng = rng_for(seed, "kernel-eps")
    dim = 3
    A = random_psd(dim, rng, rank=2)
    if seed % 2:
        B = ginibre(dim, dim, rng) @ A  # ker(A) ⊆ ker(B)
    else:
        B = ginibre(dim, dim, rng)
    eps = [10.0**-k for k in range(2, 9)]
    vals = [np.trace(B @ np.linalg.solve(A + e * np.eye(dim), B.conj().T)).real for e in eps]
    assert np.all(np.diff(vals) >= -1e-9 * (1 + np.abs(vals).max()))
    limit = np.trace(B @ pinv_psd(A) @ B.conj().T).real
    bounded = abs(vals[-1] - limit) <= 1e-5 * (1 + abs(limit))
    assert kernel_included(A, B) == bounded


def test_schur_examples():
    r = schur_block_psd(np.eye(2), np.eye(2), np.zeros((2, 2)))
    assert r.block_psd and r.via_x and r.via_y

    rng = np.random.default_rng(3)
    u, v = unit_vector(2, rng), unit_vector(3, rng)
    r = schur_block_psd(outer(u, u), outer(v, v), outer(v, u))
    assert r.block_psd and r.via_x and r.via_y

    r = schur_block_psd(np.diag([1.0, 0.0]), np.eye(2), np.eye(2))
    assert not r.block_psd and not r.via_y and not r.via_x
    assert r.schur_y_min_eig == pytest.approx(-1.0)


def test_schur_dimension_error():
    with pytest.raises(DimensionError):
        schur_block_psd(np.eye(2), np.eye(3), np.zeros((2, 3)))


def test_schur_three_way_agreement_1000_blocks():
    rng = rng_for(5, "schur-agree")
    psd_count = 0
    for s in range(1000):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        G = ginibre(p + q, int(rng.integers(1, p + q + 1)), rng)
        B = G @ G.conj().T
        K = B[p:, :p]
        if s % 2:
            # inflating the off-diagonal block keeps X, Y PSD but breaks the block
            K = K * rng.uniform(1.0, 2.0) + 0.3 * ginibre(q, p, rng)
        r = schur_block_psd(B[:p, :p], B[p:, p:], K)
        assert r.agree
        psd_count += r.block_psd
    assert 400 < psd_count < 1000


def test_kron_and_partial_trace():
    np.testing.assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))
    rng = np.random.default_rng(4)
    A, B = ginibre(2, 2, rng), ginibre(3, 3, rng)
    np.testing.assert_allclose(partial_trace_first(kron(A, B), 2, 3), np.trace(A) * B, atol=1e-13)
    M, N = ginibre(3, 3, rng), ginibre(3, 3, rng)
    T = kron(basis_matrix(0, 0, 2), M) + kron(basis_matrix(1, 1, 2), N)
    np.testing.assert_allclose(partial_trace_first(T, 2, 3), M + N, atol=1e-13)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionError):
        partial_trace_first(np.eye(5), 2, 3)


def test_vec_is_column_stacking():
    A = np.arange(6).reshape(2, 3)
    np.testing.assert_array_equal(vec(A), [0, 3, 1, 4, 2, 5])
    np.testing.assert_array_equal(unvec(vec(A), 2, 3), A)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 5))
def test_pd_implies_psd_and_trivial_kernel(seed, dim):
    rng = np.random.default_rng(seed)
    G = ginibre(dim, dim, rng)
    M = G @ G.conj().T + 0.1 * np.eye(dim)
    assert is_pd(M) and is_psd(M)
    assert kernel_basis(M).shape[1] == 0
    np.testing.assert_allclose(pinv_psd(M) @ M, np.eye(dim), atol=1e-8 * np.linalg.cond(M))
