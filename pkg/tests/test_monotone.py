import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schwarzmaps.ensembles import ginibre, haar_unitary, random_pd, random_psd, rng_for
from schwarzmaps.maps import (
    adjoint_map,
    choi_reduction_map,
    depolarizing_map,
    from_kraus,
    identity_map,
    normalize_to_unital,
    random_cp_map,
    tensor_with_identity,
    transpose_map,
    unitary_conjugation_map,
)
from schwarzmaps.monotone import (
    MonotoneFunction,
    build_Jf,
    check_equivalence_ab,
    check_hp_a,
    check_hp_b,
    check_L1,
    check_L2,
    check_ph7,
    jf_coefficients,
    jf_pinv,
    left_mult_superop,
    right_mult_superop,
    superop_of_map,
)
from schwarzmaps.numerics import NotPSDError, basis_matrix, hermitian_eig, range_projector, vec
from schwarzmaps.positivity import identity_mon_block
from schwarzmaps.verdicts import Status

FUNCTIONS = [
    MonotoneFunction.power(0.5),
    MonotoneFunction.power(0.2),
    MonotoneFunction.identity(),
    MonotoneFunction.loewner_atom(0.0, 0.0, 1.0),
    MonotoneFunction.loewner_atom(0.5, 2.0, 0.3),
]


def choi_tensor_unital():
    return normalize_to_unital(tensor_with_identity(2, choi_reduction_map(3, 4)))


def test_multiplication_superops():
    np.testing.assert_allclose(left_mult_superop(np.eye(3)).matrix, np.eye(9))
    L = left_mult_superop(np.diag([2.0, 3.0]))
    np.testing.assert_allclose(L.matrix @ vec(basis_matrix(0, 0, 2)), vec(2 * basis_matrix(0, 0, 2)))
    rng = np.random.default_rng(0)
    Y, X, A = ginibre(3, 3, rng), ginibre(3, 3, rng), ginibre(3, 3, rng)
    np.testing.assert_allclose(left_mult_superop(Y)(A), Y @ A, atol=1e-12)
    np.testing.assert_allclose(right_mult_superop(X)(A), A @ X, atol=1e-12)


def test_left_right_commute_100_pairs():
    rng = rng_for(1, "commute")
    for _ in range(100):
        L = left_mult_superop(ginibre(3, 3, rng)).matrix
        R = right_mult_superop(ginibre(3, 3, rng)).matrix
        assert np.linalg.norm(L @ R - R @ L) <= 1e-12 * (1 + np.linalg.norm(L) * np.linalg.norm(R))


def test_superop_of_map_examples():
    np.testing.assert_allclose(superop_of_map(identity_map(3)).matrix, np.eye(9))
    P = superop_of_map(transpose_map(2)).matrix
    np.testing.assert_allclose(P, np.eye(4)[[0, 2, 1, 3]])
    for s in range(20):
        phi = random_cp_map(2, 3, 2, seed=s)
        np.testing.assert_allclose(
            superop_of_map(adjoint_map(phi)).matrix, superop_of_map(phi).matrix.conj().T, atol=1e-12
        )


def test_monotone_function_validation_and_parse():
    with pytest.raises(ValueError):
        MonotoneFunction.power(1.5)
    with pytest.raises(ValueError):
        MonotoneFunction.loewner_atom(-1, 0, 1)
    assert MonotoneFunction.parse("power:0.5") == MonotoneFunction.power(0.5)
    assert MonotoneFunction.parse("identity") == MonotoneFunction.identity()
    assert MonotoneFunction.parse("loewner:1,2,3") == MonotoneFunction.loewner_atom(1, 2, 3)
    for bad in ("power", "power:2", "cosh", "loewner:1,2"):
        with pytest.raises(ValueError):
            MonotoneFunction.parse(bad)


@pytest.mark.parametrize("f", FUNCTIONS, ids=str)
def test_monotone_function_json_round_trip(f):
    assert MonotoneFunction.from_json(f.to_json()) == f


def test_build_jf_examples():
    rng = np.random.default_rng(2)
    X, Y = random_pd(3, rng), random_pd(3, rng)
    J = build_Jf(MonotoneFunction.identity(), X, Y)
    np.testing.assert_allclose(J.matrix, right_mult_superop(X).matrix, atol=1e-10)

    J = build_Jf(MonotoneFunction.power(0.5), np.diag([1.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(np.linalg.eigvalsh(J.matrix), [1, 1, 2, 2], atol=1e-12)

    f = MonotoneFunction.loewner_atom(0.5, 2.0, 0.3)
    J = build_Jf(f, np.eye(3), np.eye(3))
    np.testing.assert_allclose(J.matrix, float(f(1.0)) * np.eye(9), atol=1e-12)


def test_build_jf_rejects_non_psd():
    with pytest.raises(NotPSDError):
        build_Jf(MonotoneFunction.identity(), -np.eye(2), np.eye(2))


@pytest.mark.parametrize("f", FUNCTIONS, ids=str)
@pytest.mark.parametrize("seed", range(5))
def test_build_jf_matches_closed_form(f, seed):
    rng = rng_for(seed, "jf-closed", str(f))
    X = random_psd(3, rng, rank=2 if seed % 2 else None)
    Y = random_psd(3, rng, rank=2 if seed % 3 == 0 else None)
    J = build_Jf(f, X, Y).matrix
    assert np.linalg.eigvalsh(0.5 * (J + J.conj().T))[0] >= -1e-10 * (1 + np.abs(J).max())
    # independent assembly from the operator action on |y_i><x_j|
    lam, Vx = hermitian_eig(X)
    mu, Vy = hermitian_eig(Y)
    c = jf_coefficients(f, lam, mu)
    for j in range(3):
        for i in range(3):
            E = np.outer(Vy[:, i], Vx[:, j].conj())
            out = (J @ vec(E)).reshape(3, 3, order="F")
            assert np.abs(out - c[j, i] * E).max() <= 1e-10 * (1 + np.abs(c).max())
            if lam[j] > 1e-8 and mu[i] > 1e-8:
                assert c[j, i] == pytest.approx(mu[i] * float(f(lam[j] / mu[i])), rel=1e-10)
            else:
                assert c[j, i] == 0.0


@pytest.mark.parametrize("r", [0.25, 0.5, 0.75])
def test_power_family_spectrum(r):
    rng = rng_for(3, "power", r)
    X, Y = random_pd(3, rng), random_pd(3, rng)
    J = build_Jf(MonotoneFunction.power(r), X, Y).matrix
    lam, mu = np.linalg.eigvalsh(X), np.linalg.eigvalsh(Y)
    expected = np.sort(np.exp((1 - r) * np.log(mu)[None, :] + r * np.log(lam)[:, None]).ravel())
    np.testing.assert_allclose(np.linalg.eigvalsh(J), expected, rtol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_loewner_atom_additivity(seed):
    rng = rng_for(seed, "additivity")
    X, Y = random_pd(3, rng), random_pd(3, rng)
    beta, gamma, t = rng.uniform(0, 2, size=3)
    J = build_Jf(MonotoneFunction.loewner_atom(beta, gamma, t), X, Y).matrix
    parts = (
        beta * left_mult_superop(Y).matrix
        + gamma * right_mult_superop(X).matrix
        + build_Jf(MonotoneFunction.loewner_atom(0, 0, t), X, Y).matrix
    )
    np.testing.assert_allclose(J, parts, atol=1e-10 * (1 + np.abs(J).max()))


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_cauchy_atom_inverse_identity(t):
    rng = rng_for(4, "key2", t)
    X, Y = random_pd(3, rng), random_pd(3, rng)
    Jp = jf_pinv(build_Jf(MonotoneFunction.loewner_atom(0, 0, t), X, Y)).matrix
    expected = t * right_mult_superop(np.linalg.inv(X)).matrix + left_mult_superop(np.linalg.inv(Y)).matrix
    np.testing.assert_allclose(Jp, expected, atol=1e-9 * (1 + np.abs(expected).max()))


def test_jf_pinv_examples():
    J = build_Jf(MonotoneFunction.identity(), np.eye(2), np.eye(2))
    np.testing.assert_allclose(jf_pinv(J).matrix, np.eye(4), atol=1e-12)
    J = build_Jf(MonotoneFunction.power(0.5), np.diag([1.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(np.linalg.eigvalsh(jf_pinv(J).matrix), [0.5, 0.5, 1, 1], atol=1e-12)
    rng = rng_for(5, "jjj")
    for s in range(50):
        f = FUNCTIONS[s % len(FUNCTIONS)]
        J = build_Jf(f, random_psd(3, rng, rank=1 + s % 3), random_psd(3, rng, rank=1 + (s // 3) % 3))
        M = J.matrix
        assert np.abs(M @ jf_pinv(J).matrix @ M - M).max() <= 1e-10 * (1 + np.abs(M).max()) ** 3


def test_jf_degenerate_y_continuity_on_support():
    rng = np.random.default_rng(6)
    X = random_pd(3, rng)
    U = haar_unitary(3, rng)
    Y = U @ np.diag([2.0, 1.0, 1e-12]) @ U.conj().T
    J = build_Jf(MonotoneFunction.identity(), X, Y).matrix
    P = range_projector(Y)
    on_support = right_mult_superop(X).matrix @ left_mult_superop(P).matrix
    assert np.abs(J - on_support).max() <= 1e-6


def test_hp_requires_positive_definite():
    with pytest.raises(ValueError):
        check_hp_b(identity_map(2), MonotoneFunction.identity(), np.diag([1.0, 0.0]), np.eye(2))
    with pytest.raises(ValueError):
        check_hp_a(identity_map(2), MonotoneFunction.identity(), np.eye(2), np.diag([1.0, 0.0]))


@pytest.mark.parametrize("f", FUNCTIONS, ids=str)
def test_hp_unitary_conjugation_is_equality(f):
    rng = rng_for(7, "unitary-hp", str(f))
    phi = unitary_conjugation_map(haar_unitary(3, rng))
    X, Y = random_pd(3, rng), random_pd(3, rng)
    Phi = phi.superop
    lhs = Phi.conj().T @ build_Jf(f, X, Y).matrix @ Phi
    rhs = build_Jf(f, phi.adjoint_apply(X), phi.adjoint_apply(Y)).matrix
    assert np.abs(rhs - lhs).max() <= 1e-9 * (1 + np.abs(rhs).max())
    assert abs(check_hp_b(phi, f, X, Y).value) <= 1e-9 * (1 + np.abs(rhs).max())
    assert abs(check_hp_a(phi, f, X, Y).value) <= 1e-9 * (1 + np.abs(rhs).max())


def test_hp_identity_map_zero_difference():
    rng = np.random.default_rng(8)
    X, Y = random_pd(2, rng), random_pd(2, rng)
    for f in FUNCTIONS:
        eq = check_equivalence_ab(identity_map(2), f, X, Y)
        assert eq.agree and eq.a.status is Status.PROVEN_PASS
        assert abs(eq.a.value) <= 1e-9 and abs(eq.b.value) <= 1e-9


def test_hp_depolarizing_power_half_100_instances():
    phi = depolarizing_map(3)
    f = MonotoneFunction.power(0.5)
    rng = rng_for(9, "hp-dep")
    for _ in range(100):
        X, Y = random_pd(3, rng), random_pd(3, rng)
        eq = check_equivalence_ab(phi, f, X, Y)
        assert eq.agree and eq.b.status is Status.PROVEN_PASS


def test_hp_choi_tensor_cauchy_atom():
    phi = choi_tensor_unital()
    f = MonotoneFunction.loewner_atom(0, 0, 1)
    rng = rng_for(10, "hp-choi-tensor")
    for _ in range(10):
        X, Y = random_pd(8, rng), random_pd(8, rng)
        assert check_hp_b(phi, f, X, Y).status is Status.PROVEN_PASS
        assert check_hp_a(phi, f, X, Y).status is Status.PROVEN_PASS


def test_hp_transpose_identity_f_violations_agree():
    phi = transpose_map(2)
    f = MonotoneFunction.identity()
    rng = rng_for(11, "hp-transpose")
    found = 0
    for _ in range(50):
        X, Y = random_pd(2, rng), random_pd(2, rng)
        eq = check_equivalence_ab(phi, f, X, Y)
        assert eq.agree
        found += eq.a.violated
        # at f = identity, (a) is the identity monotonicity block test
        assert identity_mon_block(phi, X).violated == eq.a.violated
    assert found > 0


def test_equivalence_requires_definite_images():
    # phi(A) = E_11 A E_11 has phi*(X) = X_11 E_11, which is singular
    phi = from_kraus([basis_matrix(0, 0, 2)])
    with pytest.raises(ValueError):
        check_equivalence_ab(phi, MonotoneFunction.identity(), np.eye(2), np.eye(2))


def test_ph7_examples():
    rng = rng_for(12, "ph7")
    v = check_ph7(identity_map(2), random_psd(2, rng), random_psd(2, rng))
    assert v.status is Status.PROVEN_PASS and abs(v.value) <= 1e-12
    for _ in range(20):
        assert not check_ph7(depolarizing_map(3), random_psd(3, rng), random_psd(3, rng)).violated
    hits = [check_ph7(transpose_map(2), random_psd(2, rng), random_psd(2, rng)).violated for _ in range(20)]
    assert any(hits)


def test_lieb_identity_map_zero_gap():
    rng = np.random.default_rng(13)
    X, Y, K = random_pd(3, rng), random_pd(3, rng), ginibre(3, 3, rng)
    for r in (0.25, 0.5, 0.75):
        assert abs(check_L1(identity_map(3), X, Y, K, r).gap) <= 1e-10
        assert abs(check_L2(identity_map(3), X, Y, K, r).gap) <= 1e-10


@pytest.mark.parametrize("r", [0.25, 0.5, 0.75])
def test_lieb_gaps_on_schwarz_maps(r):
    rng = rng_for(14, "lieb", r)
    for phi in (depolarizing_map(3), choi_tensor_unital()):
        m, n = phi.m, phi.n
        for _ in range(200 if phi.n == 3 else 40):
            X, Y = random_pd(m, rng), random_pd(m, rng)
            g1 = check_L1(phi, X, Y, ginibre(n, n, rng), r)
            g2 = check_L2(phi, X, Y, ginibre(m, m, rng), r)
            assert g1.gap >= -1e-9 * g1.scale
            assert g2.gap >= -1e-9 * g2.scale


def test_lieb_rejects_bad_exponent():
    with pytest.raises(ValueError):
        check_L1(identity_map(2), np.eye(2), np.eye(2), np.eye(2), 1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.05, 0.95))
def test_hp_b_holds_for_random_unital_cp(seed, r):
    rng = np.random.default_rng(seed)
    phi = normalize_to_unital(random_cp_map(2, 2, 2, seed=seed % 1000))
    X, Y = random_pd(2, rng), random_pd(2, rng)
    v = check_hp_b(phi, MonotoneFunction.power(r), X, Y)
    assert not v.violated
