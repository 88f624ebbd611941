"""Positivity classes of linear maps, with certificates.

Complete positivity is decided exactly from the Choi matrix. k-positivity
and the generalized Schwarz property are searched by local optimization:
a violation found that way comes with a certificate that re-verifies by a
single eigenvalue evaluation, but finding nothing proves nothing and is
reported as ``no_violation_found``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import ginibre, random_pd, rng_for, unit_vector
from .maps import MapRep
from .monotone import right_mult_superop
from .numerics import (
    DEFAULT_TOL,
    DimensionError,
    KernelConditionError,
    ToleranceConfig,
    as_square,
    hermitize,
    is_pd,
    kernel_included,
    min_eig,
    opnorm,
    outer,
    pinv_psd,
    psd_threshold,
)
from .verdicts import CheckVerdict, Status


@dataclass(frozen=True, eq=False)
class SchwarzWitness:
    """``(A, u, v, lam)`` such that the generalized Schwarz block at ``A`` has
    eigenvalue ``-lam < 0`` with unit eigenvector ``(u, v)``."""

    A: np.ndarray
    u: np.ndarray
    v: np.ndarray
    lam: float

    def residual(self, phi: MapRep) -> float:
        B = schwarz_block(phi, self.A)
        w = np.concatenate([self.u, self.v])
        return float(np.linalg.norm(B @ w + self.lam * w))

    def verify(self, phi: MapRep, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        B = schwarz_block(phi, self.A)
        w = np.concatenate([self.u, self.v])
        if abs(np.linalg.norm(w) - 1) > 1e-8:
            return False
        if not self.lam > psd_threshold(B, tol):
            return False
        return self.residual(phi) <= 1e-8 * (1 + opnorm(B))

    def to_json(self) -> dict:
        return {"kind": "schwarz", "A": self.A, "u": self.u, "v": self.v, "lambda": self.lam}


# -- complete positivity -------------------------------------------------------


def check_cp(phi: MapRep, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    lam, w = min_eig(phi.choi, tol)
    detail = {"min_choi_eigenvalue": lam}
    if lam < -psd_threshold(phi.choi, tol):
        cert = {"kind": "choi_vector", "vector": w, "value": lam}
        return CheckVerdict("cp", Status.PROVEN_VIOLATION, lam, cert, detail)
    return CheckVerdict("cp", Status.PROVEN_PASS, lam, None, detail)


# -- generalized Schwarz -------------------------------------------------------


def schwarz_block(phi: MapRep, K) -> np.ndarray:
    """``[[phi(1), phi(K)], [phi(K)*, phi(K* K)]]``."""
    K = as_square(K, "K")
    if K.shape[0] != phi.n:
        raise DimensionError(f"K must be {phi.n}x{phi.n}")
    FK = phi(K)
    B = np.block([[phi.unit_image, FK], [FK.conj().T, phi(K.conj().T @ K)]])
    return 0.5 * (B + B.conj().T)


def _softmin_and_grad(phi: MapRep, K, beta, scale):
    """Log-sum-exp smoothed smallest eigenvalue of the Schwarz block and its gradient in ``K``."""
    B = schwarz_block(phi, K)
    w, V = np.linalg.eigh(B)
    z = -beta * (w - w[0]) / scale
    p = np.exp(z)
    total = p.sum()
    p /= total
    value = w[0] - scale / beta * np.log(total)
    m = phi.m
    U, W = V[:m], V[m:]
    # d lambda_i / dK = 2 (phi*(u_i v_i*) + K phi*(v_i v_i*)) under Re Tr[A* B]
    Muv = (U * p) @ W.conj().T
    Mvv = (W * p) @ W.conj().T
    grad = 2 * (phi.adjoint_apply(Muv) + K @ phi.adjoint_apply(Mvv))
    return value, grad


def _minimize_block_eig(phi: MapRep, K0, betas, iters, scale):
    K = K0 / np.linalg.norm(K0)
    step = 0.25 / scale
    for beta in betas:
        f, g = _softmin_and_grad(phi, K, beta, scale)
        for _ in range(iters):
            g = g - np.vdot(K, g).real * K
            gnorm2 = np.vdot(g, g).real
            if gnorm2 <= (1e-12 * scale) ** 2:
                break
            for _ in range(40):
                Kn = K - step * g
                Kn /= np.linalg.norm(Kn)
                fn, gn = _softmin_and_grad(phi, Kn, beta, scale)
                if fn <= f - 1e-4 * step * gnorm2:
                    break
                step *= 0.5
            else:
                break
            K, f, g = Kn, fn, gn
            step *= 2.0
    return K


def _schwarz_scale(phi: MapRep) -> float:
    return 1.0 + opnorm(phi.choi)


def check_generalized_schwarz(
    phi: MapRep,
    restarts: int = 20,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
    iters: int = 30,
) -> CheckVerdict:
    """Search for ``K`` (unit Frobenius norm) making the Schwarz block indefinite.

    Both off-diagonal and lower-right corners scale with ``K`` such that
    ``diag(1, t) B(K) diag(1, t) = B(t K)``, so the unit sphere loses no
    generality. Each restart runs projected gradient descent on the
    log-sum-exp smoothed smallest eigenvalue, annealing the inverse
    temperature from 1e2 to 1e6.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    scale = _schwarz_scale(phi)
    betas = [1e2, 1e3, 1e4, 1e5, 1e6]
    best = None
    values = []
    for r in range(restarts):
        rng = rng_for(seed, "gschwarz", r)
        K = _minimize_block_eig(phi, ginibre(phi.n, phi.n, rng), betas, iters, scale)
        lam, w = min_eig(schwarz_block(phi, K), tol)
        values.append(lam)
        if best is None or lam < best[0]:
            best = (lam, K, w)
    lam, K, w = best
    B = schwarz_block(phi, K)
    detail = {
        "best_restart": int(np.argmin(values)),
        "median_value": float(np.median(values)),
        "scale": scale,
    }
    if lam < -psd_threshold(B, tol):
        witness = SchwarzWitness(K, w[: phi.m], w[phi.m :], -lam)
        if witness.verify(phi, tol):
            return CheckVerdict(
                "gschwarz", Status.PROVEN_VIOLATION, lam, witness.to_json(), detail, restarts, seed
            )
    return CheckVerdict("gschwarz", Status.NO_VIOLATION_FOUND, lam, None, detail, restarts, seed)


def witness_from_verdict(verdict: CheckVerdict) -> SchwarzWitness:
    cert = verdict.certificate
    if not verdict.violated or cert is None or cert.get("kind") != "schwarz":
        raise ValueError("verdict does not carry a Schwarz witness")
    return SchwarzWitness(cert["A"], cert["u"], cert["v"], cert["lambda"])


def search_schwarz_block(
    phi: MapRep, samples: int = 100, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL
) -> CheckVerdict:
    """Evaluate the Schwarz block at random ``K`` (no optimization)."""
    best = None
    for s in range(samples):
        K = ginibre(phi.n, phi.n, rng_for(seed, "schwarz-block", s))
        K /= np.linalg.norm(K)
        lam, w = min_eig(schwarz_block(phi, K), tol)
        if best is None or lam < best[0]:
            best = (lam, K, w)
    lam, K, w = best
    if lam < -psd_threshold(schwarz_block(phi, K), tol):
        witness = SchwarzWitness(K, w[: phi.m], w[phi.m :], -lam)
        return CheckVerdict(
            "schwarz-block", Status.PROVEN_VIOLATION, lam, witness.to_json(), {}, samples, seed
        )
    return CheckVerdict("schwarz-block", Status.NO_VIOLATION_FOUND, lam, None, {}, samples, seed)


# -- 2-positivity operator inequality ------------------------------------------


def check_operator_2pos(phi: MapRep, K, X, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    """``phi(K* X^+ K) >= phi(K)* phi(X)^+ phi(K)`` at one pair with ``ker X ⊆ ker K*``.

    The input block ``[[X, K], [K*, K* X^+ K]]`` is PSD, so a violation (or
    a failure of ``ker phi(X) ⊆ ker phi(K)*``) certifies that ``id_2 ⊗ phi``
    is not positive.
    """
    K = as_square(K, "K")
    X = hermitize(X, tol)
    if K.shape != X.shape or K.shape[0] != phi.n:
        raise DimensionError(f"K and X must be {phi.n}x{phi.n}")
    if not kernel_included(X, K.conj().T, tol):
        raise KernelConditionError("ker(X) is not contained in ker(K*)")
    Q = K.conj().T @ pinv_psd(X, tol) @ K
    PX, PK, PQ = phi(X), phi(K), phi(Q)
    transport = kernel_included(PX, PK.conj().T, tol)
    D = PQ - PK.conj().T @ pinv_psd(PX, tol) @ PK
    lam, z = min_eig(D, tol)
    detail = {"transport_ok": transport, "schur_min_eig": lam}
    if not transport:
        out = np.block([[PX, PK], [PK.conj().T, PQ]])
        blam, bz = min_eig(out, tol)
        cert = {"kind": "output_block", "K": K, "X": X, "vector": bz, "value": blam}
        return CheckVerdict("operator_2pos", Status.PROVEN_VIOLATION, blam, cert, detail)
    if lam < -psd_threshold(D, tol):
        cert = {"kind": "schur_vector", "K": K, "X": X, "vector": z, "value": lam}
        return CheckVerdict("operator_2pos", Status.PROVEN_VIOLATION, lam, cert, detail)
    return CheckVerdict("operator_2pos", Status.PROVEN_PASS, lam, None, detail)


def pair_from_schmidt(a: np.ndarray, b: np.ndarray):
    """Turn a rank-2 Choi witness ``w = a_1⊗b_1 + a_2⊗b_2`` into ``(K, X)``.

    With ``x_p = conj(a_p)`` the input block ``[[x_1 x_1*, x_1 x_2*], ...]``
    equals ``[[X, K], [K*, K* X^+ K]]`` for ``X = |x_1><x_1|`` and
    ``K = |x_1><x_2|``; the output block evaluated at ``(b_1, b_2)`` is the
    Choi expectation value of ``w``.
    """
    x1, x2 = a[:, 0].conj(), a[:, 1].conj()
    return outer(x1, x2), outer(x1, x1)


def search_operator_2pos(
    phi: MapRep,
    samples: int = 20,
    restarts: int = 20,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CheckVerdict:
    """Seeded search for a pair violating the 2-positivity operator inequality.

    Random pairs with ``X > 0`` are tried first, then pairs derived from
    Schmidt-rank-2 seesaw minimizers of the Choi form.
    """
    n = phi.n
    best = None
    for s in range(samples):
        rng = rng_for(seed, "2pos-random", s)
        v = check_operator_2pos(phi, ginibre(n, n, rng), random_pd(n, rng), tol)
        if v.violated:
            return v
        best = v if best is None or v.value < best.value else best
    if n >= 2 and phi.m >= 2:
        for r in range(restarts):
            rng = rng_for(seed, "2pos-seesaw", r)
            value, _, a, b = _seesaw_restart(phi.choi, n, phi.m, 2, rng)
            if np.linalg.norm(a[:, 0]) < 1e-12:
                continue
            K, X = pair_from_schmidt(a, b)
            v = check_operator_2pos(phi, K, X, tol)
            if v.violated:
                return v
    return CheckVerdict("operator_2pos", Status.NO_VIOLATION_FOUND, best.value, None, {}, restarts, seed)


# -- k-positivity ---------------------------------------------------------------


def _seesaw_restart(C, n, m, k, rng, max_iter=500, tol=1e-12):
    """Minimize ``<w|C|w>`` over unit ``w = sum_p a_p ⊗ b_p`` of Schmidt rank <= k."""
    k = min(k, n, m)
    A = np.stack([unit_vector(n, rng) for _ in range(k)], axis=1)
    B = np.stack([unit_vector(m, rng) for _ in range(k)], axis=1)
    In, Im = np.eye(n), np.eye(m)
    prev = np.inf
    for _ in range(max_iter):
        Qb, _ = np.linalg.qr(B)
        M = np.kron(In, Qb)
        w_, V = np.linalg.eigh(M.conj().T @ C @ M)
        A = V[:, 0].reshape(n, k)
        B = Qb
        Qa, _ = np.linalg.qr(A)
        M = np.kron(Qa, Im)
        w_, V = np.linalg.eigh(M.conj().T @ C @ M)
        A = Qa
        B = V[:, 0].reshape(k, m).T
        value = w_[0]
        if prev - value < tol:
            break
        prev = value
    w = (np.kron(A, Im) @ B.T.reshape(-1))
    w /= np.linalg.norm(w)
    return float(np.vdot(w, C @ w).real), w, A, B


def check_kpositive_seesaw(
    phi: MapRep, k: int, restarts: int = 20, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL
) -> CheckVerdict:
    """Seesaw search for a Schmidt-rank-``k`` vector with negative Choi expectation.

    ``phi`` is k-positive iff ``<w|C|w> >= 0`` for every such ``w``. The
    search is one-sided: it never returns ``proven_pass``.
    """
    if not 1 <= k <= phi.n:
        raise ValueError(f"k must lie in [1, {phi.n}]")
    best = None
    values = []
    for r in range(restarts):
        value, w, A, B = _seesaw_restart(phi.choi, phi.n, phi.m, k, rng_for(seed, "kpos", k, r))
        values.append(value)
        if best is None or value < best[0]:
            best = (value, w, A, B)
    value, w, A, B = best
    detail = {"k": k, "best_restart": int(np.argmin(values)), "median_value": float(np.median(values))}
    if value < -psd_threshold(phi.choi, tol):
        cert = {"kind": "choi_vector", "vector": w, "value": value, "schmidt_a": A, "schmidt_b": B}
        return CheckVerdict(f"kpos={k}", Status.PROVEN_VIOLATION, value, cert, detail, restarts, seed)
    return CheckVerdict(f"kpos={k}", Status.NO_VIOLATION_FOUND, value, None, detail, restarts, seed)


# -- identity monotonicity block -------------------------------------------------


def identity_mon_block(phi: MapRep, X, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    """PSD test of ``[[R_{phi*(X)}, phi*], [phi, R_X^{-1}]]`` for ``X > 0``.

    Positive for every ``X > 0`` iff ``phi(K* K) >= phi(K)* phi(K)`` for all ``K``.
    """
    X = hermitize(X, tol)
    if X.shape[0] != phi.m or not is_pd(X, tol):
        raise ValueError(f"X must be a positive definite {phi.m}x{phi.m} matrix")
    Phi = phi.superop
    RpX = right_mult_superop(phi.adjoint_apply(X)).matrix
    RXinv = right_mult_superop(np.linalg.inv(X)).matrix
    block = np.block([[RpX, Phi.conj().T], [Phi, RXinv]])
    lam, w = min_eig(block, tol)
    scale = 1 + opnorm(block)
    detail = {"scale": scale}
    if lam < -tol.psd_tol * scale:
        cert = {"kind": "idmon_vector", "X": X, "vector": w, "value": lam}
        return CheckVerdict("idmon", Status.PROVEN_VIOLATION, lam, cert, detail)
    return CheckVerdict("idmon", Status.PROVEN_PASS, lam, None, detail)


def search_identity_mon(
    phi: MapRep, samples: int = 20, seed: int = 0, tol: ToleranceConfig = DEFAULT_TOL
) -> CheckVerdict:
    best = None
    for s in range(samples):
        v = identity_mon_block(phi, random_pd(phi.m, rng_for(seed, "idmon", s)), tol)
        if v.violated:
            return CheckVerdict("idmon", v.status, v.value, v.certificate, v.detail, samples, seed)
        best = v if best is None or v.value < best.value else best
    return CheckVerdict("idmon", Status.NO_VIOLATION_FOUND, best.value, None, best.detail, samples, seed)


# -- kernel inclusion facts -----------------------------------------------------


@dataclass(frozen=True)
class KernelFacts:
    """Kernel relations for a positive map and a PSD ``X``, for ``R`` and ``L``.

    ``superop_R`` is ``ker(R_X) ⊆ ker(phi*)``, ``matrix_side`` is
    ``ker(X) ⊆ ker(phi(1))``; the two must coincide. When they hold,
    ``transport_R`` (``ker(R_{phi*(X)}) ⊆ ker(phi)``) must hold as well.
    """

    superop_R: bool
    superop_L: bool
    matrix_side: bool
    transport_R: bool | None
    transport_L: bool | None

    @property
    def consistent(self) -> bool:
        if not (self.superop_R == self.superop_L == self.matrix_side):
            return False
        return all(t is not False for t in (self.transport_R, self.transport_L))

    def to_json(self) -> dict:
        return {**self.__dict__, "consistent": self.consistent}


def kernel_inclusion_facts(phi: MapRep, X, tol: ToleranceConfig = DEFAULT_TOL) -> KernelFacts:
    from .monotone import left_mult_superop

    X = hermitize(X, tol)
    Phi = phi.superop
    Phi_adj = Phi.conj().T
    pX = phi.adjoint_apply(X)
    sR = kernel_included(right_mult_superop(X).matrix, Phi_adj, tol)
    sL = kernel_included(left_mult_superop(X).matrix, Phi_adj, tol)
    msd = kernel_included(X, phi.unit_image, tol)
    tR = kernel_included(right_mult_superop(pX).matrix, Phi, tol) if sR else None
    tL = kernel_included(left_mult_superop(pX).matrix, Phi, tol) if sL else None
    return KernelFacts(sR, sL, msd, tR, tL)


# -- certificate re-verification --------------------------------------------------


def reverify(phi: MapRep, verdict: CheckVerdict) -> float:
    """Recompute the eigenvalue quoted by a violation certificate from its data alone."""
    cert = verdict.certificate
    if cert is None:
        raise ValueError("verdict carries no certificate")
    kind = cert["kind"]
    if kind == "choi_vector":
        w = cert["vector"]
        return float(np.vdot(w, phi.choi @ w).real)
    if kind == "schwarz":
        A, u, v = cert["A"], cert["u"], cert["v"]
        w = np.concatenate([u, v])
        return float(np.vdot(w, schwarz_block(phi, A) @ w).real)
    if kind in ("schur_vector", "output_block"):
        K, X, z = cert["K"], cert["X"], cert["vector"]
        Q = K.conj().T @ pinv_psd(X) @ K
        PX, PK, PQ = phi(X), phi(K), phi(Q)
        if kind == "schur_vector":
            M = PQ - PK.conj().T @ pinv_psd(PX) @ PK
        else:
            M = np.block([[PX, PK], [PK.conj().T, PQ]])
        return float(np.vdot(z, M @ z).real)
    if kind == "idmon_vector":
        X, z = cert["X"], cert["vector"]
        Phi = phi.superop
        block = np.block(
            [
                [right_mult_superop(phi.adjoint_apply(X)).matrix, Phi.conj().T],
                [Phi, right_mult_superop(np.linalg.inv(X)).matrix],
            ]
        )
        return float(np.vdot(z, block @ z).real)
    raise ValueError(f"unknown certificate kind {kind!r}")
