"""Superoperators on the Hilbert-Schmidt space and monotonicity inequalities.

Vectorization stacks columns, so ``vec(Y A X) = (X^T ⊗ Y) vec(A)``. Left
multiplication ``L_Y`` is ``1 ⊗ Y`` and right multiplication ``R_X`` is
``X^T ⊗ 1``.

``J_f(X, Y) = f(R_X L_Y^+) L_Y`` is assembled from the joint eigenbasis
``|y_i><x_j|`` of ``L_Y`` and ``R_X``, never by evaluating ``f`` on a
matrix, so kernels follow the ``f(0) = 0`` convention exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maps import MapRep
from .numerics import (
    DEFAULT_TOL,
    DimensionError,
    NotPSDError,
    ToleranceConfig,
    as_square,
    hermitian_eig,
    is_pd,
    min_eig,
    opnorm,
    pinv_psd,
    psd_power,
    psd_threshold,
)
from .verdicts import CheckVerdict, Status


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """A linear operator ``M_in -> M_out`` as a matrix on column-stacked vectors.

    ``spectrum`` holds ``(vectors, values)`` when the operator was assembled
    spectrally, so that its pseudoinverse can reuse the exact eigenbasis.
    """

    matrix: np.ndarray
    dim_out: int
    dim_in: int
    spectrum: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.dim_out**2, self.dim_in**2):
            raise DimensionError(
                f"superoperator matrix has shape {self.matrix.shape}, "
                f"expected {(self.dim_out**2, self.dim_in**2)}"
            )

    @property
    def dim(self) -> int:
        return self.dim_out

    def __call__(self, A) -> np.ndarray:
        A = np.asarray(A)
        v = self.matrix @ A.reshape(-1, order="F")
        return v.reshape(self.dim_out, self.dim_out, order="F")

    def adjoint(self) -> "SuperOperator":
        return SuperOperator(self.matrix.conj().T, self.dim_in, self.dim_out)


def left_mult_superop(Y) -> SuperOperator:
    """``L_Y: A -> Y A``."""
    Y = as_square(Y, "Y")
    m = Y.shape[0]
    return SuperOperator(np.kron(np.eye(m), Y), m, m)


def right_mult_superop(X) -> SuperOperator:
    """``R_X: A -> A X``."""
    X = as_square(X, "X")
    m = X.shape[0]
    return SuperOperator(np.kron(X.T, np.eye(m)), m, m)


def superop_of_map(phi: MapRep) -> SuperOperator:
    return SuperOperator(np.array(phi.superop), phi.m, phi.n)


# -- operator monotone functions ---------------------------------------------


@dataclass(frozen=True)
class MonotoneFunction:
    """An operator monotone ``f: (0, inf) -> (0, inf)`` with ``f(0) = 0``.

    Variants: ``power`` (``x**r``, ``0 < r < 1``), ``identity``, and
    ``loewner_atom`` (``beta + gamma*x + x/(t + x)``), the family to which
    the general case reduces through Loewner's integral representation.
    """

    variant: str
    params: tuple = ()

    def __post_init__(self):
        if self.variant == "power":
            (r,) = self.params
            if not 0 < r < 1:
                raise ValueError("power exponent must lie in (0, 1)")
        elif self.variant == "identity":
            if self.params:
                raise ValueError("identity takes no parameters")
        elif self.variant == "loewner_atom":
            if len(self.params) != 3 or min(self.params) < 0:
                raise ValueError("loewner_atom needs beta, gamma, t >= 0")
        else:
            raise ValueError(f"unknown monotone function variant {self.variant!r}")

    @classmethod
    def power(cls, r: float) -> "MonotoneFunction":
        return cls("power", (float(r),))

    @classmethod
    def identity(cls) -> "MonotoneFunction":
        return cls("identity")

    @classmethod
    def loewner_atom(cls, beta: float, gamma: float, t: float) -> "MonotoneFunction":
        return cls("loewner_atom", (float(beta), float(gamma), float(t)))

    def __call__(self, x):
        """Evaluate on strictly positive arguments."""
        x = np.asarray(x, dtype=float)
        if self.variant == "power":
            return x ** self.params[0]
        if self.variant == "identity":
            return x.copy()
        beta, gamma, t = self.params
        return beta + gamma * x + x / (t + x)

    def to_json(self) -> dict:
        names = {"power": ("r",), "identity": (), "loewner_atom": ("beta", "gamma", "t")}
        return {"variant": self.variant, "params": dict(zip(names[self.variant], self.params))}

    @classmethod
    def from_json(cls, data: dict) -> "MonotoneFunction":
        variant = data["variant"]
        p = data.get("params", {})
        if variant == "power":
            return cls.power(p["r"])
        if variant == "identity":
            return cls.identity()
        if variant == "loewner_atom":
            return cls.loewner_atom(p["beta"], p["gamma"], p["t"])
        raise ValueError(f"unknown monotone function variant {variant!r}")

    @classmethod
    def parse(cls, spec: str) -> "MonotoneFunction":
        """Parse ``power:0.5``, ``identity`` or ``loewner:1,1,1``."""
        name, _, args = spec.partition(":")
        try:
            values = [float(a) for a in args.split(",")] if args else []
            if name == "power":
                return cls.power(*values)
            if name == "identity" and not values:
                return cls.identity()
            if name in ("loewner", "loewner_atom"):
                return cls.loewner_atom(*values)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad monotone function spec {spec!r}: {exc}") from exc
        raise ValueError(f"bad monotone function spec {spec!r}")

    def __str__(self) -> str:
        if not self.params:
            return self.variant
        return f"{self.variant}(" + ",".join(f"{p:g}" for p in self.params) + ")"


# -- J_f ---------------------------------------------------------------------


def jf_coefficients(f: MonotoneFunction, lam, mu, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues ``c[j, i]`` of ``J_f`` on ``|y_i><x_j|``.

    ``lam`` are the eigenvalues of ``X``, ``mu`` those of ``Y``.
    """
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    lam_on = lam > tol.kernel_tol * (1 + np.abs(lam).max(initial=0.0))
    mu_on = mu > tol.kernel_tol * (1 + np.abs(mu).max(initial=0.0))
    c = np.zeros((lam.size, mu.size))
    jj, ii = np.nonzero(lam_on[:, None] & mu_on[None, :])
    c[jj, ii] = mu[ii] * f(lam[jj] / mu[ii])
    return c


def build_Jf(f: MonotoneFunction, X, Y, tol: ToleranceConfig = DEFAULT_TOL) -> SuperOperator:
    X = as_square(X, "X")
    Y = as_square(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError("X and Y must have the same shape")
    m = X.shape[0]
    lam, Vx = hermitian_eig(X, tol)
    mu, Vy = hermitian_eig(Y, tol)
    for name, w, M in (("X", lam, X), ("Y", mu, Y)):
        if w[-1] < -psd_threshold(M, tol):
            raise NotPSDError(f"{name} is not positive semidefinite")
    c = jf_coefficients(f, lam, mu, tol).reshape(-1)
    # column j*m + i is vec(|y_i><x_j|)
    W = np.kron(Vx.conj(), Vy)
    J = (W * c) @ W.conj().T
    return SuperOperator(J, m, m, spectrum=(W, c))


def jf_pinv(J: SuperOperator, tol: ToleranceConfig = DEFAULT_TOL) -> SuperOperator:
    """Moore-Penrose pseudoinverse of a PSD superoperator."""
    if J.spectrum is None:
        return SuperOperator(pinv_psd(J.matrix, tol), J.dim_in, J.dim_out)
    W, c = J.spectrum
    if c.size and c.min() < -tol.psd_tol * (1 + np.abs(c).max()):
        raise NotPSDError("J has a negative eigenvalue")
    keep = c > tol.kernel_tol * (1 + np.abs(c).max(initial=0.0))
    inv = np.zeros_like(c)
    inv[keep] = 1.0 / c[keep]
    return SuperOperator((W * inv) @ W.conj().T, J.dim_in, J.dim_out, spectrum=(W, inv))


# -- monotonicity checks -------------------------------------------------------


def _require_pd(tol, **mats):
    for name, M in mats.items():
        if not is_pd(M, tol):
            raise ValueError(f"{name} must be positive definite")


def _psd_verdict(check, D, scale, tol, extra=None) -> CheckVerdict:
    lam, vec_ = min_eig(D, tol)
    detail = {"scale": scale, **(extra or {})}
    if lam < -tol.psd_tol * scale:
        cert = {"kind": "psd_vector", "vector": vec_, "value": lam}
        return CheckVerdict(check, Status.PROVEN_VIOLATION, lam, cert, detail)
    return CheckVerdict(check, Status.PROVEN_PASS, lam, None, detail)


def check_hp_b(phi: MapRep, f: MonotoneFunction, X, Y, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    """``phi* J_f(X, Y) phi <= J_f(phi*(X), phi*(Y))`` at one ``(X, Y)``."""
    _require_pd(tol, X=X, Y=Y)
    Phi = phi.superop
    rhs = build_Jf(f, phi.adjoint_apply(X), phi.adjoint_apply(Y), tol).matrix
    lhs = Phi.conj().T @ build_Jf(f, X, Y, tol).matrix @ Phi
    scale = 1 + max(opnorm(lhs), opnorm(rhs))
    return _psd_verdict("hp_b", rhs - lhs, scale, tol, {"f": str(f)})


def check_hp_a(phi: MapRep, f: MonotoneFunction, X, Y, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    """``phi J_f(phi*(X), phi*(Y))^+ phi* <= J_f(X, Y)^{-1}`` at one ``(X, Y)``."""
    _require_pd(tol, X=X, Y=Y)
    Phi = phi.superop
    inner = jf_pinv(build_Jf(f, phi.adjoint_apply(X), phi.adjoint_apply(Y), tol), tol).matrix
    lhs = Phi @ inner @ Phi.conj().T
    rhs = jf_pinv(build_Jf(f, X, Y, tol), tol).matrix
    scale = 1 + max(opnorm(lhs), opnorm(rhs))
    return _psd_verdict("hp_a", rhs - lhs, scale, tol, {"f": str(f)})


@dataclass(frozen=True)
class EquivalenceReport:
    a: CheckVerdict
    b: CheckVerdict

    @property
    def agree(self) -> bool:
        return self.a.status == self.b.status

    def to_json(self) -> dict:
        return {"agree": self.agree, "hp_a": self.a.to_json(), "hp_b": self.b.to_json()}


def check_equivalence_ab(
    phi: MapRep, f: MonotoneFunction, X, Y, tol: ToleranceConfig = DEFAULT_TOL
) -> EquivalenceReport:
    """Run (a) and (b) on the same instance; they must agree when all four arguments are definite."""
    pX, pY = phi.adjoint_apply(X), phi.adjoint_apply(Y)
    _require_pd(tol, X=X, Y=Y, **{"phi*(X)": pX, "phi*(Y)": pY})
    return EquivalenceReport(check_hp_a(phi, f, X, Y, tol), check_hp_b(phi, f, X, Y, tol))


def check_ph7(phi: MapRep, X, Y, tol: ToleranceConfig = DEFAULT_TOL) -> CheckVerdict:
    """``phi* L_Y phi <= L_{phi*(Y)}`` and ``phi* R_X phi <= R_{phi*(X)}``."""
    Phi = phi.superop
    DL = left_mult_superop(phi.adjoint_apply(Y)).matrix - Phi.conj().T @ left_mult_superop(Y).matrix @ Phi
    DR = right_mult_superop(phi.adjoint_apply(X)).matrix - Phi.conj().T @ right_mult_superop(X).matrix @ Phi
    vL = _psd_verdict("ph7", DL, 1 + opnorm(DL), tol, {"side": "left"})
    vR = _psd_verdict("ph7", DR, 1 + opnorm(DR), tol, {"side": "right"})
    detail = {"left_min_eig": vL.value, "right_min_eig": vR.value}
    violated = [v for v in (vL, vR) if v.violated]
    if violated:
        w = min(violated, key=lambda v: v.value)
        cert = dict(w.certificate, side=w.detail["side"])
        return CheckVerdict("ph7", Status.PROVEN_VIOLATION, w.value, cert, detail)
    return CheckVerdict("ph7", Status.PROVEN_PASS, min(vL.value, vR.value), None, detail)


@dataclass(frozen=True)
class GapReport:
    """Signed gap ``larger side - smaller side`` of a trace inequality."""

    gap: float
    larger: float
    smaller: float

    @property
    def scale(self) -> float:
        return 1.0 + abs(self.larger) + abs(self.smaller)

    def to_json(self) -> dict:
        return {"gap": self.gap, "larger": self.larger, "smaller": self.smaller, "scale": self.scale}


def _check_r(r):
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")


def check_L1(phi: MapRep, X, Y, K, r: float, tol: ToleranceConfig = DEFAULT_TOL) -> GapReport:
    """``Tr[phi(K)* Y^{1-r} phi(K) X^r] <= Tr[K* phi*(Y)^{1-r} K phi*(X)^r]``, ``K`` in ``M_n``."""
    _check_r(r)
    _require_pd(tol, X=X, Y=Y)
    K = as_square(K, "K")
    pX, pY = phi.adjoint_apply(X), phi.adjoint_apply(Y)
    larger = np.trace(K.conj().T @ psd_power(pY, 1 - r, tol) @ K @ psd_power(pX, r, tol)).real
    FK = phi(K)
    smaller = np.trace(FK.conj().T @ psd_power(Y, 1 - r, tol) @ FK @ psd_power(X, r, tol)).real
    return GapReport(float(larger - smaller), float(larger), float(smaller))


def check_L2(phi: MapRep, X, Y, K, r: float, tol: ToleranceConfig = DEFAULT_TOL) -> GapReport:
    """``Tr[phi*(K)* (phi*(Y)^+)^{1-r} phi*(K) (phi*(X)^+)^r] <= Tr[K* Y^{r-1} K X^{-r}]``, ``K`` in ``M_m``."""
    _check_r(r)
    _require_pd(tol, X=X, Y=Y)
    K = as_square(K, "K")
    larger = np.trace(K.conj().T @ psd_power(Y, r - 1, tol) @ K @ psd_power(X, -r, tol)).real
    pX, pY, pK = phi.adjoint_apply(X), phi.adjoint_apply(Y), phi.adjoint_apply(K)
    smaller = np.trace(pK.conj().T @ psd_power(pY, r - 1, tol) @ pK @ psd_power(pX, -r, tol)).real
    return GapReport(float(larger - smaller), float(larger), float(smaller))
