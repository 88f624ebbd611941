"""Linear maps ``M_n -> M_m`` represented by their Choi matrices.

Convention: ``C = sum_ij E_ij ⊗ phi(E_ij)``, the first tensor factor carries
the input index. Reshaped to ``(n, m, n, m)`` the entry ``C[i, a, j, b]`` is
``phi(E_ij)[a, b]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .ensembles import ginibre, rng_for
from .numerics import (
    DEFAULT_TOL,
    DimensionError,
    NotPSDError,
    ToleranceConfig,
    as_matrix,
    as_square,
    is_psd,
    psd_function,
)


@dataclass(frozen=True, eq=False)
class MapRep:
    n: int
    m: int
    choi: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DimensionError("map dimensions must be at least 1")
        C = np.array(self.choi, dtype=complex)
        if C.shape != (self.n * self.m, self.n * self.m):
            raise DimensionError(
                f"Choi matrix of a map M_{self.n} -> M_{self.m} must have shape "
                f"{(self.n * self.m,) * 2}, got {C.shape}"
            )
        if not np.all(np.isfinite(C)):
            raise ValueError("Choi matrix has non-finite entries")
        C.setflags(write=False)
        object.__setattr__(self, "choi", C)

    @cached_property
    def choi4(self) -> np.ndarray:
        return self.choi.reshape(self.n, self.m, self.n, self.m)

    @cached_property
    def superop(self) -> np.ndarray:
        """Matrix of the map on column-stacked vectors (shape ``m^2 x n^2``)."""
        S = self.choi4.transpose(3, 1, 2, 0).reshape(self.m * self.m, self.n * self.n)
        S.setflags(write=False)
        return S

    def __call__(self, A) -> np.ndarray:
        return apply(self, A)

    def adjoint_apply(self, B) -> np.ndarray:
        """``phi*(B)`` without building the adjoint map."""
        B = as_square(B, "B")
        if B.shape[0] != self.m:
            raise DimensionError(f"adjoint expects {self.m}x{self.m} input, got {B.shape}")
        return np.einsum("ab,iajb->ij", B, self.choi4.conj())

    @cached_property
    def unit_image(self) -> np.ndarray:
        return apply(self, np.eye(self.n))

    def is_hermitian_preserving(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        C = self.choi
        return bool(np.linalg.norm(C - C.conj().T) <= tol.hermitian_tol * (1 + np.linalg.norm(C)))


def apply(phi: MapRep, A) -> np.ndarray:
    """``phi(A) = Tr_1[(A^T ⊗ 1_m) C]``."""
    A = as_square(A, "A")
    if A.shape[0] != phi.n:
        raise DimensionError(f"map expects {phi.n}x{phi.n} input, got {A.shape}")
    return np.einsum("ij,iajb->ab", A, phi.choi4)


def adjoint_map(phi: MapRep) -> MapRep:
    """Hilbert-Schmidt adjoint ``phi*: M_m -> M_n``."""
    C4 = phi.choi4.conj().transpose(1, 0, 3, 2)
    return MapRep(phi.m, phi.n, C4.reshape(phi.n * phi.m, phi.n * phi.m), _label("adjoint", phi))


def compose(psi: MapRep, phi: MapRep) -> MapRep:
    """``psi ∘ phi``."""
    if psi.n != phi.m:
        raise DimensionError(f"cannot compose M_{phi.n}->M_{phi.m} with M_{psi.n}->M_{psi.m}")
    blocks = [[apply(psi, apply(phi, _E(i, j, phi.n))) for j in range(phi.n)] for i in range(phi.n)]
    return from_blocks(blocks, _label("compose", psi, phi))


def add_maps(phi: MapRep, psi: MapRep, weight: float = 1.0) -> MapRep:
    """``phi + weight * psi``."""
    if (phi.n, phi.m) != (psi.n, psi.m):
        raise DimensionError("maps have different dimensions")
    return MapRep(phi.n, phi.m, phi.choi + weight * psi.choi, phi.label)


def scale_map(phi: MapRep, c: float) -> MapRep:
    return MapRep(phi.n, phi.m, c * phi.choi, phi.label)


def from_blocks(blocks, label: str = "") -> MapRep:
    """Build a map from its images ``blocks[i][j] = phi(E_ij)``."""
    n = len(blocks)
    m = np.asarray(blocks[0][0]).shape[0]
    C = np.zeros((n, m, n, m), dtype=complex)
    for i in range(n):
        for j in range(n):
            C[i, :, j, :] = blocks[i][j]
    return MapRep(n, m, C.reshape(n * m, n * m), label)


def from_kraus(kraus, label: str = "") -> MapRep:
    """``A -> sum_k K_k A K_k*`` with each ``K_k`` of shape ``m x n``."""
    kraus = [as_matrix(K, "Kraus operator") for K in kraus]
    if not kraus:
        raise ValueError("at least one Kraus operator is required")
    m, n = kraus[0].shape
    C = np.zeros((n * m, n * m), dtype=complex)
    for K in kraus:
        if K.shape != (m, n):
            raise DimensionError("Kraus operators must share one shape")
        # vectorized Kraus operator in the (input, output) index order
        w = K.T.reshape(-1)
        C += np.outer(w, w.conj())
    return MapRep(n, m, C, label)


def tensor_with_identity(k: int, phi: MapRep) -> MapRep:
    """``id_k ⊗ phi : M_{kn} -> M_{km}``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    n, m = phi.n, phi.m
    eye = np.eye(k)
    # C'[(p,i),(r,a),(q,j),(s,b)] = δ_pr δ_qs C[i,a,j,b]
    C = np.einsum("pr,qs,iajb->piraqjsb", eye, eye, phi.choi4)
    N = k * n * k * m
    label = phi.label if k == 1 else f"id_{k}⊗{phi.label}"
    return MapRep(k * n, k * m, C.reshape(N, N), label)


def normalize_to_unital(phi: MapRep, tol: ToleranceConfig = DEFAULT_TOL) -> MapRep:
    """``psi(K) = P phi(K) P`` with ``P = (phi(1)^+)^{1/2}``."""
    S = phi.unit_image
    if not is_psd(S, tol):
        raise NotPSDError("phi(1) is not positive semidefinite")
    P = psd_function(S, lambda w: w**-0.5, tol)
    W = np.kron(np.eye(phi.n), P)
    return MapRep(phi.n, phi.m, W @ phi.choi @ W, _label("unital", phi))


def regularize(phi: MapRep, eps: float) -> MapRep:
    """``phi + eps * phi_D`` where ``phi_D`` is the normalized trace map."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return MapRep(phi.n, phi.m, phi.choi + eps * depolarizing_map(phi.n, phi.m).choi, phi.label)


def is_unital(phi: MapRep, atol: float = 1e-10) -> bool:
    """``phi(1_n) = 1_m``."""
    return bool(np.allclose(phi.unit_image, np.eye(phi.m), atol=atol))


# -- builders -----------------------------------------------------------------


def depolarizing_map(n: int, m: int | None = None) -> MapRep:
    """``A -> Tr[A]/n * 1_m``; unital and completely positive."""
    m = n if m is None else m
    return MapRep(n, m, np.eye(n * m) / n, f"depolarizing({n},{m})")


def choi_reduction_map(t: float, n: int) -> MapRep:
    """``X -> t Tr[X] 1_n - X`` on ``M_n``."""
    omega = np.eye(n).reshape(-1)
    C = t * np.eye(n * n) - np.outer(omega, omega)
    return MapRep(n, n, C, f"choi_reduction({t:g},{n})")


def transpose_map(n: int) -> MapRep:
    swap = np.eye(n * n).reshape(n, n, n, n).transpose(0, 1, 3, 2).reshape(n * n, n * n)
    return MapRep(n, n, swap, f"transpose({n})")


def identity_map(n: int) -> MapRep:
    omega = np.eye(n).reshape(-1)
    return MapRep(n, n, np.outer(omega, omega), f"identity({n})")


def unitary_conjugation_map(U, tol: float = 1e-10) -> MapRep:
    """``A -> U A U*``."""
    U = as_square(U, "U")
    if not np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=tol):
        raise ValueError("U is not unitary")
    phi = from_kraus([U])
    return MapRep(phi.n, phi.m, phi.choi, f"unitary({U.shape[0]})")


def random_cp_map(n: int, m: int | None = None, kraus_count: int = 2, seed: int = 0) -> MapRep:
    """``A -> sum_k K_k A K_k*`` with complex Gaussian Kraus operators.

    The Kraus operators are drawn from ``rng_for(seed, "random_cp", n, m, kraus_count)``.
    """
    m = n if m is None else m
    if kraus_count < 1:
        raise ValueError("kraus_count must be at least 1")
    rng = rng_for(seed, "random_cp", n, m, kraus_count)
    kraus = [ginibre(m, n, rng) / np.sqrt(kraus_count * n) for _ in range(kraus_count)]
    return from_kraus(kraus, f"random_cp({n},{m},{kraus_count},seed={seed})")


BUILDERS = {
    "depolarizing": depolarizing_map,
    "choi-reduction": choi_reduction_map,
    "transpose": transpose_map,
    "identity": identity_map,
    "unitary": unitary_conjugation_map,
    "random-cp": random_cp_map,
}


# -- serialization ------------------------------------------------------------


def map_to_dict(phi: MapRep) -> dict:
    return {
        "label": phi.label,
        "n": phi.n,
        "m": phi.m,
        "choi": [[[float(z.real), float(z.imag)] for z in row] for row in phi.choi],
    }


def map_from_dict(data: dict) -> MapRep:
    try:
        n, m = int(data["n"]), int(data["m"])
        rows = data["choi"]
        choi = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed map data: {exc}") from exc
    return MapRep(n, m, choi, str(data.get("label", "")))


def save_map(phi: MapRep, path) -> None:
    # json writes floats with repr(), which round-trips exactly (17 significant digits)
    Path(path).write_text(json.dumps(map_to_dict(phi)) + "\n")


def load_map(path) -> MapRep:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return map_from_dict(data)


def _E(i, j, n):
    E = np.zeros((n, n), dtype=complex)
    E[i, j] = 1
    return E


def _label(op, *maps):
    return f"{op}(" + ",".join(p.label for p in maps) + ")"
