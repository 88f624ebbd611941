"""The functional F(K, X) = Tr[K* X^+ K], its dual description over the cone
Omega, and the tracial inequalities characterizing (generalized) Schwarz maps.

Values of F live in the extended reals ``[0, inf]``; infinity is an explicit
flag on :class:`ExtReal`, never a float sentinel.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .maps import MapRep
from .numerics import (
    DEFAULT_TOL,
    DimensionError,
    KernelConditionError,
    ToleranceConfig,
    as_square,
    hermitize,
    is_psd,
    kernel_included,
    min_eig,
    opnorm,
    outer,
    pinv_psd,
    psd_threshold,
)
from .positivity import SchwarzWitness


@functools.total_ordering
@dataclass(frozen=True)
class ExtReal:
    value: float = 0.0
    infinite: bool = False

    @classmethod
    def inf(cls) -> "ExtReal":
        return cls(0.0, True)

    @property
    def finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return float("inf") if self.infinite else self.value

    def _coerce(self, other):
        return other if isinstance(other, ExtReal) else ExtReal(float(other))

    def __eq__(self, other):
        other = self._coerce(other)
        if self.infinite or other.infinite:
            return self.infinite == other.infinite
        return self.value == other.value

    def __lt__(self, other):
        other = self._coerce(other)
        if self.infinite:
            return False
        return other.infinite or self.value < other.value

    def __hash__(self):
        return hash((self.infinite, 0.0 if self.infinite else self.value))

    def to_json(self):
        return "inf" if self.infinite else self.value


@dataclass(frozen=True, eq=False)
class TracialPair:
    """``(K, X)`` with ``X`` PSD."""

    K: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        K = as_square(self.K, "K")
        X = hermitize(self.X)
        if K.shape != X.shape:
            raise DimensionError("K and X must have the same shape")
        if not is_psd(X):
            raise ValueError("X must be positive semidefinite")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "X", X)

    def valid(self, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
        """``ker(X) ⊆ ker(K*)``."""
        return kernel_included(self.X, self.K.conj().T, tol)

    def image(self, phi: MapRep) -> "TracialPair":
        """``(phi*(K), phi*(X))``."""
        return TracialPair(phi.adjoint_apply(self.K), phi.adjoint_apply(self.X))


@dataclass(frozen=True, eq=False)
class OmegaPoint:
    L: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        L = as_square(self.L, "L")
        Y = hermitize(self.Y)
        if L.shape != Y.shape:
            raise DimensionError("L and Y must have the same shape")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "Y", Y)


def eval_F(p: TracialPair, tol: ToleranceConfig = DEFAULT_TOL) -> ExtReal:
    if not p.valid(tol):
        return ExtReal.inf()
    return ExtReal(float(np.trace(p.K.conj().T @ pinv_psd(p.X, tol) @ p.K).real))


def eval_F_regularized(p: TracialPair, eps: float) -> float:
    """``Tr[K* (X + eps 1)^{-1} K]``, which increases to ``F(K, X)`` as ``eps`` decreases to 0."""
    Xe = p.X + eps * np.eye(p.X.shape[0])
    return float(np.trace(p.K.conj().T @ np.linalg.solve(Xe, p.K)).real)


def omega_contains(q: OmegaPoint, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """``(L, Y) in Omega`` iff ``Y + L L* <= 0``."""
    S = q.Y + q.L @ q.L.conj().T
    lam = np.linalg.eigvalsh(0.5 * (S + S.conj().T))[-1]
    return bool(lam <= psd_threshold(S, tol))


def pairing(p: TracialPair, q: OmegaPoint) -> float:
    """``Tr[X Y] + Tr[K* L] + Tr[K L*]``."""
    if p.K.shape != q.L.shape:
        raise DimensionError("pair and Omega point have different dimensions")
    value = np.trace(p.X @ q.Y) + 2 * np.vdot(p.K, q.L).real
    return float(value.real)


def dual_optimizer(p: TracialPair, tol: ToleranceConfig = DEFAULT_TOL) -> OmegaPoint:
    """The maximizer ``L = X^+ K``, ``Y = -L L*`` of the pairing over Omega."""
    if not p.valid(tol):
        raise KernelConditionError("ker(X) is not contained in ker(K*); the supremum is infinite")
    L = pinv_psd(p.X, tol) @ p.K
    return OmegaPoint(L, -L @ L.conj().T)


def divergent_direction(p: TracialPair, t: float, tol: ToleranceConfig = DEFAULT_TOL) -> OmegaPoint:
    """For an invalid pair, a point of Omega whose pairing grows linearly in ``t``.

    With ``v`` a unit kernel vector of ``X`` and ``w = K* v / |K* v|``, the point
    ``L = t |v><w|`` gives pairing ``2 t |K* v|``.
    """
    from .numerics import kernel_basis

    ker = kernel_basis(p.X, tol)
    Kd = p.K.conj().T
    if ker.shape[1] == 0:
        raise KernelConditionError("X has trivial kernel")
    norms = np.linalg.norm(Kd @ ker, axis=0)
    v = ker[:, int(np.argmax(norms))]
    Kv = Kd @ v
    L = t * outer(v, Kv / np.linalg.norm(Kv))
    return OmegaPoint(L, -L @ L.conj().T)


def eval_G(q: OmegaPoint, tol: ToleranceConfig = DEFAULT_TOL) -> ExtReal:
    return ExtReal(0.0) if omega_contains(q, tol) else ExtReal.inf()


# -- tracial inequalities --------------------------------------------------------


def violation_threshold(*mats) -> float:
    return 1e-7 * (1 + sum(opnorm(M) for M in mats))


@dataclass(frozen=True)
class TracialReport:
    """Signed gap of a tracial inequality at one pair.

    ``gap = larger - smaller`` where the inequality asserts ``gap >= 0``.
    ``transport_ok`` records ``ker(phi*(X)) ⊆ ker(phi*(K)*)``; when it
    fails ``smaller`` is infinite and ``gap`` is ``-inf``.
    """

    gap: float
    larger: float
    smaller: ExtReal
    transport_ok: bool
    threshold: float

    @property
    def scale(self) -> float:
        s = abs(self.larger) + (abs(self.smaller.value) if self.smaller.finite else 0.0)
        return 1.0 + s

    @property
    def violated(self) -> bool:
        return (not self.transport_ok) or self.gap < -self.threshold

    def to_json(self) -> dict:
        return {
            "gap": self.gap,
            "larger": self.larger,
            "smaller": self.smaller.to_json(),
            "transport_ok": self.transport_ok,
            "violated": self.violated,
        }


def _tracial_gap(phi: MapRep, p: TracialPair, larger: float, tol) -> TracialReport:
    image = p.image(phi)
    smaller = eval_F(image, tol)
    thr = violation_threshold(p.K, p.X)
    if smaller.infinite:
        return TracialReport(float("-inf"), larger, smaller, False, thr)
    return TracialReport(larger - smaller.value, larger, smaller, True, thr)


def _require_valid(p: TracialPair, tol):
    if not p.valid(tol):
        raise KernelConditionError("ker(X) is not contained in ker(K*)")


def check_tracial_GS(phi: MapRep, p: TracialPair, tol: ToleranceConfig = DEFAULT_TOL) -> TracialReport:
    """``Tr[phi*(K* X^+ K)] >= Tr[phi*(K)* phi*(X)^+ phi*(K)]``; holds for all
    valid pairs iff ``phi`` is a generalized Schwarz map."""
    _require_valid(p, tol)
    inner = p.K.conj().T @ pinv_psd(p.X, tol) @ p.K
    larger = float(np.trace(phi.adjoint_apply(inner)).real)
    return _tracial_gap(phi, p, larger, tol)


def check_tracial_schwarz(phi: MapRep, p: TracialPair, tol: ToleranceConfig = DEFAULT_TOL) -> TracialReport:
    """``Tr[K* X^+ K] >= Tr[phi*(K)* phi*(X)^+ phi*(K)]``; holds for all valid
    pairs iff ``phi(K* K) >= phi(K)* phi(K)``."""
    _require_valid(p, tol)
    larger = eval_F(p, tol).value
    return _tracial_gap(phi, p, larger, tol)


@dataclass(frozen=True)
class MonotoneReport:
    holds: bool
    F: ExtReal
    F_image: ExtReal

    def to_json(self) -> dict:
        return {"holds": self.holds, "F": self.F.to_json(), "F_image": self.F_image.to_json()}


def check_F_monotone(phi: MapRep, p: TracialPair, tol: ToleranceConfig = DEFAULT_TOL) -> MonotoneReport:
    """``F(K, X) >= F(phi*(K), phi*(X))`` in the extended reals."""
    F = eval_F(p, tol)
    Fi = eval_F(p.image(phi), tol)
    if F.infinite:
        return MonotoneReport(True, F, Fi)
    if Fi.infinite:
        return MonotoneReport(False, F, Fi)
    return MonotoneReport(Fi.value <= F.value + violation_threshold(p.K, p.X), F, Fi)


# -- witness conversion -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WitnessConversion:
    """Result of turning a Schwarz-block witness into a tracial counterexample.

    ``pair`` is ``(K, X) = (|v><u|, |v><v|)``. ``dual_point`` is
    ``(L, Y) = (-A*, -A* A)`` in Omega, whose pairing with the image pair
    equals ``lam + Tr[phi*(K* X^+ K)]``, so that
    ``F(phi*(K), phi*(X)) >= lam + Tr[phi*(K* X^+ K)]``.
    """

    pair: TracialPair
    dual_point: OmegaPoint
    lower_bound: float  # lam + Tr[phi*(K* X^+ K)]
    classification: str  # "gap_violation" or "transport_violation"
    report: TracialReport

    def to_json(self) -> dict:
        return {
            "K": self.pair.K,
            "X": self.pair.X,
            "lower_bound": self.lower_bound,
            "classification": self.classification,
            "report": self.report.to_json(),
        }


def violation_from_witness(
    phi: MapRep, w: SchwarzWitness, tol: ToleranceConfig = DEFAULT_TOL
) -> WitnessConversion:
    if not w.verify(phi, tol):
        raise ValueError("witness does not re-verify against the map")
    u = np.asarray(w.u, dtype=complex)
    v = np.asarray(w.v, dtype=complex)
    if np.linalg.norm(v) <= 1e-12:
        raise ValueError("witness has v = 0, so phi(1) is not PSD and phi is not positive")
    pair = TracialPair(outer(v, u), outer(v, v))
    A = np.asarray(w.A, dtype=complex)
    L = -A.conj().T
    q = OmegaPoint(L, -L @ L.conj().T)
    inner = pair.K.conj().T @ pinv_psd(pair.X, tol) @ pair.K
    lower = w.lam + float(np.trace(phi.adjoint_apply(inner)).real)
    report = check_tracial_GS(phi, pair, tol)
    cls = "gap_violation" if report.transport_ok else "transport_violation"
    return WitnessConversion(pair, q, lower, cls, report)
