"""Check verdicts and their JSON encoding."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class Status(str, enum.Enum):
    PROVEN_PASS = "proven_pass"
    PROVEN_VIOLATION = "proven_violation"
    NO_VIOLATION_FOUND = "no_violation_found"


@dataclass(frozen=True)
class CheckVerdict:
    """Outcome of a positivity-type check.

    ``proven_pass`` is only issued by checks with an exact criterion.
    ``proven_violation`` always carries a certificate that re-verifies by a
    direct eigenvalue computation. ``no_violation_found`` means an
    optimization found nothing and proves nothing.
    """

    check: str
    status: Status
    value: float
    certificate: dict | None = None
    detail: dict = field(default_factory=dict)
    restarts: int = 0
    seed: int | None = None

    @property
    def violated(self) -> bool:
        return self.status is Status.PROVEN_VIOLATION

    @property
    def passed(self) -> bool:
        return not self.violated

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "status": self.status.value,
            "value": float(self.value),
            "certificate": to_jsonable(self.certificate),
            "detail": to_jsonable(self.detail),
            "restarts": self.restarts,
            "seed": self.seed,
        }


def to_jsonable(obj: Any) -> Any:
    """Convert numpy arrays and scalars to JSON values; complex entries become ``[re, im]``."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_jsonable(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
