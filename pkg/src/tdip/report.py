"""Result records shared by the solvers and the brute-force oracle."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Any

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class StepResult:
    """A step g taken with length lam; delta = f(x + lam g) - f(x)."""

    g: tuple[int, ...]
    lam: int
    delta: int

    @property
    def h(self) -> tuple[int, ...]:
        return tuple(self.lam * v for v in self.g)


@dataclass
class SolveReport:
    status: str
    x: tuple[int, ...] | None = None
    value: int | None = None
    iterations: int = 0
    trace: list[tuple[int, int]] = field(default_factory=list)  # (lambda, objective after step)
    rho_source: str | None = None
    algorithm: str = ""
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def to_json(self) -> dict:
        def big(v):
            return v if v is None or abs(v) < 2**53 else str(v)

        out = {
            "status": self.status,
            "value": big(self.value),
            "x": None if self.x is None else [big(v) for v in self.x],
            "iterations": self.iterations,
            "trace": [{"lambda": big(lam), "value": big(val)} for lam, val in self.trace],
            "rho_source": self.rho_source,
            "algorithm": self.algorithm,
        }
        if self.details:
            out["details"] = _jsonable(self.details)
        return out


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, int) and not isinstance(obj, bool) and abs(obj) >= 2**53:
        return str(obj)
    if isinstance(obj, float) and obj in (float("inf"), float("-inf")):
        return "+inf" if obj > 0 else "-inf"
    return obj
