"""Stopping rules and solve reports shared by the iterative solvers."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator

from ..core import DimensionError, DomainError, as_vector
from ..operators import as_operator


@dataclass(frozen=True)
class StopRule:
    """Iteration budget plus optional early-exit tests.

    ``rel_tol`` stops when the objective decreases by less than
    ``rel_tol * |objective|`` between iterations, ``abs_tol`` when it
    decreases by less than ``abs_tol``; a zero disables the test.
    ``discrepancy`` stops once the residual norm drops to that level.
    """

    max_iters: int = 200
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    discrepancy: float | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")
        if self.rel_tol < 0 or self.abs_tol < 0:
            raise DomainError("tolerances must be non-negative")

    def check(self, prev_obj: float | None, obj: float, residual: float) -> str | None:
        if self.discrepancy is not None and residual <= self.discrepancy:
            return "discrepancy"
        if prev_obj is None:
            return None
        dec = prev_obj - obj
        if 0 <= dec:
            if self.rel_tol > 0 and dec <= self.rel_tol * abs(obj):
                return "rel_tol"
            if self.abs_tol > 0 and dec <= self.abs_tol:
                return "abs_tol"
        return None


FIXED_BUDGET = StopRule(rel_tol=0.0)


@dataclass
class SolveReport:
    x: np.ndarray
    objective: np.ndarray
    residual: np.ndarray
    solution_norm: np.ndarray
    stop_reason: str
    iterations: int
    wall_time: float
    extras: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        """History as CSV text (iteration,objective,residual,solution_norm), LF endings."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "objective", "residual", "solution_norm"])
        for k in range(self.iterations):
            w.writerow([k + 1, repr(float(self.objective[k])), repr(float(self.residual[k])),
                        repr(float(self.solution_norm[k]))])
        return buf.getvalue()


class History:
    """Accumulates per-iteration diagnostics and produces a :class:`SolveReport`."""

    def __init__(self, stop: StopRule):
        self.stop = stop
        self.obj: list[float] = []
        self.res: list[float] = []
        self.xn: list[float] = []
        self.t0 = time.perf_counter()
        self.reason = "max_iters"

    def record(self, obj: float, residual: float, x: np.ndarray) -> bool:
        """Store one iteration; True means the caller should stop."""
        prev = self.obj[-1] if self.obj else None
        self.obj.append(float(obj))
        self.res.append(float(residual))
        self.xn.append(float(np.linalg.norm(x)))
        if not np.isfinite(obj):
            self.reason = "diverged"
            return True
        why = self.stop.check(prev, obj, residual)
        if why is not None:
            self.reason = why
            return True
        return len(self.obj) >= self.stop.max_iters

    def finish(self, x: np.ndarray, reason: str | None = None, **extras) -> SolveReport:
        if reason is not None:
            self.reason = reason
        return SolveReport(
            x=np.asarray(x, dtype=float),
            objective=np.array(self.obj),
            residual=np.array(self.res),
            solution_norm=np.array(self.xn),
            stop_reason=self.reason,
            iterations=len(self.obj),
            wall_time=time.perf_counter() - self.t0,
            extras=extras,
        )


def prepare(A, y) -> tuple[LinearOperator, np.ndarray]:
    op = as_operator(A)
    y = as_vector(y, "y")
    if op.shape[0] != y.size:
        raise DimensionError(f"operator has {op.shape[0]} rows, y has {y.size} entries")
    return op, y


def spectral_norm(A, iters: int = 500, tol: float = 1e-12) -> float:
    """Largest singular value: exact for small dense arrays, power iteration otherwise."""
    if isinstance(A, np.ndarray) and min(A.shape) <= 2048:
        return float(np.linalg.norm(A, 2))
    op = as_operator(A)
    n = op.shape[1]
    # deterministic, non-symmetric start vector
    v = 1.0 + np.sin(np.arange(1, n + 1))
    v /= np.linalg.norm(v)
    s = 0.0
    for _ in range(iters):
        w = op.rmatvec(op.matvec(v))
        s_new = float(np.linalg.norm(w))
        if s_new == 0:
            return 0.0
        v = w / s_new
        if abs(s_new - s) <= tol * s_new:
            s = s_new
            break
        s = s_new
    # power iteration approaches from below; pad slightly so steps stay safe
    return float(np.sqrt(s) * (1 + 1e-6))
