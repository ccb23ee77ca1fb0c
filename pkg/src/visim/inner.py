"""Server-local composite extragradient solver.

Solves the strongly-monotone regularized subproblem

    find u:  <gamma * (F1(u) + offset) + grad w(u) - grad w(anchor), z - u> >= 0

for all feasible z, where ``offset`` is the constant correction
F(anchor) - F1(anchor) shipped from the last communication round.  Each
iteration takes two composite proximal steps with weight
eta = 1 / (2 * gamma * L_F1) and contracts the divergence to the
subproblem's solution by 1 / (1 + eta), so

    T = ceil((3 L_F1 / delta) * log(V0 / eps))

iterations reach Bregman accuracy eps when gamma = 1 / delta.  Everything
here runs on the server; no communication rounds are consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericsError, ParameterError
from .geometry import (
    DualVector,
    GeometryKind,
    GeometrySetup,
    Point,
    bregman_divergence,
    composite_prox_map,
)
from .operators import OperatorShard, SaddleBilinear


@dataclass
class InnerSettings:
    """Tuning knobs for the inner solver.

    ``tolerance`` is the movement-based early-stop threshold on
    V(v^{t+1}, v^t); ``None`` lets the caller derive one from its outer
    accuracy target.  ``max_iters`` caps the loop (``None`` -> use
    :func:`iterations_needed`).  ``warm_start`` reuses the previous
    subproblem solution as the starting point.
    """

    tolerance: float | None = None
    max_iters: int | None = None
    warm_start: bool = True


@dataclass(frozen=True)
class CompositeProblem:
    """One regularized subproblem instance.

    F1 is the server's local operator, ``offset`` the fixed dual vector
    F(anchor) - F1(anchor), ``l_f1`` the local Lipschitz constant in the
    geometry's pairing.
    """

    gamma: float
    anchor: Point
    f1: OperatorShard
    offset: DualVector
    geometry: GeometrySetup
    l_f1: float

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if self.l_f1 <= 0.0:
            raise ParameterError(f"L_F1 must be positive, got {self.l_f1}")

    @property
    def eta(self) -> float:
        return 1.0 / (2.0 * self.gamma * self.l_f1)

    def gradient(self, v: Point) -> DualVector:
        """gamma * eta * (F1(v) + offset), the step used by both half-steps."""
        s = self.gamma * self.eta
        fv = self.f1.evaluate(v)
        return DualVector(
            tuple(s * (fb + ob) for fb, ob in zip(fv.blocks, self.offset.blocks))
        )


def iterations_needed(l_f1: float, delta: float, v0: float, eps: float) -> int:
    """T = ceil((3 L_F1 / delta) * log(V0 / eps)), at least 1."""
    if l_f1 <= 0.0 or delta <= 0.0:
        raise ParameterError("l_f1 and delta must be positive")
    if v0 < 0.0 or eps <= 0.0:
        raise ParameterError("v0 must be >= 0 and eps > 0")
    if eps >= v0:
        return 1
    return max(1, math.ceil(3.0 * l_f1 / delta * math.log(v0 / eps)))


def _fast_path_ok(problem: CompositeProblem) -> bool:
    return (
        _kernels.NUMBA_AVAILABLE
        and problem.geometry.kind is GeometryKind.ENTROPY_SIMPLEX
        and len(problem.geometry.block_dims) == 2
        and isinstance(problem.f1.evaluate, SaddleBilinear)
    )


def _composite_mp_fast(
    problem: CompositeProblem, v0: Point, max_iters: int, movement_tol: float
) -> tuple[Point, int]:
    M1 = problem.f1.evaluate.matrix
    la_x, la_y = (np.log(b) for b in problem.anchor.blocks)
    lv_x, lv_y = (np.log(b) for b in v0.blocks)
    lv_x, lv_y, iters = _kernels.composite_mp_entropy_bilinear(
        np.ascontiguousarray(M1, dtype=float),
        np.asarray(problem.offset.blocks[0], dtype=float),
        np.asarray(problem.offset.blocks[1], dtype=float),
        la_x,
        la_y,
        lv_x,
        lv_y,
        problem.gamma,
        problem.eta,
        max_iters,
        movement_tol,
    )
    if not (np.all(np.isfinite(lv_x)) and np.all(np.isfinite(lv_y))):
        raise NumericsError("inner solver produced non-finite iterates")
    return Point.of(np.exp(lv_x), np.exp(lv_y)), iters


def composite_mp(
    problem: CompositeProblem,
    v0: Point,
    max_iters: int,
    movement_tol: float = 0.0,
    force_generic: bool = False,
    record_path: bool = False,
) -> tuple[Point, int] | tuple[Point, int, list[Point]]:
    """Run the composite extragradient loop from ``v0``.

    Returns the final iterate and the number of iterations performed (and,
    with ``record_path``, the list of full-step iterates v^1..v^T for
    contraction diagnostics).  Stops early once the movement
    V(v^{t+1}, v^t) falls to ``movement_tol``.
    """
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")
    if movement_tol < 0.0:
        raise ParameterError("movement_tol must be >= 0")
    if not record_path and not force_generic and _fast_path_ok(problem):
        return _composite_mp_fast(problem, v0, max_iters, movement_tol)

    geom = problem.geometry
    eta = problem.eta
    v = v0
    path: list[Point] = []
    iters = 0
    for t in range(max_iters):
        v_half = composite_prox_map(geom, problem.anchor, v, problem.gradient(v), eta)
        v_next = composite_prox_map(
            geom, problem.anchor, v, problem.gradient(v_half), eta
        )
        for b in v_next.blocks:
            if not np.all(np.isfinite(b)):
                raise NumericsError(f"non-finite inner iterate at step {t}")
        # the computed movement is cancellation-limited near the solution
        # (it rounds to 0 once coordinates move less than ~sqrt(eps)), so a
        # zero tolerance means "never stop early" rather than "stop at 0"
        move = bregman_divergence(geom, v_next, v) if movement_tol > 0.0 else None
        v = v_next
        iters = t + 1
        if record_path:
            path.append(v)
        if move is not None and move <= movement_tol:
            break
    if record_path:
        return v, iters, path
    return v, iters
