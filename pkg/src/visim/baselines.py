"""Comparison solvers: distributed extragradient (mirror-prox) without the
similarity trick, and the similarity solver run in Euclidean geometry.

Both consume exactly two communication rounds per iteration through the
same cluster counters as the main solver, so round comparisons are fair.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .cluster import ClusterState, gather_average
from .errors import ParameterError
from .geometry import (
    GeometryKind,
    GeometrySetup,
    Point,
    floor_simplex_point,
    prox_map,
    validate_point,
)
from .inner import InnerSettings
from .paus import PausConfig, PausResult, RunRecord, paus_run


class BaselineKind(Enum):
    MIRROR_PROX = "mirror-prox"
    EUCLIDEAN_PAUS = "euclidean"


@dataclass
class BaselineConfig:
    """``stepsize`` defaults are the theoretical ones: 1/L for mirror-prox,
    1/delta (Euclidean pairing) for the Euclidean similarity run."""

    kind: BaselineKind
    stepsize: float
    iters: int
    geometry: GeometrySetup
    z0: Point
    l_f1: float | None = None  # Euclidean run only
    delta: float | None = None  # Euclidean run only
    inner: InnerSettings = field(default_factory=InnerSettings)

    def __post_init__(self):
        if self.stepsize <= 0.0:
            raise ParameterError(f"stepsize must be positive, got {self.stepsize}")
        if self.iters < 1:
            raise ParameterError("need at least one iteration")


def mirror_prox_run(
    config: BaselineConfig,
    cluster: ClusterState,
    gap_fn: Callable[[Point], float] | None = None,
    log_predicate: Callable[[int], bool] | None = None,
) -> PausResult:
    """Classical extragradient in the configured Bregman geometry:
    w^k = prox(z^k, F(z^k), step), z^{k+1} = prox(z^k, F(w^k), step);
    returns the ergodic average of the w^k."""
    if config.kind is not BaselineKind.MIRROR_PROX:
        raise ParameterError("config.kind must be MIRROR_PROX")
    geom = config.geometry
    validate_point(geom, config.z0)
    z = config.z0
    step = config.stepsize
    w_sum = [np.zeros(d) for d in geom.block_dims]
    u_avg = config.z0
    records: list[RunRecord] = []
    w_path: list[Point] = []
    z_path: list[Point] = [z]
    start = time.perf_counter()
    for k in range(config.iters):
        f_z = gather_average(cluster, [z])[0]
        w = prox_map(geom, z, f_z, step)
        f_w = gather_average(cluster, [w])[0]
        z = prox_map(geom, z, f_w, step)
        if geom.kind is GeometryKind.ENTROPY_SIMPLEX:
            w = floor_simplex_point(w)  # guard against float underflow to 0
            z = floor_simplex_point(z)
        for acc, wb in zip(w_sum, w.blocks):
            acc += wb
        u_avg = Point(tuple(acc / (k + 1) for acc in w_sum))
        if log_predicate is None or log_predicate(k):
            gap = float(gap_fn(u_avg)) if gap_fn is not None else math.nan
            records.append(
                RunRecord(
                    round=cluster.round_count,
                    iterate_gap=gap,
                    inner_iters=0,
                    elapsed=time.perf_counter() - start,
                )
            )
    return PausResult(u_avg=u_avg, log=records, u_path=w_path, z_path=z_path)


def euclidean_paus_run(
    config: BaselineConfig,
    cluster: ClusterState,
    gap_fn: Callable[[Point], float] | None = None,
    log_predicate: Callable[[int], bool] | None = None,
) -> PausResult:
    """The similarity solver with all proximal steps replaced by Euclidean
    projections; the stepsize is 1/delta with delta measured in the l2
    pairing.  Identical control flow and round accounting to the entropic
    run — the geometry is the only variable."""
    if config.kind is not BaselineKind.EUCLIDEAN_PAUS:
        raise ParameterError("config.kind must be EUCLIDEAN_PAUS")
    if config.geometry.kind is not GeometryKind.EUCLIDEAN:
        raise ParameterError("the Euclidean baseline needs a Euclidean geometry")
    if config.l_f1 is None:
        raise ParameterError("the Euclidean baseline needs l_f1 (l2 pairing)")
    inner_cfg = PausConfig(
        gamma=config.stepsize,
        iters=config.iters,
        geometry=config.geometry,
        z0=config.z0,
        l_f1=config.l_f1,
        delta=config.delta,
        inner=config.inner,
    )
    return paus_run(
        inner_cfg, cluster, gap_fn=gap_fn, log_predicate=log_predicate
    )
