"""Simulated centralized (parameter-server) cluster.

One communication round = one synchronized broadcast-and-gather exchange:
the server ships out a batch of points and collects every worker's
evaluations at all of them.  Extragradient-type solvers therefore cost two
rounds per iteration (one exchange at z^k, one at u^k).  Byte accounting
counts both directions, 8 bytes per real coordinate.

The reduction is ordered by worker index regardless of the ``parallel``
flag, so gathered averages are reproducible bit-for-bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .geometry import DualVector, Point
from .operators import OperatorShard, saddle_shard


@dataclass
class ClusterState:
    shards: list[OperatorShard]
    round_count: int = 0
    bytes_sent: int = 0
    parallel: bool = False

    @property
    def m(self) -> int:
        return len(self.shards)

    @property
    def server_shard(self) -> OperatorShard:
        # worker 1 doubles as the server and keeps local access to its shard
        return self.shards[0]

    def server_evaluate(self, z: Point) -> DualVector:
        """Server-local F_1 evaluation; costs no communication."""
        return self.server_shard.evaluate(z)


def _max_workers() -> int:
    cap = os.environ.get("VI_SIM_THREADS")
    if cap:
        return max(1, int(cap))
    return os.cpu_count() or 1


def gather_average(cluster: ClusterState, points: list[Point]) -> list[DualVector]:
    """One communication round: every worker evaluates its shard at all
    ``points``; the server returns the coordinate-wise averages.

    The round counter increments by exactly 1 no matter how many points
    ride in the exchange.
    """
    if not points:
        raise ConfigError("gather_average needs at least one point")
    m = cluster.m
    if m == 0:
        raise ConfigError("cluster has no workers")

    def worker(i: int) -> list[DualVector]:
        try:
            return [cluster.shards[i].evaluate(z) for z in points]
        except Exception as exc:
            raise type(exc)(f"worker {i + 1}: {exc}") from exc

    if cluster.parallel and m > 1:
        with ThreadPoolExecutor(max_workers=min(m, _max_workers())) as pool:
            results = list(pool.map(worker, range(m)))
    else:
        results = [worker(i) for i in range(m)]

    averages = []
    for j in range(len(points)):
        acc = [b.copy() for b in results[0][j].blocks]
        for i in range(1, m):
            out = results[i][j]
            if len(out.blocks) != len(acc):
                raise ShapeError(f"worker {i + 1} returned a different block layout")
            for a, b in zip(acc, out.blocks):
                a += b
        averages.append(DualVector(tuple(b / m for b in acc)))

    coords = sum(b.size for b in points[0].blocks) * len(points)
    cluster.round_count += 1
    cluster.bytes_sent += 2 * m * coords * 8  # broadcast + gather
    return averages


def reset_counters(cluster: ClusterState) -> None:
    cluster.round_count = 0
    cluster.bytes_sent = 0


def shard_data(matrices: np.ndarray | list[np.ndarray], m: int) -> list[OperatorShard]:
    """Split T payoff matrices into m contiguous equal blocks; each shard's
    payload is its block mean, so the shard-payload mean equals the global
    mean."""
    mats = np.asarray(matrices, dtype=float)
    T = mats.shape[0]
    if m < 1 or T % m != 0:
        raise ConfigError(f"cannot split {T} matrices into {m} equal shards")
    n = T // m
    return [saddle_shard(mats[i * n : (i + 1) * n].mean(axis=0)) for i in range(m)]
