"""Seedable Monte Carlo simulation of repeated alpha-majority voting.

Randomness comes from counter-based Philox streams keyed by ``(seed,
stream_id)``.  Replications are split into fixed-size blocks and block ``b``
always uses stream ``(seed, b)``, so an estimate depends only on the seed and
the replication count, not on how many workers ran the blocks.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import TextIO

import numpy as np

from .environments import DistributionSpec, validate
from .voting import VotingRule

BLOCK_SIZE = 1 << 14
_U_SCALE = 2.0 ** -52


class RngStream:
    """Independent uniform stream for one ``(seed, stream_id)`` pair.

    Each variate uses one 64-bit Philox output: the top 52 bits k give
    u = (k + 1/2) / 2**52, which is exact in double precision and lies
    strictly inside (0, 1).
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._bits = np.random.Philox(ss)

    def uniforms(self, size) -> np.ndarray:
        raw = self._bits.random_raw(size)
        return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * _U_SCALE

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])


@dataclass(frozen=True)
class SimulationReport:
    mean_increment: float
    std_error: float
    acceptance_rate: float
    replications: int
    n: int
    alpha: float
    seed: int
    n0: int
    positive_rate: float
    block_size: int = BLOCK_SIZE

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True)
class Trajectory:
    """Cumulative utilities after each step (row t = after step t + 1), starting from zero."""

    steps: int
    utilities: np.ndarray
    accepted: np.ndarray

    def increments(self) -> np.ndarray:
        return np.diff(self.utilities, axis=0, prepend=np.zeros((1, self.utilities.shape[1])))

    def write_csv(self, fh: TextIO) -> None:
        n = self.utilities.shape[1]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step"] + [f"agent_{i + 1}" for i in range(n)] + ["accepted"])
        for t in range(self.steps):
            w.writerow([t + 1] + [f"{v:.12g}" for v in self.utilities[t]] + [int(self.accepted[t])])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _proposals(spec: DistributionSpec, stream: RngStream, rows: int, n: int) -> np.ndarray:
    # row-major draw: components 1..n of one proposal are consecutive variates
    return np.asarray(spec.quantile(stream.uniforms(rows * n)), dtype=float).reshape(rows, n)


def simulate_step(spec: DistributionSpec, rule: VotingRule, stream: RngStream) -> tuple[int, np.ndarray]:
    """Draw one proposal (n variates), vote on it, return (accepted, increments)."""
    zeta = _proposals(spec, stream, 1, rule.n)[0]
    accepted = int(rule.accepts(int(np.count_nonzero(zeta > 0))))
    return accepted, (zeta if accepted else np.zeros_like(zeta))


def _block(args) -> tuple[int, float, float, int, int]:
    spec, n, n0, seed, block, rows = args
    zeta = _proposals(spec, RngStream(seed, block), rows, n)
    positive = zeta > 0
    accepted = positive.sum(axis=1) > n0
    inc = np.where(accepted, zeta[:, 0], 0.0)
    mean = float(inc.mean())
    m2 = float(((inc - mean) ** 2).sum())
    return rows, mean, m2, int(accepted.sum()), int(positive.sum())


def estimate_expected_increment(
    spec: DistributionSpec,
    n: int,
    alpha: float,
    replications: int,
    seed: int,
    *,
    block_size: int = BLOCK_SIZE,
    workers: int = 1,
) -> SimulationReport:
    """Monte Carlo estimate of agent 1's expected increment per proposal."""
    validate(spec)
    if replications < 2:
        raise ValueError(f"replications must be at least 2, got {replications}")
    rule = VotingRule(n, alpha)
    nblocks = -(-replications // block_size)
    jobs = [(spec, n, rule.n0, seed, b, min(block_size, replications - b * block_size)) for b in range(nblocks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(j) for j in jobs]

    # Chan et al. pairwise update, folded in block order
    count, mean, m2, acc, pos = 0, 0.0, 0.0, 0, 0
    for rows, bmean, bm2, bacc, bpos in parts:
        total = count + rows
        delta = bmean - mean
        mean += delta * rows / total
        m2 += bm2 + delta * delta * count * rows / total
        count = total
        acc += bacc
        pos += bpos
    sd = math.sqrt(m2 / (count - 1))
    return SimulationReport(
        mean_increment=mean,
        std_error=sd / math.sqrt(count),
        acceptance_rate=acc / count,
        replications=count,
        n=n,
        alpha=float(alpha),
        seed=seed,
        n0=rule.n0,
        positive_rate=pos / (count * n),
        block_size=block_size,
    )


def run_dynamics(
    spec: DistributionSpec, n: int, alpha: float, steps: int, seed: int, stream_id: int = 0
) -> Trajectory:
    """Utility trajectories of n agents over ``steps`` votes, from zero utility.

    Draws the same variates, in the same order, as ``steps`` successive
    :func:`simulate_step` calls on stream ``(seed, stream_id)``.
    """
    validate(spec)
    if steps < 1:
        raise ValueError(f"steps must be at least 1, got {steps}")
    rule = VotingRule(n, alpha)
    zeta = _proposals(spec, RngStream(seed, stream_id), steps, n)
    accepted = (zeta > 0).sum(axis=1) > rule.n0
    utilities = np.cumsum(np.where(accepted[:, None], zeta, 0.0), axis=0)
    return Trajectory(steps=steps, utilities=utilities, accepted=accepted)
