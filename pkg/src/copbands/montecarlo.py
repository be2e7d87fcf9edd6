"""Seeded replication engine for coverage and deviation experiments.

Three experiments over Frank-copula ground truth:

* ``run_coverage``: empirical simultaneous-coverage frequencies of the
  requested bands over B replicates per (theta, n) cell.
* ``run_lil_check``: distribution of the normalized maximal deviation
  R_n * sup |Chat - Ebar| per replicate, Ebar the cross-replicate mean
  surface standing in for the exact estimator expectation.
* ``run_bias_check``: the normalized bias proxy R_n * sup |Ebar - C|.

Determinism contract: replicate r of cell (theta_i, n_j) draws from a
counter-based generator keyed by (master seed, i, j, r), replicates are
dispatched in fixed-size chunks, and reductions run in submission order.
Reports are therefore bit-identical for any worker count. The worker
count defaults to the ``COPBANDS_WORKERS`` environment variable (1 if
unset); a single worker runs in-process with no pool.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .bands import BandMethod, BandSpec, covers, lil_bands, normal_bands, rn
from .copula import frank_cdf, frank_conditional_sample, frank_sigma2
from .estimator import (
    CopulaGrid,
    PairedSample,
    default_bandwidth,
    estimate_grid,
    interior_grid,
    make_pseudo_sample,
)

__all__ = [
    "WORKERS_ENV",
    "REPLICATE_CHUNK",
    "ExperimentConfig",
    "CoverageRow",
    "CoverageReport",
    "DeviationRow",
    "DeviationReport",
    "run_coverage",
    "run_lil_check",
    "run_bias_check",
]

WORKERS_ENV = "COPBANDS_WORKERS"

# Fixed dispatch granularity. Chunk boundaries must not depend on the
# worker count, or floating-point reductions would reorder.
REPLICATE_CHUNK = 64

BandwidthRule = Union[None, float, Callable[[int], float]]


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one replication experiment.

    ``bandwidth`` may be None (the default schedule 1/log n), a fixed
    positive number, or a callable n -> h for experimentation.
    """

    thetas: tuple
    ns: tuple
    B: int
    seed: int
    grid_resolution: int = 33
    bandwidth: BandwidthRule = None
    band_specs: tuple = (BandSpec(BandMethod.LIL),)

    def __post_init__(self):
        thetas = tuple(float(t) for t in self.thetas)
        if not thetas or not all(np.isfinite(thetas)):
            raise ValueError("thetas must be a nonempty list of finite reals")
        ns = tuple(int(n) for n in self.ns)
        if not ns or any(n < 16 for n in ns):
            raise ValueError("all sample sizes must be >= 16")
        if int(self.B) < 1:
            raise ValueError("B must be >= 1")
        if int(self.grid_resolution) < 2:
            raise ValueError("grid resolution must be >= 2")
        specs = tuple(self.band_specs)
        if not specs or not all(isinstance(s, BandSpec) for s in specs):
            raise ValueError("band_specs must be a nonempty list of BandSpec")
        if isinstance(self.bandwidth, (int, float)) and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "grid_resolution", int(self.grid_resolution))
        object.__setattr__(self, "band_specs", specs)

    def bandwidth_for(self, n: int) -> float:
        if self.bandwidth is None:
            return default_bandwidth(n).h
        if callable(self.bandwidth):
            h = float(self.bandwidth(n))
            if not h > 0:
                raise ValueError("bandwidth rule returned a nonpositive value")
            return h
        return float(self.bandwidth)


@dataclass(frozen=True)
class CoverageRow:
    method: str
    theta: float
    n: int
    coverage: float
    mc_stderr: float
    B: int
    seed: int


@dataclass(frozen=True)
class CoverageReport:
    """Coverage frequencies in emission order (method, then theta, then n)."""

    rows: tuple

    def cell(self, method: str, theta: float, n: int) -> CoverageRow:
        for row in self.rows:
            if row.method == method and row.theta == float(theta) and row.n == int(n):
                return row
        raise KeyError(f"no coverage cell ({method}, {theta}, {n})")


@dataclass(frozen=True)
class DeviationRow:
    """Deviation statistics for one (theta, n) cell.

    ``statistics`` holds one value per replicate for the LIL experiment
    and a single aggregated value for the bias experiment.
    """

    theta: float
    n: int
    B: int
    statistics: tuple

    @property
    def stat_max(self) -> float:
        return float(np.max(self.statistics))

    @property
    def stat_mean(self) -> float:
        return float(np.mean(self.statistics))

    @property
    def stat_p99(self) -> float:
        return float(np.percentile(self.statistics, 99.0))

    def fraction_within(self, bound: float) -> float:
        stats = np.asarray(self.statistics)
        return float(np.mean(stats <= bound))


@dataclass(frozen=True)
class DeviationReport:
    mode: str
    rows: tuple


def _stream_key(seed: int, theta_idx: int, n_idx: int, r: int) -> int:
    """128-bit Philox key: master seed (high 64) | theta | n | replicate."""
    return (
        ((seed & 0xFFFFFFFFFFFFFFFF) << 64)
        | ((theta_idx & 0xFFFF) << 48)
        | ((n_idx & 0xFFFF) << 32)
        | (r & 0xFFFFFFFF)
    )


def _replicate_rng(seed: int, theta_idx: int, n_idx: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=_stream_key(seed, theta_idx, n_idx, r)))


def _draw_pseudo(theta: float, n: int, rng: np.random.Generator):
    u = rng.random(n)
    w = rng.random(n)
    v = frank_conditional_sample(theta, u, w)
    return make_pseudo_sample(PairedSample(u, v))


def _chunk_ranges(B: int):
    return [(r0, min(r0 + REPLICATE_CHUNK, B)) for r0 in range(0, B, REPLICATE_CHUNK)]


def _resolve_workers(workers) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    workers = int(workers)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def _run_tasks(fn, tasks, workers: int):
    """Evaluate fn over tasks, returning results in submission order."""
    if workers == 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, task) for task in tasks]
        return [future.result() for future in futures]


def _coverage_chunk(args):
    (seed, theta, theta_idx, n, n_idx, r0, r1, h, knots, specs, truth_values, sigma2_values) = args
    truth = CopulaGrid(knots, knots, truth_values)
    sigma2 = None
    if sigma2_values is not None:
        sigma2 = CopulaGrid(knots, knots, sigma2_values)
    counts = np.zeros(len(specs), dtype=np.int64)
    for r in range(r0, r1):
        rng = _replicate_rng(seed, theta_idx, n_idx, r)
        pseudo = _draw_pseudo(theta, n, rng)
        center = estimate_grid(pseudo, h, knots)
        for k, spec in enumerate(specs):
            if spec.method is BandMethod.LIL:
                surfaces = lil_bands(center, n, spec)
            else:
                surfaces = normal_bands(center, n, sigma2, spec)
            if covers(surfaces, truth):
                counts[k] += 1
    return counts


def _grid_chunk(args):
    (seed, theta, theta_idx, n, n_idx, r0, r1, h, knots) = args
    out = np.empty((r1 - r0, knots.size, knots.size))
    for offset, r in enumerate(range(r0, r1)):
        rng = _replicate_rng(seed, theta_idx, n_idx, r)
        pseudo = _draw_pseudo(theta, n, rng)
        out[offset] = estimate_grid(pseudo, h, knots).values
    return out


def run_coverage(config: ExperimentConfig, workers=None) -> CoverageReport:
    """Empirical simultaneous-coverage frequencies per (method, theta, n).

    Each replicate draws a Frank sample by conditional sampling, builds
    pseudo-observations, estimates the copula on the shared interior grid,
    constructs every requested band from the same estimate, and tests
    simultaneous coverage of the true surface. Rows are emitted in
    (method, theta, n) order with Monte Carlo standard errors
    sqrt(p(1-p)/B) attached.
    """
    workers = _resolve_workers(workers)
    knots = interior_grid(config.grid_resolution)
    need_sigma2 = any(spec.method is BandMethod.NORMAL for spec in config.band_specs)

    tasks = []
    owners = []
    for i, theta in enumerate(config.thetas):
        truth_values = frank_cdf(theta, knots[:, None], knots[None, :])
        sigma2_values = None
        if need_sigma2:
            sigma2_values = frank_sigma2(theta, knots[:, None], knots[None, :])
        for j, n in enumerate(config.ns):
            h = config.bandwidth_for(n)
            for r0, r1 in _chunk_ranges(config.B):
                tasks.append(
                    (config.seed, theta, i, n, j, r0, r1, h, knots,
                     config.band_specs, truth_values, sigma2_values)
                )
                owners.append((i, j))

    counts = {}
    for owner, chunk_counts in zip(owners, _run_tasks(_coverage_chunk, tasks, workers)):
        if owner in counts:
            counts[owner] = counts[owner] + chunk_counts
        else:
            counts[owner] = chunk_counts

    rows = []
    for k, spec in enumerate(config.band_specs):
        for i, theta in enumerate(config.thetas):
            for j, n in enumerate(config.ns):
                covered = int(counts[(i, j)][k])
                p = covered / config.B
                stderr = float(np.sqrt(p * (1.0 - p) / config.B))
                rows.append(
                    CoverageRow(
                        method=spec.method.value,
                        theta=float(theta),
                        n=int(n),
                        coverage=p,
                        mc_stderr=stderr,
                        B=config.B,
                        seed=config.seed,
                    )
                )
    return CoverageReport(tuple(rows))


def _replicate_grid_stack(config: ExperimentConfig, theta, theta_idx, n, n_idx, workers):
    knots = interior_grid(config.grid_resolution)
    h = config.bandwidth_for(n)
    tasks = [
        (config.seed, theta, theta_idx, n, n_idx, r0, r1, h, knots)
        for r0, r1 in _chunk_ranges(config.B)
    ]
    stacks = _run_tasks(_grid_chunk, tasks, workers)
    return knots, np.concatenate(stacks, axis=0)


def run_lil_check(config: ExperimentConfig, workers=None) -> DeviationReport:
    """Per-replicate normalized maximal deviations R_n·sup|Chat - Ebar|.

    Ebar is the cross-replicate mean surface, the Monte Carlo stand-in for
    the exact estimator expectation; B >= 100 keeps its error an order
    below the statistic.
    """
    if config.B < 100:
        raise ValueError("lil check requires B >= 100 (mean-surface proxy accuracy)")
    workers = _resolve_workers(workers)
    rows = []
    for i, theta in enumerate(config.thetas):
        for j, n in enumerate(config.ns):
            _, grids = _replicate_grid_stack(config, theta, i, n, j, workers)
            mean_surface = grids.mean(axis=0)
            stats = rn(n) * np.max(np.abs(grids - mean_surface), axis=(1, 2))
            rows.append(
                DeviationRow(
                    theta=float(theta), n=int(n), B=config.B,
                    statistics=tuple(float(s) for s in stats),
                )
            )
    return DeviationReport(mode="lil", rows=tuple(rows))


def run_bias_check(config: ExperimentConfig, workers=None) -> DeviationReport:
    """Normalized bias proxy R_n·sup|Ebar - C| per (theta, n) cell.

    B >= 1000 so the mean surface estimates the expectation with error
    well below the bias it is measuring.
    """
    if config.B < 1000:
        raise ValueError("bias check requires B >= 1000 (mean-surface proxy accuracy)")
    workers = _resolve_workers(workers)
    rows = []
    for i, theta in enumerate(config.thetas):
        for j, n in enumerate(config.ns):
            knots, grids = _replicate_grid_stack(config, theta, i, n, j, workers)
            mean_surface = grids.mean(axis=0)
            truth = frank_cdf(theta, knots[:, None], knots[None, :])
            stat = rn(n) * float(np.max(np.abs(mean_surface - truth)))
            rows.append(
                DeviationRow(theta=float(theta), n=int(n), B=config.B, statistics=(stat,))
            )
    return DeviationReport(mode="bias", rows=tuple(rows))
