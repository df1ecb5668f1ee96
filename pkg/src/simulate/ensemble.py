"""Copyright 2026 The drawdown-pdmp Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       https://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""

# Modules
import math
import time
import logging
import dataclasses
from collections.abc import Sequence
from typing import Optional, Union

import numpy as np

# Local Modules
import src.utils as utils
from src.model.spec import ModelSpec
from src.simulate.sampler import SamplePath, path_rng, simulate_path

# Constants
GRID_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Empirical statistics of N simulated paths on a time grid.

    values[i, n] is path i evaluated at grid[n]; above[level][n] is the fraction of paths
    strictly above level at grid[n]. paths keeps the first few raw paths for dumping.
    """
    grid: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    p05: np.ndarray
    p95: np.ndarray
    n_paths: int
    seed: int
    values: np.ndarray
    above: dict[float, np.ndarray] = dataclasses.field(default_factory=dict)
    total_jumps: int = 0
    paths: list[SamplePath] = dataclasses.field(default_factory=list)


def monte_carlo(spec: ModelSpec,
                r0: float,
                horizon: float,
                grid: np.ndarray,
                n_paths: int,
                seed: int,
                nu0: Optional[int] = None,
                jump_convention: str = 'destination',
                levels: Sequence[float] = (),
                keep_paths: int = 0) -> EnsembleStats:
    """Simulates n_paths paths and aggregates them on a grid.

    Path i draws from its own stream seeded by (seed, i), so the result depends only on
    (seed, N, grid). Variance is the unbiased estimator and percentiles use nearest rank.

    Args:
      spec: validated model.
      r0: (float) initial record.
      horizon: (float) simulation horizon T.
      grid: evaluation times inside [0, T].
      n_paths: (int) N >= 2.
      seed: (int) master seed.
      nu0: (int) optional fixed 0-based initial state.
      jump_convention: (str) 'destination' or 'source'.
      levels: record levels whose exceedance fractions are reported.
      keep_paths: (int) number of leading raw paths kept in the result.

    Returns:
      EnsembleStats
    """
    if n_paths < 2:
        raise utils.DomainError(f"at least 2 paths are required, got {n_paths}.")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise utils.DomainError('evaluation grid must be a non-empty vector.')
    if grid[0] < 0.0 or grid[-1] > horizon + GRID_TOL:
        raise utils.DomainError(f"evaluation grid must lie within [0, {horizon}].")

    start = time.monotonic()
    values = np.empty((n_paths, grid.size))
    kept: list[SamplePath] = []
    total_jumps = 0
    for i in range(n_paths):
        path = simulate_path(spec, r0, horizon, path_rng(seed, i), nu0=nu0, jump_convention=jump_convention)
        values[i] = path.evaluate(grid)
        total_jumps += len(path)
        if i < keep_paths:
            kept.append(path)

    ordered = np.sort(values, axis=0)
    stats = EnsembleStats(grid=grid,
                          mean=values.mean(axis=0),
                          var=values.var(axis=0, ddof=1),
                          p05=ordered[nearest_rank(0.05, n_paths)],
                          p95=ordered[nearest_rank(0.95, n_paths)],
                          n_paths=n_paths,
                          seed=seed,
                          values=values,
                          above={float(lv): (values > lv).mean(axis=0) for lv in levels},
                          total_jumps=total_jumps,
                          paths=kept)
    logging.info(f"Simulated {n_paths} paths ({total_jumps} jumps) in {time.monotonic() - start:.2f}s")
    return stats


def nearest_rank(p: float, n: int) -> int:
    """ 0-based nearest-rank index ⌈pN⌉ − 1 """
    if not (0.0 < p <= 1.0):
        raise utils.DomainError(f"percentile must lie in (0, 1], got {p}.")
    return max(math.ceil(p * n - GRID_TOL) - 1, 0)


def exceedance(source: Union[EnsembleStats, np.ndarray],
               level: float,
               t: float,
               grid: Optional[np.ndarray] = None) -> float:
    """Fraction of paths strictly above a record level at time t.

    Args:
      source: an EnsembleStats, or a (paths × grid) value matrix together with its grid.
      level: (float) record level.
      t: (float) time, must be a grid point.
      grid: the grid of a raw value matrix.

    Returns:
      the fraction in [0, 1].
    """
    if isinstance(source, EnsembleStats):
        values, grid = source.values, source.grid
    else:
        values = np.asarray(source, dtype=float)
        if grid is None:
            raise utils.InputError('a grid is required with a raw value matrix.')
    grid = np.asarray(grid, dtype=float)
    col = int(np.argmin(np.abs(grid - t)))
    if abs(grid[col] - t) > GRID_TOL * max(1.0, abs(t)):
        raise utils.DomainError(f"t={t} is not a grid point.")
    return float((values[:, col] > level).mean())
