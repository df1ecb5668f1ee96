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
import logging
from collections.abc import Callable

import numpy as np
from scipy.linalg import expm

# Local Modules
import src.utils as utils

# Constants
DEFAULT_STEP = 0.01
_GRID_SNAP = 1e-9


class NonFinite(utils.NumericalFault):
    """NaN or infinite values in a matrix or trajectory"""


def matrix_exponential(mtx: np.ndarray) -> np.ndarray:
    """Returns e^mtx for a square real matrix.

    Scaling-and-squaring with a Padé approximant (scipy.linalg.expm).

    Raises:
    NonFinite: the input holds NaN or Inf entries.
    """
    mtx = np.asarray(mtx, dtype=float)
    if mtx.ndim != 2 or mtx.shape[0] != mtx.shape[1]:
        raise utils.InputError(f"matrix exponential needs a square matrix, got shape {mtx.shape}.")
    if not np.all(np.isfinite(mtx)):
        raise NonFinite('matrix exponential input has non-finite entries.')
    return expm(mtx)


def rk4_step(field: Callable[[np.ndarray], np.ndarray], y: np.ndarray, delta: float) -> np.ndarray:
    """ One classic Runge-Kutta step of an autonomous field """
    k1 = delta * field(y)
    k2 = delta * field(y + 0.5 * k1)
    k3 = delta * field(y + 0.5 * k2)
    k4 = delta * field(y + k3)
    return y + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def rk4_integrate(field: Callable[[np.ndarray], np.ndarray],
                  y0: np.ndarray,
                  grid: np.ndarray,
                  step: float = DEFAULT_STEP) -> np.ndarray:
    """Integrates y' = field(y) with fixed-step RK4 and samples it on a grid.

    The trajectory starts at grid[0] with value y0. Each grid interval is covered by whole
    steps of size `step` followed by one partial step landing exactly on the next grid point,
    so no interpolation is involved.

    Args:
      field: callable returning dy/dt for a state vector.
      y0: initial state vector.
      grid: strictly increasing sample times.
      step: (float) RK4 step size, > 0.

    Returns:
      an array of shape (len(grid), len(y0)).

    Raises:
    NonFinite: the trajectory blew up.
    """
    if not step > 0.0:
        raise utils.DomainError(f"RK4 step must be > 0, got {step}.")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise utils.DomainError('RK4 grid must be a non-empty vector.')
    if np.any(np.diff(grid) <= 0.0):
        raise utils.DomainError('RK4 grid must be strictly increasing.')

    y = np.array(y0, dtype=float)
    out = np.empty((grid.size, y.size))
    out[0] = y
    n_steps = 0
    for i in range(1, grid.size):
        span = grid[i] - grid[i - 1]
        n_full = int(np.floor(span / step + _GRID_SNAP))
        for _ in range(n_full):
            y = rk4_step(field, y, step)
        remainder = span - n_full * step
        if remainder > _GRID_SNAP * max(1.0, span):
            y = rk4_step(field, y, remainder)
        n_steps += n_full

        if not np.all(np.isfinite(y)):
            raise NonFinite(f"RK4 trajectory is not finite at t={grid[i]}.")
        out[i] = y

    logging.debug(f"RK4 integrated {n_steps} steps of {step} over [{grid[0]}, {grid[-1]}]")
    return out


def affine_field(mtx: np.ndarray, forcing: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """ Returns the field y -> forcing + mtx·y """
    mtx = np.asarray(mtx, dtype=float)
    forcing = np.asarray(forcing, dtype=float)

    def field(y: np.ndarray) -> np.ndarray:
        return forcing + mtx @ y

    return field
