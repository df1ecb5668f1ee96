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
from typing import Optional

import numpy as np

# Local Modules
import src.utils as utils
from src.model.spec import ModelSpec
from src.records.drawdown import PriceSeries
from src.simulate.sampler import SamplePath, path_rng, simulate_path

# Constants
DEFAULT_PEAK = 100.0


def synthetic_prices(path: SamplePath,
                     peak: float = DEFAULT_PEAK,
                     noise_points: int = 0,
                     rng: Optional[np.random.Generator] = None) -> PriceSeries:
    """Builds a price series whose drawdown records reproduce a sample path.

    The price starts at the peak, drops to peak·(1 − r_n) at each jump time T_n and is back at
    the peak halfway to the next jump, so every jump is one excursion. Optional noise points
    between recovery and the next jump stay above the previous record's price level. A final
    recovery one time unit after the last jump confirms the last record.

    Raises:
    DomainError: the path does not start from a zero record.
    """
    if path.initial_r != 0.0:
        raise utils.DomainError(f"price fixtures need paths started at r0=0, got {path.initial_r}.")
    if noise_points and rng is None:
        raise utils.InputError('noise points need a random generator.')

    times: list[float] = [0.0]
    prices: list[float] = [peak]
    prev_t = 0.0
    prev_r = 0.0
    for t, r in zip(path.jump_times, path.records):
        mid = 0.5 * (prev_t + t)
        if prev_t > 0.0:
            times.append(mid)
            prices.append(peak)
        if noise_points and prev_r > 0.0 and rng is not None:
            # noise stays shallower than the current record
            spots = np.sort(rng.uniform(mid, t, size=noise_points))
            depth = rng.uniform(0.0, prev_r, size=noise_points)
            for s, d in zip(spots, depth):
                if times[-1] < s < t:
                    times.append(float(s))
                    prices.append(peak * (1.0 - d))
        times.append(float(t))
        prices.append(peak * (1.0 - r))
        prev_t = float(t)
        prev_r = float(r)

    if len(path):
        times.append(prev_t + 1.0)
        prices.append(peak)
    return PriceSeries(times=np.array(times), prices=np.array(prices))


def synthetic_fixture(spec: ModelSpec,
                      horizon: float,
                      seed: int,
                      noise_points: int = 0,
                      jump_convention: str = 'destination') -> tuple[SamplePath, PriceSeries]:
    """ Simulate one path from r0=0 with stream (seed, 0) and map it to prices """
    path = simulate_path(spec, 0.0, horizon, path_rng(seed, 0), jump_convention=jump_convention)
    noise = path_rng(seed, 1) if noise_points else None
    series = synthetic_prices(path, noise_points=noise_points, rng=noise)
    logging.info(f"Synthetic fixture: {len(path)} records over {horizon} time units, {len(series)} prices")
    return path, series
