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
import dataclasses
from collections.abc import Sequence

import numpy as np

# Local Modules
import src.utils as utils
from src.common_types import JumpEvent


class EmptySeries(utils.DomainError):
    """The price series has no observations"""


class EmptyEvents(utils.DomainError):
    """No jump events to work with"""


@dataclasses.dataclass(frozen=True, eq=False)
class PriceSeries:
    """Observed prices; times in days (fractional allowed), prices strictly positive"""
    times: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        prices = np.array(self.prices, dtype=float)
        if times.size == 0 or prices.size == 0:
            raise EmptySeries('price series is empty.')
        if times.shape != prices.shape or times.ndim != 1:
            raise utils.DomainError(f"times {times.shape} and prices {prices.shape} do not match.")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise utils.DomainError('prices must be finite and strictly positive.')
        if np.any(np.diff(times) <= 0.0):
            raise utils.DomainError('times must be strictly increasing.')
        times.setflags(write=False)
        prices.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'prices', prices)

    def __len__(self) -> int:
        return int(self.times.size)


def drawdown_series(series: PriceSeries) -> np.ndarray:
    """ Relative drawdown (M_t − P_t)/M_t against the running peak M_t, values in [0, 1) """
    peak = np.maximum.accumulate(series.prices)
    return (peak - series.prices) / peak


def extract_records(series: PriceSeries) -> list[JumpEvent]:
    """Extracts the drawdown records of a price series.

    A record candidate opens whenever the drawdown exceeds every earlier drawdown value.
    Deeper values in the same excursion replace the candidate, equal values keep it, and a
    strictly smaller value confirms it: one event is emitted at the deepest point of each
    excursion. A candidate still open at the end of the series is emitted as provisional.
    Inter-arrival times are measured from the first timestamp of the series.
    """
    dd = drawdown_series(series)
    times = series.times

    events: list[JumpEvent] = []
    record = 0.0
    last_time = float(times[0])
    cand_idx = -1
    for i, d in enumerate(dd):
        level = dd[cand_idx] if cand_idx >= 0 else record
        if d > level:
            cand_idx = i
        elif cand_idx >= 0 and d < level:
            events.append(_new_event(times[cand_idx], last_time, record, dd[cand_idx], provisional=False))
            record = float(dd[cand_idx])
            last_time = float(times[cand_idx])
            cand_idx = -1

    if cand_idx >= 0:
        logging.warning(f"Last record {dd[cand_idx]:.6f} at t={times[cand_idx]} is still open (provisional)")
        events.append(_new_event(times[cand_idx], last_time, record, dd[cand_idx], provisional=True))

    return events


def reconstruct_records(events: Sequence[JumpEvent], r0: float = 0.0) -> np.ndarray:
    """ Replays r_i = r_{i−1} + ρ_i(1 − r_{i−1}) from r0 """
    out = np.empty(len(events))
    r = r0
    for i, ev in enumerate(events):
        r = r + ev.rho * (1.0 - r)
        out[i] = r
    return out


def events_to_observations(events: Sequence[JumpEvent], scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Splits events into the inter-arrival vector x and the jump-size vector y.

    Args:
      events: jump events in time order.
      scale: (float) factor converting inter-arrival times to the working time unit.

    Returns:
      (x, y) float arrays of equal length.

    Raises:
    EmptyEvents: no events were given.
    """
    if not events:
        raise EmptyEvents('no jump events to convert.')
    if not scale > 0.0:
        raise utils.DomainError(f"time scale must be > 0, got {scale}.")
    x = np.array([ev.inter_arrival for ev in events], dtype=float) * scale
    y = np.array([ev.rho for ev in events], dtype=float)
    return x, y


def _new_event(time: float, last_time: float, prev: float, new: float, provisional: bool) -> JumpEvent:
    return JumpEvent(time=float(time),
                     inter_arrival=float(time) - last_time,
                     prev_record=float(prev),
                     new_record=float(new),
                     rho=(float(new) - prev) / (1.0 - prev),
                     provisional=provisional)
