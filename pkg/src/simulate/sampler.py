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
from typing import Optional

import numpy as np

# Local Modules
import src.utils as utils
from src.common_types import JumpEvent
from src.model.spec import ModelSpec, BetaLaw
from src.analytics.moments import BadInitial

# Constants
JUMP_CONVENTIONS = ('destination', 'source')
DEGENERATE_TOL = 1e-12


class DegenerateRecord(utils.DomainError):
    """The record sits too close to 1 to recover a jump size"""


@dataclasses.dataclass(frozen=True, eq=False)
class SamplePath:
    """One trajectory of the record process up to the horizon.

    states[n] is the state entered at the n-th jump (0-based); sojourn_states[n] is the state
    whose rate governed the n-th inter-arrival. rhos holds the drawn normalized jump sizes.
    """
    jump_times: np.ndarray
    states: np.ndarray
    records: np.ndarray
    rhos: np.ndarray
    initial_r: float
    initial_state: int
    horizon: float

    def __len__(self) -> int:
        return int(self.jump_times.size)

    @property
    def sojourn_states(self) -> np.ndarray:
        if not len(self):
            return np.empty(0, dtype=int)
        return np.concatenate([[self.initial_state], self.states[:-1]]).astype(int)

    def evaluate(self, grid: np.ndarray) -> np.ndarray:
        """ Piecewise-constant R_t: the last record at or before t, r0 before the first jump """
        levels = np.concatenate([[self.initial_r], self.records])
        return levels[np.searchsorted(self.jump_times, np.asarray(grid, dtype=float), side='right')]


@dataclasses.dataclass(frozen=True, eq=False)
class JumpStream:
    """Jump variables (S_n, J_n, ρ_n) drawn without the record recursion"""
    inter_arrivals: np.ndarray
    sojourn_states: np.ndarray
    next_states: np.ndarray
    rhos: np.ndarray

    def __len__(self) -> int:
        return int(self.inter_arrivals.size)


def path_rng(seed: int, path_id: int) -> np.random.Generator:
    """ Independent generator for one path index, so ensembles do not depend on draw order """
    return np.random.default_rng(np.random.SeedSequence([seed, path_id]))


def simulate_path(spec: ModelSpec,
                  r0: float,
                  horizon: float,
                  rng: np.random.Generator,
                  nu0: Optional[int] = None,
                  jump_convention: str = 'destination') -> SamplePath:
    """Draws one sample path of the record process.

    Between jumps the record is constant. At each jump the waiting time is Exponential with the
    rate of the current state, the next state is drawn from the current row of Q, and the record
    moves by ρ(1 − r). ρ follows the Beta law of the destination state ('destination') or of the
    state being left ('source').

    Args:
      spec: validated model.
      r0: (float) initial record in [0, 1).
      horizon: (float) T > 0; jumps after T are discarded.
      rng: numpy Generator, consumed in a fixed order independent of r0.
      nu0: (int) 0-based initial state, drawn from π when None.
      jump_convention: (str) 'destination' or 'source'.

    Returns:
      SamplePath

    Raises:
    BadInitial: r0 outside [0, 1).
    """
    if not (0.0 <= r0 < 1.0):
        raise BadInitial(f"initial record must lie in [0, 1), got {r0}.")
    if not horizon > 0.0:
        raise utils.DomainError(f"horizon must be > 0, got {horizon}.")
    _check_convention(jump_convention)

    state = draw_state(spec.pi, rng) if nu0 is None else _check_state(spec, nu0)
    start_state = state
    t = 0.0
    r = r0
    times: list[float] = []
    states: list[int] = []
    records: list[float] = []
    rhos: list[float] = []

    while True:
        t += rng.standard_exponential() / spec.lam[state]
        if t > horizon:
            break
        nxt = draw_state(spec.Q[state], rng)
        law = spec.jump_laws[nxt] if jump_convention == 'destination' else spec.jump_laws[state]
        rho = draw_rho(law, rng)
        new_r = r + rho * (1.0 - r)
        if not new_r > r or new_r >= 1.0:
            logging.debug(f"Record saturated at {r!r} after {len(records)} jumps; path stopped at t={t}")
            break
        times.append(t)
        states.append(nxt)
        records.append(new_r)
        rhos.append(rho)
        r = new_r
        state = nxt

    return SamplePath(jump_times=np.array(times, dtype=float),
                      states=np.array(states, dtype=int),
                      records=np.array(records, dtype=float),
                      rhos=np.array(rhos, dtype=float),
                      initial_r=float(r0),
                      initial_state=int(start_state),
                      horizon=float(horizon))


def simulate_jumps(spec: ModelSpec,
                   n_jumps: int,
                   rng: np.random.Generator,
                   nu0: Optional[int] = None,
                   jump_convention: str = 'destination') -> JumpStream:
    """ Draw n_jumps consecutive (S_n, J_n, ρ_n) triples in the same order as simulate_path """
    if n_jumps < 0:
        raise utils.DomainError(f"n_jumps must be >= 0, got {n_jumps}.")
    _check_convention(jump_convention)

    state = draw_state(spec.pi, rng) if nu0 is None else _check_state(spec, nu0)
    s = np.empty(n_jumps)
    src = np.empty(n_jumps, dtype=int)
    dst = np.empty(n_jumps, dtype=int)
    rho = np.empty(n_jumps)
    for n in range(n_jumps):
        s[n] = rng.standard_exponential() / spec.lam[state]
        nxt = draw_state(spec.Q[state], rng)
        law = spec.jump_laws[nxt] if jump_convention == 'destination' else spec.jump_laws[state]
        rho[n] = draw_rho(law, rng)
        src[n] = state
        dst[n] = nxt
        state = nxt
    return JumpStream(inter_arrivals=s, sojourn_states=src, next_states=dst, rhos=rho)


def path_to_events(path: SamplePath) -> list[JumpEvent]:
    """Converts a sample path into jump events.

    ρ_n = (R_{T_n} − R_{T_{n−1}})/(1 − R_{T_{n−1}}); label is the 1-based sojourn state.

    Raises:
    DegenerateRecord: some 1 − R_{T_{n−1}} is below 1e-12.
    """
    events: list[JumpEvent] = []
    prev_r = path.initial_r
    prev_t = 0.0
    for t, r, sojourn in zip(path.jump_times, path.records, path.sojourn_states):
        headroom = 1.0 - prev_r
        if headroom < DEGENERATE_TOL:
            raise DegenerateRecord(f"record {prev_r!r} before t={t} leaves no headroom.")
        events.append(JumpEvent(time=float(t),
                                inter_arrival=float(t) - prev_t,
                                prev_record=float(prev_r),
                                new_record=float(r),
                                rho=(float(r) - prev_r) / headroom,
                                label=int(sojourn) + 1))
        prev_r = float(r)
        prev_t = float(t)
    return events


def draw_state(probs: np.ndarray, rng: np.random.Generator) -> int:
    """ Inverse-CDF draw of a 0-based index from a probability vector """
    idx = int(np.searchsorted(np.cumsum(probs), rng.random(), side='right'))
    return min(idx, len(probs) - 1)


def draw_rho(law: BetaLaw, rng: np.random.Generator) -> float:
    """ Beta draw restricted to the open interval (0, 1) """
    while True:
        rho = float(rng.beta(law.alpha, law.beta))
        if 0.0 < rho < 1.0:
            return rho


def _check_convention(jump_convention: str) -> None:
    if jump_convention not in JUMP_CONVENTIONS:
        raise utils.InputError(f"jump convention must be one of {JUMP_CONVENTIONS}, got <{jump_convention}>.")


def _check_state(spec: ModelSpec, nu0: int) -> int:
    if not (0 <= nu0 < spec.k):
        raise utils.DomainError(f"initial state {nu0} outside 0..{spec.k - 1}.")
    return int(nu0)
