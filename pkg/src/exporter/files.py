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
from typing import Optional

import numpy as np

# Local Modules
import src.utils as utils
from src.analytics.moments import MomentCurve, VarianceCurve
from src.records.drawdown import PriceSeries
from src.simulate.ensemble import EnsembleStats
from src.simulate.sampler import SamplePath


def write_moments(path: str, mean: MomentCurve, variance: VarianceCurve, chebyshev: Optional[np.ndarray] = None) -> None:
    """ `t,mean,var[,bound][,chebyshev]` """
    columns = {'t': mean.grid, 'mean': mean.mixed, 'var': variance.values}
    if variance.bound is not None:
        columns['bound'] = variance.bound
    if chebyshev is not None:
        columns['chebyshev'] = chebyshev
    utils.write_csv(path, columns)


def write_curve(path: str, curve: MomentCurve) -> None:
    """ `t,mixed,state_1,...,state_k` """
    columns = {'t': curve.grid, 'mixed': curve.mixed}
    for v, row in enumerate(curve.per_state):
        columns[f"state_{v + 1}"] = row
    utils.write_csv(path, columns)


def write_ensemble(path: str, stats: EnsembleStats) -> None:
    """ `t,mean,var,p05,p95[,above_<level>...]` """
    columns = {'t': stats.grid, 'mean': stats.mean, 'var': stats.var, 'p05': stats.p05, 'p95': stats.p95}
    for level, frac in stats.above.items():
        columns[f"above_{level:g}"] = frac
    utils.write_csv(path, columns)


def write_paths(path: str, paths: list[SamplePath]) -> None:
    """ `path_id,T_n,state,record`; row T_n=0 holds the initial state and record """
    rows: dict[str, list] = {'path_id': [], 'T_n': [], 'state': [], 'record': []}
    for pid, sample in enumerate(paths):
        rows['path_id'].append(pid)
        rows['T_n'].append(0.0)
        rows['state'].append(sample.initial_state + 1)
        rows['record'].append(sample.initial_r)
        for t, state, record in zip(sample.jump_times, sample.states, sample.records):
            rows['path_id'].append(pid)
            rows['T_n'].append(float(t))
            rows['state'].append(int(state) + 1)
            rows['record'].append(float(record))
    utils.write_csv(path, rows)


def write_prices(path: str, series: PriceSeries) -> None:
    """ `date,close` with numeric dates """
    utils.write_csv(path, {'date': series.times, 'close': series.prices})
