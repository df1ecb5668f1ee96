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
import os
import logging
import dataclasses
from typing import Any

import numpy as np

# Local Modules
import src.utils as utils
import src.exporter.files as files
from src.exporter.promexp import StatsExporter
from src.model.spec import ModelSpec, dump_model, load_model, stationary_law
from src.analytics.moments import chebyshev_bound, mean_curve, second_moment_curve, variance_curve
from src.records.drawdown import extract_records
from src.records.ingest import read_events, read_prices, write_events
from src.simulate.ensemble import monte_carlo
from src.simulate.synthetic import synthetic_fixture
from src.estimate.em import FitResult, em_fit

# Constants
COMMANDS = ('records', 'fit', 'simulate', 'moments', 'pipeline', 'synth')
_GRID_TOL = 1e-9


@dataclasses.dataclass
class RunConfig:
    """Parameters of one command run"""
    input: str = ''
    output: str = ''
    model: str = ''
    model_out: str = ''
    paths_out: str = ''
    curves_out: str = ''
    seed: int = 20240101
    r0: float = 0.0
    horizon: float = 50.0
    grid_step: float = 0.5
    rk4_step: float = 0.01
    n_paths: int = 10000
    k: int = 2
    delta: float = 1e-6
    max_iter: int = 200
    smoothing: float = 0.5
    min_events: int = 5
    init_strategy: str = 'kmeans'
    jump_convention: str = 'destination'
    time_unit: str = 'trading_days'
    calendar_days: bool = False
    paths_dump: int = 10
    levels: list[float] = dataclasses.field(default_factory=list)
    eps: float = 0.0
    noise_points: int = 0
    cross_check_tol: float = 1e-6
    metrics_file: str = ''
    instance_name: str = 'default'
    metric_prefix: str = 'pdmp'

    def _parse_config(self, raw: dict[str, Any], origin: str) -> None:
        """ Parse and load user config """
        unknown = set(raw) - {field.name for field in dataclasses.fields(self)}
        if unknown:
            raise utils.InputError(f"unknown key(s) {sorted(unknown)} in <{origin}>.")
        try:
            for key in ('input', 'output', 'model', 'model_out', 'paths_out', 'curves_out', 'init_strategy',
                        'jump_convention', 'time_unit', 'metrics_file', 'instance_name', 'metric_prefix'):
                if key in raw:
                    setattr(self, key, str(raw[key]))
            for key in ('seed', 'n_paths', 'k', 'max_iter', 'min_events', 'paths_dump', 'noise_points'):
                if key in raw:
                    setattr(self, key, int(raw[key]))
            for key in ('r0', 'horizon', 'grid_step', 'rk4_step', 'delta', 'smoothing', 'eps', 'cross_check_tol'):
                if key in raw:
                    setattr(self, key, float(raw[key]))
            if 'calendar_days' in raw:
                self.calendar_days = _as_bool(raw['calendar_days'])
            if 'levels' in raw:
                levels = raw['levels']
                self.levels = [float(v) for v in (levels if isinstance(levels, list) else [levels])]
        except (TypeError, ValueError) as e:
            raise utils.InputError(f"bad value in <{origin}>: {e}")


class App:
    """ Application main module """
    def __init__(self, raw_cfg: dict, command: str, overrides: dict[str, Any]):
        if command not in COMMANDS:
            raise utils.InputError(f"unknown command <{command}>.")
        self._command = command
        self._config = RunConfig()
        self._parse_raw_cfg(raw_cfg, overrides)
        self._exporter = StatsExporter({'instance_name': self._config.instance_name,
                                        'metric_prefix': self._config.metric_prefix,
                                        'metrics_file': self._config.metrics_file})

    @property
    def config(self) -> RunConfig:
        return self._config

    def run(self) -> int:
        """ Execute the configured command and return its exit code """
        logging.info(f"Running <{self._command}>...")
        handler = getattr(self, f"cmd_{self._command}")
        code = utils.Error.exit_code
        try:
            code = handler()
        except utils.Error as e:
            code = e.exit_code
            raise
        finally:
            self._exporter.gauge(self._command, 'exit_code', 'Exit code of the command', code)
            self._exporter.write()
        return code

    def cmd_records(self) -> int:
        """ prices CSV -> events CSV """
        cfg = self._config
        _require(cfg.input, 'input')
        _require(cfg.output, 'output')
        series = read_prices(cfg.input, calendar_days=cfg.calendar_days)
        events = extract_records(series)
        write_events(events, cfg.output)

        final = events[-1].new_record if events else 0.0
        if not events:
            logging.warning(f"No drawdown records in {cfg.input}; prices never fall")
        print(f"records: {len(events)} events, final record {final:.6f} ({cfg.time_unit})")
        self._exporter.gauge('records', 'events_extracted', 'Number of extracted drawdown records', len(events))
        self._exporter.gauge('records', 'final_record', 'Level of the last drawdown record', final)
        self._exporter.gauge('records', 'provisional_events', 'Records still open at series end',
                             sum(ev.provisional for ev in events))
        return 0

    def cmd_fit(self) -> int:
        """ events CSV -> FitResult JSON """
        cfg = self._config
        _require(cfg.input, 'input')
        _require(cfg.output, 'output')
        fit = self._fit(read_events(cfg.input), cfg.output, cfg.model_out)
        return 0 if fit.converged else utils.NoConvergence.exit_code

    def cmd_simulate(self) -> int:
        """ model JSON -> ensemble statistics CSV """
        cfg = self._config
        _require(cfg.model, 'model')
        _require(cfg.output, 'output')
        self._simulate(load_model(cfg.model), cfg.output, cfg.paths_out)
        return 0

    def cmd_moments(self) -> int:
        """ model JSON -> analytic curves CSV """
        cfg = self._config
        _require(cfg.model, 'model')
        _require(cfg.output, 'output')
        self._moments(load_model(cfg.model), cfg.output, cfg.curves_out)
        return 0

    def cmd_pipeline(self) -> int:
        """ prices CSV -> events, fit, fitted-model ensemble and moments in one folder """
        cfg = self._config
        _require(cfg.input, 'input')
        _require(cfg.output, 'output')
        os.makedirs(cfg.output, exist_ok=True)

        series = read_prices(cfg.input, calendar_days=cfg.calendar_days)
        events = extract_records(series)
        write_events(events, os.path.join(cfg.output, 'events.csv'))
        print(f"records: {len(events)} events, final record {events[-1].new_record if events else 0.0:.6f}")
        self._exporter.gauge('pipeline', 'events_extracted', 'Number of extracted drawdown records', len(events))

        fit = self._fit(events, os.path.join(cfg.output, 'fit.json'), os.path.join(cfg.output, 'model.json'))
        self._simulate(fit.spec, os.path.join(cfg.output, 'stats.csv'), '')
        self._moments(fit.spec, os.path.join(cfg.output, 'moments.csv'), '')
        return 0 if fit.converged else utils.NoConvergence.exit_code

    def cmd_synth(self) -> int:
        """ model JSON -> synthetic `date,close` CSV """
        cfg = self._config
        _require(cfg.model, 'model')
        _require(cfg.output, 'output')
        path, series = synthetic_fixture(load_model(cfg.model), cfg.horizon, cfg.seed,
                                         noise_points=cfg.noise_points, jump_convention=cfg.jump_convention)
        files.write_prices(cfg.output, series)
        print(f"synth: {len(path)} records, {len(series)} prices written to {cfg.output}")
        self._exporter.gauge('synth', 'synthetic_records', 'Records in the synthetic price series', len(path))
        return 0

    def _fit(self, events: list, out_json: str, out_model: str) -> FitResult:
        cfg = self._config
        fit = em_fit(events, cfg.k,
                     init_strategy=cfg.init_strategy,
                     delta=cfg.delta,
                     max_iter=cfg.max_iter,
                     smoothing=cfg.smoothing,
                     min_events=cfg.min_events,
                     seed=cfg.seed)
        fit.dump(out_json)
        if out_model:
            dump_model(fit.spec, out_model)

        spec = fit.spec
        embedded, occupancy = stationary_law(spec)
        print(f"fit: k={spec.k} events={len(fit.labels)} iterations={fit.iterations} converged={fit.converged}")
        for v in range(spec.k):
            law = spec.jump_laws[v]
            print(f"  state {v + 1}: lambda={spec.lam[v]:.6g} (mean inter-arrival {1.0 / spec.lam[v]:.6g} "
                  f"{cfg.time_unit}) beta=({law.alpha:.6g}, {law.beta:.6g}) pi={spec.pi[v]:.4f} "
                  f"stationary={embedded[v]:.4f} time_share={occupancy[v]:.4f}")
        print(f"  Q={np.array2string(spec.Q, precision=3)}")

        self._exporter.gauge('fit', 'em_iterations', 'Iterations of the labeling loop', fit.iterations)
        self._exporter.gauge('fit', 'em_converged', 'Whether the labeling loop converged', int(fit.converged))
        self._exporter.gauge('fit', 'loglik', 'Final total log-likelihood', fit.loglik_trace[-1])
        self._exporter.counter('fit', 'em_reseeded_events', 'Events moved to refill states', fit.reseeds)
        for v in range(spec.k):
            self._exporter.gauge('fit', 'fitted_rate', 'Fitted jump rate per state', float(spec.lam[v]),
                                 labels={'state': str(v + 1)})
        if not fit.converged:
            logging.warning(f"Fit written to {out_json} without convergence")
        return fit

    def _simulate(self, spec: ModelSpec, out_csv: str, paths_csv: str) -> None:
        cfg = self._config
        grid = make_grid(cfg.horizon, cfg.grid_step)
        stats = monte_carlo(spec, cfg.r0, cfg.horizon, grid, cfg.n_paths, cfg.seed,
                            jump_convention=cfg.jump_convention,
                            levels=cfg.levels,
                            keep_paths=cfg.paths_dump if paths_csv else 0)
        files.write_ensemble(out_csv, stats)
        if paths_csv:
            files.write_paths(paths_csv, stats.paths)
        print(f"simulate: {stats.n_paths} paths, {stats.total_jumps} jumps, "
              f"mean R_T={stats.mean[-1]:.6f} var R_T={stats.var[-1]:.6f}")
        self._exporter.gauge('simulate', 'paths_simulated', 'Number of simulated paths', stats.n_paths)
        self._exporter.counter('simulate', 'jumps_simulated', 'Total number of simulated jumps', stats.total_jumps)

    def _moments(self, spec: ModelSpec, out_csv: str, curves_csv: str) -> None:
        cfg = self._config
        grid = make_grid(cfg.horizon, cfg.grid_step)
        mean = mean_curve(spec, cfg.r0, grid, cfg.rk4_step)
        second = second_moment_curve(spec, cfg.r0, grid, cfg.rk4_step)
        variance = variance_curve(spec, cfg.r0, grid, cfg.rk4_step)

        deviations = [d for d in (mean.deviation, second.deviation) if np.isfinite(d)]
        worst = max(deviations, default=0.0)
        self._exporter.gauge('moments', 'cross_check_deviation', 'Sup-norm gap between solution methods', worst)
        if worst > cfg.cross_check_tol:
            raise utils.NumericalFault(f"moment cross-check gap {worst:.3e} exceeds {cfg.cross_check_tol:.1e}.")

        bound = chebyshev_bound(variance, cfg.eps) if cfg.eps > 0.0 else None
        files.write_moments(out_csv, mean, variance, bound)
        if curves_csv:
            files.write_curve(curves_csv, mean)
        _, occupancy = stationary_law(spec)
        print(f"moments: mean R_T={mean.mixed[-1]:.6f} var R_T={variance.values[-1]:.6f} "
              f"max var {variance.values.max():.6f} at t={grid[int(np.argmax(variance.values))]:g}; "
              f"cross-check gap {worst:.3e} ({mean.method}); time share {np.round(occupancy, 4).tolist()}")

    def _parse_raw_cfg(self, raw_cfg: dict, overrides: dict[str, Any]) -> None:
        """ defaults < global section < command section < command-line flags """
        unknown = set(raw_cfg) - {'global', *COMMANDS}
        if unknown:
            raise utils.InputError(f"unknown config section(s) {sorted(unknown)}.")
        for section in ('global', self._command):
            raw = raw_cfg.get(section) or {}
            if not isinstance(raw, dict):
                raise utils.InputError(f"config section <{section}> must be a mapping.")
            self._config._parse_config(raw, section)
        self._config._parse_config(overrides, 'command line')


def make_grid(horizon: float, step: float) -> np.ndarray:
    """ 0, step, 2·step, ... up to the horizon, which is always the last point """
    if not horizon > 0.0 or not step > 0.0:
        raise utils.DomainError(f"horizon and grid step must be > 0, got {horizon} and {step}.")
    n = int(np.floor(horizon / step + _GRID_TOL))
    grid = step * np.arange(n + 1)
    if horizon - grid[-1] > _GRID_TOL * max(1.0, horizon):
        grid = np.append(grid, horizon)
    else:
        grid[-1] = horizon
    return grid


def _require(value: str, name: str) -> None:
    if not value:
        raise utils.InputError(f"missing <{name}> path.")


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"<{value}> is not a boolean")
