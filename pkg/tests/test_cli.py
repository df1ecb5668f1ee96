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

import json

import numpy as np
import pandas as pd
import pytest

import src.core as core
import src.main as main
import src.utils as utils
from src.model.spec import load_model
from src.records.ingest import EVENT_COLUMNS, read_events
from tests.helpers import MODELS_DIR

TABLE1 = str(MODELS_DIR / 'table1.json')


def _run(*argv) -> int:
    return main.main([str(arg) for arg in argv])


def test_records_on_monotone_prices(tmp_path, capsys):
    prices = tmp_path / 'prices.csv'
    prices.write_text('date,close\n2024-01-01,1\n2024-01-02,2\n2024-01-03,3\n')
    out = tmp_path / 'events.csv'
    assert _run('records', prices, out) == 0
    assert out.read_text().splitlines()[0] == ','.join(EVENT_COLUMNS)
    assert read_events(str(out)) == []
    assert 'records: 0 events' in capsys.readouterr().out


def test_records_reports_bad_line(tmp_path):
    rows = ['2024-01-0%d,%d' % (d, 100 - d) for d in range(1, 6)] + ['2024-01-08,n/a']
    prices = tmp_path / 'prices.csv'
    prices.write_text('date,close\n' + '\n'.join(rows) + '\n')
    assert _run('records', prices, tmp_path / 'events.csv') == 2


def test_fit_missing_input(tmp_path):
    assert _run('fit', tmp_path / 'missing.csv', tmp_path / 'fit.json') == 2


def test_missing_config_file(tmp_path):
    assert _run('moments', TABLE1, tmp_path / 'm.csv', '--config', tmp_path / 'nope.yaml') == 2


def test_simulate_minimal(tmp_path):
    out = tmp_path / 'stats.csv'
    paths = tmp_path / 'paths.csv'
    assert _run('simulate', TABLE1, out, '--n-paths', 2, '--paths', paths, '--levels', 0.5) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ['t', 'mean', 'var', 'p05', 'p95', 'above_0.5']
    assert len(frame) == 101
    assert frame['t'].iloc[-1] == 50.0
    assert pd.read_csv(paths)['path_id'].nunique() == 2


def test_simulate_bad_initial_record(tmp_path):
    assert _run('simulate', TABLE1, tmp_path / 'stats.csv', '--n-paths', 2, '--r0', 1.0) == 3


def test_simulate_too_few_paths(tmp_path):
    assert _run('simulate', TABLE1, tmp_path / 'stats.csv', '--n-paths', 1) == 3


def test_failed_run_still_writes_metrics(tmp_path):
    metrics = tmp_path / 'run.prom'
    assert _run('simulate', TABLE1, tmp_path / 'stats.csv', '--n-paths', 1, '--metrics-file', metrics) == 3
    assert 'pdmp_exit_code{command="simulate",instance_name="default"} 3.0' in metrics.read_text()
    assert not (tmp_path / 'stats.csv').exists()


def test_simulate_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert _run('simulate', TABLE1, first, '--n-paths', 50, '--seed', 11) == 0
    assert _run('simulate', TABLE1, second, '--n-paths', 50, '--seed', 11) == 0
    assert first.read_bytes() == second.read_bytes()


def test_moments_first_row(tmp_path):
    out = tmp_path / 'moments.csv'
    assert _run('moments', TABLE1, out, '--r0', 0.3, '--eps', 0.1, '--curves', tmp_path / 'curves.csv') == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ['t', 'mean', 'var', 'chebyshev']
    assert frame['t'].iloc[0] == 0.0
    assert frame['mean'].iloc[0] == pytest.approx(0.3, abs=1e-12)
    assert frame['var'].iloc[0] == pytest.approx(0.0, abs=1e-12)
    assert (tmp_path / 'curves.csv').exists()


def test_moments_one_state_bound(tmp_path):
    model = tmp_path / 'one.json'
    model.write_text(json.dumps({'k': 1, 'pi': [1.0], 'Q': [[1.0]], 'lambda': [1.0],
                                 'jump_laws': [{'alpha': 1.0, 'beta': 9.0}]}))
    out = tmp_path / 'moments.csv'
    assert _run('moments', model, out, '--horizon', 10, '--step', 1) == 0
    frame = pd.read_csv(out)
    assert frame['mean'].iloc[-1] == pytest.approx(1.0 - np.exp(-1.0), abs=1e-7)
    assert np.all(frame['var'] <= frame['bound'] + 1e-12)


def test_invalid_model_is_a_domain_error(tmp_path):
    model = tmp_path / 'bad.json'
    model.write_text(json.dumps({'k': 1, 'pi': [1.0], 'Q': [[0.5]], 'lambda': [1.0],
                                 'jump_laws': [{'alpha': 1.0, 'beta': 9.0}]}))
    assert _run('moments', model, tmp_path / 'm.csv') == 3


def test_synth_then_records_then_fit(tmp_path):
    prices, events, fit = tmp_path / 'prices.csv', tmp_path / 'events.csv', tmp_path / 'fit.json'
    assert _run('synth', MODELS_DIR / 'table2.json', prices, '--horizon', 40000, '--seed', 5) == 0
    assert _run('records', prices, events) == 0
    assert _run('fit', events, fit, '--model-out', tmp_path / 'model.json', '--init', 'split') == 0
    data = json.loads(fit.read_text())
    assert data['converged'] is True
    assert len(data['labels']) == len(read_events(str(events)))
    assert load_model(str(tmp_path / 'model.json')).k == 2


def test_pipeline(tmp_path, prices_csv):
    out = tmp_path / 'run'
    metrics = tmp_path / 'run.prom'
    assert _run('pipeline', prices_csv, out, '--n-paths', 500, '--metrics-file', metrics) == 0
    for name in ('events.csv', 'fit.json', 'model.json', 'stats.csv', 'moments.csv'):
        assert (out / name).exists()

    spec = load_model(str(out / 'model.json'))
    assert spec.lam[1] / spec.lam[0] >= 10.0
    text = metrics.read_text()
    assert 'pdmp_exit_code{command="pipeline",instance_name="default"} 0.0' in text
    assert 'pdmp_fitted_rate' in text


def test_config_precedence():
    raw = {'global': {'seed': 1, 'n_paths': 5, 'horizon': 20},
           'simulate': {'n_paths': 3, 'levels': 0.5},
           'moments': {'horizon': 99}}
    cfg = core.App(raw, 'simulate', {'n_paths': 4}).config
    assert (cfg.seed, cfg.n_paths, cfg.horizon, cfg.levels) == (1, 4, 20.0, [0.5])


@pytest.mark.parametrize('raw', [
    {'simulate': {'bogus': 1}},
    {'plotting': {}},
    {'global': {'seed': 'many'}},
    {'global': ['seed']},
])
def test_bad_config_is_an_input_error(raw):
    with pytest.raises(utils.InputError):
        core.App(raw, 'simulate', {})


def test_unknown_config_key_exit_code(tmp_path):
    cfg = tmp_path / 'config.yaml'
    cfg.write_text('simulate:\n  bogus: 1\n')
    assert _run('simulate', TABLE1, tmp_path / 'stats.csv', '--config', cfg) == 2


@pytest.mark.parametrize('horizon, step, expected', [
    (1.0, 0.5, [0.0, 0.5, 1.0]),
    (1.0, 0.3, [0.0, 0.3, 0.6, 0.9, 1.0]),
    (50.0, 0.5, None),
])
def test_make_grid(horizon, step, expected):
    grid = core.make_grid(horizon, step)
    assert grid[0] == 0.0 and grid[-1] == horizon
    if expected is None:
        assert grid.size == 101
    else:
        np.testing.assert_allclose(grid, expected)
    with pytest.raises(utils.DomainError):
        core.make_grid(horizon, 0.0)
