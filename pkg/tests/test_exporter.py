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

import numpy as np
import pandas as pd
from prometheus_client import CollectorRegistry

from src.analytics.moments import chebyshev_bound, mean_curve, variance_curve
from src.common_types import RunMetric, RunMetricBundle, RunMetricType
from src.exporter import files
from src.exporter.promexp import StatsExporter
from src.simulate.ensemble import monte_carlo
from tests.helpers import one_state

BASE = {'instance_name': 'default', 'command': 'fit'}


def _registry(exporter: StatsExporter) -> CollectorRegistry:
    registry = CollectorRegistry()
    registry.register(exporter)
    return registry


def test_gauge_and_counter():
    exp = StatsExporter({})
    exp.gauge('fit', 'fit_iterations', 'Labeling iterations', 7)
    exp.gauge('fit', 'state_rate', 'Fitted rate per state', 0.47, labels={'state': '1'})
    exp.counter('fit', 'events', 'Events used by the fit', 120)
    reg = _registry(exp)

    assert reg.get_sample_value('pdmp_fit_iterations', BASE) == 7.0
    assert reg.get_sample_value('pdmp_state_rate', {**BASE, 'state': '1'}) == 0.47
    assert reg.get_sample_value('pdmp_events_total', BASE) == 120.0


def test_bundles_are_extended():
    exp = StatsExporter({})
    exp.gauge('fit', 'state_rate', 'Fitted rate per state', 0.47, labels={'state': '1'})
    exp.gauge('fit', 'state_rate', 'Fitted rate per state', 0.00054, labels={'state': '2'})
    reg = _registry(exp)
    assert reg.get_sample_value('pdmp_state_rate', {**BASE, 'state': '2'}) == 0.00054
    assert reg.get_sample_value('pdmp_exported_metrics', {'instance_name': 'default', 'command': 'all'}) == 4.0
    assert reg.get_sample_value('pdmp_exported_series', {'instance_name': 'default', 'command': 'all'}) == 5.0


def test_invalid_bundles_are_dropped():
    exp = StatsExporter({})
    exp.add_bundle(RunMetricBundle(type=RunMetricType.GAUGE, command='', metric_name='orphan'))
    exp.add_bundle(RunMetricBundle(type=RunMetricType.UNKNOWN, command='fit', metric_name='untyped'))
    exp.add_bundle(RunMetricBundle(type=RunMetricType.GAUGE, command='fit', metric_name='ragged',
                                   labelset=['state'], metrics=[RunMetric(labelval=[], val=1.0)]))
    names = [family.name for family in exp.collect()]
    assert names == ['pdmp_exported_metrics', 'pdmp_exported_series', 'pdmp_run_seconds']


def test_config_and_text_file(tmp_path):
    out = tmp_path / 'metrics' / 'run.prom'
    exp = StatsExporter({'instance_name': 'nightly', 'metric_prefix': 'dd', 'metrics_file': str(out)})
    exp.gauge('simulate', 'paths', 'Simulated paths', 500)
    assert exp.write() == str(out)
    text = out.read_text()
    assert 'dd_paths{command="simulate",instance_name="nightly"} 500.0' in text
    assert 'dd_run_seconds' in text


def test_no_text_file_without_path():
    exp = StatsExporter({'metrics_file': ''})
    assert exp.metrics_file == ''
    assert exp.write() is None


def test_moments_file(tmp_path):
    spec = one_state(1.0, 1.0, 9.0)
    grid = np.linspace(0.0, 10.0, 11)
    mean = mean_curve(spec, 0.0, grid)
    var = variance_curve(spec, 0.0, grid)
    out = tmp_path / 'moments.csv'
    files.write_moments(str(out), mean, var, chebyshev_bound(var, 0.1))

    frame = pd.read_csv(out)
    assert list(frame.columns) == ['t', 'mean', 'var', 'bound', 'chebyshev']
    assert frame['t'].iloc[0] == 0.0 and frame['mean'].iloc[0] == 0.0
    np.testing.assert_allclose(frame['mean'].to_numpy(), mean.mixed, rtol=1e-14, atol=0)


def test_curve_file(tmp_path, table1):
    curve = mean_curve(table1, 0.0, np.linspace(0.0, 5.0, 6))
    out = tmp_path / 'curves.csv'
    files.write_curve(str(out), curve)
    assert list(pd.read_csv(out).columns) == ['t', 'mixed', 'state_1', 'state_2']


def test_ensemble_and_paths_files(tmp_path, table1):
    grid = np.linspace(0.0, 10.0, 21)
    stats = monte_carlo(table1, 0.0, 10.0, grid, 5, seed=1, levels=(0.5,), keep_paths=2)
    files.write_ensemble(str(tmp_path / 'stats.csv'), stats)
    files.write_paths(str(tmp_path / 'paths.csv'), stats.paths)

    frame = pd.read_csv(tmp_path / 'stats.csv')
    assert list(frame.columns) == ['t', 'mean', 'var', 'p05', 'p95', 'above_0.5']
    paths = pd.read_csv(tmp_path / 'paths.csv')
    assert list(paths.columns) == ['path_id', 'T_n', 'state', 'record']
    assert len(paths) == 2 + sum(len(p) for p in stats.paths)
    first = paths[paths['path_id'] == 0]
    assert first['T_n'].iloc[0] == 0.0 and first['record'].iloc[0] == 0.0
    assert set(paths['state']) <= {1, 2}
