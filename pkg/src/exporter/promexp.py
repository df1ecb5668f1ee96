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
import time
import logging
from threading import Lock
from typing import Optional
from dataclasses import dataclass
from prometheus_client import CollectorRegistry, write_to_textfile
from prometheus_client.registry import Collector
from prometheus_client.core import GaugeMetricFamily, CounterMetricFamily

# Local Modules
from src.common_types import RunMetricBundle, RunMetricType, RunMetric


@dataclass
class _StatsExporterConfig:
    """StatsExporter config"""
    instance_name: str = 'default'
    metric_prefix: str = 'pdmp'
    metrics_file: str = ''


class StatsExporter(Collector):
    """ Run statistics exported as a Prometheus text file """
    def __init__(self, global_cfg: dict):
        self._config = _StatsExporterConfig()
        self._parse_config(global_cfg)

        self._mutex = Lock()
        self._bundle_table: dict[str, RunMetricBundle] = {}
        self._started = time.monotonic()

    @property
    def metrics_file(self) -> str:
        return self._config.metrics_file

    def add_bundle(self, bundle: RunMetricBundle) -> None:
        """ Add (or extend) a metric bundle; invalid bundles are dropped """
        if not bundle.is_valid():
            logging.debug(f"Dropping invalid metric bundle <{bundle.metric_name}>")
            return
        with self._mutex:
            if bundle.metric_name not in self._bundle_table:
                self._bundle_table[bundle.metric_name] = bundle
            else:
                self._bundle_table[bundle.metric_name].metrics.extend(bundle.metrics)

    def gauge(self, command: str, name: str, documentation: str, value: float,
              labels: Optional[dict[str, str]] = None) -> None:
        """ Shortcut for a single-sample gauge """
        self._add_single(RunMetricType.GAUGE, command, name, documentation, value, labels)

    def counter(self, command: str, name: str, documentation: str, value: float,
                labels: Optional[dict[str, str]] = None) -> None:
        """ Shortcut for a single-sample counter """
        self._add_single(RunMetricType.COUNTER, command, name, documentation, value, labels)

    def collect(self):
        """ Registry collection """
        with self._mutex:
            bundles = list(self._bundle_table.values())
        bundles.extend(self._compute_stats(bundles))

        for bundle in bundles:
            labelset = ['instance_name', 'command'] + bundle.labelset
            name = f"{self._config.metric_prefix}_{bundle.metric_name}"

            # Exporting Counter metrics types
            if bundle.type == RunMetricType.COUNTER:
                c = CounterMetricFamily(name=name, documentation=bundle.documentation, labels=labelset)
                for metric in bundle.metrics:
                    c.add_metric(labels=[self._config.instance_name, bundle.command] + metric.labelval,
                                 value=float(metric.val))
                yield c

            # Exporting Gauge metrics types
            elif bundle.type == RunMetricType.GAUGE:
                g = GaugeMetricFamily(name=name, documentation=bundle.documentation, labels=labelset)
                for metric in bundle.metrics:
                    g.add_metric(labels=[self._config.instance_name, bundle.command] + metric.labelval,
                                 value=float(metric.val))
                yield g

    def write(self) -> Optional[str]:
        """ Write the text file when one is configured; returns its path """
        if not self._config.metrics_file:
            return None
        folder = os.path.dirname(self._config.metrics_file)
        if folder:
            os.makedirs(folder, exist_ok=True)
        registry = CollectorRegistry()
        registry.register(self)
        write_to_textfile(self._config.metrics_file, registry)
        logging.info(f"Run metrics written to {self._config.metrics_file}")
        return self._config.metrics_file

    def _add_single(self, kind: RunMetricType, command: str, name: str, documentation: str, value: float,
                    labels: Optional[dict[str, str]]) -> None:
        labels = labels or {}
        self.add_bundle(RunMetricBundle(type=kind,
                                        command=command,
                                        metric_name=name,
                                        documentation=documentation,
                                        labelset=list(labels),
                                        metrics=[RunMetric(labelval=[str(v) for v in labels.values()],
                                                           val=float(value))]))

    def _compute_stats(self, bundles: list[RunMetricBundle]) -> list[RunMetricBundle]:
        """ Exporter self diagnostic metrics """
        series = sum(len(b.metrics) for b in bundles)
        return [
            RunMetricBundle(type=RunMetricType.GAUGE,
                            command='all',
                            metric_name='exported_metrics',
                            documentation='Number of exported metric families',
                            metrics=[RunMetric(val=len(bundles) + 3)]),  # +3 is the self metrics
            RunMetricBundle(type=RunMetricType.GAUGE,
                            command='all',
                            metric_name='exported_series',
                            documentation='Number of exported series',
                            metrics=[RunMetric(val=series + 3)]),
            RunMetricBundle(type=RunMetricType.GAUGE,
                            command='all',
                            metric_name='run_seconds',
                            documentation='Wall time of the run',
                            metrics=[RunMetric(val=time.monotonic() - self._started)]),
        ]

    def _parse_config(self, global_cfg: dict) -> None:
        """ Parse and load user config """
        if 'instance_name' in global_cfg:
            self._config.instance_name = str(global_cfg['instance_name'])
        if 'metric_prefix' in global_cfg:
            self._config.metric_prefix = str(global_cfg['metric_prefix'])
        if global_cfg.get('metrics_file'):
            self._config.metrics_file = str(global_cfg['metrics_file'])
