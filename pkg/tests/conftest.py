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

from pathlib import Path

import numpy as np
import pytest

from src.model.spec import BetaLaw, ModelSpec, table1_spec, table2_spec
from src.simulate.synthetic import synthetic_fixture
from src.exporter.files import write_prices

FIXTURE_SEED = 7
FIXTURE_HORIZON = 80000.0


@pytest.fixture
def table1() -> ModelSpec:
    return table1_spec()


@pytest.fixture
def table2() -> ModelSpec:
    return table2_spec()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def separated() -> ModelSpec:
    """Two states that hardly overlap in (s, ρ); slow state first"""
    return ModelSpec(pi=np.array([0.5, 0.5]),
                     Q=np.array([[0.6, 0.4], [0.3, 0.7]]),
                     lam=np.array([0.1, 10.0]),
                     jump_laws=(BetaLaw(5.0, 10.0), BetaLaw(2.0, 60.0)))


@pytest.fixture
def prices_csv(tmp_path, table2) -> Path:
    """ Synthetic `date,close` file generated from the fitted index model """
    _, series = synthetic_fixture(table2, FIXTURE_HORIZON, FIXTURE_SEED, noise_points=2)
    out = tmp_path / 'prices.csv'
    write_prices(str(out), series)
    return out
