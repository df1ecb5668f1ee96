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

from src.model.spec import BetaLaw, ModelSpec

MODELS_DIR = Path(__file__).resolve().parent.parent / 'models'


def one_state(lam: float, alpha: float, beta: float) -> ModelSpec:
    return ModelSpec(pi=np.array([1.0]), Q=np.array([[1.0]]), lam=np.array([lam]),
                     jump_laws=(BetaLaw(alpha, beta),))


def random_spec(rng: np.random.Generator, k: int) -> ModelSpec:
    """ Random valid spec with rates in [0.1, 5] and Beta shapes in [0.5, 50] """
    return ModelSpec(pi=rng.dirichlet(np.ones(k)),
                     Q=rng.dirichlet(np.ones(k), size=k),
                     lam=rng.uniform(0.1, 5.0, size=k),
                     jump_laws=tuple(BetaLaw(a, b) for a, b in rng.uniform(0.5, 50.0, size=(k, 2))))


def brute_drawdown(prices: np.ndarray) -> np.ndarray:
    """ D_t = max over s <= t of (P_s − P_t)/P_s """
    return np.array([np.max((prices[:t + 1] - prices[t]) / prices[:t + 1]) for t in range(prices.size)])


def brute_records(dd: np.ndarray) -> list[tuple[int, bool]]:
    """(index, provisional) of every record: D_t beats all earlier values and the next
    different value is smaller (none at all makes it provisional)"""
    out = []
    for t in range(dd.size):
        if dd[t] <= (dd[:t].max() if t else 0.0):
            continue
        later = dd[t + 1:][dd[t + 1:] != dd[t]]
        if later.size == 0:
            out.append((t, True))
        elif later[0] < dd[t]:
            out.append((t, False))
    return out


def random_walk(rng: np.random.Generator, n: int) -> np.ndarray:
    return 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=n)))
