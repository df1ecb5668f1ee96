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
import json
import logging
import dataclasses
from typing import Any

import numpy as np

# Local Modules
import src.utils as utils

# Constants
PROB_TOL = 1e-12


class NonStochasticRow(utils.DomainError):
    """A row of Q is not a probability vector"""


class BadProbabilityVector(utils.DomainError):
    """The initial law is not a probability vector"""


class NonPositiveRate(utils.DomainError):
    """A jump rate is not strictly positive"""


class BadShape(utils.DomainError):
    """A Beta shape parameter is not strictly positive"""


class DimensionMismatch(utils.DomainError):
    """The state count is inconsistent across fields"""


@dataclasses.dataclass(frozen=True)
class BetaLaw:
    """Jump-size law of one state"""
    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0.0):
            raise BadShape(f"Beta shape alpha must be > 0, got {self.alpha}.")
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise BadShape(f"Beta shape beta must be > 0, got {self.beta}.")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def second_moment(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * (self.alpha + 1.0) / (s * (s + 1.0))

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean ** 2

    def to_dict(self) -> dict[str, float]:
        return {'alpha': float(self.alpha), 'beta': float(self.beta)}


@dataclasses.dataclass(frozen=True, eq=False)
class ModelSpec:
    """Full parameterization of the record process.

    Every instance satisfies the invariants below; constructing one with bad values raises.
    Arrays are stored read-only so a spec can be shared between workers.
    """
    pi: np.ndarray
    Q: np.ndarray
    lam: np.ndarray
    jump_laws: tuple[BetaLaw, ...]

    def __post_init__(self):
        pi = _frozen(self.pi)
        q = _frozen(self.Q)
        lam = _frozen(self.lam)
        object.__setattr__(self, 'pi', pi)
        object.__setattr__(self, 'Q', q)
        object.__setattr__(self, 'lam', lam)
        object.__setattr__(self, 'jump_laws', tuple(self.jump_laws))

        k = lam.shape[0]
        if k < 1:
            raise DimensionMismatch('at least one state is required.')
        if pi.shape != (k,):
            raise DimensionMismatch(f"pi has shape {pi.shape}, expected ({k},).")
        if q.shape != (k, k):
            raise DimensionMismatch(f"Q has shape {q.shape}, expected ({k}, {k}).")
        if len(self.jump_laws) != k:
            raise DimensionMismatch(f"{len(self.jump_laws)} jump laws given for {k} states.")

        for i, row in enumerate(q):
            if not _is_probability_vector(row):
                raise NonStochasticRow(f"row {i + 1} of Q is not a probability vector: {row.tolist()}.")
        if not _is_probability_vector(pi):
            raise BadProbabilityVector(f"pi is not a probability vector: {pi.tolist()}.")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0.0):
            raise NonPositiveRate(f"jump rates must be > 0, got {lam.tolist()}.")

    @property
    def k(self) -> int:
        return int(self.lam.shape[0])

    @property
    def mu(self) -> np.ndarray:
        return np.array([law.mean for law in self.jump_laws])

    @property
    def mu2(self) -> np.ndarray:
        return np.array([law.second_moment for law in self.jump_laws])

    def to_dict(self) -> dict[str, Any]:
        return {'k': self.k,
                'pi': self.pi.tolist(),
                'Q': self.Q.tolist(),
                'lambda': self.lam.tolist(),
                'jump_laws': [law.to_dict() for law in self.jump_laws]}


def validate(raw: dict[str, Any]) -> ModelSpec:
    """Builds a ModelSpec from a raw model description.

    Args:
      raw: (dict) with keys "pi", "Q", "lambda", "jump_laws" and an optional "k".

    Returns:
      a ModelSpec satisfying all invariants.

    Raises:
    InputError: a field is missing or not numeric.
    DomainError: one of the model invariants fails (see the subclasses above).
    """
    if not isinstance(raw, dict):
        raise utils.InputError('model description must be a mapping.')
    for key in ('pi', 'Q', 'lambda', 'jump_laws'):
        if key not in raw:
            raise utils.InputError(f"model description is missing <{key}>.")
    unknown = set(raw) - {'k', 'pi', 'Q', 'lambda', 'jump_laws'}
    if unknown:
        raise utils.InputError(f"unknown model keys: {sorted(unknown)}.")

    lam = utils.as_float_array(raw['lambda'], 'lambda')
    pi = utils.as_float_array(raw['pi'], 'pi')
    q = utils.as_float_array(raw['Q'], 'Q', ndim=2)

    laws: list[BetaLaw] = []
    if not isinstance(raw['jump_laws'], list):
        raise utils.InputError('field <jump_laws> must be a list.')
    for law in raw['jump_laws']:
        try:
            laws.append(BetaLaw(alpha=float(law['alpha']), beta=float(law['beta'])))
        except (KeyError, TypeError, ValueError):
            raise utils.InputError(f"jump law {law!r} must provide numeric <alpha> and <beta>.")

    if 'k' in raw:
        try:
            k = int(raw['k'])
        except (TypeError, ValueError):
            raise utils.InputError(f"field <k> is not an integer: {raw['k']!r}.")
        if k < 1 or k != lam.shape[0]:
            raise DimensionMismatch(f"k={k} but {lam.shape[0]} jump rates were given.")

    return ModelSpec(pi=pi, Q=q, lam=lam, jump_laws=tuple(laws))


def load_model(path: str) -> ModelSpec:
    """ Load a model JSON file """
    try:
        with open(path, 'r') as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise utils.InputError(f"model file {path} not found.")
    except json.JSONDecodeError as e:
        raise utils.InputError(f"model file {path} is not valid JSON (line {e.lineno}).")
    spec = validate(raw)
    logging.debug(f"Loaded {spec.k}-state model from {path}")
    return spec


def dump_model(spec: ModelSpec, path: str) -> None:
    with open(path, 'w') as f:
        json.dump(spec.to_dict(), f, indent=2)
        f.write('\n')


def stationary_law(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Long-run behaviour of the state process.

    Returns the stationary law of the embedded chain (π Q = π) and the long-run fraction
    of time spent in each state, proportional to π_i / λ_i.
    """
    k = spec.k
    a = np.vstack([spec.Q.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    embedded, *_ = np.linalg.lstsq(a, b, rcond=None)
    embedded = np.clip(embedded, 0.0, None)
    embedded /= embedded.sum()
    occupancy = embedded / spec.lam
    return embedded, occupancy / occupancy.sum()


def table1_spec() -> ModelSpec:
    """Two-state illustrative model: Exponential(2)/Exponential(1), Beta(2,20)/Beta(2,30)"""
    return ModelSpec(pi=np.array([0.5, 0.5]),
                     Q=np.array([[0.6, 0.4], [0.5, 0.5]]),
                     lam=np.array([2.0, 1.0]),
                     jump_laws=(BetaLaw(2.0, 20.0), BetaLaw(2.0, 30.0)))


def table2_spec() -> ModelSpec:
    """Two-state model fitted to daily index drawdown records (rates per trading day)"""
    return ModelSpec(pi=np.array([0.5, 0.5]),
                     Q=np.array([[0.883, 0.117], [0.75, 0.25]]),
                     lam=np.array([0.47, 5.4e-4]),
                     jump_laws=(BetaLaw(1.83, 145.90), BetaLaw(0.77, 47.86)))


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _is_probability_vector(vec: np.ndarray) -> bool:
    if not np.all(np.isfinite(vec)):
        return False
    if np.any(vec < 0.0) or np.any(vec > 1.0):
        return False
    return bool(abs(vec.sum() - 1.0) <= PROB_TOL)
