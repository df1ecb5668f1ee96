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
import warnings
import dataclasses
from collections.abc import Sequence
from typing import Any

import numpy as np
from scipy.cluster.vq import kmeans2

# Local Modules
import src.utils as utils
from src.common_types import JumpEvent
from src.model.spec import BetaLaw, ModelSpec
from src.records.drawdown import events_to_observations
from src.estimate.fitters import beta_mle, fit_exponential, loglik_matrix

# Constants
INIT_STRATEGIES = ('kmeans', 'split')
EVENTS_PER_STATE = 10
DECREASE_TOL = 1e-9


class TooFewEvents(utils.DomainError):
    """Not enough events for the requested number of states"""


class EmptyCluster(utils.DomainError):
    """A state lost (almost) all of its events during relabeling"""


@dataclasses.dataclass(frozen=True, eq=False)
class FitResult:
    """Estimated model plus the trace of the labeling loop.

    labels are 1-based; loglik_trace holds the total log-likelihood after each accepted
    relabeling and is non-decreasing.
    """
    spec: ModelSpec
    labels: np.ndarray
    loglik_trace: list[float]
    converged: bool
    iterations: int
    reseeds: int = 0
    beta_fallbacks: int = 0

    def to_dict(self) -> dict[str, Any]:
        out = self.spec.to_dict()
        del out['k']
        out.update({'labels': [int(v) for v in self.labels],
                    'loglik_trace': [float(v) for v in self.loglik_trace],
                    'converged': bool(self.converged),
                    'iterations': int(self.iterations)})
        return out

    def dump(self, path: str) -> None:
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)


def classify(events: Sequence[JumpEvent], spec: ModelSpec) -> np.ndarray:
    """ 1-based argmax-likelihood state of every event; ties go to the lowest state """
    x, y = events_to_observations(events)
    return np.argmax(loglik_matrix(x, y, spec.lam, spec.jump_laws), axis=1) + 1


def estimate_Q(labels: Sequence[int], k: int, smoothing: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix from consecutive 1-based labels.

    Q̂_ij = (C_ij + s)/(C_i + k·s). A row without departures and s = 0 is uniform.

    Returns:
      (Q̂, C) with C the raw k×k transition counts.
    """
    if smoothing < 0.0:
        raise utils.DomainError(f"smoothing must be >= 0, got {smoothing}.")
    idx = np.asarray(labels, dtype=int) - 1
    if idx.size and (idx.min() < 0 or idx.max() >= k):
        raise utils.DomainError(f"labels must lie in 1..{k}.")

    counts = np.zeros((k, k))
    np.add.at(counts, (idx[:-1], idx[1:]), 1.0)
    smoothed = counts + smoothing
    rows = smoothed.sum(axis=1, keepdims=True)
    q = np.where(rows > 0.0, smoothed / np.where(rows > 0.0, rows, 1.0), 1.0 / k)
    return q, counts


def em_fit(events: Sequence[JumpEvent],
           k: int,
           init_strategy: str = 'kmeans',
           delta: float = 1e-6,
           max_iter: int = 200,
           smoothing: float = 0.5,
           min_events: int = 5,
           seed: int = 0,
           time_scale: float = 1.0) -> FitResult:
    """ Fit a k-state model to jump events (see em_fit_observations) """
    x, y = events_to_observations(events, scale=time_scale)
    return em_fit_observations(x, y, k, init_strategy, delta, max_iter, smoothing, min_events, seed)


def em_fit_observations(x: np.ndarray,
                        y: np.ndarray,
                        k: int,
                        init_strategy: str = 'kmeans',
                        delta: float = 1e-6,
                        max_iter: int = 200,
                        smoothing: float = 0.5,
                        min_events: int = 5,
                        seed: int = 0) -> FitResult:
    """Labels events with states and fits the per-state laws, alternating until stable.

    Each iteration fits an exponential rate and a Beta law on the events of every state,
    relabels every event with its most likely state and records the total log-likelihood.
    A state left with fewer than min_events events is reseeded with the worst-fitting events
    of the other states. The loop stops when the total moves by less than delta, when an
    iteration would lower it (that iteration is discarded), or after max_iter iterations.
    The returned laws are refitted on the returned labels and states are ordered by
    ascending rate.

    Args:
      x: inter-arrival times, > 0.
      y: jump sizes in (0, 1).
      k: (int) number of states.
      init_strategy: (str) 'kmeans' or 'split'.
      delta: (float) convergence threshold on the total log-likelihood.
      max_iter: (int) iteration cap.
      smoothing: (float) additive smoothing of the transition counts.
      min_events: (int) fewest events a state may keep.
      seed: (int) seed of the k-means initialization.

    Returns:
      FitResult; converged is False when max_iter was hit.

    Raises:
    TooFewEvents: fewer than 10·k events.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if k < 1:
        raise utils.DomainError(f"k must be >= 1, got {k}.")
    if x.size < EVENTS_PER_STATE * k:
        raise TooFewEvents(f"{x.size} events cannot support {k} states (need {EVENTS_PER_STATE * k}).")
    if init_strategy not in INIT_STRATEGIES:
        raise utils.InputError(f"init strategy must be one of {INIT_STRATEGIES}, got <{init_strategy}>.")
    if not delta > 0.0 or max_iter < 1:
        raise utils.DomainError('delta must be > 0 and max_iter >= 1.')
    min_events = min(min_events, x.size // k)

    labels = initial_labels(x, y, k, init_strategy, seed)
    labels, reseeds = _reseed(labels, None, k, min_events)

    trace: list[float] = []
    fallbacks = 0
    best_labels = labels
    converged = False
    iterations = 0
    for it in range(1, max_iter + 1):
        rates, laws, failed = _fit_states(x, y, labels, k)
        fallbacks += failed
        ll = loglik_matrix(x, y, rates, laws)
        new_labels, moved = _reseed(np.argmax(ll, axis=1), ll, k, min_events)
        reseeds += moved
        total = float(ll[np.arange(x.size), new_labels].sum())

        if trace and total < trace[-1] - DECREASE_TOL:
            logging.warning(f"Iteration {it} lowers the log-likelihood ({trace[-1]:.6f} -> {total:.6f}); "
                            f"keeping the previous iterate")
            converged = True
            break

        trace.append(total)
        iterations = it
        best_labels = new_labels
        logging.debug(f"EM iteration {it}: log-likelihood {total:.9f}")
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) < delta:
            converged = True
            break
        labels = new_labels

    if not converged:
        logging.warning(f"Labeling loop did not converge in {max_iter} iterations")
    if reseeds:
        logging.warning(f"{reseeds} events moved to refill under-populated states")

    # exported laws must come from the exported labels
    rates, laws, failed = _fit_states(x, y, best_labels, k)
    fallbacks += failed
    order = np.argsort(rates, kind='stable')
    rank = np.empty(k, dtype=int)
    rank[order] = np.arange(k)
    final = rank[best_labels] + 1

    q, _ = estimate_Q(final, k, smoothing)
    pi = np.bincount(final - 1, minlength=k) / final.size
    spec = ModelSpec(pi=pi, Q=q, lam=np.asarray(rates)[order], jump_laws=tuple(laws[i] for i in order))
    logging.info(f"Fitted {k} state(s) on {x.size} events in {iterations} iterations: "
                 f"lambda={spec.lam.tolist()}")
    return FitResult(spec=spec,
                     labels=final,
                     loglik_trace=trace,
                     converged=converged,
                     iterations=iterations,
                     reseeds=reseeds,
                     beta_fallbacks=fallbacks)


def initial_labels(x: np.ndarray, y: np.ndarray, k: int, strategy: str = 'kmeans', seed: int = 0) -> np.ndarray:
    """0-based starting labels.

    'kmeans' clusters the standardized (log s, logit ρ) pairs with k-means++ seeding; if a
    cluster comes back empty, or with 'split', the events are split on quantiles of log s.
    """
    if k == 1:
        return np.zeros(x.size, dtype=int)

    log_s = np.log(x)
    if strategy == 'kmeans':
        feats = np.column_stack([log_s, np.log(y) - np.log1p(-y)])
        spread = feats.std(axis=0)
        feats = (feats - feats.mean(axis=0)) / np.where(spread > 0.0, spread, 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            _, labels = kmeans2(feats, k, minit='++', seed=seed)
        if np.bincount(labels, minlength=k).min() > 0:
            return labels.astype(int)
        logging.warning('k-means initialization left an empty cluster; splitting on inter-arrival quantiles')

    edges = np.quantile(log_s, np.linspace(0.0, 1.0, k + 1)[1:-1])
    return np.searchsorted(edges, log_s, side='right').astype(int)


def _fit_states(x: np.ndarray, y: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, list[BetaLaw], int]:
    rates = np.empty(k)
    laws: list[BetaLaw] = []
    failed = 0
    for j in range(k):
        mask = labels == j
        rates[j] = fit_exponential(x[mask])
        fit = beta_mle(y[mask])
        failed += int(not fit.converged)
        laws.append(fit.law)
    return rates, laws, failed


def _reseed(labels: np.ndarray, ll: np.ndarray | None, k: int, min_events: int) -> tuple[np.ndarray, int]:
    """ Refill states holding fewer than min_events events; returns (labels, events moved) """
    labels = np.array(labels, dtype=int)
    moved = 0
    for j in range(k):
        counts = np.bincount(labels, minlength=k)
        short = min_events - counts[j]
        if short <= 0:
            continue
        logging.warning(str(EmptyCluster(f"state {j + 1} holds {counts[j]} events; reseeding")))
        if ll is None:
            fit = np.zeros(labels.size)
        else:
            fit = ll[np.arange(labels.size), labels]
        # worst-fitting events first, only from states with events to spare
        for i in np.argsort(fit, kind='stable'):
            if short <= 0:
                break
            owner = labels[i]
            if owner == j or counts[owner] <= min_events:
                continue
            labels[i] = j
            counts[owner] -= 1
            counts[j] += 1
            short -= 1
            moved += 1
    return labels, moved
