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
from collections.abc import Sequence

import numpy as np
from scipy.special import betaln, digamma, polygamma

# Local Modules
import src.utils as utils
from src.common_types import JumpEvent
from src.model.spec import BetaLaw

# Constants
NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 100
_MAX_HALVINGS = 60


class EmptySample(utils.DomainError):
    """No observations to fit"""


class NonPositiveSample(utils.DomainError):
    """An inter-arrival time is not strictly positive"""


class OutOfRange(utils.DomainError):
    """A jump size lies outside (0, 1)"""


class DegenerateSample(utils.DomainError):
    """The sample has no spread"""


@dataclasses.dataclass(frozen=True)
class BetaFit:
    """Outcome of the Beta maximum-likelihood search"""
    law: BetaLaw
    iterations: int
    converged: bool


def fit_exponential(samples) -> float:
    """ Maximum-likelihood rate n / Σ s """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise EmptySample('no inter-arrival times to fit.')
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise NonPositiveSample('inter-arrival times must be finite and > 0.')
    return float(x.size / x.sum())


def beta_moments_start(samples) -> BetaLaw:
    """Method-of-moments Beta law.

    With sample mean m and (biased) variance v, α = m·c and β = (1 − m)·c where
    c = m(1 − m)/v − 1, so α/(α + β) = m exactly.
    """
    y = _check_unit_sample(samples)
    m = float(y.mean())
    v = float(y.var())
    common = m * (1.0 - m) / v - 1.0
    return BetaLaw(alpha=m * common, beta=(1.0 - m) * common)


def beta_mle(samples) -> BetaFit:
    """Beta maximum likelihood by Newton iterations on the digamma score equations.

    The mean log-likelihood (α−1)·E[log y] + (β−1)·E[log(1−y)] − log B(α, β) is concave in
    (α, β). Starting from the method-of-moments law, each Newton step is halved until both
    shapes stay positive and the likelihood does not decrease. Iterations stop when the
    per-observation score is below NEWTON_TOL in sup-norm, or when no halved step improves
    the likelihood any more. After NEWTON_MAX_ITER iterations, or a singular Hessian, the
    method-of-moments law is returned with converged=False.

    Args:
      samples: values in (0, 1), at least two distinct.

    Returns:
      BetaFit

    Raises:
    EmptySample, OutOfRange, DegenerateSample
    """
    y = _check_unit_sample(samples)
    g1 = float(np.mean(np.log(y)))
    g2 = float(np.mean(np.log1p(-y)))
    start = beta_moments_start(y)

    def mean_loglik(a: float, b: float) -> float:
        return (a - 1.0) * g1 + (b - 1.0) * g2 - float(betaln(a, b))

    a, b = start.alpha, start.beta
    current = mean_loglik(a, b)
    for it in range(1, NEWTON_MAX_ITER + 1):
        common = digamma(a + b)
        score = np.array([common - digamma(a) + g1, common - digamma(b) + g2])
        if np.max(np.abs(score)) < NEWTON_TOL:
            logging.debug(f"Beta Newton converged in {it - 1} iterations: ({a:.6g}, {b:.6g})")
            return BetaFit(law=BetaLaw(alpha=a, beta=b), iterations=it - 1, converged=True)

        tri = float(polygamma(1, a + b))
        hessian = np.array([[tri - float(polygamma(1, a)), tri],
                            [tri, tri - float(polygamma(1, b))]])
        try:
            direction = np.linalg.solve(hessian, -score)
        except np.linalg.LinAlgError:
            break

        scale = 1.0
        for _ in range(_MAX_HALVINGS):
            na, nb = a + scale * direction[0], b + scale * direction[1]
            if na > 0.0 and nb > 0.0:
                candidate = mean_loglik(na, nb)
                if candidate >= current:
                    break
            scale *= 0.5
        else:
            # no ascent left at working precision
            logging.debug(f"Beta Newton stalled after {it} iterations, score {np.max(np.abs(score)):.2e}")
            return BetaFit(law=BetaLaw(alpha=a, beta=b), iterations=it, converged=True)
        a, b, current = na, nb, candidate

    logging.warning(f"Beta Newton did not converge on {y.size} samples; using method-of-moments law")
    return BetaFit(law=start, iterations=NEWTON_MAX_ITER, converged=False)


def fit_beta(samples) -> BetaLaw:
    """ Maximum-likelihood Beta law (method-of-moments if Newton fails) """
    return beta_mle(samples).law


def beta_loglik(y, law: BetaLaw) -> np.ndarray:
    """ Log Beta density at each y in (0, 1) """
    y = np.asarray(y, dtype=float)
    return (law.alpha - 1.0) * np.log(y) + (law.beta - 1.0) * np.log1p(-y) - betaln(law.alpha, law.beta)


def event_loglik(event: JumpEvent, rate: float, law: BetaLaw) -> float:
    """log λ − λ·s + log Beta(ρ; α, β) for one event.

    Raises:
    OutOfRange: ρ outside (0, 1) or a negative inter-arrival.
    """
    if not (0.0 < event.rho < 1.0):
        raise OutOfRange(f"jump size {event.rho} outside (0, 1).")
    if event.inter_arrival < 0.0:
        raise OutOfRange(f"inter-arrival {event.inter_arrival} is negative.")
    return float(np.log(rate) - rate * event.inter_arrival + beta_loglik(event.rho, law))


def loglik_matrix(x: np.ndarray, y: np.ndarray, rates: np.ndarray, laws: Sequence[BetaLaw]) -> np.ndarray:
    """ Per-event, per-state log-likelihoods, shape (n, k) """
    x = np.asarray(x, dtype=float)
    out = np.empty((x.size, len(laws)))
    for j, (rate, law) in enumerate(zip(rates, laws)):
        out[:, j] = np.log(rate) - rate * x + beta_loglik(y, law)
    return out


def _check_unit_sample(samples) -> np.ndarray:
    y = np.asarray(samples, dtype=float).ravel()
    if y.size == 0:
        raise EmptySample('no jump sizes to fit.')
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0) or np.any(y >= 1.0):
        raise OutOfRange('jump sizes must lie in (0, 1).')
    if y.size < 2 or float(y.var()) == 0.0:
        raise DegenerateSample(f"jump sizes have no spread ({y.size} samples).")
    return y
