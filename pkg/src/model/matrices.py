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
import dataclasses

import numpy as np

# Local Modules
from src.model.spec import ModelSpec, DimensionMismatch


@dataclasses.dataclass(frozen=True, eq=False)
class DerivedMatrices:
    """Drift matrices and forcing vectors of the moment systems.

    Lambda = diag(λ), M = diag(μ), M2 = diag(μ₂)
    A = Λ(Q − I)                 generator of the state process
    B = ΛQ(I − M) − Λ            mean system
    H = ΛQ(I − 2M + M₂) − Λ      second-moment system
    K = 2ΛQ(M − M₂)              coupling of the mean into the second moment
    mean_forcing = ΛQμ, second_forcing = ΛQμ₂
    """
    Lambda: np.ndarray
    M: np.ndarray
    M2: np.ndarray
    A: np.ndarray
    B: np.ndarray
    H: np.ndarray
    K: np.ndarray
    mu: np.ndarray
    mu2: np.ndarray
    mean_forcing: np.ndarray
    second_forcing: np.ndarray


def derive_matrices(spec: ModelSpec) -> DerivedMatrices:
    """ Assemble the moment-system matrices of a validated spec """
    return assemble_matrices(spec.lam, spec.Q, spec.mu, spec.mu2)


def assemble_matrices(rates: np.ndarray, q: np.ndarray, mu: np.ndarray, mu2: np.ndarray) -> DerivedMatrices:
    """Assembles the matrices from raw vectors.

    No validation happens here; derive_matrices() is the entry point for validated specs.
    """
    k = len(rates)
    eye = np.eye(k)
    lam = np.diag(np.asarray(rates, dtype=float))
    mu = np.array(mu, dtype=float)
    mu2 = np.array(mu2, dtype=float)
    m = np.diag(mu)
    m2 = np.diag(mu2)
    lq = lam @ np.asarray(q, dtype=float)

    out = DerivedMatrices(Lambda=lam,
                          M=m,
                          M2=m2,
                          A=lq - lam,
                          B=lq @ (eye - m) - lam,
                          H=lq @ (eye - 2.0 * m + m2) - lam,
                          K=2.0 * lq @ (m - m2),
                          mu=mu,
                          mu2=mu2,
                          mean_forcing=lq @ mu,
                          second_forcing=lq @ mu2)
    for field in dataclasses.fields(out):
        getattr(out, field.name).setflags(write=False)
    return out


def two_state_coefficients(spec: ModelSpec) -> dict[str, float]:
    """Scalar coefficients of the two-state moment systems.

    Mean system (state 1 first, state 2 second):
        m1' = a m1 + b m2 + e
        m2' = c m1 + d m2 + f
    Second-moment system, with s the second moments and m the means:
        s1' = (sa - sc) s1 + sb s2 + sd + se m1 + sf m2
        s2' = sg s1 + (sh - sk) s2 + sl + sn m1 + sp m2
    """
    if spec.k != 2:
        raise DimensionMismatch(f"two-state coefficients need k=2, got k={spec.k}.")
    l1, l2 = spec.lam
    q = spec.Q
    u1, u2 = spec.mu
    v1, v2 = spec.mu2
    return {
        'a': l1 * q[0, 0] * (1 - u1) - l1,
        'b': l1 * q[0, 1] * (1 - u2),
        'c': l2 * q[1, 0] * (1 - u1),
        'd': l2 * q[1, 1] * (1 - u2) - l2,
        'e': l1 * (q[0, 0] * u1 + q[0, 1] * u2),
        'f': l2 * (q[1, 0] * u1 + q[1, 1] * u2),
        'sa': l1 * q[0, 0] * (1 - 2 * u1 + v1),
        'sb': l1 * q[0, 1] * (1 - 2 * u2 + v2),
        'sc': l1,
        'sd': l1 * (q[0, 0] * v1 + q[0, 1] * v2),
        'se': 2 * l1 * q[0, 0] * (u1 - v1),
        'sf': 2 * l1 * q[0, 1] * (u2 - v2),
        'sg': l2 * q[1, 0] * (1 - 2 * u1 + v1),
        'sh': l2 * q[1, 1] * (1 - 2 * u2 + v2),
        'sk': l2,
        'sl': l2 * (q[1, 0] * v1 + q[1, 1] * v2),
        'sn': 2 * l2 * q[1, 0] * (u1 - v1),
        'sp': 2 * l2 * q[1, 1] * (u2 - v2),
    }
