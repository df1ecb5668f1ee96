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
from typing import Any
from collections.abc import Sequence

import numpy as np
import pandas as pd

# Constants
FLOAT_FORMAT = '%.17g'


class Error(Exception):
    """Module-level Exception class."""
    exit_code: int = 1


class InputError(Error):
    """Unreadable or malformed input (files, flags, config keys)."""
    exit_code = 2


class DomainError(Error):
    """A value outside the domain of the operation that consumes it."""
    exit_code = 3


class NoConvergence(Error):
    """An iterative procedure hit its iteration cap."""
    exit_code = 4


class NumericalFault(Error):
    """Non-finite values or a failed numerical cross-check."""
    exit_code = 5


def as_float_array(values, name: str, ndim: int = 1) -> np.ndarray:
    """Converts values to a float ndarray of the given rank.

    Args:
      values: array-like input.
      name: (str) field name used in error messages.
      ndim: (int) required number of dimensions.

    Returns:
      a float64 numpy array.

    Raises:
    InputError: values are not numeric or have the wrong rank.
    """
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"field <{name}> is not numeric.")
    if arr.ndim != ndim:
        raise InputError(f"field <{name}> must have {ndim} dimension(s), got {arr.ndim}.")
    return arr


def write_csv(path: str, columns: dict[str, Any], header: Sequence[str] | None = None) -> None:
    """ Write equal-length columns as a CSV file with 17 significant digits """
    frame = pd.DataFrame(columns)
    if header is not None:
        frame = frame[list(header)]
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
