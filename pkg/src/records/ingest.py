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

import numpy as np
import pandas as pd

# Local Modules
import src.utils as utils
from src.common_types import JumpEvent
from src.records.drawdown import PriceSeries, EmptySeries

# Constants
PRICE_COLUMNS = ('date', 'close')
EVENT_COLUMNS = ('t', 'inter_arrival', 'prev_record', 'new_record', 'rho', 'provisional')
_TRUE = ('1', 'true', 'yes')
_FALSE = ('0', 'false', 'no', '')


class MalformedCsv(utils.InputError):
    """A CSV row cannot be parsed; line is 1-based and counts the header"""

    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}: line {line}: {reason}")
        self.line = line


def read_prices(path: str, calendar_days: bool = False) -> PriceSeries:
    """Reads a `date,close` CSV file into a PriceSeries.

    A fully numeric date column is used as the time axis as given. ISO-8601 dates become a
    trading-day index 0, 1, 2, ... or, with calendar_days, days elapsed since the first date.

    Raises:
    InputError: the file is missing.
    MalformedCsv: a header or row cannot be parsed, with its line number.
    EmptySeries: the file holds no price rows.
    """
    frame = _read_frame(path, PRICE_COLUMNS)
    if frame.empty:
        raise EmptySeries(f"{path} holds no price rows.")

    close = pd.to_numeric(frame['close'].str.strip(), errors='coerce')
    bad = close.isna() | ~(close > 0.0) | ~np.isfinite(close)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise MalformedCsv(path, row + 2, f"close value <{frame['close'].iloc[row]}> is not a positive number")

    dates = frame['date'].str.strip()
    numeric = pd.to_numeric(dates, errors='coerce')
    if not numeric.isna().any():
        order = numeric.to_numpy(dtype=float)
        times = order
        unit = 'numeric'
    else:
        stamps = pd.to_datetime(dates, errors='coerce', format='ISO8601')
        if stamps.isna().any():
            row = int(np.flatnonzero(stamps.isna().to_numpy())[0])
            raise MalformedCsv(path, row + 2, f"date <{dates.iloc[row]}> is neither numeric nor ISO-8601")
        order = ((stamps - stamps.iloc[0]) / pd.Timedelta(days=1)).to_numpy(dtype=float)
        if calendar_days:
            times = order
            unit = 'calendar days'
        else:
            times = np.arange(len(stamps), dtype=float)
            unit = 'trading days'

    steps = np.diff(order)
    if np.any(steps <= 0.0):
        row = int(np.flatnonzero(steps <= 0.0)[0]) + 1
        raise MalformedCsv(path, row + 2, 'dates must be strictly increasing')

    logging.info(f"Read {len(frame)} prices from {path} (time axis: {unit})")
    return PriceSeries(times=times, prices=close.to_numpy(dtype=float))


def read_events(path: str) -> list[JumpEvent]:
    """ Read an events CSV written by write_events; an optional `label` column is kept """
    frame = _read_frame(path, EVENT_COLUMNS)
    events: list[JumpEvent] = []
    for row, rec in enumerate(frame.to_dict('records')):
        line = row + 2
        try:
            values = {key: float(rec[key]) for key in EVENT_COLUMNS[:-1]}
        except ValueError:
            raise MalformedCsv(path, line, 'event fields must be numeric')
        flag = str(rec['provisional']).strip().lower()
        if flag not in _TRUE + _FALSE:
            raise MalformedCsv(path, line, f"provisional flag <{rec['provisional']}> is not a boolean")
        label = None
        if str(rec.get('label', '')).strip():
            try:
                label = int(rec['label'])
            except ValueError:
                raise MalformedCsv(path, line, f"label <{rec['label']}> is not an integer")
        if not (0.0 < values['rho'] < 1.0) or not values['inter_arrival'] > 0.0:
            raise MalformedCsv(path, line, 'rho must lie in (0, 1) and inter_arrival must be > 0')
        events.append(JumpEvent(time=values['t'],
                                inter_arrival=values['inter_arrival'],
                                prev_record=values['prev_record'],
                                new_record=values['new_record'],
                                rho=values['rho'],
                                label=label,
                                provisional=flag in _TRUE))
    logging.info(f"Read {len(events)} events from {path}")
    return events


def write_events(events: list[JumpEvent], path: str, with_labels: bool = False) -> None:
    """ Write events as `t,inter_arrival,prev_record,new_record,rho,provisional[,label]` """
    columns: dict[str, list] = {
        't': [ev.time for ev in events],
        'inter_arrival': [ev.inter_arrival for ev in events],
        'prev_record': [ev.prev_record for ev in events],
        'new_record': [ev.new_record for ev in events],
        'rho': [ev.rho for ev in events],
        'provisional': [int(ev.provisional) for ev in events],
    }
    if with_labels:
        columns['label'] = ['' if ev.label is None else ev.label for ev in events]
    utils.write_csv(path, columns)


def _read_frame(path: str, required: tuple[str, ...]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError:
        raise utils.InputError(f"input file {path} not found.")
    except pd.errors.EmptyDataError:
        raise EmptySeries(f"{path} is empty.")
    except pd.errors.ParserError as e:
        raise MalformedCsv(path, _parser_line(str(e)), 'row cannot be tokenized')

    frame.columns = [str(col).strip().lower() for col in frame.columns]
    missing = [col for col in required if col not in frame.columns]
    if missing:
        raise MalformedCsv(path, 1, f"header lacks column(s) {missing}")
    return frame


def _parser_line(message: str) -> int:
    # pandas reports "... in line N, saw M"
    words = message.replace(',', ' ').split()
    for i, word in enumerate(words[:-1]):
        if word == 'line' and words[i + 1].isdigit():
            return int(words[i + 1])
    return 0
