#!/usr/bin/env python3
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
import argparse
import logging
from collections.abc import Sequence
from typing import Optional

import yaml

# Local Modules
import src.core as core
import src.utils as utils

# Constants
_SKIP = argparse.SUPPRESS


# Functions
def get_cmd_line(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """ Gather command line parameters """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default=None, help='YAML/JSON config file')
    common.add_argument('--dbg', action='store_true', help='Debug logging')
    common.add_argument('--seed', type=int, default=_SKIP, help='Master random seed')
    common.add_argument('--time-unit', dest='time_unit', default=_SKIP, help='Label of the time unit')
    common.add_argument('--metrics-file', dest='metrics_file', default=_SKIP,
                        help='Write run statistics as a Prometheus text file')

    horizon = argparse.ArgumentParser(add_help=False)
    horizon.add_argument('--r0', type=float, default=_SKIP, help='Initial record in [0, 1)')
    horizon.add_argument('--horizon', '-T', type=float, default=_SKIP, help='Time horizon')
    horizon.add_argument('--step', dest='grid_step', type=float, default=_SKIP, help='Output grid step')

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument('--k', type=int, default=_SKIP, help='Number of states')
    fitting.add_argument('--delta', type=float, default=_SKIP, help='Log-likelihood convergence threshold')
    fitting.add_argument('--max-iter', dest='max_iter', type=int, default=_SKIP, help='Iteration cap')
    fitting.add_argument('--smoothing', type=float, default=_SKIP, help='Transition count smoothing')
    fitting.add_argument('--min-events', dest='min_events', type=int, default=_SKIP, help='Fewest events per state')
    fitting.add_argument('--init', dest='init_strategy', choices=['kmeans', 'split'], default=_SKIP,
                         help='Label initialization')

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument('--n-paths', '-N', dest='n_paths', type=int, default=_SKIP, help='Number of paths')
    sampling.add_argument('--jump-convention', dest='jump_convention', choices=['destination', 'source'],
                          default=_SKIP, help='State whose Beta law draws the jump size')
    sampling.add_argument('--levels', type=float, nargs='+', default=_SKIP,
                          help='Record levels reported as exceedance fractions')

    analytic = argparse.ArgumentParser(add_help=False)
    analytic.add_argument('--rk4-step', dest='rk4_step', type=float, default=_SKIP, help='RK4 step')
    analytic.add_argument('--eps', type=float, default=_SKIP, help='Add a Chebyshev bound column for this eps')

    calendar = argparse.ArgumentParser(add_help=False)
    calendar.add_argument('--calendar-days', dest='calendar_days', action='store_true', default=_SKIP,
                          help='Use calendar days instead of a trading-day index for ISO dates')

    argparser = argparse.ArgumentParser(description='Drawdown records as a piecewise deterministic Markov process')
    sub = argparser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('records', parents=[common, calendar], help='Extract drawdown records from prices')
    p.add_argument('input', help='Prices CSV (date,close)')
    p.add_argument('output', help='Events CSV')

    p = sub.add_parser('fit', parents=[common, fitting], help='Fit a model to events')
    p.add_argument('input', help='Events CSV')
    p.add_argument('output', help='FitResult JSON')
    p.add_argument('--model-out', dest='model_out', default=_SKIP, help='Also write the fitted model JSON')

    p = sub.add_parser('simulate', parents=[common, horizon, sampling], help='Monte Carlo ensemble statistics')
    p.add_argument('model', help='Model JSON')
    p.add_argument('output', help='Ensemble statistics CSV')
    p.add_argument('--paths', dest='paths_out', default=_SKIP, help='Dump raw paths to this CSV')
    p.add_argument('--paths-dump', dest='paths_dump', type=int, default=_SKIP, help='Number of raw paths dumped')

    p = sub.add_parser('moments', parents=[common, horizon, analytic], help='Analytic mean and variance curves')
    p.add_argument('model', help='Model JSON')
    p.add_argument('output', help='Curves CSV (t,mean,var)')
    p.add_argument('--curves', dest='curves_out', default=_SKIP, help='Per-state mean curves CSV')

    p = sub.add_parser('pipeline', parents=[common, calendar, fitting, horizon, sampling, analytic],
                       help='records -> fit -> simulate and moments of the fitted model')
    p.add_argument('input', help='Prices CSV (date,close)')
    p.add_argument('output', help='Output folder')

    p = sub.add_parser('synth', parents=[common], help='Synthetic price series from a model')
    p.add_argument('model', help='Model JSON')
    p.add_argument('output', help='Prices CSV')
    p.add_argument('--horizon', '-T', type=float, default=_SKIP, help='Time horizon')
    p.add_argument('--noise-points', dest='noise_points', type=int, default=_SKIP,
                   help='Extra shallow prices between records')
    p.add_argument('--jump-convention', dest='jump_convention', choices=['destination', 'source'], default=_SKIP,
                   help='State whose Beta law draws the jump size')

    return argparser.parse_args(argv)


def load_config_from_file(cfg_file: str) -> Optional[dict]:
    """ Load app configuration """
    try:
        with open(cfg_file, 'r') as f:
            raw_cfg = yaml.safe_load(f)
    except FileNotFoundError:
        logging.error(f"Configuration file {cfg_file} not found. Quitting application...")
        return None
    except yaml.YAMLError as e:
        logging.error(f"Configuration file {cfg_file} is not valid YAML: {e}")
        return None

    if raw_cfg is None:
        return {}
    if not isinstance(raw_cfg, dict):
        logging.error('Invalid configuration file. Quitting application...')
        return None
    return raw_cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = get_cmd_line(argv)

    # Setup logging
    lvl = logging.INFO
    if args.dbg:
        lvl = logging.DEBUG
    logging.basicConfig(format='%(asctime)s [drawdown-pdmp] [%(levelname)s] %(message)s', level=lvl)

    # Load config
    raw_config: dict = {}
    if args.config:
        logging.info(f"Loading configuration file {args.config}...")
        loaded = load_config_from_file(args.config)
        if loaded is None:
            return utils.InputError.exit_code
        raw_config = loaded

    overrides = {key: value for key, value in vars(args).items() if key not in ('command', 'config', 'dbg')}

    # Run application
    try:
        app = core.App(raw_config, args.command, overrides)
        code = app.run()
    except utils.Error as e:
        logging.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    logging.info(f"Done (exit code {code})")
    return code


# Main body
if __name__ == '__main__':
    exit(main())
