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

import numpy as np
import pytest

import src.utils as utils
from src.model import spec as model
from src.model.matrices import assemble_matrices, derive_matrices, two_state_coefficients
from tests.helpers import MODELS_DIR, one_state, random_spec

TABLE1_RAW = {
    'k': 2,
    'pi': [0.5, 0.5],
    'Q': [[0.6, 0.4], [0.5, 0.5]],
    'lambda': [2.0, 1.0],
    'jump_laws': [{'alpha': 2.0, 'beta': 20.0}, {'alpha': 2.0, 'beta': 30.0}],
}


def _raw(**changes):
    raw = {key: value for key, value in TABLE1_RAW.items()}
    raw.update(changes)
    return raw


def test_validate_table1():
    spec = model.validate(_raw())
    assert spec.k == 2
    np.testing.assert_allclose(spec.mu, [2 / 22, 2 / 32], rtol=1e-12)
    np.testing.assert_allclose(spec.mu2, [2 * 3 / (22 * 23), 2 * 3 / (32 * 33)], rtol=1e-12)


@pytest.mark.parametrize('changes, error', [
    ({'Q': [[0.7, 0.7], [0.5, 0.5]]}, model.NonStochasticRow),
    ({'Q': [[1.2, -0.2], [0.5, 0.5]]}, model.NonStochasticRow),
    ({'lambda': [0.0, 1.0]}, model.NonPositiveRate),
    ({'pi': [0.6, 0.6]}, model.BadProbabilityVector),
    ({'jump_laws': [{'alpha': 0.0, 'beta': 20.0}, {'alpha': 2.0, 'beta': 30.0}]}, model.BadShape),
    ({'k': 3}, model.DimensionMismatch),
    ({'lambda': [2.0, 1.0, 1.0]}, model.DimensionMismatch),
    ({'extra': 1}, utils.InputError),
    ({'lambda': 'fast'}, utils.InputError),
])
def test_validate_rejects(changes, error):
    with pytest.raises(error):
        model.validate(_raw(**changes))


def test_validate_missing_key():
    raw = _raw()
    del raw['Q']
    with pytest.raises(utils.InputError):
        model.validate(raw)


def test_domain_errors_exit_code():
    with pytest.raises(utils.DomainError) as err:
        model.validate(_raw(**{'lambda': [-1.0, 1.0]}))
    assert err.value.exit_code == 3


def test_spec_is_read_only(table1):
    with pytest.raises(ValueError):
        table1.Q[0, 0] = 0.0


def test_bundled_models_match_builtin():
    for name, builtin in (('table1.json', model.table1_spec()), ('table2.json', model.table2_spec())):
        loaded = model.load_model(str(MODELS_DIR / name))
        assert loaded.to_dict() == builtin.to_dict()


def test_dump_then_load(tmp_path, table2):
    out = tmp_path / 'model.json'
    model.dump_model(table2, str(out))
    assert model.load_model(str(out)).to_dict() == table2.to_dict()


def test_load_model_errors(tmp_path):
    with pytest.raises(utils.InputError):
        model.load_model(str(tmp_path / 'missing.json'))
    bad = tmp_path / 'bad.json'
    bad.write_text('{"pi": [1.0],')
    with pytest.raises(utils.InputError):
        model.load_model(str(bad))


def test_scalar_b():
    dm = derive_matrices(one_state(1.0, 1.0, 9.0))
    assert dm.B[0, 0] == pytest.approx(-0.1, abs=1e-12)


def test_zero_jump_means_give_b_equal_a(table1):
    dm = assemble_matrices(table1.lam, table1.Q, np.zeros(2), np.zeros(2))
    np.testing.assert_allclose(dm.B, dm.A, atol=1e-12, rtol=0)


def test_table1_b_by_hand(table1):
    dm = derive_matrices(table1)
    expected = np.array([[-10.0 / 11.0, 0.75], [5.0 / 11.0, -17.0 / 32.0]])
    np.testing.assert_allclose(dm.B, expected, atol=1e-12, rtol=0)


def test_generator_properties(rng):
    for k in (1, 2, 3, 4):
        spec = random_spec(rng, k)
        dm = derive_matrices(spec)
        np.testing.assert_allclose(dm.A.sum(axis=1), 0.0, atol=1e-12)
        off = dm.A[~np.eye(k, dtype=bool)]
        assert np.all(off >= 0.0)
        np.testing.assert_allclose(dm.B, dm.A - dm.Lambda @ spec.Q @ dm.M, atol=1e-12, rtol=0)


def test_derive_is_deterministic(table1):
    first, second = derive_matrices(table1), derive_matrices(table1)
    for name in ('A', 'B', 'H', 'K', 'mean_forcing', 'second_forcing'):
        assert np.array_equal(getattr(first, name), getattr(second, name))


def test_two_state_coefficients_match_matrices(table2):
    dm = derive_matrices(table2)
    c = two_state_coefficients(table2)
    np.testing.assert_allclose(dm.B, [[c['a'], c['b']], [c['c'], c['d']]], atol=1e-12, rtol=0)
    np.testing.assert_allclose(dm.mean_forcing, [c['e'], c['f']], atol=1e-12, rtol=0)
    np.testing.assert_allclose(dm.H, [[c['sa'] - c['sc'], c['sb']], [c['sg'], c['sh'] - c['sk']]],
                               atol=1e-12, rtol=0)
    np.testing.assert_allclose(dm.K, [[c['se'], c['sf']], [c['sn'], c['sp']]], atol=1e-12, rtol=0)
    np.testing.assert_allclose(dm.second_forcing, [c['sd'], c['sl']], atol=1e-12, rtol=0)


def test_two_state_coefficients_need_two_states():
    with pytest.raises(model.DimensionMismatch):
        two_state_coefficients(one_state(1.0, 1.0, 9.0))


def test_stationary_law(table1):
    embedded, occupancy = model.stationary_law(table1)
    np.testing.assert_allclose(embedded, [5 / 9, 4 / 9], atol=1e-12, rtol=0)
    np.testing.assert_allclose(occupancy, [5 / 13, 8 / 13], atol=1e-12, rtol=0)
