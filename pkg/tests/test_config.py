from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import generated
from dspec.asymptotics import Series
from dspec.config import canonical_json, config_hash, dump_spec, load_spec, spec_from_dict, spec_to_dict
from dspec.errors import ConfigError
from dspec.model import cell_integrals


def test_arithmetic_generator_points():
    spec = generated({"kind": "arithmetic", "start": 0.5, "step": 0.5}, {"kind": "constant", "value": 2}, count=4)
    assert spec.partition.points == (0.5, 1.0, 1.5, 2.0)
    assert spec.strengths.values == (2.0,) * 4


def test_sum_power_generator_lengths():
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 1}, count=50)
    assert np.allclose(spec.lengths, np.arange(1, 51) ** -0.5, rtol=1e-14)
    assert spec.strengths.values[9] == 10.0


def test_generated_pattern_is_exact():
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 3}, count=10)
    (cell,) = spec.tail.pattern.cells
    assert cell.length.terms == Series.power(1, -0.5).terms
    assert cell.beta.terms == (Series.index() * 3).terms


def test_missing_section():
    with pytest.raises(ConfigError):
        spec_from_dict({"partition": {"points": [1]}, "strengths": {"values": [1]}})


def test_unreadable_number():
    with pytest.raises(ConfigError):
        spec_from_dict({"partition": {"points": [1]}, "strengths": {"values": ["abc"]},
                        "potential": {"pieces": [{"from": 0, "to": 1, "c0": 0}]}})


def test_round_trip_bitwise(tmp_path):
    spec = generated({"kind": "sum_power", "exponent": 0.5}, {"kind": "linear", "slope": 1}, c0=0.3, c1=-0.01,
                     count=40)
    path = tmp_path / "s.json"
    dump_spec(spec, path)
    back = load_spec(path)
    assert back.partition.points == spec.partition.points
    assert back.strengths.values == spec.strengths.values
    assert all(cell_integrals(back, k) == cell_integrals(spec, k) for k in range(1, spec.K + 1))
    assert spec_to_dict(back) == spec_to_dict(spec)


def test_toml_config(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text('[partition]\npoints = [1.0, 2.0]\n[strengths]\nvalues = [1.0, "inf"]\n'
                    '[potential]\npieces = [{from = 0.0, to = 2.0, c0 = 1.0, c1 = 0.0}]\n')
    spec = load_spec(path)
    assert spec.strengths.values[1] == float("inf")


def test_hash_ignores_key_order():
    a = {"x": 1, "y": [1.5, 2]}
    b = json.loads('{"y": [1.5, 2], "x": 1}')
    assert canonical_json(a) == canonical_json(b)
    assert config_hash(a) == config_hash(b)
