import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from transferlab import ConfigError
from transferlab.config import DEFAULTS, KINDS, config_hash, load_config, resolve_config, schema
from transferlab.fourier_dyadic import GridFunction
from transferlab.io import (dumps, format_float, grid_from_dict, grid_to_dict, read_grid, write_csv,
                            write_grid, write_table)


# serialization --------------------------------------------------------------------------

@pytest.mark.parametrize("x, text", [(1.0, "1.0"), (0.1, "0.10000000000000001"), (-2.5e-300, format(-2.5e-300, ".17g")),
                                     (math.inf, '"inf"'), (math.nan, '"nan"'), (3, "3.0")])
def test_format_float_examples(x, text):  # [TRIVIAL] Python ".17g" formatting
    assert format_float(x) == text


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_float_roundtrip(x):
    assert float(format_float(x)) == x


def test_dumps_canonical():
    a = dumps({"b": [1, 2.0, 1 + 2j], "a": np.float64(0.5), "c": None, "d": True})
    b = dumps({"d": True, "c": None, "a": 0.5, "b": [1, 2.0, complex(1, 2)]})
    assert a == b and a.endswith("\n")
    assert json.loads(a) == {"a": 0.5, "b": [1, 2.0, {"im": 2.0, "re": 1.0}], "c": None, "d": True}
    with pytest.raises(TypeError):
        dumps({"x": object()})


@pytest.mark.parametrize("shape", [(16,), (8, 8)])
def test_grid_roundtrip(tmp_path, shape):
    rng = np.random.default_rng(3)
    u = GridFunction(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    write_grid(tmp_path / "u.rfgf", u)
    raw = (tmp_path / "u.rfgf").read_bytes()
    assert raw[:4] == b"RFGF" and len(raw) == 12 + 16 * u.values.size
    assert np.array_equal(read_grid(tmp_path / "u.rfgf").values, u.values)
    assert np.array_equal(grid_from_dict(json.loads(dumps(grid_to_dict(u)))).values, u.values)


def test_grid_rejects_bad_files(tmp_path):
    (tmp_path / "a").write_bytes(b"XXXX" + bytes(8))
    (tmp_path / "b").write_bytes(b"RF")
    for name in "ab":
        with pytest.raises(ConfigError):
            read_grid(tmp_path / name)
    with pytest.raises(ConfigError):
        grid_to_dict(GridFunction.zeros(128))


def test_tables_carry_hash(tmp_path):
    rows = [(1, 0.5, 1 - 2j, None, True)]
    write_csv(tmp_path / "t.csv", ["a", "b", "c", "d", "e"], rows, "abc")
    write_table(tmp_path / "t.txt", ["a", "b", "c", "d", "e"], rows, "abc")
    csv_lines = (tmp_path / "t.csv").read_text().splitlines()
    assert csv_lines == ["# config_hash: abc", "a,b,c,d,e", "1,0.5,1.0-2.0j,,true"]
    txt = (tmp_path / "t.txt").read_text().splitlines()
    assert txt[0] == "# config_hash: abc" and txt[2].split() == ["1", "0.5", "1.0-2.0j", "-", "true"]


# configs ---------------------------------------------------------------------------------

def test_six_kinds():  # [TRIVIAL]
    assert sorted(KINDS) == sorted(["norms", "resonances", "determinant", "bounds", "kernel-check",
                                    "zero-eigen-compare"])
    assert set(DEFAULTS) == set(KINDS) | {"common"}


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_defaults_validate(kind):
    cfg = resolve_config({"kind": kind})
    jsonschema.Draft7Validator.check_schema(schema(kind))
    jsonschema.validate(cfg, schema(kind))


def test_bundled_configs_validate(bundled):
    for path in bundled.values():
        cfg = resolve_config(load_config(path))
        jsonschema.validate(cfg, schema(cfg["kind"]))


def test_schema_accepts_halfweight(bundled):  # [DERIVED] validator round-trip
    cfg = resolve_config(load_config(bundled["doubling_halfweight"]))
    jsonschema.validate(json.loads(json.dumps(cfg)), json.loads(json.dumps(schema("determinant"))))


@pytest.mark.parametrize("raw, where", [
    ({"kind": "bogus"}, "unknown experiment kind"),
    ({"kind": "determinant", "params": {"M": 0}}, "params/M"),
    ({"kind": "determinant", "params": {"typo": 1}}, "params"),
    ({"kind": "resonances", "map": {"kind": "henon"}}, "map"),
    ({"kind": "norms", "seed": -1}, "seed"),
    ([1, 2], "table"),
])
def test_invalid_configs(raw, where):
    with pytest.raises(ConfigError, match=where):
        resolve_config(raw)


def test_map_table_replaced_whole():
    cfg = resolve_config({"kind": "determinant", "map": {"kind": "linear-toral", "matrix": [[2, 1], [1, 1]]}})
    assert cfg["map"] == {"kind": "linear-toral", "matrix": [[2, 1], [1, 1]]}
    assert cfg["params"]["N_f"] == DEFAULTS["determinant"]["params"]["N_f"]


def test_hash_properties():
    a = resolve_config({"kind": "determinant"})
    assert config_hash(a) == config_hash(resolve_config({"kind": "determinant", "seed": 0}))
    assert config_hash(a) != config_hash(resolve_config({"kind": "determinant"}, seed=1))
    assert len(config_hash(a)) == 64


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
    (tmp_path / "bad.toml").write_text("kind = \n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(tmp_path / "bad.toml")
    (tmp_path / "c.json").write_text('{"kind": "norms"}')
    assert load_config(tmp_path / "c.json") == {"kind": "norms"}
