import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cwdmd import __version__, io
from cwdmd.config import (
    CONFIG_SCHEMA,
    default_config,
    from_dict,
    hz_to_rad,
    load_config,
    rad_to_hz,
)
from cwdmd.dynsys import integrate_rk4, lti
from cwdmd.errors import ConfigInvalid


def test_lti_defaults():
    cfg = default_config("lti")
    assert (cfg.horizon, cfg.dt, cfg.c_param, cfg.j_max, cfg.ic_count, cfg.omega0) == (
        2.0, 0.001, 32, 288, 100, 6.0)
    assert cfg.steps == 2000
    assert cfg.ic_region == {"type": "circle", "radius": 20.0}
    assert cfg.target_frequencies == (79.54,)


def test_lorenz_defaults():
    cfg = default_config("lorenz")
    assert (cfg.horizon, cfg.dt, cfg.c_param, cfg.j_max, cfg.ic_count) == (100.0, 0.02, 20, 220, 40)
    assert cfg.params == {"alpha": 10.0, "rho": 28.0, "beta": 8.0 / 3.0}
    assert cfg.target_omegas[0] == pytest.approx(8.17)


def test_unit_conversion():
    assert hz_to_rad(1.0) == 2 * math.pi
    assert rad_to_hz(hz_to_rad(79.54)) == pytest.approx(79.54, rel=1e-15)
    assert hz_to_rad(79.54) == pytest.approx(499.76, abs=0.01)


def test_minimal_file_reproduces_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"system": "lorenz"}')
    assert load_config(p) == default_config("lorenz")


@pytest.mark.parametrize("patch", [
    {"horizon": 2.0005},
    {"dt": 0.0},
    {"dt": -1.0},
    {"omega0": 0.0},
    {"j_max": 0},
    {"system": "pendulum"},
    {"unknown_key": 1},
    {"ic_region": {"type": "box", "bounds": [[0, 1]]}},
    {"params": {"A": [[1.0, 2.0]], "c": [1.0]}},
    {"truncation_tol": 1.5},
    {"target_frequencies": []},
])
def test_invalid_configs(patch):
    d = default_config("lti").to_dict()
    d.update(patch)
    with pytest.raises(ConfigInvalid):
        from_dict(d)


def test_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigInvalid):
        load_config(p)
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "missing.json")


def test_schema_is_plain_json():
    json.dumps(CONFIG_SCHEMA)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), count=st.integers(1, 500),
       tol=st.floats(1e-14, 0.5), steps=st.integers(1, 5000),
       targets=st.lists(st.floats(0.01, 1e4), min_size=1, max_size=4),
       system=st.sampled_from(["lti", "lorenz"]))
def test_config_round_trip(seed, count, tol, steps, targets, system):
    base = default_config(system)
    cfg = base.replace(seed=seed, ic_count=count, truncation_tol=tol,
                       horizon=steps * base.dt, target_frequencies=targets)
    again = from_dict(json.loads(cfg.to_json()))
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


def test_hash_ignores_output_dir():
    cfg = default_config("lti")
    assert cfg.replace(output_dir="elsewhere").config_hash() == cfg.config_hash()
    assert cfg.replace(seed=1).config_hash() != cfg.config_hash()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_round_trip_is_exact(tmp_path_factory, values):
    p = tmp_path_factory.mktemp("csv") / "v.csv"
    io.write_csv(p, ["v"], [[v] for v in values])
    _, arr = io.read_csv(p)
    assert np.array_equal(arr[:, 0], np.array(values))


def test_trajectory_csv(tmp_path):
    tr = integrate_rk4(lti([[0.0, 1.0], [-1.0, 0.0]], [1.0, 0.0]), [1.0, 0.5], 0.1, 5)
    header, arr = io.read_csv(io.write_trajectory_csv(tmp_path / "t.csv", tr))
    assert header == ["t", "x1", "x2", "y"]
    assert np.array_equal(arr[:, 1:3], tr.states) and np.array_equal(arr[:, 3], tr.outputs)
    assert np.array_equal(arr[:, 0], tr.times)


def test_manifest(tmp_path):
    cfg = default_config("lti")
    f = io.write_csv(tmp_path / "sub" / "a.csv", ["x"], [[1.0]])
    m = json.loads(io.write_manifest(tmp_path, cfg, [f], "test").read_text())
    assert m["version"] == __version__
    assert m["config_hash"] == cfg.config_hash()
    assert m["files"] == [{"path": "sub/a.csv", "sha256": io.file_sha256(f)}]
