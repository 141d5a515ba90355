import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhphase.io import (
    DEFAULTS,
    PRESETS,
    ConfigError,
    ResultEnvelope,
    Table,
    dumps_json,
    fmt_float,
    load_config,
    loads_json,
    table_to_csv,
)


def write(tmp_path, text):
    p = tmp_path / "c.toml"
    p.write_text(text)
    return str(p)


def test_defaults():
    cfg = load_config(command="spectrum")
    assert cfg.model.t2 == DEFAULTS["model"]["t2"]
    assert cfg.section()["frame"] == "raw"


def test_layering(tmp_path):
    path = write(tmp_path, "[model]\nt2 = 0.7\nN = 12\n[greens]\neta = 0.01\n")
    cfg = load_config(path, ["model.N=20"], "greens", {("model", "t2"): 0.9})
    assert (cfg.model.t2, cfg.model.N, cfg.section()["eta"]) == (0.9, 20, 0.01)


@pytest.mark.parametrize("text", [
    "[model]\nt3 = 1.0\n",
    "[modle]\nt0 = 1.0\n",
    "[model]\nN = \"ten\"\n",
    "[model]\nN = 2.5\n",
    "[skin]\nmethod = \"guess\"\n",
    "[output]\njobs = 0\n",
    "[finite_size]\nN_list = [2]\n",
    "[model\n",
])
def test_rejects_bad_config(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, text))


def test_rejects_bad_override():
    with pytest.raises(ConfigError):
        load_config(overrides=["model.t9=1"])
    with pytest.raises(ConfigError):
        load_config(overrides=["t2=1"])


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/x.toml")


@pytest.mark.parametrize("name", PRESETS)
def test_presets_load(name):
    cfg = load_config(name)
    assert cfg.model.t0 == 1.0
    assert cfg.source == name


def test_echo_has_all_knobs():
    cfg = load_config("fig3", command="greens")
    e = cfg.echo()
    assert set(e["model"]) == {"t0", "t1R", "t1L", "t2", "eps0", "N"}
    assert set(e["greens"]) == set(DEFAULTS["greens"])
    assert "output" in e


def test_fmt_float():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(float("nan")) == "nan"
    assert fmt_float(-math.inf) == "-inf"
    assert float(fmt_float(1 / 3)) == 1 / 3


def test_csv_format():
    t = Table("x", ["a", "b", "c"], [[1, 0.1, True], [2, float("nan"), None], [3, "p,q", False]])
    text = table_to_csv(t)
    assert text == 'a,b,c\n1,0.10000000000000001,true\n2,nan,\n3,"p,q",false\n'
    assert "\r" not in text


scalars = st.one_of(st.none(), st.booleans(), st.integers(-10**12, 10**12),
                    st.floats(allow_nan=True, allow_infinity=True), st.text(max_size=8))
trees = st.recursive(scalars, lambda c: st.one_of(st.lists(c, max_size=4),
                                                  st.dictionaries(st.text(max_size=5), c, max_size=4)), max_leaves=20)


@given(trees)
def test_json_roundtrip(obj):
    text = dumps_json(obj)
    assert dumps_json(loads_json(text)) == text


def test_envelope_roundtrip():
    env = ResultEnvelope("spectrum", {"model": {"t0": 1.0}}, {"tables": {"t": {"columns": ["a"], "rows": [[0.1]]}}},
                         {"warnings": ["w"]})
    text = env.dumps()
    back = ResultEnvelope.loads(text)
    assert back.dumps() == text
    d = loads_json(text)
    assert d["tool"] == "nhphase" and d["version"] and d["command"] == "spectrum"
