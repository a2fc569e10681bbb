import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gradplate import __version__
from gradplate.cli import ConfigWarning, main, parse_config, run
from gradplate.io import ConfigError, RunConfig, csv_text, load_summary, svg_text


def test_dispersion_flags_parse():
    cfg = parse_config(["dispersion", "--material", "m.txt", "--k-max", "200", "--points", "400"])
    assert cfg.subcommand == "dispersion"
    assert cfg.material == "m.txt"
    assert cfg.params["k_max"] == 200.0 and cfg.params["points"] == 400


def test_command_line_overrides_file_with_warning(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("k_max = 50\npoints = 7\n")
    with pytest.warns(ConfigWarning, match="k_max"):
        cfg = parse_config(["dispersion", "--config", str(f), "--k-max", "60"])
    assert cfg.params["k_max"] == 60.0
    assert cfg.params["points"] == 7


def test_unknown_flag_is_usage_error():
    with pytest.raises(ConfigError, match="foo"):
        parse_config(["dispersion", "--foo", "1"])
    assert main(["dispersion", "--foo", "1"]) == 2


def test_unknown_file_key_named(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("foo = 1\n")
    with pytest.raises(ConfigError, match="foo"):
        parse_config(["lattice", "--config", str(f)])


def test_invalid_value_exit_code(capsys):
    assert main(["fracture", "--beta", "-1"]) == 2
    assert main(["waves", "--grid", "15"]) == 2


def test_numerical_failure_exit_code(capsys):
    # a 16-particle chain has no wavenumbers with k d <= 0.3 to fit lengths from
    assert main(["lattice", "--N", "16"]) == 3
    assert "IllConditionedFit" in capsys.readouterr().err


def test_missing_material_file_is_usage_error(capsys):
    assert main(["material", "--material", "/nonexistent/m.txt"]) == 2
    assert "nonexistent" in capsys.readouterr().err


def test_csv_format_and_column_check():
    text = csv_text(("a", "b"), [(1, 0.1), (2, 1 / 3)])
    assert text == "a,b\n1,0.10000000000000001\n2,0.33333333333333331\n"
    with pytest.raises(ValueError):
        csv_text(("a",), [(1, 2)])


def test_dispersion_csv_has_seven_columns_and_is_byte_stable(tmp_path):
    outs = []
    for n in (1, 2):
        out = tmp_path / f"d{n}.csv"
        run(parse_config(["dispersion", "--points", "20", "--out", str(out)]))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header == "k,cL2,cT2,cN2,cL2_cl,cT2_cl,cN2_cl"


def test_summary_round_trips_config(tmp_path):
    out = tmp_path / "l.csv"
    cfg = parse_config(["lattice", "--N", "64", "--out", str(out), "--seed", "5"])
    run(cfg)
    back, doc = load_summary(tmp_path / "l.json")
    assert back == cfg
    assert doc["version"] == __version__ and doc["seed"] == 5


@given(
    st.sampled_from(["lattice", "fracture", "reduce"]),
    st.integers(0, 10**6),
    st.none() | st.text(alphabet="abc/_.", min_size=1, max_size=8),
)
def test_run_config_json_round_trip(sub, seed, out):
    cfg = parse_config([sub, "--seed", str(seed)] + (["--out", out] if out else []))
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_svg_is_well_formed_with_one_polyline_per_series():
    x = np.linspace(1, 10, 5)
    text = svg_text({"a": (x, x**2), "b <&>": (x, np.sqrt(x))}, "k", "c^2", logx=True)
    root = ET.fromstring(text)
    lines = [el for el in root.iter() if el.tag.endswith("polyline")]
    assert len(lines) == 2


def test_fracture_writes_three_files(tmp_path):
    prefix = str(tmp_path / "fr")
    assert main(["fracture", "--N", "32", "--field-nx", "5", "--field-nz", "3", "--out", prefix]) == 0
    f_rows = (tmp_path / "fr_f.csv").read_text().splitlines()
    assert f_rows[0] == "x,f,f1,f2,f3,f4" and len(f_rows) == 34
    assert (tmp_path / "fr_field.csv").read_text().startswith("x,z,v,vx,vz\n")
    report = json.loads((tmp_path / "fr_report.json").read_text())
    assert {"residual", "cond", "sup_norms"} <= set(report["results"])


@pytest.mark.parametrize(
    "argv",
    [
        ["material"],
        ["ellipticity", "--samples", "64"],
        ["waves", "--grid", "16", "--duration", "1"],
        ["waves", "--grid", "16", "--duration", "1", "--method", "rk4"],
        ["lattice", "--N", "64"],
        ["reduce", "--family", "stretch", "--h-list", "0.1,0.05"],
    ],
)
def test_subcommands_succeed(argv, capsys):
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert json.loads(out[out.index("{"):])["config"]["subcommand"] == argv[0]
