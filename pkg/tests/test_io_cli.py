"""Result bundles and the command-line driver.

End-to-end runs go through ``cli.main`` in-process: each task writes a
bundle whose data files are byte-reproducible, and every failure class
maps to its documented exit code with a JSON diagnostic on stderr.
"""

import json
import math
import os

import numpy as np
import pytest
import yaml

from oemt import ConfigError
from oemt.cli import main, run_config
from oemt.io import BundleWriter, format_cell, read_table, sanitize
from oemt.presets import preset_names


# -- serialization ----------------------------------------------------------------

def test_sanitize_covers_numpy_and_special_values():
    payload = {
        "arr": np.arange(3.0),
        "nested": [np.float64(0.5), {"flag": np.bool_(True)}],
        "bad": [math.nan, math.inf, -math.inf],
        "z": 1 - 2j,
        "none": None,
        "n": np.int64(7),
    }
    clean = sanitize(payload)
    json.dumps(clean)  # strict-JSON safe
    assert clean["arr"] == [0.0, 1.0, 2.0]
    assert clean["bad"] == ["nan", "inf", "-inf"]
    assert clean["z"] == {"re": 1.0, "im": -2.0}
    assert clean["nested"][1]["flag"] is True
    assert clean["n"] == 7


def test_format_cell_round_trips_floats():
    rng = np.random.default_rng(5)
    values = list(rng.normal(size=50)) + [0.1, 1e-300, 2**-52, 1e17]
    for v in values:
        assert float(format_cell(v)) == v
    assert format_cell(True) == "1"
    assert format_cell(False) == "0"
    assert format_cell(np.int32(-3)) == "-3"
    assert format_cell("text") == "text"


def test_bundle_writer_publishes_atomically(tmp_path):
    target = tmp_path / "bundle"
    with BundleWriter(target) as writer:
        writer.add_table("data", {"x": [1.0, 2.0], "y": [3.0, 4.0]},
                         {"columns": ["x", "y"]})
        writer.add_json("meta", {"note": "first"})
        assert not target.exists()  # nothing visible before commit
    assert sorted(p.name for p in target.iterdir()) == [
        "data.csv", "data.json", "meta.json"]
    # a second publication fully replaces the first
    with BundleWriter(target) as writer:
        writer.add_table("other", {"x": [9.0]})
    assert sorted(p.name for p in target.iterdir()) == ["other.csv"]
    assert not any(p.name.startswith(".") for p in tmp_path.iterdir())


def test_bundle_writer_aborts_on_error(tmp_path):
    target = tmp_path / "bundle"
    with pytest.raises(RuntimeError):
        with BundleWriter(target) as writer:
            writer.add_json("meta", {})
            raise RuntimeError("boom")
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_bundle_rejects_ragged_tables(tmp_path):
    with BundleWriter(tmp_path / "bundle") as writer:
        with pytest.raises(ConfigError, match="ragged"):
            writer.add_table("bad", {"x": [1.0, 2.0], "y": [1.0]})
        writer.add_table("ok", {"x": []})  # empty table is fine


def test_read_table_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    x = rng.normal(size=20)
    with BundleWriter(tmp_path / "bundle") as writer:
        writer.add_table("data", {"x": x, "tag": ["a"] * 20})
    back = read_table(tmp_path / "bundle" / "data.csv")
    assert np.array_equal(back["x"], x)  # exact, not approximate
    assert back["tag"].dtype == object and back["tag"][0] == "a"


# -- CLI --------------------------------------------------------------------------

def run_cli(*argv):
    return main(list(argv))


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(payload))
    return path


def test_cli_list_presets(capsys):
    assert run_cli("--list-presets") == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == list(preset_names())


def test_cli_preset_export(tmp_path, capsys):
    out_file = tmp_path / "model.json"
    assert run_cli("--preset", "dimensionless-fig4", "--out",
                   str(out_file)) == 0
    payload = json.loads(out_file.read_text())
    assert payload["preset"] == "dimensionless-fig4"
    assert payload["model"]["units"] == "dimensionless"
    assert payload["derived"]["Gamma1"] == pytest.approx(0.8)
    # without --out the document goes to stdout
    assert run_cli("--preset", "dimensionless-fig4") == 0
    assert json.loads(capsys.readouterr().out)["preset"] == "dimensionless-fig4"


def test_cli_unknown_preset_exit_code(capsys):
    assert run_cli("--preset", "warp-drive") == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "PresetError"
    assert "warp-drive" in err["message"]


def test_cli_no_arguments_is_config_error(capsys):
    assert run_cli() == 2
    assert json.loads(capsys.readouterr().err)["exit_code"] == 2


def test_cli_spectrum_task(tmp_path, capsys):
    config = write_config(tmp_path, "spec.yaml", {
        "task": "spectrum",
        "preset": "dimensionless-fig4",
        "out": str(tmp_path / "out"),
        "spectrum": {"kind": "conversion",
                     "omega": {"min": -4.0, "max": 4.0, "points": 401}},
        "variants": [
            {"name": "matched"},
            {"name": "mismatched",
             "overrides": {"kappa1": 1.8, "kappa2": 3.2}},
        ],
    })
    assert run_cli(str(config)) == 0
    bundle = tmp_path / "out"
    assert capsys.readouterr().out.strip() == str(bundle)
    table = read_table(bundle / "spectrum_matched.csv")
    k0 = int(np.argmin(np.abs(table["omega"])))
    assert table["omega"][k0] == 0.0
    assert table["t31_abs"][k0] == pytest.approx(1.6 / 1.601, abs=1e-9)
    worse = read_table(bundle / "spectrum_mismatched.csv")
    assert worse["t31_abs"][k0] < table["t31_abs"][k0]
    side = json.loads((bundle / "spectrum_matched.json").read_text())
    assert side["style"] == "solid" and side["kind"] == "conversion"
    side2 = json.loads((bundle / "spectrum_mismatched.json").read_text())
    assert side2["style"] == "dashed"
    assert side2["model"]["modes"]["cavity1"]["damping"] == pytest.approx(1.8)
    meta = json.loads((bundle / "metadata.json").read_text())
    assert meta["task"] == "spectrum"


def test_cli_protocol_task(tmp_path):
    config = write_config(tmp_path, "proto.yaml", {
        "task": "protocol",
        "preset": "dimensionless-fig3",
        "out": str(tmp_path / "out"),
        "protocol": {"name": "double_swap", "points_per_segment": 40,
                     "input": {"type": "coherent", "alpha": 1.0}},
    })
    assert run_cli(str(config)) == 0
    bundle = tmp_path / "out"
    names = sorted(p.name for p in bundle.iterdir())
    assert {"trajectory.csv", "series.csv", "schedule.csv",
            "metrics.json"} <= set(names)
    metrics = json.loads((bundle / "metrics.json").read_text())
    assert 0.0 < metrics["metrics"]["fidelity"] < 1.0
    assert metrics["output_state"]["modes"] == ["cavity2"]
    sched = read_table(bundle / "schedule.csv")
    assert sched["g1"][0] == pytest.approx(0.1)
    assert sched["g2"][-1] == pytest.approx(0.07)
    traj = read_table(bundle / "trajectory.csv")
    assert "mean_cavity1_x" in traj and "cov_0_0" in traj


def test_cli_entangle_steady_metrics_only(tmp_path):
    config = write_config(tmp_path, "ent.yaml", {
        "task": "protocol",
        "model": {"units": "dimensionless", "modes": {
            "cavity1": {"omega": 0.0, "damping": 0.1},
            "mechanics": {"omega": 1.0, "damping": 1e-4},
            "cavity2": {"omega": 0.0, "damping": 0.1},
        }, "couplings": {
            "cavity1": {"g": 0.2, "sideband": "red"},
            "cavity2": {"g": 0.1, "sideband": "blue"},
        }},
        "out": str(tmp_path / "out"),
        "protocol": {"name": "entangle_red_blue", "steady": True},
    })
    assert run_cli(str(config)) == 0
    bundle = tmp_path / "out"
    names = {p.name for p in bundle.iterdir()}
    assert "metrics.json" in names and "trajectory.csv" not in names
    metrics = json.loads((bundle / "metrics.json").read_text())
    assert metrics["metrics"]["log_negativity_cavities"] > 0.4


def test_cli_sweep_long_format(tmp_path):
    config = write_config(tmp_path, "sweep.yaml", {
        "task": "sweep",
        "preset": "dimensionless-fig3",
        "out": str(tmp_path / "out"),
        "sweep": {
            "axes": [{"param": "n_th_m", "values": [0.0, 2.0]}],
            "evaluate": {"type": "protocol",
                         "protocol": {"name": "double_swap",
                                      "points_per_segment": 24,
                                      "input": {"type": "coherent",
                                                "alpha": 1.0}},
                         "metrics": ["fidelity", "peak_mech_occupation"]},
        },
        "variants": [
            {"name": "plain"},
            {"name": "hotter", "overrides": {"gamma_m": 1e-4}},
        ],
    })
    assert run_cli(str(config)) == 0
    table = read_table(tmp_path / "out" / "sweep.csv")
    assert list(table) == ["variant", "n_th_m", "metric", "value"]
    assert len(table["value"]) == 2 * 2 * 2
    assert list(table["variant"][:4]) == ["plain"] * 4
    assert list(table["metric"][:2]) == ["fidelity", "peak_mech_occupation"]
    fid = {(v, n): val for v, n, m, val in zip(
        table["variant"], table["n_th_m"], table["metric"], table["value"])
        if m == "fidelity"}
    assert fid[("plain", 2.0)] < fid[("plain", 0.0)]
    side = json.loads((tmp_path / "out" / "sweep.json").read_text())
    assert side["axes"] == ["n_th_m"]
    assert [v["style"] for v in side["variants"]] == ["solid", "dashed"]


def test_cli_sweep_unknown_metric_lists_available(tmp_path, capsys):
    config = write_config(tmp_path, "sweep.yaml", {
        "task": "sweep",
        "preset": "dimensionless-fig4",
        "out": str(tmp_path / "out"),
        "sweep": {
            "axes": [{"param": "g2", "values": [0.6]}],
            "evaluate": {"type": "scattering", "metrics": ["bogus_metric"]},
        },
    })
    assert run_cli(str(config)) == 2
    err = json.loads(capsys.readouterr().err)
    assert "available" in err["message"] and "t31_zero_abs" in err["message"]


def test_cli_search_tasks(tmp_path):
    match_cfg = write_config(tmp_path, "match.yaml", {
        "task": "search",
        "preset": "dimensionless-fig4",
        "overrides": {"g2": 0.5},
        "out": str(tmp_path / "match"),
        "search": {"match_impedance": {"adjust": "g2", "method": "exact"}},
    })
    assert run_cli(str(match_cfg)) == 0
    result = json.loads((tmp_path / "match" / "result.json").read_text())
    assert result["report"]["value"] == pytest.approx(0.6)

    opt_cfg = write_config(tmp_path, "opt.yaml", {
        "task": "search",
        "preset": "dimensionless-fig4",
        "out": str(tmp_path / "opt"),
        "seed": 3,
        "search": {"objective": "peak_conversion",
                   "parameters": {"g2": [0.2, 1.2]},
                   "max_evals": 200},
    })
    assert run_cli(str(opt_cfg)) == 0
    result = json.loads((tmp_path / "opt" / "result.json").read_text())
    g2_star = 0.5 * math.sqrt((0.8 + 1e-3) * 1.8)
    assert result["best_params"]["g2"] == pytest.approx(g2_star, abs=1e-5)
    trace = read_table(tmp_path / "opt" / "trace.csv")
    assert list(trace) == ["eval", "g2", "objective"]
    assert len(trace["eval"]) == result["n_evaluations"]


def test_cli_validate_task(tmp_path, capsys):
    good = write_config(tmp_path, "good.yaml", {
        "task": "validate",
        "preset": "jila-microwave",
        "out": str(tmp_path / "good"),
    })
    assert run_cli(str(good)) == 0
    report = json.loads((tmp_path / "good" / "validation.json").read_text())
    assert report["ok"] and not report["violations"]
    assert report["derived"]["resolved_sideband"] is True

    bad = write_config(tmp_path, "bad.yaml", {
        "task": "validate",
        "preset": "jila-microwave",
        "overrides": {"gamma_m": -1.0},
        "out": str(tmp_path / "bad"),
    })
    assert run_cli(str(bad)) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ModelValidationError"
    # the bundle with the diagnosis is still published
    report = json.loads((tmp_path / "bad" / "validation.json").read_text())
    assert not report["ok"]
    assert any("damping" in v for v in report["violations"])


def test_cli_exit_codes(tmp_path, capsys):
    missing = run_cli(str(tmp_path / "nope.yaml"))
    assert missing == 2

    garbled = tmp_path / "broken.yaml"
    garbled.write_text("task: [unclosed\n  - ")
    assert run_cli(str(garbled)) == 2

    bad_task = write_config(tmp_path, "task.yaml", {
        "task": "daydream", "preset": "dimensionless-fig4"})
    assert run_cli(str(bad_task)) == 2

    physics = write_config(tmp_path, "physics.yaml", {
        "task": "protocol",
        "preset": "dimensionless-fig3",
        "out": str(tmp_path / "p"),
        "protocol": {"name": "raman", "delta_offset": 0.0,
                     "input": {"type": "coherent", "alpha": 1.0}},
    })
    assert run_cli(str(physics)) == 3

    numerical = write_config(tmp_path, "numerical.yaml", {
        "task": "spectrum",
        "preset": "dimensionless-fig4",
        "overrides": {"gamma_m": 0.0},
        "out": str(tmp_path / "n"),
        "spectrum": {"kind": "conversion",
                     "omega": {"min": -1.0, "max": 1.0, "points": 11}},
    })
    assert run_cli(str(numerical)) == 4
    for line in capsys.readouterr().err.strip().splitlines():
        json.loads(line)  # every failure is one JSON diagnostic line


def test_cli_bundles_are_byte_reproducible(tmp_path):
    payload = {
        "task": "protocol",
        "preset": "dimensionless-fig3",
        "overrides": {"n_th_m": 2.0},
        "protocol": {"name": "double_swap", "points_per_segment": 32,
                     "input": {"type": "displaced_squeezed",
                               "alpha": 2.0, "squeeze": 0.4}},
    }
    cfg_a = write_config(tmp_path, "a.yaml", {**payload,
                                              "out": str(tmp_path / "a")})
    cfg_b = write_config(tmp_path, "b.yaml", {**payload,
                                              "out": str(tmp_path / "b")})
    assert run_cli(str(cfg_a)) == 0
    assert run_cli(str(cfg_b)) == 0
    names_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    names_b = sorted(p.name for p in (tmp_path / "b").iterdir())
    assert names_a == names_b
    for name in names_a:
        if name == "metadata.json":
            continue  # carries the timestamp and config path
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name


def test_run_config_default_out_is_results_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = write_config(tmp_path, "v.yaml", {
        "task": "validate", "preset": "rf-membrane"})
    bundle = run_config(config)
    assert bundle == (tmp_path / "results" / "validate") \
        or str(bundle) == os.path.join("results", "validate")
    assert (tmp_path / "results" / "validate" / "validation.json").exists()
