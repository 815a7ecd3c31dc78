import csv
import io
import json
from pathlib import Path

import pytest

from framemeasures.cli import config_from_obj, main, parse_config, run
from framemeasures.errors import ConfigError

DATA = Path(__file__).parent / "data"


def run_obj(obj):
    return run(config_from_obj(obj))


def test_parse_minimal_catalog_command():
    cfg = parse_config('{"command": "catalog"}')
    assert cfg.command == "catalog"
    status, text = run(cfg)
    assert status == 0
    payload = json.loads(text)
    assert len(payload["pairs"]) == 4


def test_parse_rejects_unknown_command():
    with pytest.raises(ConfigError, match="command"):
        parse_config('{"command": "frobnicate"}')


def test_parse_rejects_bad_measure():
    obj = {
        "command": "describe",
        "measure": {"node": "ifs_invariant", "scale": 4, "digits": [0, 2],
                    "weights": ["0.5", "0.6"]},
    }
    with pytest.raises(ConfigError, match="weights sum"):
        config_from_obj(obj)


def test_parse_requires_seed_for_verify():
    obj = {
        "command": "verify",
        "pair": {"source": "catalog", "index": 2},
        "family": {"kind": "trig", "count": 3, "max_degree": 2},
    }
    with pytest.raises(ConfigError, match="seed"):
        config_from_obj(obj)


def test_describe_command():
    obj = {
        "command": "describe",
        "measure": {"node": "lebesgue_on_set", "intervals": [["0", "1"]]},
    }
    status, text = run_obj(obj)
    assert status == 0
    payload = json.loads(text)
    assert float(payload["mass"]) == 1.0
    assert payload["support"]["kind"] == "interval-union"


def test_transform_command_rows():
    obj = {
        "command": "transform",
        "measure": {"node": "lebesgue_on_set", "intervals": [["0", "1"]]},
        "grid": {"start": "0", "stop": "2", "count": 5},
        "output": {"format": "csv"},
    }
    status, text = run_obj(obj)
    assert status == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "re", "im", "err"]
    assert len(rows) == 6
    assert float(rows[1][1]) == pytest.approx(1.0, abs=1e-13)


def verify_obj(fmt="json", seed=7):
    return {
        "command": "verify",
        "pair": {"source": "catalog", "index": 2, "config": {"comb_halfwidth": 16}},
        "family": {"kind": "trig", "count": 6, "max_degree": 8, "seed": seed},
        "output": {"format": fmt},
    }


def test_verify_consistent_exits_zero():
    status, text = run_obj(verify_obj())
    assert status == 0
    payload = json.loads(text)
    assert payload["verdict"] == "consistent"


def test_verify_wrong_cert_exits_two():
    obj = verify_obj()
    # deliberately wrong certificate: claims a tight frame at level 2
    pair_obj = {
        "source": "explicit",
        "mu": {"node": "lebesgue_on_set", "intervals": [["0", "1"]]},
        "nu": {
            "node": "atomic",
            "atoms": [
                {"point": str(float(n)), "weight": "1"} for n in range(-16, 17)
            ],
        },
        "cert": {"A": "2", "B": "2", "kind": "tight", "provenance": []},
    }
    obj["pair"] = pair_obj
    status, text = run_obj(obj)
    assert status == 2
    assert json.loads(text)["verdict"] == "lower-violated"


def test_construct_command_applies_steps():
    obj = {
        "command": "construct",
        "pair": {"source": "catalog", "index": 2, "config": {"comb_halfwidth": 8}},
        "construct": {
            "steps": [
                {
                    "rule": "density_restrict",
                    "set": [["0", "0.5"]],
                    "phi": {
                        "form": "piecewise-constant",
                        "breakpoints": ["0", "0.25", "1"],
                        "values": ["0.5", "2"],
                    },
                },
                {"rule": "scale_base", "alpha": "2"},
            ]
        },
    }
    status, text = run_obj(obj)
    assert status == 0
    payload = json.loads(text)
    assert float(payload["cert"]["A"]) == 1.0
    assert float(payload["cert"]["B"]) == 4.0
    rules = [s["rule"] for s in payload["cert"]["provenance"]]
    assert rules == ["plancherel-base", "density-restrict-envelope", "scale-measure"]


def test_limit_check_command():
    obj = {
        "command": "limit-check",
        "pair": {"source": "catalog", "index": 2, "config": {"comb_halfwidth": 8}},
        "family": {"kind": "trig", "count": 4, "max_degree": 3, "seed": 5},
        "limit_check": {"kind": "i", "n_list": [1, 2]},
    }
    status, text = run_obj(obj)
    assert status == 0
    payload = json.loads(text)
    assert [e["n"] for e in payload["entries"]] == [1, 2]
    assert payload["drift_ok"] is True


def test_csv_and_json_agree_field_by_field():
    status_j, text_j = run_obj(verify_obj("json"))
    status_c, text_c = run_obj(verify_obj("csv"))
    assert status_j == status_c == 0
    payload = json.loads(text_j)
    rows = list(csv.reader(io.StringIO(text_c)))
    assert rows[0] == ["id", "ratio", "err", "tail"]
    body = [r for r in rows[1:] if not r[0].startswith("summary:")]
    assert len(body) == len(payload["ratios"])
    for row, entry in zip(body, payload["ratios"]):
        assert row[0] == entry["id"]
        assert row[1] == entry["ratio"]
        assert row[2] == entry["err"]
    summaries = {r[0]: r[1] for r in rows[1:] if r[0].startswith("summary:")}
    assert summaries["summary:emp_lower"] == payload["emp_lower"]
    assert summaries["summary:emp_upper"] == payload["emp_upper"]
    assert summaries["summary:verdict"] == payload["verdict"]


def test_empty_family_rejected():
    obj = verify_obj()
    obj["family"]["count"] = 0
    with pytest.raises(Exception):
        run_obj(obj)


def test_cli_main_determinism_and_exit_codes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(verify_obj()))
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert main(["--config", str(cfg_path), "--out", str(out1)]) == 0
    assert main(["--config", str(cfg_path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_main_error_exit(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text("{not json")
    assert main(["--config", str(cfg_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_seed_override_changes_family(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(verify_obj(seed=1)))
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    main(["--config", str(cfg_path), "--out", str(a)])
    main(["--config", str(cfg_path), "--seed", "2", "--out", str(b)])
    ra = json.loads(a.read_text())["ratios"]
    rb = json.loads(b.read_text())["ratios"]
    assert [e["id"] for e in ra] == [e["id"] for e in rb]
    assert any(x["ratio"] != y["ratio"] for x, y in zip(ra[1:], rb[1:]))


def test_golden_verify_artifacts():
    """Byte-stable fixture for the first catalog pair's verify run."""
    obj = {
        "command": "verify",
        "pair": {"source": "catalog", "index": 1, "config": {"window_halfwidth": 32}},
        "family": {"kind": "trig", "count": 5, "max_degree": 4, "seed": 7},
    }
    _, text_json = run_obj({**obj, "output": {"format": "json"}})
    _, text_csv = run_obj({**obj, "output": {"format": "csv"}})
    golden_json = (DATA / "golden_pair1_verify.json").read_text()
    golden_csv = (DATA / "golden_pair1_verify.csv").read_text()
    assert text_json == golden_json
    assert text_csv == golden_csv


def test_cli_quad_flag_overrides(tmp_path):
    obj = {
        "command": "transform",
        "measure": {"node": "ifs_invariant", "scale": 4, "digits": [0, 2],
                    "weights": ["0.5", "0.5"]},
        "grid": {"start": "1", "stop": "4", "count": 3},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(obj))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["--config", str(cfg_path), "--out", str(a)]) == 0
    assert main(["--config", str(cfg_path), "--ifs-depth", "4", "--out", str(b)]) == 0
    ra = json.loads(a.read_text())["rows"]
    rb = json.loads(b.read_text())["rows"]
    # a shallower transfer-product truncation carries a larger certified error
    assert float(rb[2]["err"]) > float(ra[2]["err"])


def test_cli_trunc_flag_overrides_catalog(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"command": "catalog"}))
    out = tmp_path / "out.json"
    assert main(["--config", str(cfg_path), "--trunc-T", "4", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    comb = payload["pairs"][1]["nu"]["atoms"]
    assert len(comb) == 9  # |n| <= 4


@pytest.mark.parametrize(
    "broken",
    [
        {"command": "verify"},  # missing pair and family
        {"command": "describe"},  # missing measure
        {"command": "transform", "measure": {"node": "lebesgue_on_set", "intervals": [["0", "1"]]}},
        {"command": "catalog", "catalog": {"bogus": 1}},
        {"command": "construct", "pair": {"source": "catalog", "index": 1}},
        {"command": "verify", "pair": {"source": "catalog", "index": 9},
         "family": {"kind": "trig", "count": 2, "max_degree": 1, "seed": 1}},
        {"command": "limit-check", "pair": {"source": "catalog", "index": 2},
         "family": {"kind": "trig", "count": 2, "max_degree": 1, "seed": 1}},
    ],
)
def test_fault_injected_configs_exit_one(tmp_path, broken, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(broken))
    assert main(["--config", str(cfg_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unwritable_destination_exits_one(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"command": "catalog"}))
    dest = tmp_path / "no" / "such" / "dir" / "out.json"
    assert main(["--config", str(cfg_path), "--out", str(dest)]) == 1
    assert "error" in capsys.readouterr().err


def test_trunc_T_accepted_in_quad_group():
    obj = {
        "command": "verify",
        "pair": {"source": "catalog", "index": 2},
        "quad": {"trunc_T": 8},
        "family": {"kind": "trig", "count": 3, "max_degree": 2, "seed": 1},
    }
    cfg = config_from_obj(obj)
    assert len(cfg.pair.nu.points) == 17  # |n| <= 8


def test_catalog_overrides_merge_under_pair_config():
    obj = {
        "command": "verify",
        "catalog": {"comb_halfwidth": 12},
        "pair": {"source": "catalog", "index": 2, "config": {"E": [["0", "0.5"]]}},
        "family": {"kind": "trig", "count": 3, "max_degree": 2, "seed": 1},
    }
    cfg = config_from_obj(obj)
    assert len(cfg.pair.nu.points) == 25  # global halfwidth kept
    assert cfg.pair.mu.region.intervals == ((0.0, 0.5),)
