import copy
import csv
import json
import math

import pytest
import yaml

from nlpressure.cli import (
    EXIT_CAP,
    EXIT_CONFIG,
    EXIT_OK,
    bundled_config,
    load_config,
    main,
    run,
    validate,
)


def bundled(name):
    config, _ = load_config(bundled_config(name))
    return config


def read_csv(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write(tmp_path, config, name="c.cfg"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(config))
    return p


def test_bundled_configs_validate():
    for name in ("remark.cfg", "fullshift-linear.cfg"):
        assert validate(bundled(name)) == []


def test_remark_run(tmp_path):
    code = main([str(bundled_config("remark.cfg")), "--output-dir", str(tmp_path), "--workers", "1"])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "pressure.csv")
    assert len(rows) == 8
    for r in rows:
        assert float(r["rate_p3"]) == pytest.approx(math.log(2) + 10, abs=1e-12)
    for name in ("entropy.csv", "variational.json", "audits.json", "manifest.json"):
        assert (tmp_path / name).exists()
    audits = json.loads((tmp_path / "audits.json").read_text())
    assert audits["counts"]["failed"] == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 0 and "config_sha256" in json.dumps(manifest)


def test_fullshift_linear_run(tmp_path):
    config = bundled("fullshift-linear.cfg")
    code, _ = run(config, tmp_path)
    assert code == EXIT_OK
    want = math.log(1 + math.e)
    for r in read_csv(tmp_path / "pressure.csv"):
        for p in ("p1", "p2", "p3", "p4"):
            assert float(r[f"rate_{p}"]) == pytest.approx(want, abs=1e-9)


def test_exact_outputs_are_byte_identical(tmp_path):
    config = bundled("remark.cfg")
    config["tasks"] = ["pressure", "inequality_audit"]
    a, b = tmp_path / "a", tmp_path / "b"
    run(config, a, workers=1)
    run(config, b, workers=2)
    assert (a / "pressure.csv").read_bytes() == (b / "pressure.csv").read_bytes()
    assert (a / "audits.json").read_bytes() == (b / "audits.json").read_bytes()


def test_float_outputs_repeat(tmp_path):
    config = bundled("fullshift-linear.cfg")
    run(config, tmp_path / "a", precision="float")
    run(config, tmp_path / "b", precision="float")
    ra, rb = read_csv(tmp_path / "a" / "pressure.csv"), read_csv(tmp_path / "b" / "pressure.csv")
    for x, y in zip(ra, rb):
        for k in x:
            if k.startswith(("log_", "rate_")):
                assert abs(float(x[k]) - float(y[k])) <= 1e-12


def test_empty_tasks_exit_2(tmp_path):
    config = bundled("remark.cfg")
    config["tasks"] = []
    assert any("task list is empty" in d["message"] for d in validate(config))
    assert main([str(write(tmp_path, config)), "--output-dir", str(tmp_path / "o")]) == EXIT_CONFIG
    assert not (tmp_path / "o" / "pressure.csv").exists()


def test_not_a_cover_diagnostic():
    config = bundled("remark.cfg")
    config["covers"] = [{"name": "a", "elements": [["0"], ["1"]]}]
    msgs = [d["message"] for d in validate(config)]
    assert any("not a cover" in m for m in msgs)


def test_dead_symbol_diagnostic():
    config = bundled("remark.cfg")
    config["system"]["transitions"] = [[1, 1, 0], [1, 1, 0], [0, 0, 0]]
    msgs = [d["message"] for d in validate(config)]
    assert any("has no successor" in m for m in msgs)


def test_diagnostics_have_paths():
    config = bundled("remark.cfg")
    config["n_range"] = "many"
    config["covers"].append(copy.deepcopy(config["covers"][0]))
    diags = validate(config)
    assert diags and all(set(d) == {"path", "message"} for d in diags)


def test_validate_only(tmp_path, capsys):
    p = write(tmp_path, bundled("remark.cfg"))
    assert main([str(p), "--validate-only"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == []


def test_cap_exit_3(tmp_path, capsys):
    config = bundled("fullshift-linear.cfg")
    config["n_range"] = [25]
    config["tasks"] = ["pressure"]
    code = main([str(write(tmp_path, config)), "--output-dir", str(tmp_path / "o")])
    err = capsys.readouterr().err
    assert code == EXIT_CAP
    assert "task pressure" in err


def test_missing_file_exit_2(tmp_path):
    assert main([str(tmp_path / "nope.cfg")]) == EXIT_CONFIG


def test_factor_section_required():
    config = bundled("remark.cfg")
    config["tasks"] = ["factor_audit"]
    assert validate(config)
