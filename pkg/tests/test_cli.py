import csv
import io
import json
import shutil
import subprocess
import sys

import pytest

from spectral_sumrules import __version__
from spectral_sumrules.cli import config_hash, load_schema, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None, err


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# timestamp: ")
    assert lines[1].startswith(f"# tool=spectral-sumrules version={__version__} config_hash=")
    return list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))


def test_verify_semicircle(capsys):
    code, doc, _ = run_json(capsys, "verify", "--ensemble", "hermite", "--measure", "sc")
    assert code == 0
    assert doc["result"]["status"] == "PASS" and doc["result"]["abs_gap"] < 1e-9
    assert list(doc)[0] == "timestamp"
    assert doc["meta"]["version"] == __version__ and doc["meta"]["seed"] == 0


def test_verify_rank_one(capsys):
    code, doc, _ = run_json(capsys, "verify", "--ensemble", "hermite", "--measure", "rank-one:c=0.5")
    assert code == 0
    assert abs(doc["result"]["sum_side"]["value"] - 0.125) < 1e-12
    assert abs(doc["result"]["spectral_side"]["value"] - 0.125) < 1e-4


def test_verify_atom_at_zero(capsys):
    code, doc, _ = run_json(capsys, "verify", "--ensemble", "laguerre", "--tau", "0.5", "--measure", "atom-at-zero")
    assert code == 0 and doc["result"]["status"] == "PASS-inf"


def test_verify_fail_exit_code(tmp_path, capsys):
    path = tmp_path / "pm.json"
    path.write_text(json.dumps({
        "kind": "poly-modulated",
        "params": {"law": "SC", "law_params": [], "coeffs": [1.0, 0.0, 0.5]},
        "atoms_plus": [], "atoms_minus": [], "ac_mass": 1.0,
    }))
    code, doc, _ = run_json(capsys, "verify", "--ensemble", "hermite", "--measure", str(path), "--depth", "2")
    assert code == 2 and doc["result"]["status"] == "FAIL"
    code, doc, _ = run_json(capsys, "verify", "--ensemble", "hermite", "--measure", str(path), "--depth", "50")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--ensemble", "hermite"],
        ["verify", "--ensemble", "hermite", "--measure", "nonsense"],
        ["verify", "--ensemble", "hermite", "--measure", "rank-one:c"],
        ["verify", "--ensemble", "cauchy", "--measure", "sc"],
        ["sample", "--ensemble", "hermite", "--n", "0"],
        ["probe", "--ensemble", "hermite", "--x", "1.0", "--nladder", "50"],
        ["probe", "--ensemble", "hermite", "--x", "2.5", "--nladder", "50", "--draws", "5"],
        ["verify", "--ensemble", "hermite", "--measure", "/no/such/file.json"],
    ],
)
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == ""
    diag = json.loads(err)
    assert set(diag["error"]) == {"type", "message"}


def test_sample_byte_identical(tmp_path, capsys):
    argv = ["sample", "--ensemble", "hermite", "--n", "100", "--beta", "2", "--seed", "7"]
    main(argv + ["--out", str(tmp_path / "a.json")])
    main(argv + ["--out", str(tmp_path / "b.json")])
    a = (tmp_path / "a.json").read_text().splitlines()
    b = (tmp_path / "b.json").read_text().splitlines()
    assert a[1].startswith('  "timestamp"')
    assert a[:1] + a[2:] == b[:1] + b[2:]
    assert json.loads("\n".join(a))["meta"]["seed"] == 7


def test_sample_csv_byte_identical(capsys):
    argv = ["sample", "--ensemble", "laguerre", "--n", "30", "--seed", "9", "--format", "csv"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a.splitlines()[1:] == b.splitlines()[1:]


def test_sample_jacobi_range(capsys):
    code, out, _ = run(capsys, "sample", "--ensemble", "jacobi-kn", "--n", "2000", "--format", "csv")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 2000
    assert all(0 < float(r["eigenvalue"]) < 1 for r in rows)


def test_sample_weighted(capsys):
    code, out, _ = run(capsys, "sample", "--ensemble", "hermite", "--n", "50", "--weighted", "--format", "csv")
    total = sum(float(r["weight"]) for r in csv_rows(out))
    assert abs(total - 1) < 1e-12


def test_rates_grid(capsys):
    code, out, _ = run(capsys, "rates", "--ensemble", "hermite", "--grid", "2.1:3.0:0.1", "--format", "csv")
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 10
    assert [float(r["x"]) for r in rows] == pytest.approx([2.1 + 0.1 * i for i in range(10)])
    assert all(float(r["discrepancy"]) < 1e-6 for r in rows)


def test_rates_inside_support_marked_inf(capsys):
    code, out, _ = run(capsys, "rates", "--x", "1.5", "--ensemble", "hermite", "--side", "plus", "--format", "csv")
    (row,) = csv_rows(out)
    assert code == 0 and row["direct"] == "inf" and row["effective"] == "inf"


def test_rates_require_outside(capsys):
    code, _, err = run(capsys, "rates", "--x", "1.5", "--ensemble", "hermite", "--require-outside")
    assert code == 1 and "inside the support" in json.loads(err)["error"]["message"]


def test_probe_tail_fractions(capsys):
    code, doc, _ = run_json(capsys, "probe", "--ensemble", "hermite", "--x", "2.2", "--nladder", "50,100,200")
    assert code == 0
    fractions = [r["p_hat"] for r in doc["result"]["rows"]]
    assert all(b <= a for a, b in zip(fractions, fractions[1:]))
    assert doc["result"]["tail_monotone"]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "verify", "ensemble": "hermite", "measure": "rank-one:c=0.9"}))
    code, doc, _ = run_json(capsys, "verify", "--config", str(cfg), "--measure", "rank-one:c=0.3")
    assert code == 0
    assert doc["meta"]["config"]["measure"] == "rank-one:c=0.3"
    assert abs(doc["result"]["sum_side"]["value"] - 0.045) < 1e-12


def test_config_schema_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "verify", "ensemble": "hermite", "measure": "sc", "colour": "red"}))
    code, _, err = run(capsys, "verify", "--config", str(cfg))
    assert code == 1 and "colour" in err


def test_output_directory_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SPECTRAL_SUMRULES_OUT", str(tmp_path))
    code, out, _ = run(capsys, "rates", "--ensemble", "hermite", "--grid", "2.5")
    assert code == 0 and out == ""
    (path,) = tmp_path.iterdir()
    digest = json.loads(path.read_text())["meta"]["config_hash"]
    assert path.name == f"rates-{digest}.json"


def test_config_hash_ignores_output_location():
    base = {"command": "sample", "ensemble": "hermite", "n": 5}
    assert config_hash(base) == config_hash({**base, "out": "x.json", "format": "csv"})
    assert config_hash(base) != config_hash({**base, "seed": 1})


def test_schema_is_valid():
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(load_schema())


@pytest.mark.skipif(shutil.which("spectral-sumrules") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["spectral-sumrules", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spectral_sumrules", "verify", "--ensemble", "hermite", "--measure", "sc"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["result"]["status"] == "PASS"


def test_verify_flags_hard_edge_atom(tmp_path, capsys, monkeypatch):
    import spectral_sumrules.cli as cli
    from spectral_sumrules.measures import kesten_mckay, measure_from_parts

    law = kesten_mckay(0, 0)
    mu = measure_from_parts(law.support, lambda x: 0.9 * law.density(x), 0.9, [(1.0, 0.1)])
    monkeypatch.setattr(cli, "parse_measure", lambda text, ens: mu)
    code, out, err = run(capsys, "verify", "--ensemble", "jacobi", "--measure", "custom")
    assert code == 1
    assert json.loads(out)["result"]["status"] == "FLAGGED"
    assert "hard edge" in json.loads(err)["error"]["message"]
