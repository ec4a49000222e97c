import csv
import io
import json

import pytest

from hardyz import cli
from hardyz.errors import ConfigurationError
from hardyz.store import load_grid


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))

    def _run(*argv):
        code = cli.main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err

    return _run


def _rows(out):
    return list(csv.reader(io.StringIO(out)))


def test_z_eval(run):
    code, out, err = run("z", "eval", "--t", "2.47575", "14.134725")
    assert code == cli.EXIT_OK
    rows = _rows(out)
    assert rows[0] == ["t", "Z", "method"]
    assert float(rows[1][1]) == pytest.approx(-0.52625, abs=1e-5)
    assert abs(float(rows[2][1])) < 1e-3
    assert "config_hash" in err and "cfg_fingerprint" in err


def test_z_scan_finds_first_zeros(run):
    code, out, _ = run("z", "scan", "--from", "14", "--to", "22")
    assert code == 0
    rows = _rows(out)[1:]
    zeros = {round(float(c), 5) for r in rows for c in r[:2] if c}
    assert zeros == {14.13473, 21.02204}


def test_json_format(run):
    code, out, _ = run("z", "eval", "--t", "20", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == ["t", "Z", "method"] and len(doc["rows"]) == 1
    assert doc["meta"]["command"] == "z"


def test_moments_table_at_one(run):
    code, out, _ = run("moments", "table", "--k", "1", "--to", "1")
    assert code == 0
    row = _rows(out)[1]
    assert float(row[0]) == 1.0 and float(row[1]) == 0.0
    assert float(row[2]) == pytest.approx(1.6834457366062796, abs=1e-12)
    assert float(row[3]) == pytest.approx(-3.141592653589793, abs=1e-15)


def test_moments_table_byte_identical(run):
    a = run("moments", "table", "--k", "1", "--to", "300", "--every", "50")
    b = run("moments", "table", "--k", "1", "--to", "300", "--every", "50")
    assert a[0] == 0 and a[1] == b[1] and len(_rows(a[1])) == 8


def test_grid_build_and_extend(run, tmp_path):
    path = tmp_path / "g.hzg"
    assert run("grid", "build", "--to", "50", "--path", str(path))[0] == 0
    assert load_grid(path).t_max == 50.0
    assert run("grid", "extend", "--to", "80", "--path", str(path))[0] == 0
    assert load_grid(path).t_max == 80.0


def test_grid_corrupt_file_is_compute_error(run, tmp_path):
    path = tmp_path / "g.hzg"
    run("grid", "build", "--to", "50", "--path", str(path))
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 1
    path.write_bytes(bytes(raw))
    code, _, err = run("grid", "extend", "--to", "80", "--path", str(path))
    assert code == cli.EXIT_COMPUTE and "checksum" in err


def test_mellin_eval(run):
    code, out, _ = run("mellin", "eval", "--k", "2", "--sigma", "2", "--x-max", "200", "--t-max", "20")
    assert code == 0 and _rows(out)[0][0] in ("k", "s", "sigma")


def test_verify_expsum_exit_codes(run):
    assert run("verify", "expsum", "--k", "1", "--T", "1000")[0] == cli.EXIT_OK
    assert run("verify", "expsum", "--k", "1", "--T", "500")[0] == cli.EXIT_FAIL


def test_usage_errors(run, tmp_path):
    assert run("z", "eval")[0] == cli.EXIT_USAGE
    assert run("bogus")[0] == cli.EXIT_USAGE
    assert run("verify", "parseval", "--k", "1", "--sigma", "0.9", "--x-max", "100",
               "--t-max", "50")[0] == cli.EXIT_USAGE
    cfg = tmp_path / "run.cfg"
    cfg.write_text("stepp = 0.1\n")
    code, _, err = run("z", "eval", "--t", "20", "--config", str(cfg))
    assert code == cli.EXIT_USAGE and "stepp" in err


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# desk settings\nstep = 0.025\nx_max = 500\nmethod = euler_maclaurin_oracle\n")
    args = cli.build_parser().parse_args(["z", "eval", "--t", "20", "--config", str(cfg),
                                          "--step", "0.04"])
    rc = cli.make_run_config(args)
    assert rc.step == 0.04 and rc.x_max == 500.0 and rc.method == "euler_maclaurin_oracle"
    base = cli.make_run_config(cli.build_parser().parse_args(["z", "eval", "--t", "20"]))
    assert base.digest() != rc.digest()


def test_run_config_validation():
    with pytest.raises(ConfigurationError):
        cli.parse_config_text("nonsense line without equals\n")
    with pytest.raises(ConfigurationError):
        cli.RunConfig(step=-1.0)
