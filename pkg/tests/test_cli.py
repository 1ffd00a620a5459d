import io
import json

import pytest

from noetherlab.cli import main, read_config_file, UsageError


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_map_momentum():
    code, out = run("map", "T1")
    assert code == 0
    assert out.strip() == "(rho*u, E:S*rho^(gamma) + rho*u^2, rho*u*v)"


def test_map_without_representation():
    code, out = run("map", "T9")
    assert code == 0
    assert "no Eulerian representation" in out


def test_show_unknown(capsys):
    code, _ = run("show", "T999")
    assert code == 2
    assert "unknown catalog id" in capsys.readouterr().err


def test_show_known():
    code, out = run("show", "X8t")
    assert code == 0 and "X9" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--gamma", "abc"],
    ["verify", "--gamma", "1"],
    ["verify", "--suite", "nope"],
    ["verify", "--trials", "0"],
    ["frobnicate"],
    ["map"],
    ["verify", "--entropy", "adiabatic"],
])
def test_usage_errors(argv, capsys):
    assert run(*argv)[0] == 2


def test_verify_nonisentropic_claws_json():
    code, out = run("verify", "--gamma", "symbolic", "--entropy", "general", "--suite", "claws",
                    "--format", "json-lines")
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert recs
    for r in recs:
        assert {"id", "check", "status", "scale"} <= set(r)
        assert r["status"] == "pass"
    assert [r["id"] for r in recs if r["check"] == "conservation"] == \
        ["Tmass", "T1", "T2", "T3", "T4", "T5", "T6", "T8", "T9", "TF"]


def test_verify_eulerian_fails_on_printed_energy():
    code, out = run("verify", "--gamma", "symbolic", "--entropy", "isentropic", "--suite", "eulerian")
    assert code == 1
    failing = [line for line in out.splitlines() if line.startswith("[FAIL]")]
    assert failing and all("eT6 " in line for line in failing)


def test_config_file_and_override(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# run settings\ngamma = 2\nentropy = isentropic\nsuite = noether\nformat = json-lines\n")
    code, out = run("verify", "--config", str(p))
    assert code == 0
    recs = [json.loads(line) for line in out.splitlines()]
    assert {r["details"]["config"] for r in recs} == {"gamma=2,entropy=isentropic"}
    code, out = run("verify", "--config", str(p), "--entropy", "general")
    assert {json.loads(line)["details"]["config"] for line in out.splitlines()} == {"gamma=2,entropy=general"}


def test_config_file_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("gamma: 2\n")
    with pytest.raises(UsageError):
        read_config_file(str(p))
    p.write_text("colour = red\n")
    with pytest.raises(UsageError):
        read_config_file(str(p))
    assert run("verify", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("NOETHERLAB_SEED", "123")
    code, out = run("oracle", "T1", "--format", "json-lines", "--entropy", "isentropic")
    assert code == 0
    first = json.loads(out.splitlines()[0])
    assert first["seed"] == 123
    code, out = run("oracle", "T1", "--format", "json-lines", "--entropy", "isentropic", "--seed", "9")
    assert json.loads(out.splitlines()[0])["seed"] == 9


def test_json_output_is_reproducible():
    a = run("oracle", "Th", "--format", "json-lines")
    b = run("oracle", "Th", "--format", "json-lines")
    assert a == b


def test_check_identity():
    code, out = run("check-identity", "--count", "20", "--gamma", "symbolic", "--entropy", "general")
    assert code == 0
    assert out.count("pair-") == 20


def test_parallel_run_matches_serial():
    a = run("verify", "--gamma", "2", "--suite", "admitted,claws", "--format", "json-lines")
    b = run("verify", "--gamma", "2", "--suite", "admitted,claws", "--format", "json-lines", "--workers", "2")
    assert a == b
