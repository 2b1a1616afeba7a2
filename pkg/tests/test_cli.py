import json
import subprocess
import sys

import pytest

from dimpoly.cli import main

from conftest import QUAD4


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


# --- happy paths --------------------------------------------------------------

def test_shell(capsys):
    assert run(capsys, "shell", "blocks=1", "r=3", "s=0") == (0, "7\n", "")


def test_shell_oracle_check_json(capsys):
    code, out, _ = run(capsys, "shell", "blocks=1,2", "r=3,2", "s=1,1", "--json", "--oracle-check")
    assert code == 0
    assert json.loads(out) == {"count": 72, "oracle_check": "ok"}


def test_set_omega(capsys, files):
    f = files("e.txt", "blocks=2\n1,1\n")
    code, out, _ = run(capsys, "set-omega", f, "--oracle-check", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["partition"] == [2] and obj["oracle_check"] == "ok"


def test_set_phi_blocks_flag(capsys, files):
    f = files("a.txt", "2\n")
    code, out, _ = run(capsys, "set-phi", f, "--blocks", "1", "--oracle-check")
    assert code == 0
    assert "C(t1+1,1)" in out


def test_charset(capsys, files):
    f = files("ex.spec", f"blocks=1,1,1\ngens=1\n{QUAD4}\n")
    code, out, _ = run(capsys, "charset", f, "--oracle-check")
    assert code == 0
    assert out.splitlines()[:2] == ["a1^3 y1 + a1^-3 y1 + a2^2 y1 + a3^1 y1",
                                    "a1^-4 y1 + a1^2 y1 + a1^-1 a2^2 y1 + a1^-1 a3^1 y1"]


def test_reduce(capsys, files):
    f = files("r.txt", "blocks=1\ngens=1\na1^3 y1 + y1\na1^1 y1 - y1\n")
    code, out, _ = run(capsys, "reduce", f, "--oracle-check", "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["oracle_check"] == "ok" and obj["steps"] >= 1


def test_oracle_json(capsys, files):
    f = files("s.spec", "blocks=1\ngens=1\na1^1 y1 + y1\n")
    code, out, _ = run(capsys, "oracle", f, "r=5", "s=0", "--json", "--oracle-check")
    assert code == 0
    assert json.loads(out)["trdeg"] == 1


def test_dimpoly_json_deterministic(capsys, files):
    f = files("s.spec", "blocks=1\ngens=1\na1^2 y1 + a1^-1 y1\n")
    a = run(capsys, "dimpoly", f, "--json")
    b = run(capsys, "dimpoly", "--spec", f, "--json")
    assert a[0] == b[0] == 0
    assert a[1] == b[1]
    assert set(json.loads(a[1])) >= {"phi", "thresholds", "invariants", "samples"}


def test_univariate(capsys, files):
    f = files("free.spec", "blocks=1\ngens=1\n")
    code, out, _ = run(capsys, "univariate", f, "--json")
    assert code == 0
    obj = json.loads(out)
    assert obj["degree"] == 1 and obj["leading"] == "2"


def test_invariants_and_distinguish_self(capsys, files):
    f = files("s.spec", "blocks=1,1\ngens=1\na1^1 y1 + a2^1 y1\n")
    code, out, _ = run(capsys, "invariants", f, "--json")
    assert code == 0 and "sigma_trdeg" in json.loads(out)
    code, out, _ = run(capsys, "distinguish", f, f)
    assert (code, out.strip()) == (0, "INCONCLUSIVE")


def test_stdin(capsys, monkeypatch):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO("blocks=1\ngens=1\na1^1 y1 + y1\n"))
    code, out, _ = run(capsys, "charset", "-")
    assert code == 0 and out.strip()


# --- input errors: exit 2 ----------------------------------------------------------

def test_bad_generator_reports_position(capsys, files):
    f = files("bad.spec", "blocks=1,1\ngens=2\ny1 + y9\n")
    code, _, err = run(capsys, "charset", f)
    assert code == 2
    assert "3:6" in err


@pytest.mark.parametrize("argv", [
    ("shell", "blocks=1", "r=2", "s=3"),
    ("shell", "r=2"),
    ("shell", "blocks=1", "r=x"),
    ("shell", "blocks"),
    ("nosuchcommand",),
    ("charset", "/nonexistent/file.spec"),
])
def test_input_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_distinguish_partition_mismatch(capsys, files):
    a = files("a.spec", "blocks=1,1\ngens=1\na1^1 y1 + a2^1 y1\n")
    b = files("b.spec", "blocks=2\ngens=1\na1^1 y1 + a2^1 y1\n")
    assert run(capsys, "distinguish", a, b)[0] == 2


# --- computation errors: exit 1 --------------------------------------------------------

def test_enumeration_cap(capsys, monkeypatch):
    monkeypatch.setenv("DIMPOLY_MAX_ENUM", "5")
    code, _, err = run(capsys, "shell", "blocks=1,1", "r=20", "s=0", "--oracle-check")
    assert code == 1
    assert "ResourceError" in err


def test_max_enum_flag(capsys, files):
    import os
    f = files("s.spec", "blocks=1\ngens=1\na1^1 y1 + y1\n")
    assert run(capsys, "oracle", f, "r=50", "--max-enum", "10")[0] == 1
    assert "DIMPOLY_MAX_ENUM" not in os.environ


def test_failed_oracle_check_exits_1(capsys, files):
    # two counted terms against one degree of freedom
    f = files("s.spec", "blocks=1\ngens=1\na1^1 y1 + y1\n")
    code, _, err = run(capsys, "dimpoly", f, "--oracle-check", "--no-lambda-check")
    assert code == 1
    assert "oracle" in err


# --- installed entry point ----------------------------------------------------------

def test_console_script():
    out = subprocess.run([sys.executable, "-m", "dimpoly.cli", "shell", "blocks=2", "r=1", "s=0"],
                         capture_output=True, text=True)
    assert (out.returncode, out.stdout) == (0, "5\n")
