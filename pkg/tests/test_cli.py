import json
import subprocess
import sys

import pytest

from nlsym.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv, code", [
    (["classify", "--F", "abs(psi)^2*psi"], 0),
    (["classify", "--F", "abs(psi)^2*psi + 1"], 2),
    (["classify", "--F", "psi*("], 1),
    (["verify", "--F", "exp(re(psi))", "--gen", "M"], 4),
    (["verify", "--F", "exp(re(psi))", "--gen", "Pt"], 0),
    (["bracket", "--q1", "Pt", "--q2", "D", "--case", "T2.7", "--param", "gamma=2",
      "--param", "sigma=1"], 0),
    (["bracket", "--q1", "Nope", "--q2", "D"], 1),
    (["flow-demo", "--grid", "64"], 0),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_parse_error_reports_offset(capsys):
    code, _, err = run(capsys, "classify", "--F", "psi + zeta")
    assert code == 1 and "offset 6" in err


def test_json_schema(capsys):
    code, out, _ = run(capsys, "classify", "--F", "(1+i)*abs(psi)^(4/n)*psi", "--n", "2",
                       "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["schema_version"] == 1 and d["case_id"] == "T2.8"


def test_json_is_byte_deterministic(capsys):
    argv = ["classify", "--F=-ln(rho)*psi", "--format", "json", "--seed", "3"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NLS_SYM_SEED", "9")
    d = json.loads(run(capsys, "classify", "--F", "psi^2", "--format", "json")[1])
    assert d["seed"] == 9


def test_usage_error_is_exit_one():
    with pytest.raises(SystemExit) as info:
        main(["classify"])
    assert info.value.code == 1


def test_subclass_flag(capsys):
    code, out, _ = run(capsys, "classify", "--subclass", "--F=-ln(rho)")
    assert code == 0 and "Thm.4" in out


def test_verify_custom_field(capsys):
    # eta = i psi written out by hand is M
    code, _, _ = run(capsys, "verify", "--F", "abs(psi)^2*psi", "--eta", "i*psi")
    assert code == 0


def test_selftest_command(capsys):
    code, out, _ = run(capsys, "casebook-selftest", "--dims", "1", "--draws", "1")
    assert code == 0 and "ALL PASS" in out


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "nlsym", "--version"], capture_output=True,
                       text=True)
    assert p.returncode == 0 and p.stdout.strip()
