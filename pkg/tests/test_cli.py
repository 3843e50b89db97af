import subprocess
import sys

import pytest

from adiasim.adders import CIRCUITS_DIR
from adiasim.cli import main


def run(*args):
    return subprocess.run([sys.executable, "-m", "adiasim", *args], capture_output=True, text=True)


def test_verify_builtin_passes(capsys):
    assert main(["verify", "cmos28"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 9  # header plus eight rows


def test_verify_csv(capsys):
    assert main(["verify", "pfal", "--warm", "--csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "A,B,C,Sum,Carry,Sum_b,Carry_b,result"
    assert len(lines) == 9


def test_verify_broken_netlist_exits_1(tmp_path):
    text = (CIRCUITS_DIR / "cmos28.net").read_text()
    # tie the sum output to ground through an always-on device
    path = tmp_path / "broken.net"
    path.write_text(text + "Mstuck Sum vdd gnd N R=1\n")
    r = run("verify", str(path))
    assert r.returncode == 1
    assert "FAIL" in r.stdout


def test_verify_unknown_exits_2():
    r = run("verify", "nosuch")
    assert r.returncode == 2
    assert "unknown circuit" in r.stderr


def test_verify_parse_error_exits_2(tmp_path):
    path = tmp_path / "bad.net"
    path.write_text(".NODE a\nM1 a b c Q\n")
    r = run("verify", str(path))
    assert r.returncode == 2
    assert "line 2" in r.stderr


def test_power_all(capsys):
    assert main(["power", "--all"]) == 0
    out = capsys.readouterr().out
    for name, count in [("cmos28", "28"), ("cpl", "22*"), ("tgate", "20"), ("pal", "10"),
                        ("pfal", "38"), ("tgal", "60"), ("serf", "10")]:
        assert any(line.split()[:2] == [name, count] for line in out.splitlines())
    assert "24 devices" in out
    assert "same stimulus plan" in out and "recomputed for every transition" in out


def test_power_single_csv(capsys):
    assert main(["power", "--circuit", "pfal", "--freq", "50e6", "--csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "circuit,devices,avg_power_w"
    name, devices, power = lines[1].split(",")
    assert (name, devices) == ("pfal", "38") and float(power) > 0


def test_power_rc_meter(capsys):
    assert main(["power", "--circuit", "cmos28", "--meter", "rc", "--csv"]) == 0
    assert float(capsys.readouterr().out.splitlines()[1].split(",")[2]) > 0


@pytest.mark.parametrize("args", [["power", "--freq", "0"], ["power"], ["power", "--vdd", "-1", "--all"],
                                  ["sweep", "--circuit", "pal", "--points", "1"],
                                  ["sweep", "--circuit", "pal", "--fmin", "1e8", "--fmax", "1e6"],
                                  ["energy", "eq5", "--r", "1"], ["energy", "eq6", "--c", "1", "--v", "1", "--n", "0"],
                                  ["bogus"]])
def test_usage_errors_exit_2(args):
    assert run(*args).returncode == 2


def test_sweep_tgal_serf(tmp_path):
    out = tmp_path / "s.csv"
    r = run("sweep", "--circuit", "tgal", "--circuit", "serf", "--fmin", "1e6", "--fmax", "100e6",
            "--points", "20", "--out", str(out))
    assert r.returncode == 0, r.stderr
    lines = out.read_text().splitlines()
    assert lines[0] == "circuit,f_hz,avg_power_w,energy_per_cycle_j"
    assert len(lines) == 41
    assert {l.split(",")[0] for l in lines[1:]} == {"tgal", "serf"}


def test_sweep_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--circuit", "pfal", "--points", "6", "--out", str(a)]) == 0
    assert main(["sweep", "--circuit", "pfal", "--points", "6", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_unwritable_output(tmp_path):
    r = run("sweep", "--circuit", "pal", "--out", str(tmp_path / "missing" / "x.csv"))
    assert r.returncode == 2 and "missing" in r.stderr


@pytest.mark.parametrize("args, expected", [
    (["eq5", "--r", "10e3", "--c", "20e-15", "--t", "10e-9", "--v", "1.8"], "1.296e-15"),
    (["eq6", "--c", "20e-15", "--v", "1.8", "--n", "1"], "3.24e-14"),
    (["eq2", "--is", "1e-6", "--c", "20e-15", "--t", "10e-9"], "0.5"),
    (["eq4", "--r", "10e3", "--is", "1e-6", "--t", "10e-9"], "1e-16"),
])
def test_energy_calculator(capsys, args, expected):
    assert main(["energy", *args]) == 0
    assert capsys.readouterr().out.strip() == expected


def test_lint(tmp_path, capsys):
    assert main(["lint", str(CIRCUITS_DIR / "tgal.net")]) == 0
    path = tmp_path / "float.net"
    path.write_text((CIRCUITS_DIR / "serf.net").read_text() + ".NODE orphan\n")
    assert main(["lint", str(path)]) == 1
    assert "FloatingNode" in capsys.readouterr().out
    assert main(["lint", str(tmp_path / "none.net")]) == 2


def test_circuits_dir_override(tmp_path, monkeypatch):
    text = (CIRCUITS_DIR / "serf.net").read_text().replace("M10 ", "M10x ", 1)
    (tmp_path / "serf.net").write_text(text.replace(".NAME serf", ".NAME serf_override"))
    monkeypatch.setenv("ADIASIM_CIRCUITS_DIR", str(tmp_path))
    r = subprocess.run([sys.executable, "-m", "adiasim", "verify", "serf"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "serf_override" in r.stdout
    assert run("verify", "pfal").returncode == 2
