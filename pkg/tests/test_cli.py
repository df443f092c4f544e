import subprocess
import sys

import pytest

from conftest import DATA
from vcspbin import io
from vcspbin.algebra import identity_op
from vcspbin.cli import main

RHO, SUM, EQ = str(DATA / "rho.lang"), str(DATA / "phisum.lang"), str(DATA / "phieq.lang")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_info_reports(capsys):
    code, out, _ = run(capsys, "info", "-l", RHO)
    assert code == 0
    assert "D_Gamma vertices 24 formula 24" in out and "D_Gamma edges 24 formula 24" in out
    assert "rigid core: yes" in out
    assert "rigid core: no" in run(capsys, "info", "-l", EQ)[1]
    assert "dual domain size 3" in run(capsys, "info", "-l", SUM)[1]


def test_solve_exit_codes(capsys):
    code, out, _ = run(capsys, "solve", "-l", SUM, "-i", str(DATA / "phisum2.inst"))
    assert code == 0 and out.startswith("optimum 4\n")
    code, out, _ = run(capsys, "solve", "-l", RHO, "-i", str(DATA / "rho_loop.inst"))
    assert code == 3 and out == "infeasible\n"
    code, _, err = run(capsys, "solve", "-l", RHO, "-i", str(DATA / "missing.inst"))
    assert code == 2 and err.startswith("error:")


def test_budget_exit_code(capsys, tmp_path):
    vs = " ".join(f"v{i}" for i in range(25))
    p = tmp_path / "big.inst"
    p.write_text(f"instance big\nvars {vs}\nconstraint rho v0 v1\n")
    code, _, err = run(capsys, "solve", "-l", RHO, "-i", str(p), "--method", "brute")
    assert code == 4 and "budget" in err


def test_pipeline_files_chain(capsys, tmp_path):
    e, m = tmp_path / "e.inst", tmp_path / "e.map"
    assert run(capsys, "extdual-instance", "-l", RHO, "-i", str(DATA / "rho.inst"),
               "-o", str(e), "--map", str(m))[0] == 0
    code, out, _ = run(capsys, "solve", "-l", RHO, "-i", str(e), "--ext")
    assert code == 0 and out.startswith("optimum 1\n")
    code, out, _ = run(capsys, "reverse", "-l", RHO, "-i", str(e))
    assert "constraint phi_d x'1" in out
    tops, paths = io.parse_ext_map(m.read_text())
    assert tops == {"x'1": 1} and len(paths) == 2


def test_dual_undual_eliminate(capsys, tmp_path):
    d, u = tmp_path / "d.inst", tmp_path / "u.inst"
    run(capsys, "dual-instance", "-l", SUM, "-i", str(DATA / "phisum2.inst"), "-o", str(d))
    run(capsys, "undual", "-l", SUM, "-i", str(d), "-o", str(u))
    code, out, _ = run(capsys, "eliminate-feas", "-l", SUM, "-i", str(u))
    assert code == 0 and out.startswith("# scale 1 ")


def test_dual_language_output(capsys):
    out = run(capsys, "dual", "-l", SUM)[1]
    assert "function match_1_2 arity 2\n  (0,0,1) (0,0,1) : 0\n" in out


def test_algebra_commands(capsys, tmp_path):
    out = run(capsys, "pol", "-l", RHO, "-k", "1")[1]
    assert out.startswith("# 2 polymorphisms")
    ops = tmp_path / "ops"
    ops.write_text(out)
    out = run(capsys, "identity-check", "-l", RHO, "--operations", str(ops),
              "--family", "idempotent")[1]
    assert out == "p0 idempotent: yes\np1 idempotent: no\n"
    fp = tmp_path / "f"
    domain = io.parse_language(open(RHO).read()).domain
    fp.write_text(io.serialize_operation(identity_op(domain)) + "fpol\nweight 1 operation id\n")
    assert run(capsys, "fpol-check", "-l", RHO, "--fpol", str(fp))[1] == "fpol: yes\n"
    assert run(capsys, "rigid-core", "-l", EQ)[1] == "rigid core: no\n"
    assert run(capsys, "endomorphisms", "-l", RHO)[1] == "endomorphisms 2\n"


def test_mincosthom_command(capsys, tmp_path):
    tgt = tmp_path / "d.dg"
    run(capsys, "extdual", "-l", RHO, "-o", str(tgt))
    tri = tmp_path / "tri.dg"
    tri.write_text("digraph t\n" + "".join(f"vertex {v} level 0 role base\n" for v in "abc")
                   + "edge a b\nedge b c\nedge c a\n")
    assert run(capsys, "mincosthom", "--source", str(tri), "--target", str(tgt))[0] == 3
    g, costs = io.parse_digraph(tgt.read_text())
    assert costs == {"(0,1)": 2, "(1,0)": 1}


def test_verify_commands(capsys):
    code, out, _ = run(capsys, "verify", "-l", SUM, "-i", str(DATA / "phisum2.inst"))
    assert code == 0 and out.strip().endswith("agree yes")
    code, out, _ = run(capsys, "verify", "--fuzz", "3", "--seed", "11")
    assert code == 0 and out.startswith("seed 11\n") and out.count("agree yes") == 3


def test_deterministic_outputs(capsys):
    for argv in (["dual", "-l", SUM], ["extdual", "-l", RHO], ["info", "-l", SUM],
                 ["verify", "--fuzz", "2", "--seed", "3"]):
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "vcspbin.cli", "info", "-l", RHO],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "rigid core: yes" in res.stdout


def test_usage_errors(capsys):
    with pytest.raises(SystemExit):
        main(["verify"])
