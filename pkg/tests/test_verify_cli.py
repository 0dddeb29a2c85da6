import json

import pytest

from toda2d.cli import main
from toda2d.dirac_reduction import LaxState
from toda2d.verify import ConfigError, RunConfig, run


def cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def summary(text):
    line = [l for l in text.splitlines() if l.startswith("SUMMARY ")][-1]
    return json.loads(line[len("SUMMARY "):])


def test_verify_myb(capsys):
    code, out, _ = cli(capsys, "verify", "myb", "--n", "5", "--seed", "7")
    assert code == 0
    lines = out.splitlines()[:-1]
    assert all(l.startswith("PASS") and l.endswith("max_residual=0") for l in lines)


def test_reports_are_byte_stable(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert cli(capsys, "verify", "zs", "--samples", "2", "--seed", "3", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_crosscheck_variants(capsys):
    code, out, _ = cli(capsys, "verify", "crosscheck", "--samples", "1")
    assert code == 1
    failed = summary(out)["suites"]["crosscheck"]["failed"]
    assert failed and all(name.startswith("k=3 u-ubar") or name.startswith("k=3 ubar-u")
                          for name in failed)
    assert "offending_terms" in out
    code, out, _ = cli(capsys, "verify", "crosscheck", "--samples", "1", "--variant", "corrected")
    assert code == 0


def test_float_mode_skips_exact_only_suites():
    rep = run("all", RunConfig(mode="float", samples=1, n=5))
    assert "reduction" in rep.skipped and "myb" not in rep.skipped
    with pytest.raises(ConfigError):
        run("jacobi", RunConfig(mode="float"))


@pytest.mark.parametrize("argv", [
    ("verify", "myb", "--n", "4"),
    ("verify", "jacobi", "--depth", "2"),
    ("verify", "myb", "--jobs", "0"),
    ("evolve", "t1", "1", "0.1", "--mode", "exact"),
    ("bracket", "1", "u2", "0", "u0", "1"),
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = cli(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bracket_unsupported_index_message(capsys):
    _, _, err = cli(capsys, "bracket", "1", "u2", "0", "u0", "1")
    assert "UnsupportedIndex" in err


def test_bracket_first(capsys):
    code, out, _ = cli(capsys, "bracket", "1", "u0", "3", "ubar-1", "5")
    assert code == 0
    terms = [l.strip() for l in out.splitlines()[1:3]]
    assert terms == ["1 ubar_-1(m) δ(n-m+1)", "-1 ubar_-1(n) δ(n-m+0)"]
    assert out.rstrip().endswith("agree: yes")


def test_bracket_second_with_state_file(tmp_path, capsys):
    path = tmp_path / "state.json"
    assert cli(capsys, "state", "random", "--n", "7", "--depth", "5", "--depth-bar", "5",
               "--out", str(path))[0] == 0
    st = LaxState.from_json(json.loads(path.read_text()))
    code, out, _ = cli(capsys, "bracket", "2", "u0", "0", "u0", "1", "--state", str(path))
    assert code == 0
    # {u0(n), u0(m)}_2 = u_{-1}(m) δ(n-m+1) - u_{-1}(n) δ(n-m-1) at n=0, m=1
    assert f"formula value: {st.u[-1][1]}" in out


def test_evolve_and_state_round_trip(tmp_path, capsys):
    state = tmp_path / "toda.json"
    traj = tmp_path / "traj.json"
    assert cli(capsys, "state", "toda", "--n", "8", "--out", str(state))[0] == 0
    code, out, _ = cli(capsys, "evolve", "tbar1", "0.02", "0.01", "--state", str(state),
                       "--out", str(traj))
    assert code == 0 and "hbar1:" in out
    data = json.loads(traj.read_text())
    assert len(data["times"]) == 3 and data["drift"]["hbar1"] < 1e-10
    # duration 0 returns the input state
    cli(capsys, "evolve", "t1", "0", "0.01", "--state", str(state), "--out", str(traj))
    data = json.loads(traj.read_text())
    assert data["snapshots"][-1]["state"] == json.loads(state.read_text())


def test_evolve_rejected_step_exits_1(tmp_path, capsys):
    path = tmp_path / "wild.json"
    big = ["1e300"] * 5
    path.write_text(json.dumps({"N": 5, "M": 1, "Mbar": 0,
                                "u": {"-1": big, "0": ["1e300", "-1e300", "1e300", "0", "0"]},
                                "ubar": {"-1": ["1"] * 5, "0": ["0"] * 5}}))
    code, _, err = cli(capsys, "evolve", "t2", "1", "1", "--state", str(path))
    assert code == 1 and "step rejected" in err


def test_toda_command(capsys):
    code, out, _ = cli(capsys, "toda", "--n", "16", "--step", "2e-3")
    assert code == 0 and "PASS" in out
