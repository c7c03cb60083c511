"""CLI behaviour: golden outputs, exit codes and config handling.

Set HOFA_REGEN_GOLDEN=1 to rewrite the files in tests/golden.
"""

import json
import math
import os
import re
from pathlib import Path

import pytest

from hofa import cli, parallel

HERE = Path(__file__).parent
FIX = HERE / "fixtures"
GOLD = HERE / "golden"
REGEN = os.environ.get("HOFA_REGEN_GOLDEN") == "1"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


GOLDEN_CASES = {
    "gowers_const.csv": ["gowers", "norm", "--input", FIX / "const7.json", "--s", "3"],
    "count_lambda.csv": ["count", "lambda", "--input", FIX / "count7.json"],
    "count_dual.json": ["count", "dual", "--input", FIX / "count7.json", "--format", "json"],
    "rbpl_solve.csv": ["rbpl", "solve", "--instance", FIX / "rbpl_instance.json"],
    "rbpl_oracle.json": ["rbpl", "oracle", "--instance", FIX / "rbpl_instance.json", "--height", "3",
                         "--format", "json"],
    "equidist_run.csv": ["equidist", "run", "--instance", FIX / "equidist101.json"],
    "fourier_expand.csv": ["fourier", "expand", "--instance", FIX / "fourier31.json"],
    "bohr_build.csv": ["bohr", "build", "--S", "3/31,7/31", "--rho", "1/5", "--N", "31"],
    "bohr_regular.json": ["bohr", "regular", "--S", "3/101", "--rho", "1/5", "--N", "101", "--format", "json"],
    "energy.csv": ["energy", "--sets", "0,1,2;0,2,4;1,3;5,6,7", "--N", "11"],
    "quadruples.csv": ["--config", FIX / "experiment.cfg", "quadruples"],
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden(name, capsys):
    code, out, err = run(GOLDEN_CASES[name], capsys)
    assert code == 0, err
    path = GOLD / name
    if REGEN:
        path.write_text(out)
    assert same_up_to_float_noise(out, path.read_text())


TOKEN = re.compile(r"[-+]?(?:\d+\.\d*(?:e[-+]?\d+)?|\d+e[-+]?\d+|inf|nan)|[^\s,\[\]{}:\"]+|.", re.S)


def _is_float(tok):
    return any(c in tok for c in ".en") and tok not in ("null", "true", "false")


def same_up_to_float_noise(a: str, b: str) -> bool:
    """Equal text, except that decimal numbers may differ by 1e-12 absolutely."""
    ta, tb = TOKEN.findall(a), TOKEN.findall(b)
    if len(ta) != len(tb):
        return False
    for x, y in zip(ta, tb):
        if x == y:
            continue
        try:
            if not (_is_float(x) and _is_float(y) and math.isclose(float(x), float(y), rel_tol=1e-9, abs_tol=1e-12)):
                return False
        except ValueError:
            return False
    return True


def test_noise_tolerant_compare():
    assert same_up_to_float_noise("a,1.0e-16\n", "a,-2.1e-16\n")
    assert not same_up_to_float_noise("a,1/3\n", "a,1/4\n")
    assert not same_up_to_float_noise("x,0.5\n", "x,0.6\n")


def test_json_output_parses(capsys):
    code, out, _ = run(GOLDEN_CASES["count_dual.json"], capsys)
    data = json.loads(out)
    assert data["kind"] == "dual" and len(data["dual"]) == 7


def test_out_file(tmp_path, capsys):
    target = tmp_path / "sub" / "norm.csv"
    code, out, _ = run(["gowers", "norm", "--input", FIX / "const7.json", "--out", target], capsys)
    assert code == 0 and out == ""
    assert target.read_text() == "N,s,norm\n7,2,1.0\n"


def test_flags_before_or_after_subcommand(capsys):
    a = run(["--format", "json", "gowers", "norm", "--input", FIX / "const7.json"], capsys)
    b = run(["gowers", "norm", "--input", FIX / "const7.json", "--format", "json"], capsys)
    assert a == b and json.loads(a[1])["norm"] == 1.0


def test_rbpl_verify_exit_codes(capsys):
    inst = FIX / "rbpl_instance.json"
    code, _, err = run(["rbpl", "verify", "--instance", inst, "--cert", FIX / "rbpl_cert.json"], capsys)
    assert code == 0 and "verified=True" in err
    code, _, err = run(["rbpl", "verify", "--instance", inst, "--cert", FIX / "rbpl_bad_cert.json"], capsys)
    assert code == 1 and "violation:" in err


def test_equidist_per_h(tmp_path, capsys):
    target = tmp_path / "per_h.csv"
    code, _, _ = run(["equidist", "run", "--instance", FIX / "equidist101.json", "--per-h", target], capsys)
    assert code == 0
    lines = target.read_text().splitlines()
    assert lines[0] == "h,correlation,good" and len(lines) == 102


def test_equidist_below_delta_is_reported(capsys):
    code, out, err = run(["equidist", "run", "--instance", FIX / "equidist101.json", "--delta", "1",
                          "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["branch"] == "BelowDelta"


@pytest.mark.parametrize("argv", [
    [],
    ["nosuch"],
    ["gowers", "norm"],
    ["gowers", "norm", "--input", "missing.json"],
    ["gowers", "norm", "--input", FIX / "experiment.cfg"],
    ["gowers", "norm", "--input", FIX / "const7.json", "--s", "7"],
    ["gowers", "norm", "--input", FIX / "const7.json", "--bogus"],
    ["gowers", "norm", "--input", FIX / "const7.json", "--threads", "0"],
    ["bohr", "build", "--S", "1/3", "--rho", "1/5", "--N", "31"],
    ["bohr", "build", "--S", "1/31", "--rho", "1/5"],
    ["energy", "--sets", "1;2;3", "--N", "7"],
    ["quadruples", "--N", "31", "--density", "0"],
    ["selftest", "--only", "99"],
    ["--config", FIX / "bad_prime.cfg", "quadruples"],
    ["--config", FIX / "bad_key.cfg", "quadruples"],
    ["--config", FIX / "dup_key.cfg", "quadruples"],
    ["--config", FIX / "nope.cfg", "quadruples"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert "error" in err or "invalid" in err or "usage" in err


def test_config_values(tmp_path):
    cfg = cli.load_config(str(FIX / "experiment.cfg"))
    assert (cfg.seed, cfg.N, cfg.delta) == (7, 31, 0.5)
    assert cfg.thresholds == {"rbpl.small_n": 3}
    assert cli.load_config(None).N is None
    p = tmp_path / "x.cfg"
    p.write_text("delta = 2\n")
    with pytest.raises(cli.UsageError):
        cli.load_config(str(p))
    p.write_text("seed = abc\n")
    with pytest.raises(cli.UsageError):
        cli.load_config(str(p))
    p.write_text("just words\n")
    with pytest.raises(cli.UsageError):
        cli.load_config(str(p))


def test_threads_flag_applies_and_resets(monkeypatch, capsys):
    seen = []
    real = cli.cmd_gowers

    def spy(args, cfg):
        seen.append(parallel.threads())
        return real(args, cfg)

    monkeypatch.setattr(cli, "cmd_gowers", spy)
    monkeypatch.delenv("HOFA_THREADS", raising=False)
    parser_func = cli.build_parser
    monkeypatch.setattr(cli, "build_parser", lambda: _rebind(parser_func(), spy))
    code, _, _ = run(["gowers", "norm", "--input", FIX / "const7.json", "--threads", "2"], capsys)
    assert code == 0 and seen == [2]
    assert parallel.threads() != 2 or os.cpu_count() == 2


def _rebind(parser, func):
    for action in parser._subparsers._group_actions:
        action.choices["gowers"].set_defaults(func=func)
    return parser


def test_selftest_subset(tmp_path, capsys):
    out = tmp_path / "tree"
    code, text, _ = run(["selftest", "--only", "2,6", "--out", out], capsys)
    assert code == 0
    assert "FAIL [02]" in text and "PASS [06]" in text and "PASS [13]" in text
    assert (out / "summary.txt").exists() and (out / "criterion_06.csv").exists()
