"""The thirteen acceptance criteria, one test each.

Each test records a "PASS [nn] ..." or "FAIL [nn] ..." line that the
terminal summary prints (see conftest.py). Criterion 2 checks a claim that
is false as stated, so it is a strict xfail and its line reads FAIL.
"""

from pathlib import Path

import pytest

from conftest import ACCEPTANCE_LINES
from hofa import acceptance, cli

SEED = acceptance.DEFAULT_SEED
KNOWN_FALSE = {2}


@pytest.fixture(scope="session")
def first_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance") / "tree"
    results = acceptance.run_checks(SEED, None, out, "csv")
    return out, {r.number: r for r in results}


def _record(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.mark.slow
@pytest.mark.parametrize("number", [
    pytest.param(n, marks=pytest.mark.xfail(strict=True, reason="the periodicity claim has counterexamples"))
    if n in KNOWN_FALSE else n
    for n in sorted(acceptance.CHECKS)
])
def test_criterion(first_run, number):
    _, results = first_run
    res = results[number]
    _record(res.line())
    assert res.passed, res.summary


@pytest.mark.slow
def test_criterion_13_determinism(first_run, tmp_path):
    first, _ = first_run
    second = tmp_path / "second"
    code = cli.main(["selftest", "--no-determinism", "--seed", str(SEED), "--out", str(second)])
    diffs = acceptance.trees_identical(first, second)
    ok = code == 0 and not diffs
    files = sum(1 for p in Path(second).rglob("*") if p.is_file())
    _record(f"{'PASS' if ok else 'FAIL'} [13] selftest determinism: "
            f"exit {code}, {files} files, {len(diffs)} differing")
    assert code == 0
    assert not diffs, diffs
