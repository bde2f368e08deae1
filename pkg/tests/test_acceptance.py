"""One test per acceptance criterion, each at its stated tolerance and time budget.

Every test records a [PASS]/[FAIL] line that is printed in the terminal summary.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from intricacy import cli, verify

BUDGET_S = {1: 1.0, 2: 60.0, 3: 60.0, 5: 1.0, 6: 1.0, 7: 10.0, 8: 60.0, 9: 10.0,
            10: 600.0, 11: 1.0}


def record(number, name, passed, detail, seconds):
    res = verify.CheckResult(number, name, passed, detail, seconds)
    ACCEPTANCE_LINES.append(res.line())
    print(res.line())
    return res


def run(number):
    res = verify.run_check(number)
    budget = BUDGET_S.get(number)
    in_time = budget is None or res.seconds < budget
    detail = res.detail if in_time else f"{res.detail}; took {res.seconds:.1f} s > {budget:g} s"
    res = record(number, res.name, res.passed and in_time, detail, res.seconds)
    assert res.passed, res.line()


def test_criterion_01_algebra():
    run(1)


def test_criterion_02_consistency():
    run(2)


def test_criterion_03_dense_oracle():
    run(3)


def test_criterion_04_measure_identity():
    run(4)


def test_criterion_05_tail_exponent():
    run(5)


def test_criterion_06_front_profile():
    run(6)


def test_criterion_07_constrained_front():
    run(7)


def test_criterion_08_pulled_front():
    run(8)


def test_criterion_09_multichannel():
    run(9)


@pytest.mark.slow
def test_criterion_10_kmc():
    run(10)


def test_criterion_11_census():
    run(11)


def test_criterion_12_verify_command():
    t0 = time.perf_counter()
    code = cli.main(["verify"])
    res = record(12, "verify subcommand", code == 0, f"exit code {code}",
                 time.perf_counter() - t0)
    assert res.passed, res.line()
