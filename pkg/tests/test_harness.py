import pytest

from itrm.gadgets import complement_recognizer, equality_recognizer, parity_program
from itrm.harness import check_recognizer, classify_inputs, safety_check
from itrm.isa import parse
from itrm.oracle import EMPTY, finite
from itrm.vm import Budgets, Exhausted, Halted, NonHalting

GROWING = """
loop: COPY r4 r5
add:  JZ r5 grow
      DEC r5
      INC r4
      JZ r0 add
grow: INC r4
      JZ r0 loop
"""


def test_classify_inputs_keeps_input_order() -> None:
    outcomes = classify_inputs(parity_program(), EMPTY, [3, 0, 5, 2])
    assert [type(outcome) for outcome in outcomes] == [NonHalting, Halted, NonHalting, Halted]


def test_workers_do_not_change_results() -> None:
    single = classify_inputs(parity_program(), EMPTY, range(8))
    threaded = classify_inputs(parity_program(), EMPTY, range(8), workers=3)
    assert single == threaded


def test_safety_verdicts() -> None:
    report = safety_check(parity_program(), EMPTY, 1)
    assert report.verdict == 'SAFE'
    assert report.witness is None
    report = safety_check(parity_program(), EMPTY, 4)
    assert report.verdict == 'UNSAFE'
    assert report.witness == 1
    assert len(report.outcomes) == 4
    report = safety_check(parse(GROWING), EMPTY, 2, Budgets(successor_steps=500))
    assert report.verdict == 'UNKNOWN'
    assert all(isinstance(outcome, Exhausted) for outcome in report.outcomes)


def test_recognizer_verdicts() -> None:
    p = equality_recognizer(finite({2}))
    family = [finite({2}), finite({1}), EMPTY]
    report = check_recognizer(p, family, 0)
    assert report.verdict == 'PASS'
    assert [outcome.output for outcome in report.outcomes] == [1, 0, 0]
    assert check_recognizer(p, family, 1).verdict == 'FAIL'
    short = check_recognizer(p, family, 0, Budgets(successor_steps=10))
    assert short.verdict == 'INCONCLUSIVE'
    with pytest.raises(IndexError):
        check_recognizer(p, family, 3)


def test_recognizer_with_several_targets() -> None:
    p = complement_recognizer(equality_recognizer(finite({2})))
    family = [finite({2}), finite({1}), EMPTY]
    report = check_recognizer(p, family, [1, 2])
    assert report.verdict == 'PASS'
    assert report.targets == frozenset({1, 2})
    assert check_recognizer(p, family, 1).verdict == 'FAIL'
    with pytest.raises(IndexError):
        check_recognizer(p, family, [0, 5])
