import json

import pytest

from itrm.cli import main
from itrm.gadgets import generate
from itrm.isa import parse


@pytest.fixture
def programs(tmp_path):
    sources = {
        'halt': 'HALT\n',
        'spin': generate('inc-loop', []),
        'parity': generate('parity', []),
        'recognizer': generate('eq-recognizer', ['finite{2}']),
        'broken': 'registers 2\nINC r3\nHALT\n',
    }
    paths = {}
    for name, source in sources.items():
        paths[name] = str(tmp_path / f'{name}.itrm')
        (tmp_path / f'{name}.itrm').write_text(source)
    return paths


def test_run_prints_outcome_and_exit_code(programs, capsys) -> None:
    assert main(['run', programs['halt']]) == 0
    assert capsys.readouterr().out == 'Halted output=0 time=0\n'
    assert main(['run', programs['spin']]) == 10
    assert capsys.readouterr().out.startswith('NonHalting level=1')
    assert main(['run', programs['parity'], '--input', '3']) == 10


def test_run_budgets_and_overrides(programs, capsys) -> None:
    assert main(['run', programs['recognizer'], '--steps', '5']) == 11
    assert capsys.readouterr().out == 'Exhausted steps=5 level=0\n'
    assert main(['run', programs['spin'], '--limit-rule', 'weak']) == 13
    assert 'registers=r4' in capsys.readouterr().out


def test_run_with_oracle_and_trace(programs, tmp_path, capsys) -> None:
    trace = str(tmp_path / 'trace.jsonl')
    args = ['run', programs['recognizer'], '--oracle', 'finite{2}', '--trace', trace]
    assert main(args) == 0
    assert capsys.readouterr().out.startswith('Halted output=1')
    with open(trace) as trace_f:
        records = [json.loads(line) for line in trace_f]
    assert (records[0]['time'], records[0]['line'], records[0]['event']) == ('0', 0, 'step')
    assert {record['event'] for record in records} >= {'step', 'limit', 'halt'}


def test_run_writes_log(programs, tmp_path, capsys) -> None:
    log = tmp_path / 'run.log'
    assert main(['run', programs['spin'], '--log', str(log)]) == 10
    assert 'non-halting' in log.read_text()


def test_fmt_and_check(programs, capsys) -> None:
    assert main(['fmt', programs['parity']]) == 0
    text = capsys.readouterr().out
    assert parse(text) == parse(generate('parity', []))
    assert main(['check', programs['parity']]) == 0
    assert main(['check', programs['broken']]) == 1
    assert 'r3 outside 0..1' in capsys.readouterr().out


def test_gen_prints_programs(capsys) -> None:
    assert main(['gen', 'constant', '4']) == 0
    assert capsys.readouterr().out.startswith('# generated by constant 4')
    assert main(['gen', 'nothing']) == 2


def test_recognize(programs, capsys) -> None:
    family = ['finite{2}', 'finite{1}', 'finite{}']
    assert main(['recognize', programs['recognizer'], '--family', *family]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('0* finite{2}: Halted output=1')
    assert lines[1].startswith('1 finite{1}: Halted output=0')
    assert lines[-1] == 'PASS'
    args = ['recognize', programs['recognizer'], '--target', '1', '--family', *family]
    assert main(args) == 1


def test_classify_and_safety(programs, capsys) -> None:
    assert main(['classify', programs['parity'], '--inputs', '0', '1']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('0: Halted')
    assert lines[1].startswith('1: NonHalting')
    assert main(['safety', programs['parity'], '--inputs', '3', '--workers', '2']) == 1
    assert capsys.readouterr().out.splitlines()[-1] == 'UNSAFE witness=1'
    assert main(['safety', programs['halt'], '--inputs', '3']) == 0


def test_encode(tmp_path, capsys) -> None:
    structure = tmp_path / 'edge.txt'
    structure.write_text('2\n0 1\n')
    assert main(['encode', str(structure)]) == 0
    assert capsys.readouterr().out.splitlines() == ['finite{2}', 'assignment 0 1']
    assert main(['encode', str(structure), '--canonical']) == 0
    assert capsys.readouterr().out.splitlines() == ['finite{1}', 'assignment 1 0']


def test_errors_exit_with_two(programs, tmp_path, capsys) -> None:
    assert main(['run', str(tmp_path / 'missing.itrm')]) == 2
    assert capsys.readouterr().err.startswith('itrm: ')
    assert main(['run', programs['broken']]) == 2
    assert main(['run', programs['halt'], '--oracle', 'finite{']) == 2
    assert main(['run', programs['halt'], '--input', '-1']) == 2


def test_runs_are_deterministic(programs, tmp_path, capsys) -> None:
    traces = [tmp_path / 'first.jsonl', tmp_path / 'second.jsonl']
    for trace in traces:
        args = ['run', programs['recognizer'], '--oracle', 'periodic[1|01]', '--trace', str(trace)]
        assert main(args) == 0
    outputs = capsys.readouterr().out.splitlines()
    assert outputs[0] == outputs[1]
    assert traces[0].read_bytes() == traces[1].read_bytes()


def test_gen_combines_recognizers(programs, tmp_path, capsys) -> None:
    assert main(['gen', 'complement', programs['recognizer']]) == 0
    complement = tmp_path / 'complement.itrm'
    complement.write_text(capsys.readouterr().out)
    family = ['finite{2}', 'finite{1}', 'finite{}']
    args = ['recognize', str(complement), '--target', '1', '2', '--family', *family]
    assert main(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith('0 finite{2}: Halted output=0')
    assert lines[1].startswith('1* finite{1}: Halted output=1')
    assert lines[-1] == 'PASS'
