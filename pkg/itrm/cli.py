import logging
import sys
from typing import Any

from itrm.coding import canonical_code, encode, read_structure
from itrm.gadgets import generate
from itrm.harness import check_recognizer, classify_inputs, safety_check
from itrm.isa import format_program, load, validate
from itrm.oracle import EMPTY, Finite, format_oracle, parse_oracle
from itrm.vm import Engine, Exhausted, Halted, NonHalting, RunOutcome, Undefined, load_config

EXIT_CODES = {Halted: 0, NonHalting: 10, Exhausted: 11, Undefined: 13}
VERDICT_CODES = {'PASS': 0, 'SAFE': 0, 'FAIL': 1, 'UNSAFE': 1, 'INCONCLUSIVE': 12, 'UNKNOWN': 12}


def exit_code(outcome: RunOutcome) -> int:
    return EXIT_CODES[type(outcome)]


def cmd_run(args, config: dict[str, Any]) -> int:
    p = load(args.program)
    o = parse_oracle(args.oracle) if args.oracle else EMPTY
    outcome, trace = Engine(config).run(p, o, args.input)
    if args.trace:
        trace.write(args.trace)
    print(outcome)
    return exit_code(outcome)


def cmd_fmt(args, config: dict[str, Any]) -> int:
    print(format_program(load(args.program)))
    return 0


def cmd_check(args, config: dict[str, Any]) -> int:
    diagnostics = validate(load(args.program, strict=False))
    for diagnostic in diagnostics:
        print(f'{args.program}: {diagnostic}')
    return 1 if diagnostics else 0


def cmd_gen(args, config: dict[str, Any]) -> int:
    print(generate(args.gadget, args.params))
    return 0


def cmd_recognize(args, config: dict[str, Any]) -> int:
    p = load(args.program)
    family = [parse_oracle(spec) for spec in args.family]
    report = check_recognizer(p, family, args.target, progress=args.progress, **config)
    for k, (spec, outcome) in enumerate(zip(args.family, report.outcomes)):
        print(f'{k}{"*" if k in report.targets else ""} {spec}: {outcome}')
    print(report.verdict)
    return VERDICT_CODES[report.verdict]


def cmd_classify(args, config: dict[str, Any]) -> int:
    p = load(args.program)
    o = parse_oracle(args.oracle) if args.oracle else EMPTY
    outcomes = classify_inputs(p, o, args.inputs, progress=args.progress, **config)
    for i, outcome in zip(args.inputs, outcomes):
        print(f'{i}: {outcome}')
    return 0


def cmd_safety(args, config: dict[str, Any]) -> int:
    p = load(args.program)
    o = parse_oracle(args.oracle) if args.oracle else EMPTY
    report = safety_check(p, o, args.inputs, progress=args.progress, **config)
    for i, outcome in enumerate(report.outcomes):
        print(f'{i}: {outcome}')
    witness = '' if report.witness is None else f' witness={report.witness}'
    print(f'{report.verdict}{witness}')
    return VERDICT_CODES[report.verdict]


def cmd_encode(args, config: dict[str, Any]) -> int:
    m, edges = read_structure(args.structure)
    if args.canonical:
        coded = canonical_code(m, edges, config['max_domain'])
    else:
        coded = encode(m, edges)
    print(format_oracle(Finite(coded.code)))
    print('assignment', ' '.join(map(str, coded.assignment)))
    return 0


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(prog='itrm')
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name: str, handler, help: str, program: bool = True):
        sub = commands.add_parser(name, help=help)
        sub.set_defaults(handler=handler)
        sub.add_argument('--log', metavar='FILE_PATH', help='logger output')
        if program:
            sub.add_argument('program', metavar='FILE_PATH', help='assembly source')
        return sub

    def budgets(sub):
        sub.add_argument('--steps', type=int, help='successor step budget')
        sub.add_argument('--max-level', type=int, help='deepest accelerated limit level')
        sub.add_argument('--workers', type=int, help='threads for independent runs')
        sub.add_argument('--progress', action='store_true', help='progress bar on stderr')

    sub = command('run', cmd_run, 'run a program')
    sub.add_argument('--oracle', metavar='SPEC', help='oracle, e.g. finite{1,5} or join(A,B)')
    sub.add_argument('--input', type=int, default=0, help='initial content of r1')
    sub.add_argument('--trace', metavar='FILE_PATH', help='line-delimited JSON trace output')
    budgets(sub)

    command('fmt', cmd_fmt, 'print canonical assembly')
    command('check', cmd_check, 'report validation diagnostics')

    sub = command('gen', cmd_gen, 'emit a generated program', program=False)
    sub.add_argument('gadget', help='generator name')
    sub.add_argument('params', nargs='*', help='generator arguments')

    sub = command('recognize', cmd_recognize, 'test a recognizer on an oracle family')
    sub.add_argument('--family', metavar='SPEC', nargs='+', required=True, help='oracles')
    sub.add_argument(
        '--target', type=int, nargs='+', default=[0], help='indices of the recognized oracles'
    )
    budgets(sub)

    sub = command('classify', cmd_classify, 'halting outcome per input')
    sub.add_argument('--oracle', metavar='SPEC', help='oracle')
    sub.add_argument('--inputs', type=int, nargs='+', required=True, help='inputs to run')
    budgets(sub)

    sub = command('safety', cmd_safety, 'whether a program halts on all inputs below N')
    sub.add_argument('--oracle', metavar='SPEC', help='oracle')
    sub.add_argument('--inputs', type=int, required=True, help='number of inputs N')
    budgets(sub)

    sub = command('encode', cmd_encode, 'print the code of a structure file', program=False)
    sub.add_argument('structure', metavar='FILE_PATH', help='structure file')
    sub.add_argument('--canonical', action='store_true', help='least code over relabelings')

    args, unknown = parser.parse_known_args(argv)

    config = load_config()
    for i, arg in enumerate(unknown):
        if arg[:2] == '--' and i + 1 < len(unknown):
            option, value = arg[2:].replace('-', '_'), unknown[i + 1]
            try:
                config[option] = (int if value.isdigit() else float)(value)
            except ValueError:
                config[option] = value
    for option, flag in (('successor_steps', 'steps'), ('max_level', 'max_level')):
        if getattr(args, flag, None) is not None:
            config[option] = getattr(args, flag)
    if getattr(args, 'workers', None) is not None:
        config['workers'] = args.workers

    if args.log:
        logger = logging.getLogger('itrm.logger')
        logger.addHandler(logging.FileHandler(args.log))
        logger.setLevel(logging.INFO)

    try:
        return args.handler(args, config)
    except (ValueError, ArithmeticError, LookupError, OSError) as e:
        print(f'itrm: {e}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
