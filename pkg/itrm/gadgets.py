"""Program constructions.

Register convention shared by every generator: r0 is never written (so `JZ r0 L` is a jump),
r1 holds input and output, r2 and r3 are the loop flags and r4 onwards are allocated.
"""

import math
from typing import Callable

from itrm.builder import FIRST_FREE, FLAG_A, FLAG_B, IO_REGISTER, Builder, GadgetError
from itrm.formula import (
    And,
    Edge,
    Exists,
    Formula,
    FormulaError,
    Not,
    depth,
    is_sentence,
    parse_formula,
)
from itrm.isa import Program, format_program, load
from itrm.oracle import Cofinite, Finite, OracleSpec, Periodic, parse_oracle

Body = Callable[[Builder, str], None]
Reader = Callable[[Builder, int, int], None]
Word = tuple[tuple[int, ...], tuple[int, ...]]


def flag_limit_loop(b: Builder, body: Body, on_all_passed: str, counter: int | None = None):
    """Iterate `body` for i = 0, 1, 2, ... and continue at `on_all_passed` at the w-limit.

    Every iteration flashes A (1, 0, 1) and B (0, 1, 0). A successor pass reaches the head with
    A = 1; only at a limit of iterations are both flags 0 there, since the head is the lowest
    line of the loop. `body` receives the label of the flash and may jump there to end its
    iteration early, or jump anywhere else to leave the loop. `counter`, if given, is
    incremented once per iteration.
    """
    if not b.has_flags:
        raise GadgetError('flag loop in a program without the flag prologue')
    head, check, start = b.fresh('head'), b.fresh('check'), b.fresh('body')
    flash, passed = b.fresh('flash'), b.fresh('passed')
    b.mark(head)
    b.jz(FLAG_A, check)
    b.goto(start)
    b.mark(check)
    b.jz(FLAG_B, passed)
    b.goto(start)
    b.mark(start)
    body(b, flash)
    b.mark(flash)
    b.dec(FLAG_A, flags=True)
    b.inc(FLAG_A, flags=True)
    b.inc(FLAG_B, flags=True)
    b.dec(FLAG_B, flags=True)
    if counter is not None:
        b.inc(counter)
    b.goto(head)
    b.mark(passed)
    b.inc(FLAG_A, flags=True)
    b.goto(on_all_passed)


# arithmetic macros; every loop in them counts a scratch copy down to zero


def _add(b: Builder, src: int, dst: int):
    with b.scratch(1) as (t,):
        loop, done = b.fresh('add'), b.fresh('added')
        b.copy(src, t)
        b.mark(loop)
        b.jz(t, done)
        b.dec(t)
        b.inc(dst)
        b.goto(loop)
        b.mark(done)


def _subtract(b: Builder, src: int, dst: int):
    with b.scratch(1) as (t,):
        loop, done = b.fresh('sub'), b.fresh('subtracted')
        b.copy(src, t)
        b.mark(loop)
        b.jz(t, done)
        b.dec(t)
        b.dec(dst)
        b.goto(loop)
        b.mark(done)


def _less(b: Builder, x: int, y: int, yes: str, no: str):
    with b.scratch(2) as (t, u):
        loop = b.fresh('less')
        b.copy(x, t)
        b.copy(y, u)
        b.mark(loop)
        b.jz(u, no)
        b.jz(t, yes)
        b.dec(t)
        b.dec(u)
        b.goto(loop)


def _equal(b: Builder, x: int, y: int, yes: str, no: str):
    with b.scratch(2) as (t, u):
        loop, drained = b.fresh('equal'), b.fresh('drained')
        b.copy(x, t)
        b.copy(y, u)
        b.mark(loop)
        b.jz(t, drained)
        b.jz(u, no)
        b.dec(t)
        b.dec(u)
        b.goto(loop)
        b.mark(drained)
        b.jz(u, yes)
        b.goto(no)


def _pair(b: Builder, x: int, y: int, out: int):
    """out = (x+y)(x+y+1)/2 + y."""
    with b.scratch(1) as (s,):
        loop, done = b.fresh('triangle'), b.fresh('paired')
        b.copy(x, s)
        _add(b, y, s)
        b.clear(out)
        b.mark(loop)
        b.jz(s, done)
        _add(b, s, out)
        b.dec(s)
        b.goto(loop)
        b.mark(done)
        _add(b, y, out)


def _unpair(b: Builder, n: int, first: int, second: int):
    """Walk diagonals: subtract 1, 2, ... from n while it exceeds the diagonal index."""
    with b.scratch(2) as (r, w):
        loop, more, done = b.fresh('unpair'), b.fresh('diagonal'), b.fresh('unpaired')
        b.copy(n, r)
        b.clear(w)
        b.mark(loop)
        _less(b, w, r, more, done)
        b.mark(more)
        b.inc(w)
        _subtract(b, w, r)
        b.goto(loop)
        b.mark(done)
        b.copy(r, second)
        b.copy(w, first)
        _subtract(b, r, first)


def _members(b: Builder, on_member: Callable[[Builder, int, str], None], on_all_passed: str):
    """Visit every n in the oracle in increasing order; on_member gets n and the flash label.

    Non-members cost the same fixed sequence of instructions, so an oracle that is eventually
    periodic gives a loop whose tail repeats with a constant shift."""
    with b.scratch(2) as (n, q):
        b.clear(n)

        def body(b: Builder, next_label: str):
            b.copy(n, q)
            b.oracle(q)
            b.jz(q, next_label)
            on_member(b, n, next_label)

        flag_limit_loop(b, body, on_all_passed, counter=n)


def _branch(b: Builder, q: int, bit: int, fail: str):
    """Continue iff register q holds `bit`."""
    if bit:
        b.jz(q, fail)
    else:
        ok = b.fresh('ok')
        b.jz(q, ok)
        b.goto(fail)
        b.mark(ok)


def _word(target: OracleSpec) -> Word:
    match target:
        case Finite(members):
            return tuple(int(n in members) for n in range(max(members, default=-1) + 1)), (0,)
        case Cofinite(nonmembers):
            top = max(nonmembers, default=-1) + 1
            return tuple(int(n not in nonmembers) for n in range(top)), (1,)
        case Periodic(prefix, cycle):
            return prefix, cycle
    raise GadgetError(f'no recognizer for {type(target).__name__} targets')


def _bit(word: Word, k: int) -> int:
    prefix, cycle = word
    return prefix[k] if k < len(prefix) else cycle[(k - len(prefix)) % len(cycle)]


def equality_recognizer(target: OracleSpec) -> Program:
    """Halts with 1 iff the oracle equals `target` bit for bit, otherwise with 0.

    The prefix is checked straight-line; the cycle is unrolled into one loop iteration, so the
    bit index grows by the cycle length per iteration and the loop reaches its limit exactly
    when every bit agreed.
    """
    word = _word(target)
    prefix, cycle = word
    b = Builder()
    i, q = b.register(), b.register()
    accept, reject = b.fresh('accept'), b.fresh('reject')

    def check(b: Builder, k: int):
        b.copy(i, q)
        b.oracle(q)
        _branch(b, q, _bit(word, k), reject)
        b.inc(i)

    for k in range(len(prefix)):
        check(b, k)

    def body(b: Builder, next_label: str):
        for k in range(len(prefix), len(prefix) + len(cycle)):
            check(b, k)

    flag_limit_loop(b, body, accept)
    b.mark(accept)
    b.output(1)
    b.mark(reject)
    b.output(0)
    return b.build()


def join_splitter() -> tuple[Reader, Reader]:
    """Readers for bit i of the even and odd halves of a join.

    Both take a cursor register holding 2i (doubling inside the loop would make its shape
    depend on i) and a register receiving the bit.
    """

    def even_reader(b: Builder, cursor: int, q: int):
        b.copy(cursor, q)
        b.oracle(q)

    def odd_reader(b: Builder, cursor: int, q: int):
        b.copy(cursor, q)
        b.inc(q)
        b.oracle(q)

    return even_reader, odd_reader


def join_recognizer(left: OracleSpec, right: OracleSpec) -> Program:
    """Halts with 1 iff the oracle is join(left, right)."""
    words = _word(left), _word(right)
    start = max(len(word[0]) for word in words)
    period = math.lcm(*(len(word[1]) for word in words))
    even_reader, odd_reader = join_splitter()
    b = Builder()
    cursor, q = b.register(), b.register()
    accept, reject = b.fresh('accept'), b.fresh('reject')

    def check(b: Builder, k: int):
        even_reader(b, cursor, q)
        _branch(b, q, _bit(words[0], k), reject)
        odd_reader(b, cursor, q)
        _branch(b, q, _bit(words[1], k), reject)
        b.inc(cursor)
        b.inc(cursor)

    for k in range(start):
        check(b, k)

    def body(b: Builder, next_label: str):
        for k in range(start, start + period):
            check(b, k)

    flag_limit_loop(b, body, accept)
    b.mark(accept)
    b.output(1)
    b.mark(reject)
    b.output(0)
    return b.build()


def complement_recognizer(p: Program) -> Program:
    """Halts with 1 where p halts with 0, and with 0 where p halts with anything else."""
    b = Builder(prologue=False)
    flip, accept = b.fresh('flip'), b.fresh('accept')
    b.embed(p, flip)
    b.mark(flip)
    b.jz(IO_REGISTER, accept)
    b.output(0)
    b.mark(accept)
    b.output(1)
    return b.build()


def _in_sequence(p: Program, q: Program, both: bool) -> Program:
    """Run p, keep its verdict, run q on the same input from cleared registers and accept when
    both (or either) accepted."""
    b = Builder(prologue=False)
    b.next_register = max(FIRST_FREE, p.register_count, q.register_count)
    saved, kept = b.register(), b.register()
    second, combine = b.fresh('second'), b.fresh('combine')
    accept, reject = b.fresh('accept'), b.fresh('reject')
    b.copy(IO_REGISTER, saved)
    b.embed(p, second)
    b.mark(second)
    b.copy(IO_REGISTER, kept)
    for r in range(FLAG_A, q.register_count):
        b.clear(r, flags=True)
    b.copy(saved, IO_REGISTER)
    b.embed(q, combine)
    b.mark(combine)
    if both:
        b.jz(IO_REGISTER, reject)
        b.jz(kept, reject)
    else:
        check_kept = b.fresh('kept')
        b.jz(IO_REGISTER, check_kept)
        b.goto(accept)
        b.mark(check_kept)
        b.jz(kept, reject)
    b.mark(accept)
    b.output(1)
    b.mark(reject)
    b.output(0)
    return b.build()


def union_recognizer(p: Program, q: Program) -> Program:
    return _in_sequence(p, q, both=False)


def intersection_recognizer(p: Program, q: Program) -> Program:
    return _in_sequence(p, q, both=True)


def decode_naturals(limit: int) -> Program:
    """Find the code indices k_0, ..., k_{limit-1} of the naturals in a coded membership relation
    and output k_i for input i.

    k_0 is the least k with no predecessor. k_s is the member k whose predecessors are exactly
    k_0..k_{s-1}; candidates come from the second components of oracle members. Output 0 when a
    stage finds nothing or when i >= limit, so 0 also signals failure.
    """
    if limit < 1:
        raise GadgetError('decode_naturals needs limit >= 1')
    b = Builder()
    select = b.register()
    found = [b.register() for _ in range(limit)]
    fail = b.fresh('fail')
    b.copy(IO_REGISTER, select)

    def only_known_predecessors(b: Builder, k: int, stage: int, on_pass: str, reject: str):
        # every member pair(a, k) has a among found[:stage]
        def on_member(b: Builder, n: int, next_label: str):
            with b.scratch(2) as (a, c):
                check_first = b.fresh('first')
                _unpair(b, n, a, c)
                _equal(b, c, k, check_first, next_label)
                b.mark(check_first)
                for earlier in found[:stage]:
                    other = b.fresh('other')
                    _equal(b, a, earlier, next_label, other)
                    b.mark(other)
                b.goto(reject)

        _members(b, on_member, on_pass)

    for stage in range(limit):
        k = found[stage]
        done = b.fresh(f'k{stage}')
        if stage == 0:
            b.clear(k)

            def body(b: Builder, next_label: str):
                only_known_predecessors(b, k, 0, done, next_label)

            flag_limit_loop(b, body, fail, counter=k)
        else:

            def on_candidate(b: Builder, n: int, next_label: str):
                with b.scratch(1) as (a,):
                    _unpair(b, n, a, k)
                with b.scratch(1) as (m,):
                    for earlier in found[:stage]:
                        _pair(b, earlier, k, m)
                        b.oracle(m)
                        b.jz(m, next_label)
                only_known_predecessors(b, k, stage, done, next_label)

            _members(b, on_candidate, fail)
        b.mark(done)
        emit = b.fresh('emit')
        b.jz(select, emit)
        b.dec(select)
        after = b.fresh('after')
        b.goto(after)
        b.mark(emit)
        b.copy(k, IO_REGISTER)
        b.halt()
        b.mark(after)
    b.mark(fail)
    b.output(0)
    return b.build()


def _compile(b: Builder, phi: Formula, env: tuple[int, ...], true: str, false: str):
    match phi:
        case Edge(x, y):
            with b.scratch(1) as (n,):
                _pair(b, env[-1 - x], env[-1 - y], n)
                b.oracle(n)
                b.jz(n, false)
                b.goto(true)
        case Not(body):
            _compile(b, body, env, false, true)
        case And(left, right):
            middle = b.fresh('and')
            _compile(b, left, env, middle, false)
            b.mark(middle)
            _compile(b, right, env, true, false)
        case Exists(body):
            # witnesses are drawn from the components of oracle members, i.e. the field
            with b.scratch(1) as (x,):

                def on_member(b: Builder, n: int, next_label: str):
                    with b.scratch(1) as (other,):
                        second = b.fresh('second')
                        _unpair(b, n, x, other)
                        _compile(b, body, env + (x,), true, second)
                        b.mark(second)
                        b.copy(other, x)
                    _compile(b, body, env + (x,), true, next_label)

                _members(b, on_member, false)


def fo_compile(phi: Formula, max_depth: int = 3) -> Program:
    """A program halting with 1 iff the structure coded by the oracle satisfies phi, else 0.

    Quantifiers range over the field of the coded relation.
    """
    if not is_sentence(phi):
        raise FormulaError('formula has free variables')
    if depth(phi) > max_depth:
        raise FormulaError(f'quantifier depth {depth(phi)} exceeds {max_depth}')
    b = Builder()
    true, false = b.fresh('true'), b.fresh('false')
    _compile(b, phi, (), true, false)
    b.mark(true)
    b.output(1)
    b.mark(false)
    b.output(0)
    return b.build()


def _nested(levels: int) -> Body:
    def body(b: Builder, next_label: str):
        if levels:
            after = b.fresh('after')
            flag_limit_loop(b, _nested(levels - 1), after)
            b.mark(after)

    return body


def flag_counter(depth: int = 1) -> Program:
    """`depth` nested flag loops with empty bodies; halts at a time of degree `depth`."""
    if depth < 1:
        raise GadgetError('flag_counter needs depth >= 1')
    b = Builder()
    done = b.fresh('done')
    flag_limit_loop(b, _nested(depth - 1), done)
    b.mark(done)
    b.halt()
    return b.build()


def inc_loop() -> Program:
    b = Builder(prologue=False)
    x = b.register()
    loop = b.fresh('loop')
    b.mark(loop)
    b.inc(x)
    b.goto(loop)
    b.halt()
    return b.build()


def parity_program() -> Program:
    """Halts iff the input is even."""
    b = Builder(prologue=False)
    loop, even, odd = b.fresh('loop'), b.fresh('even'), b.fresh('odd')
    b.mark(loop)
    b.jz(IO_REGISTER, even)
    b.dec(IO_REGISTER)
    b.jz(IO_REGISTER, odd)
    b.dec(IO_REGISTER)
    b.goto(loop)
    b.mark(even)
    b.halt()
    b.mark(odd)
    b.goto(odd)
    return b.build()


def constant_program(output: int) -> Program:
    b = Builder(prologue=False)
    b.output(output)
    return b.build()


Generator = Callable[[list[str]], Program]


def _arity(name: str, args: list[str], count: int):
    if len(args) != count:
        raise GadgetError(f'{name} takes {count} argument(s), got {len(args)}')


def _generator(name: str, count: int, build: Callable[..., Program]) -> Generator:
    def generate(args: list[str]) -> Program:
        _arity(name, args, count)
        return build(*args)

    return generate


GENERATORS: dict[str, Generator] = {
    'flag-counter': lambda args: flag_counter(int(args[0]) if args else 1),
    'inc-loop': _generator('inc-loop', 0, inc_loop),
    'parity': _generator('parity', 0, parity_program),
    'constant': _generator('constant', 1, lambda value: constant_program(int(value))),
    'eq-recognizer': _generator(
        'eq-recognizer', 1, lambda target: equality_recognizer(parse_oracle(target))
    ),
    'join-recognizer': _generator(
        'join-recognizer',
        2,
        lambda left, right: join_recognizer(parse_oracle(left), parse_oracle(right)),
    ),
    'decode-naturals': _generator('decode-naturals', 1, lambda limit: decode_naturals(int(limit))),
    'fo': _generator('fo', 1, lambda text: fo_compile(parse_formula(text))),
    'complement': _generator('complement', 1, lambda path: complement_recognizer(load(path))),
    'union': _generator('union', 2, lambda a, b: union_recognizer(load(a), load(b))),
    'intersection': _generator(
        'intersection', 2, lambda a, b: intersection_recognizer(load(a), load(b))
    ),
}


def generate(name: str, args: list[str]) -> str:
    """Assembly text of a registered generator, headed by a comment naming it."""
    if name not in GENERATORS:
        raise GadgetError(f'unknown gadget {name!r}; known: {", ".join(sorted(GENERATORS))}')
    program = GENERATORS[name](args)
    return format_program(program, [' '.join(['generated by', name, *args])])
