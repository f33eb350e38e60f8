import pytest

from itrm.builder import FIRST_FREE, FLAG_A, IO_REGISTER, ZERO_REGISTER, Builder, GadgetError
from itrm.isa import Copy, Halt, Inc, JumpIfZero, Program, validate


def test_labels_resolve_and_registers_are_counted() -> None:
    b = Builder(prologue=False)
    x = b.register()
    assert x == FIRST_FREE
    b.mark('top')
    b.inc(x)
    b.jz(IO_REGISTER, 'top')
    b.goto('end')
    b.mark('end')
    b.halt()
    p = b.build()
    assert p.lines == (Inc(x), JumpIfZero(IO_REGISTER, 0), JumpIfZero(ZERO_REGISTER, 3), Halt())
    assert p.register_count == x + 1
    assert validate(p) == []


def test_prologue_raises_flag_a() -> None:
    b = Builder()
    b.halt()
    assert b.build().lines == (Inc(FLAG_A), Halt())


def test_output_overwrites_the_io_register() -> None:
    b = Builder(prologue=False)
    b.output(2)
    assert b.build().lines == (Copy(ZERO_REGISTER, IO_REGISTER), Inc(1), Inc(1), Halt())


def test_scratch_registers_are_reused() -> None:
    b = Builder(prologue=False)
    with b.scratch(2) as (x, y):
        assert x != y
    with b.scratch(1) as (z,):
        assert z == x
    assert b.register() == y + 1


def test_build_rejects_bad_writes() -> None:
    b = Builder(prologue=False)
    b.inc(ZERO_REGISTER)
    with pytest.raises(GadgetError, match='writes r0'):
        b.build()
    b = Builder(prologue=False)
    b.copy(IO_REGISTER, FLAG_A)
    with pytest.raises(GadgetError, match='clobbers flag'):
        b.build()


def test_build_rejects_bad_labels() -> None:
    b = Builder()
    b.mark('x')
    with pytest.raises(GadgetError, match='duplicate'):
        b.mark('x')
    b.goto('y')
    with pytest.raises(GadgetError, match='undefined label'):
        b.build()
    b = Builder()
    b.goto('end')
    b.mark('end')
    with pytest.raises(GadgetError, match='marks no instruction'):
        b.build()


def test_embed_relocates_jumps_and_redirects_halts() -> None:
    p = Program((Inc(FLAG_A), JumpIfZero(IO_REGISTER, 3), JumpIfZero(ZERO_REGISTER, 1), Halt()), 7)
    b = Builder(prologue=False)
    b.halt()
    b.embed(p, 'after')
    b.mark('after')
    b.halt()
    assert b.build().lines == (
        Halt(),
        Inc(FLAG_A),
        JumpIfZero(IO_REGISTER, 4),
        JumpIfZero(ZERO_REGISTER, 2),
        JumpIfZero(ZERO_REGISTER, 6),
        JumpIfZero(ZERO_REGISTER, 6),
        Halt(),
    )
    assert b.register() == 7
