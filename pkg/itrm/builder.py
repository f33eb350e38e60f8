from contextlib import contextmanager
from typing import Iterator

from itrm.isa import (
    Copy,
    Dec,
    Halt,
    Inc,
    Instruction,
    JumpIfZero,
    OracleQuery,
    Program,
    writes_of,
)

ZERO_REGISTER = 0  # never written, so `JZ r0 L` is an unconditional jump
IO_REGISTER = 1
FLAG_A = 2
FLAG_B = 3
FIRST_FREE = 4


class GadgetError(ValueError):
    pass


class Builder:
    """Collects instructions with symbolic jump targets and resolves them in `build`.

    Flag registers may only be written by instructions emitted with `flags=True`, which is how
    the flag-loop construction marks its own flash sequence.
    """

    def __init__(self, prologue: bool = True):
        self.code: list[tuple[str, tuple[int | str, ...], bool]] = []
        self.labels: dict[str, int] = {}
        self.next_register = FIRST_FREE
        self.free: list[int] = []
        self.count = 0
        self.has_flags = prologue
        if prologue:
            self.inc(FLAG_A, flags=True)

    def fresh(self, stem: str = 'L') -> str:
        self.count += 1
        return f'{stem}{self.count}'

    def register(self) -> int:
        r = self.next_register
        self.next_register += 1
        return r

    @contextmanager
    def scratch(self, k: int) -> Iterator[list[int]]:
        """Lend k registers for the duration of a macro."""
        taken = [self.free.pop() if self.free else self.register() for _ in range(k)]
        try:
            yield taken
        finally:
            self.free.extend(reversed(taken))

    def mark(self, label: str):
        if label in self.labels:
            raise GadgetError(f'duplicate label {label!r}')
        self.labels[label] = len(self.code)

    def emit(self, mnemonic: str, *operands: int | str, flags: bool = False):
        self.code.append((mnemonic, operands, flags))

    def inc(self, r: int, flags: bool = False):
        self.emit('INC', r, flags=flags)

    def dec(self, r: int, flags: bool = False):
        self.emit('DEC', r, flags=flags)

    def copy(self, src: int, dst: int):
        self.emit('COPY', src, dst)

    def clear(self, r: int, flags: bool = False):
        self.emit('COPY', ZERO_REGISTER, r, flags=flags)

    def jz(self, r: int, target: str):
        self.emit('JZ', r, target)

    def goto(self, target: str):
        self.jz(ZERO_REGISTER, target)

    def oracle(self, r: int):
        self.emit('ORACLE', r)

    def halt(self):
        self.emit('HALT')

    def output(self, value: int):
        self.clear(IO_REGISTER)
        for _ in range(value):
            self.inc(IO_REGISTER)
        self.halt()

    def embed(self, p: Program, on_halt: str):
        """Inline p, whose halts and whose running off its end continue at `on_halt`.

        p keeps its own register numbers and may write the flags; registers handed out later
        lie above those of p.
        """
        stem = self.fresh('embed')
        labels = [f'{stem}.{k}' for k in range(len(p.lines))]
        for k, instruction in enumerate(p.lines):
            self.mark(labels[k])
            match instruction:
                case Inc(r):
                    self.emit('INC', r, flags=True)
                case Dec(r):
                    self.emit('DEC', r, flags=True)
                case Copy(src, dst):
                    self.emit('COPY', src, dst, flags=True)
                case OracleQuery(r):
                    self.emit('ORACLE', r, flags=True)
                case JumpIfZero(r, target):
                    self.jz(r, labels[target])
                case Halt():
                    self.goto(on_halt)
        self.goto(on_halt)
        self.next_register = max(self.next_register, p.register_count)

    def build(self) -> Program:
        lines: list[Instruction] = []
        for k, (mnemonic, operands, flags) in enumerate(self.code):
            instruction = self._resolve(mnemonic, operands)
            lines.append(instruction)
            for written in writes_of(instruction):
                if written == ZERO_REGISTER:
                    raise GadgetError(f'line {k} writes r{ZERO_REGISTER}')
                if written in (FLAG_A, FLAG_B) and not flags:
                    raise GadgetError(f'line {k} clobbers flag register r{written}')
        program = Program(tuple(lines), 1)
        return Program(program.lines, program.used_registers())

    def _resolve(self, mnemonic: str, operands: tuple[int | str, ...]) -> Instruction:
        match mnemonic, operands:
            case 'INC', (int(r),):
                return Inc(r)
            case 'DEC', (int(r),):
                return Dec(r)
            case 'COPY', (int(src), int(dst)):
                return Copy(src, dst)
            case 'ORACLE', (int(r),):
                return OracleQuery(r)
            case 'JZ', (int(r), str(label)):
                if label not in self.labels:
                    raise GadgetError(f'undefined label {label!r}')
                if self.labels[label] >= len(self.code):
                    raise GadgetError(f'label {label!r} marks no instruction')
                return JumpIfZero(r, self.labels[label])
        return Halt()

