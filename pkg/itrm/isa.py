import re
from dataclasses import dataclass, field


class AssemblyError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f'{line}:{column}: {message}')
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f'line {self.line}: {self.message}'


class ValidationError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__('; '.join(map(str, diagnostics)))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Inc:
    r: int


@dataclass(frozen=True)
class Dec:
    r: int


@dataclass(frozen=True)
class Copy:
    src: int
    dst: int


@dataclass(frozen=True)
class JumpIfZero:
    r: int
    target: int


@dataclass(frozen=True)
class OracleQuery:
    r: int


@dataclass(frozen=True)
class Halt:
    pass


Instruction = Inc | Dec | Copy | JumpIfZero | OracleQuery | Halt


def registers_of(instruction: Instruction) -> tuple[int, ...]:
    match instruction:
        case Copy(src, dst):
            return (src, dst)
        case Inc(r) | Dec(r) | JumpIfZero(r, _) | OracleQuery(r):
            return (r,)
    return ()


def writes_of(instruction: Instruction) -> tuple[int, ...]:
    match instruction:
        case Copy(_, dst):
            return (dst,)
        case Inc(r) | Dec(r) | OracleQuery(r):
            return (r,)
    return ()


@dataclass(frozen=True)
class Program:
    lines: tuple[Instruction, ...]
    register_count: int
    source_name: str = field(default='<string>', compare=False)

    def __len__(self) -> int:
        return len(self.lines)

    def used_registers(self) -> int:
        return 1 + max((r for line in self.lines for r in registers_of(line)), default=0)


def validate(p: Program) -> list[Diagnostic]:
    diagnostics = []
    if not p.lines:
        diagnostics.append(Diagnostic(0, 'program is empty'))
    if p.register_count < 1:
        diagnostics.append(Diagnostic(0, f'register count {p.register_count} is not positive'))
    for i, instruction in enumerate(p.lines):
        for r in registers_of(instruction):
            if not 0 <= r < p.register_count:
                diagnostics.append(
                    Diagnostic(i, f'register r{r} outside 0..{p.register_count - 1}')
                )
        if isinstance(instruction, JumpIfZero) and not 0 <= instruction.target < len(p.lines):
            diagnostics.append(
                Diagnostic(i, f'jump target {instruction.target} outside 0..{len(p.lines) - 1}')
            )
    return diagnostics


_ARITY = {'INC': 'r', 'DEC': 'r', 'COPY': 'rr', 'JZ': 'rt', 'ORACLE': 'r', 'HALT': ''}
_LABEL = re.compile(r'[A-Za-z_][A-Za-z0-9_.]*')
_REGISTER = re.compile(r'r(\d+)')


def _tokens(text: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r'\S+', text)]


def parse(source: str, source_name: str = '<string>', strict: bool = True) -> Program:
    """Assemble `source` into a Program.

    With `strict` (the default) numeric jump targets past the end and registers past a
    `registers N` header are rejected; otherwise they are kept so `validate` can report them.
    """
    labels: dict[str, int] = {}
    pending: list[tuple[str, list[tuple[str, int]], int]] = []
    declared = None

    for number, raw in enumerate(source.splitlines(), start=1):
        text = raw.split('#', 1)[0]
        tokens = _tokens(text)
        if tokens and tokens[0][0].lower() == 'registers':
            if len(tokens) != 2 or not tokens[1][0].isdigit():
                raise AssemblyError('expected `registers N`', number, tokens[0][1])
            if declared is not None or pending:
                raise AssemblyError('`registers` must be the first directive', number)
            declared = int(tokens[1][0])
            if declared < 1:
                raise AssemblyError('register count must be positive', number, tokens[1][1])
            continue
        while tokens and tokens[0][0].endswith(':'):
            name, column = tokens.pop(0)
            name = name[:-1]
            if not _LABEL.fullmatch(name):
                raise AssemblyError(f'bad label {name!r}', number, column)
            if name in labels:
                raise AssemblyError(f'duplicate label {name!r}', number, column)
            labels[name] = len(pending)
        if tokens:
            pending.append((tokens[0][0].upper(), tokens, number))

    lines: list[Instruction] = []
    for mnemonic, tokens, number in pending:
        if mnemonic not in _ARITY:
            raise AssemblyError(f'unknown instruction {tokens[0][0]!r}', number, tokens[0][1])
        shape = _ARITY[mnemonic]
        operands = tokens[1:]
        if len(operands) < len(shape):
            kind = 'jump target' if shape[len(operands)] == 't' else 'register'
            raise AssemblyError(f'missing {kind} for {mnemonic}', number, tokens[-1][1])
        if len(operands) > len(shape):
            raise AssemblyError(f'too many operands for {mnemonic}', number, operands[-1][1])
        values = []
        for kind, (token, column) in zip(shape, operands):
            if kind == 'r':
                match = _REGISTER.fullmatch(token)
                if not match:
                    raise AssemblyError(f'expected register, got {token!r}', number, column)
                r = int(match.group(1))
                if strict and declared is not None and r >= declared:
                    raise AssemblyError(
                        f'register r{r} outside declared range 0..{declared - 1}', number, column
                    )
                values.append(r)
            elif token.isdigit():
                target = int(token)
                if strict and target >= len(pending):
                    raise AssemblyError(f'jump target {target} past the end', number, column)
                values.append(target)
            elif token in labels:
                if strict and labels[token] >= len(pending):
                    raise AssemblyError(f'label {token!r} marks no instruction', number, column)
                values.append(labels[token])
            else:
                raise AssemblyError(f'undefined label {token!r}', number, column)
        lines.append(_build(mnemonic, values))

    used = 1 + max((r for line in lines for r in registers_of(line)), default=0)
    return Program(tuple(lines), declared if declared is not None else used, source_name)


def _build(mnemonic: str, values: list[int]) -> Instruction:
    match mnemonic:
        case 'INC':
            return Inc(*values)
        case 'DEC':
            return Dec(*values)
        case 'COPY':
            return Copy(*values)
        case 'JZ':
            return JumpIfZero(*values)
        case 'ORACLE':
            return OracleQuery(*values)
    return Halt()


def format_instruction(instruction: Instruction) -> str:
    match instruction:
        case Inc(r):
            return f'INC r{r}'
        case Dec(r):
            return f'DEC r{r}'
        case Copy(src, dst):
            return f'COPY r{src} r{dst}'
        case JumpIfZero(r, target):
            return f'JZ r{r} {target}'
        case OracleQuery(r):
            return f'ORACLE r{r}'
    return 'HALT'


def format_program(p: Program, header: list[str] | None = None) -> str:
    """Canonical assembly text; parse(format_program(p)) == p."""
    lines = [f'# {comment}' for comment in header or []]
    if p.register_count != p.used_registers():
        lines.append(f'registers {p.register_count}')
    lines.extend(format_instruction(instruction) for instruction in p.lines)
    return '\n'.join(lines)


def load(file_path: str, strict: bool = True) -> Program:
    with open(file_path) as source_f:
        return parse(source_f.read(), file_path, strict)
