import math
import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from itrm.coding import CodedStructure, encode, read_structure, unpair
from itrm.ordinal import Ordinal, ordinal_at, render
from itrm.ordinal import parse as parse_ordinal

Period = tuple[int, int]  # (threshold, period)


class OracleSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f'{message} at {position} in {text!r}')
        self.position = position


@dataclass(frozen=True)
class Finite:
    members: frozenset[int] = frozenset()

    def bit(self, n: int) -> int:
        return int(n in self.members)


@dataclass(frozen=True)
class Cofinite:
    nonmembers: frozenset[int] = frozenset()

    def bit(self, n: int) -> int:
        return int(n not in self.nonmembers)


@dataclass(frozen=True)
class Periodic:
    """The infinite word prefix + cycle + cycle + ..."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError('periodic oracle needs a nonempty cycle')
        if any(b not in (0, 1) for b in self.prefix + self.cycle):
            raise ValueError('periodic oracle bits must be 0 or 1')

    def bit(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.cycle[(n - len(self.prefix)) % len(self.cycle)]


@dataclass(frozen=True)
class Join:
    left: 'OracleSpec'
    right: 'OracleSpec'

    def bit(self, n: int) -> int:
        return (self.right if n % 2 else self.left).bit(n // 2)


@dataclass(frozen=True)
class Complement:
    inner: 'OracleSpec'

    def bit(self, n: int) -> int:
        return 1 - self.inner.bit(n)


@dataclass(frozen=True)
class StructureCode:
    code: CodedStructure

    def bit(self, n: int) -> int:
        return int(n in self.code.code)


@dataclass(frozen=True)
class OrdinalOrder:
    """pair(a, b) is a member iff ordinal_at(a) < ordinal_at(b) < bound."""

    bound: Ordinal

    def bit(self, n: int) -> int:
        a, b = unpair(n)
        return int(ordinal_at(a) < ordinal_at(b) < self.bound)


OracleSpec = Finite | Cofinite | Periodic | Join | Complement | StructureCode | OrdinalOrder

EMPTY = Finite()


def query(o: OracleSpec, n: int) -> int:
    return o.bit(n)


def join(x: OracleSpec, y: OracleSpec) -> Join:
    return Join(x, y)


def finite(members: Iterable[int]) -> Finite:
    return Finite(frozenset(members))


def eventual_period(o: OracleSpec) -> Period | None:
    """(threshold, period) with query(o, n) == query(o, n + period) for all n >= threshold."""
    match o:
        case Finite(members) | Cofinite(members):
            return (max(members, default=-1) + 1, 1)
        case StructureCode(code):
            return (max(code.code, default=-1) + 1, 1)
        case Periodic(prefix, cycle):
            return (len(prefix), len(cycle))
        case Complement(inner):
            return eventual_period(inner)
        case Join(left, right):
            found = eventual_period(left), eventual_period(right)
            if found[0] is None or found[1] is None:
                return None
            (t1, p1), (t2, p2) = found
            return (2 * max(t1, t2), 2 * math.lcm(p1, p2))
    return None


def constant_along(o: OracleSpec, n: int, steps: Iterable[int]) -> bool:
    """Whether query(o, n + sum(k_i * steps_i)) is the same bit for every choice of k_i >= 0."""
    steps = sorted({s for s in steps if s > 0})
    if not steps:
        return True
    found = eventual_period(o)
    if found is None:
        return False
    threshold, period = found

    def reduce(x: int) -> int:
        return x if x < threshold else threshold + (x - threshold) % period

    start = reduce(n)
    expected = o.bit(start)
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if o.bit(x) != expected:
            return False
        for s in steps:
            y = reduce(x + s)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return True


# text form: finite{1,5} cofinite{0} periodic[1|01] join(A,B) compl(A) code(file) order(w+1)

_NUMBERS = re.compile(r'\s*(\d+(?:\s*,\s*\d+)*)?\s*')
_BITS = re.compile(r'([01]*)\|([01]+)')
_NAME = re.compile(r'[a-z]+')


class _Parser:
    def __init__(self, text: str, base_dir: str | None):
        self.text = text
        self.position = 0
        self.base_dir = base_dir

    def error(self, message: str):
        return OracleSyntaxError(message, self.text, self.position)

    def expect(self, token: str):
        if not self.text.startswith(token, self.position):
            raise self.error(f'expected {token!r}')
        self.position += len(token)

    def until(self, token: str) -> str:
        end = self.text.find(token, self.position)
        if end < 0:
            raise self.error(f'missing {token!r}')
        chunk = self.text[self.position : end]
        self.position = end + len(token)
        return chunk

    def numbers(self) -> frozenset[int]:
        self.expect('{')
        start = self.position
        chunk = self.until('}')
        if not _NUMBERS.fullmatch(chunk):
            self.position = start
            raise self.error('expected comma-separated naturals')
        return frozenset(int(token) for token in chunk.split(',') if token.strip())

    def spec(self) -> OracleSpec:
        found = _NAME.match(self.text, self.position)
        if not found:
            raise self.error('expected an oracle name')
        name = found.group()
        self.position = found.end()
        match name:
            case 'finite':
                return Finite(self.numbers())
            case 'cofinite':
                return Cofinite(self.numbers())
            case 'periodic':
                self.expect('[')
                start = self.position
                bits = _BITS.fullmatch(self.until(']'))
                if not bits:
                    self.position = start
                    raise self.error('expected `prefix|cycle` bits with a nonempty cycle')
                prefix, cycle = (tuple(int(b) for b in group) for group in bits.groups())
                return Periodic(prefix, cycle)
            case 'join':
                self.expect('(')
                left = self.spec()
                self.expect(',')
                right = self.spec()
                self.expect(')')
                return Join(left, right)
            case 'compl':
                self.expect('(')
                inner = self.spec()
                self.expect(')')
                return Complement(inner)
            case 'code':
                self.expect('(')
                file_path = self.until(')').strip()
                if self.base_dir and not file_path.startswith('/'):
                    file_path = f'{self.base_dir}/{file_path}'
                return StructureCode(encode(*read_structure(file_path)))
            case 'order':
                self.expect('(')
                start = self.position
                try:
                    bound = parse_ordinal(self.until(')'))
                except ArithmeticError as e:
                    self.position = start
                    raise self.error(str(e)) from e
                return OrdinalOrder(bound)
        self.position = found.start()
        raise self.error(f'unknown oracle {name!r}')


def parse_oracle(text: str, base_dir: str | None = None) -> OracleSpec:
    """Parse the oracle text form; `code(FILE)` reads a structure file and codes it as given."""
    parser = _Parser(text.replace(' ', ''), base_dir)
    spec = parser.spec()
    if parser.position != len(parser.text):
        raise parser.error('trailing text')
    return spec


def format_oracle(o: OracleSpec) -> str:
    match o:
        case Finite(members):
            return f'finite{{{",".join(map(str, sorted(members)))}}}'
        case Cofinite(nonmembers):
            return f'cofinite{{{",".join(map(str, sorted(nonmembers)))}}}'
        case Periodic(prefix, cycle):
            return f'periodic[{"".join(map(str, prefix))}|{"".join(map(str, cycle))}]'
        case Join(left, right):
            return f'join({format_oracle(left)},{format_oracle(right)})'
        case Complement(inner):
            return f'compl({format_oracle(inner)})'
        case StructureCode(code):
            # the source file is not kept; the code set queries identically
            return format_oracle(Finite(code.code))
        case OrdinalOrder(bound):
            return f'order({render(bound)})'
    raise TypeError(f'not an oracle: {o!r}')
