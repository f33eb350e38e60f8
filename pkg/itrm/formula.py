import re
from dataclasses import dataclass
from typing import Iterable

from itrm.coding import Edge as Pair
from itrm.coding import decode


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    """E(x, y); variables are de Bruijn indices, 0 naming the innermost quantifier."""

    x: int
    y: int


@dataclass(frozen=True)
class Not:
    body: 'Formula'


@dataclass(frozen=True)
class And:
    left: 'Formula'
    right: 'Formula'


@dataclass(frozen=True)
class Exists:
    body: 'Formula'


Formula = Edge | Not | And | Exists


def forall(body: Formula) -> Formula:
    return Not(Exists(Not(body)))


def either(left: Formula, right: Formula) -> Formula:
    return Not(And(Not(left), Not(right)))


def depth(phi: Formula) -> int:
    """Quantifier nesting depth."""
    match phi:
        case Exists(body):
            return 1 + depth(body)
        case Not(body):
            return depth(body)
        case And(left, right):
            return max(depth(left), depth(right))
    return 0


def free_reach(phi: Formula, bound: int = 0) -> int:
    """How many quantifiers phi needs around it to be closed."""
    match phi:
        case Edge(x, y):
            return max(0, x + 1 - bound, y + 1 - bound)
        case Exists(body):
            return free_reach(body, bound + 1)
        case Not(body):
            return free_reach(body, bound)
        case And(left, right):
            return max(free_reach(left, bound), free_reach(right, bound))
    raise TypeError(f'not a formula: {phi!r}')


def is_sentence(phi: Formula) -> bool:
    return free_reach(phi) == 0


def field(edges: Iterable[Pair]) -> frozenset[int]:
    return frozenset(v for edge in edges for v in edge)


def evaluate(
    phi: Formula, edges: frozenset[Pair], domain: Iterable[int], env: tuple[int, ...] = ()
) -> bool:
    domain = tuple(domain)
    match phi:
        case Edge(x, y):
            return (env[-1 - x], env[-1 - y]) in edges
        case Not(body):
            return not evaluate(body, edges, domain, env)
        case And(left, right):
            return evaluate(left, edges, domain, env) and evaluate(right, edges, domain, env)
        case Exists(body):
            return any(evaluate(body, edges, domain, env + (v,)) for v in domain)
    raise TypeError(f'not a formula: {phi!r}')


def holds(phi: Formula, code: Iterable[int]) -> bool:
    """Truth of a sentence in the structure a code describes, quantifiers ranging over its field."""
    _, edges = decode(code)
    return evaluate(phi, edges, sorted(field(edges)))


# text form: Ex phi, Ax phi, ~phi, phi & psi, phi | psi, E(x,y), parentheses
# quantifiers and ~ bind to the next unary formula: `Ex (E(x,x) & ~E(x,x))`

_TOKEN = re.compile(
    r'(?P<quant>[EA])(?P<var>[a-z][a-z0-9_]*)|(?P<atom>E\()|(?P<name>[a-z][a-z0-9_]*)'
    r'|(?P<sym>[~&|(),])|(?P<space>\s+)'
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens, position = [], 0
    while position < len(text):
        found = _TOKEN.match(text, position)
        if not found:
            raise FormulaError(f'unexpected {text[position]!r} at {position}')
        kind = found.lastgroup
        if kind == 'var':
            tokens.append((found.group('quant'), found.group('var'), position))
        elif kind == 'atom':
            tokens.append(('atom', 'E(', position))
        elif kind != 'space':
            assert kind is not None
            tokens.append((kind, found.group(kind), position))
        position = found.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.k = 0
        self.scope: list[str] = []

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.k] if self.k < len(self.tokens) else None

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        token = self.peek()
        if token is None:
            raise FormulaError(f'unexpected end, expected {value or "more input"}')
        if value is not None and token[1] != value:
            raise FormulaError(f'expected {value!r} at {token[2]}, got {token[1]!r}')
        self.k += 1
        return token

    def variable(self) -> int:
        kind, name, position = self.take()
        if kind != 'name':
            raise FormulaError(f'expected a variable at {position}')
        if name not in self.scope:
            raise FormulaError(f'unbound variable {name!r} at {position}')
        return self.scope[::-1].index(name)

    def disjunction(self) -> Formula:
        phi = self.conjunction()
        while (token := self.peek()) and token[1] == '|':
            self.take()
            phi = either(phi, self.conjunction())
        return phi

    def conjunction(self) -> Formula:
        phi = self.unary()
        while (token := self.peek()) and token[1] == '&':
            self.take()
            phi = And(phi, self.unary())
        return phi

    def unary(self) -> Formula:
        kind, value, position = self.take()
        if value == '~':
            return Not(self.unary())
        if kind in ('E', 'A'):
            self.scope.append(value)
            body = self.unary()
            self.scope.pop()
            return Exists(body) if kind == 'E' else forall(body)
        if kind == 'atom':
            x = self.variable()
            self.take(',')
            y = self.variable()
            self.take(')')
            return Edge(x, y)
        if value == '(':
            phi = self.disjunction()
            self.take(')')
            return phi
        raise FormulaError(f'unexpected {value!r} at {position}')


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    phi = parser.disjunction()
    token = parser.peek()
    if token is not None:
        raise FormulaError(f'trailing {token[1]!r} at {token[2]}')
    return phi


def format_formula(phi: Formula, names: tuple[str, ...] = ()) -> str:
    match phi:
        case Edge(x, y):
            return f'E({names[-1 - x]},{names[-1 - y]})'
        case Not(body):
            return f'~{format_formula(body, names)}'
        case And(left, right):
            return f'({format_formula(left, names)} & {format_formula(right, names)})'
        case Exists(body):
            name = f'x{len(names)}'
            return f'E{name} {format_formula(body, names + (name,))}'
    raise TypeError(f'not a formula: {phi!r}')
