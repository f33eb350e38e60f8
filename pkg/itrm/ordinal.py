import re
from dataclasses import dataclass
from functools import total_ordering

Term = tuple[int, int]  # (exponent, coefficient)


class OrdinalError(ArithmeticError):
    pass


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """An ordinal below w^w in Cantor normal form.

    `terms` is a tuple of (exponent, coefficient) pairs with strictly decreasing exponents and
    positive coefficients; the empty tuple is 0. Instances are always canonical, so equality and
    hashing are structural.
    """

    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        previous = None
        for exponent, coefficient in self.terms:
            if exponent < 0 or coefficient < 1:
                raise OrdinalError(f'invalid term w^{exponent}*{coefficient}')
            if previous is not None and exponent >= previous:
                raise OrdinalError('exponents must be strictly decreasing')
            previous = exponent

    def __lt__(self, other: 'Ordinal') -> bool:
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms < other.terms

    def __add__(self, other: 'Ordinal') -> 'Ordinal':
        return add(self, other)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __str__(self) -> str:
        return render(self)

    @property
    def degree(self) -> int:
        return self.terms[0][0] if self.terms else 0


ZERO = Ordinal()
ONE = Ordinal(((0, 1),))
OMEGA = Ordinal(((1, 1),))


def natural(n: int) -> Ordinal:
    if n < 0:
        raise OrdinalError(f'negative ordinal {n}')
    return Ordinal(((0, n),)) if n else ZERO


def power(exponent: int, coefficient: int = 1) -> Ordinal:
    return Ordinal(((exponent, coefficient),))


def compare(a: Ordinal, b: Ordinal) -> int:
    # tuple order on (exponent, coefficient) pairs is exactly the CNF order
    return (a.terms > b.terms) - (a.terms < b.terms)


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b.terms:
        return a
    lead, coefficient = b.terms[0]
    kept = [term for term in a.terms if term[0] > lead]
    same = [c for e, c in a.terms if e == lead]
    if same:
        coefficient += same[0]
    return Ordinal((*kept, (lead, coefficient), *b.terms[1:]))


def successor(a: Ordinal) -> Ordinal:
    return add(a, ONE)


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and a.terms[-1][0] != 0


def difference(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique c with a + c = b; requires a <= b."""
    if b < a:
        raise OrdinalError(f'{render(a)} exceeds {render(b)}')
    for i, (term_b, term_a) in enumerate(zip(b.terms, a.terms)):
        if term_a == term_b:
            continue
        if term_a[0] == term_b[0]:
            return Ordinal(((term_b[0], term_b[1] - term_a[1]), *b.terms[i + 1 :]))
        return Ordinal(b.terms[i:])
    return Ordinal(b.terms[len(a.terms) :])


def limit_jump(start: Ordinal, period: Ordinal) -> Ordinal:
    """sup over n of start + period*n, which is start + w^(d+1) for d the degree of period."""
    if not period:
        raise OrdinalError('limit_jump needs a positive period')
    return add(start, power(period.degree + 1))


def render(a: Ordinal) -> str:
    if not a.terms:
        return '0'
    return '+'.join(f'w^{e}*{c}' if e else str(c) for e, c in a.terms)


_TERM = re.compile(r'^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$')


def parse(text: str) -> Ordinal:
    """Parse `w^k*c` terms joined by `+`; `w`, `w^k` and `w*c` are accepted shorthands."""
    result = ZERO
    for chunk in text.replace(' ', '').split('+'):
        match = _TERM.match(chunk)
        if not match:
            raise OrdinalError(f'bad ordinal term {chunk!r} in {text!r}')
        exponent, coefficient, constant = match.groups()
        if constant is not None:
            term = natural(int(constant))
        else:
            term = Ordinal(((int(exponent or 1), int(coefficient or 1)),))
            if not term.terms[0][0]:
                term = natural(term.terms[0][1])
        result = add(result, term)
    return result


# enumeration of ordinals below w^w, grouped by size = sum of (exponent + coefficient)


def _sequences(size: int, below: int | None) -> list[tuple[Term, ...]]:
    if size == 0:
        return [()]
    found = []
    top = size if below is None else min(size, below - 1)
    for exponent in range(top, -1, -1):
        for coefficient in range(1, size - exponent + 1):
            for rest in _sequences(size - exponent - coefficient, exponent):
                found.append(((exponent, coefficient), *rest))
    return found


_enumeration: list[Ordinal] = []
_indices: dict[Ordinal, int] = {}
_size_done = -1


def _extend():
    global _size_done
    _size_done += 1
    for ordinal in sorted(Ordinal(terms) for terms in _sequences(_size_done, None)):
        _indices[ordinal] = len(_enumeration)
        _enumeration.append(ordinal)


def size(a: Ordinal) -> int:
    return sum(e + c for e, c in a.terms)


def ordinal_at(index: int) -> Ordinal:
    while len(_enumeration) <= index:
        _extend()
    return _enumeration[index]


def ordinal_index(a: Ordinal) -> int:
    while _size_done < size(a):
        _extend()
    return _indices[a]
