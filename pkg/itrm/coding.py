import functools
import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import networkx as nx

from itrm.ordinal import Ordinal

if TYPE_CHECKING:
    from itrm.oracle import OracleSpec, OrdinalOrder

Edge = tuple[int, int]


class CodingError(ValueError):
    pass


def pair(a: int, b: int) -> int:
    """Cantor pairing: (a+b)(a+b+1)/2 + b."""
    return (a + b) * (a + b + 1) // 2 + b


def unpair(n: int) -> tuple[int, int]:
    s = (math.isqrt(8 * n + 1) - 1) // 2
    b = n - s * (s + 1) // 2
    return s - b, b


@dataclass(frozen=True)
class CodedStructure:
    """A finite structure (m, edges) together with the real coding it under `assignment`.

    `assignment[a]` is the structure element named by code index a, so
    code = { pair(a, b) : (assignment[a], assignment[b]) in edges }.
    """

    domain_size: int
    edges: frozenset[Edge]
    assignment: tuple[int, ...]
    code: frozenset[int]

    def code_sequence(self) -> tuple[int, ...]:
        return tuple(sorted(self.code))


def _check(m: int, edges: Iterable[Edge]) -> frozenset[Edge]:
    edges = frozenset((int(a), int(b)) for a, b in edges)
    for a, b in edges:
        if not (0 <= a < m and 0 <= b < m):
            raise CodingError(f'edge ({a}, {b}) outside domain of size {m}')
    return edges


def encode(m: int, edges: Iterable[Edge], f: Iterable[int] | None = None) -> CodedStructure:
    edges = _check(m, edges)
    assignment = tuple(range(m)) if f is None else tuple(f)
    if sorted(assignment) != list(range(m)):
        raise CodingError(f'{assignment} is not a permutation of range({m})')
    index = {element: a for a, element in enumerate(assignment)}
    code = frozenset(pair(index[u], index[v]) for u, v in edges)
    return CodedStructure(m, edges, assignment, code)


def decode(code: Iterable[int]) -> tuple[int, frozenset[Edge]]:
    """The relation a code describes on code indices, with the smallest domain covering it."""
    edges = frozenset(unpair(n) for n in code)
    m = 1 + max((max(edge) for edge in edges), default=-1)
    return m, edges


def canonical_code(m: int, edges: Iterable[Edge], bound: int = 8) -> CodedStructure:
    """The coding whose sorted code is lexicographically least over all m! assignments."""
    if m > bound:
        raise CodingError(f'domain size {m} exceeds brute-force bound {bound}')
    edges = _check(m, edges)
    best = None
    for f in itertools.permutations(range(m)):
        candidate = encode(m, edges, f)
        if best is None or candidate.code_sequence() < best.code_sequence():
            best = candidate
    assert best is not None
    return best


def well_founded(m: int, edges: Iterable[Edge]) -> bool:
    # finite relations are well-founded exactly when acyclic; self-loops count as cycles
    graph = nx.DiGraph()
    graph.add_nodes_from(range(m))
    graph.add_edges_from(edges)
    return nx.is_directed_acyclic_graph(graph)


def ordinal_order_oracle(bound: Ordinal) -> 'OrdinalOrder':
    from itrm.oracle import OrdinalOrder

    return OrdinalOrder(bound)


def _field(o: 'OracleSpec', index_limit: int) -> list[int]:
    """Indices below `index_limit` related to another such index, sorted along the coded order."""
    related = {
        a
        for a in range(index_limit)
        for b in range(index_limit)
        if o.bit(pair(a, b)) or o.bit(pair(b, a))
    }

    def precedes(a: int, b: int) -> int:
        return -1 if o.bit(pair(a, b)) else int(o.bit(pair(b, a)))

    return sorted(related, key=functools.cmp_to_key(precedes))


def order_embeds(left: 'OracleSpec', right: 'OracleSpec', index_limit: int = 200) -> bool:
    """Search an order-preserving map from the field of `left` into the field of `right`.

    Both oracles code well-orders, as ordinal_order_oracle does, so mapping each element to the
    least unused element above the previous image finds an embedding whenever one exists. Only
    indices below `index_limit` are queried, and a field element must be related to another
    queried index to be seen.
    """
    targets = iter(_field(right, index_limit))
    previous = None
    for _ in _field(left, index_limit):
        image = next((b for b in targets if previous is None or right.bit(pair(previous, b))), None)
        if image is None:
            return False
        previous = image
    return True


def parse_structure(text: str) -> tuple[int, frozenset[Edge]]:
    rows = [line.split('#', 1)[0].split() for line in text.splitlines()]
    rows = [row for row in rows if row]
    if not rows or len(rows[0]) != 1 or not rows[0][0].isdigit():
        raise CodingError('structure must start with the domain size')
    m = int(rows[0][0])
    edges = []
    for row in rows[1:]:
        if len(row) != 2 or not all(token.isdigit() for token in row):
            raise CodingError(f'bad edge line {" ".join(row)!r}')
        edges.append((int(row[0]), int(row[1])))
    return m, _check(m, edges)


def format_structure(m: int, edges: Iterable[Edge]) -> str:
    return '\n'.join([str(m)] + [f'{a} {b}' for a, b in sorted(edges)]) + '\n'


def read_structure(file_path: str) -> tuple[int, frozenset[Edge]]:
    with open(file_path) as structure_f:
        return parse_structure(structure_f.read())
