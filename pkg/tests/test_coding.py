import random

import pytest

from itrm.coding import (
    CodingError,
    canonical_code,
    decode,
    encode,
    format_structure,
    order_embeds,
    ordinal_order_oracle,
    pair,
    parse_structure,
    read_structure,
    unpair,
    well_founded,
)
from itrm.oracle import OrdinalOrder
from itrm.ordinal import OMEGA, ONE, natural, ordinal_at, ordinal_index, parse


def test_pairing_values() -> None:
    assert pair(0, 0) == 0
    assert pair(1, 0) == 1
    assert pair(0, 1) == 2
    assert pair(1, 2) == 8
    assert [unpair(n) for n in range(6)] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_pairing_is_a_bijection() -> None:
    assert sorted(pair(*unpair(n)) for n in range(10**4)) == list(range(10**4))
    rng = random.Random(5)
    for _ in range(500):
        a, b = rng.randrange(10**12), rng.randrange(10**12)
        assert unpair(pair(a, b)) == (a, b)


def test_encode_follows_the_assignment() -> None:
    coded = encode(3, {(0, 1), (1, 2)})
    assert coded.code == frozenset({pair(0, 1), pair(1, 2)})
    moved = encode(3, {(0, 1), (1, 2)}, f=(2, 1, 0))
    assert moved.code == frozenset({pair(2, 1), pair(1, 0)})
    with pytest.raises(CodingError):
        encode(2, {(0, 2)})
    with pytest.raises(CodingError):
        encode(2, {(0, 1)}, f=(0, 0))


def test_decode_recovers_edges_on_code_indices() -> None:
    m, edges = decode(encode(4, {(0, 3), (2, 1)}).code)
    assert m == 4
    assert edges == frozenset({(0, 3), (2, 1)})
    assert decode([]) == (0, frozenset())


def test_canonical_code_minimizes_over_relabelings() -> None:
    coded = canonical_code(2, {(0, 1)})
    assert coded.code == frozenset({1})
    assert coded.assignment == (1, 0)
    # isomorphic structures share the canonical code
    rng = random.Random(9)
    edges = {(0, 1), (1, 2), (2, 0), (3, 3)}
    for _ in range(10):
        f = list(range(4))
        rng.shuffle(f)
        relabeled = {(f[a], f[b]) for a, b in edges}
        assert canonical_code(4, relabeled).code == canonical_code(4, edges).code
    with pytest.raises(CodingError):
        canonical_code(9, set(), bound=8)


def test_well_founded_means_acyclic() -> None:
    assert well_founded(3, {(0, 1), (1, 2)})
    assert well_founded(0, set())
    assert not well_founded(3, {(0, 1), (1, 2), (2, 0)})
    assert not well_founded(1, {(0, 0)})


def has_cycle(m: int, edges: set) -> bool:
    successors = {a: [b for x, b in edges if x == a] for a in range(m)}
    state = [0] * m  # 0 unseen, 1 on the stack, 2 done

    def visit(a: int) -> bool:
        state[a] = 1
        for b in successors[a]:
            if state[b] == 1 or (state[b] == 0 and visit(b)):
                return True
        state[a] = 2
        return False

    return any(state[a] == 0 and visit(a) for a in range(m))


def test_well_founded_agrees_with_cycle_search() -> None:
    rng = random.Random(13)
    for _ in range(1000):
        m = rng.randint(1, 10)
        density = rng.choice([0.05, 0.1, 0.2, 0.4])
        edges = {(a, b) for a in range(m) for b in range(m) if rng.random() < density}
        assert well_founded(m, edges) == (not has_cycle(m, edges))


def related_pairs(o, index_limit: int) -> set:
    return {
        (a, b) for a in range(index_limit) for b in range(index_limit) if o.bit(pair(a, b))
    }


def test_ordinal_order_oracle_codes_the_order_below_its_bound() -> None:
    assert related_pairs(ordinal_order_oracle(ONE), 50) == set()
    assert related_pairs(ordinal_order_oracle(natural(2)), 50) == {(0, 1)}
    o = ordinal_order_oracle(OMEGA)
    assert o == OrdinalOrder(OMEGA)
    for a, b in related_pairs(o, 40):
        assert ordinal_at(a) < ordinal_at(b) < OMEGA
    w = ordinal_index(OMEGA)
    assert o.bit(pair(0, w)) == 0
    assert o.bit(pair(0, 1)) == 1


def test_order_embeds_searches_the_coded_orders() -> None:
    omega, omega_twice = ordinal_order_oracle(OMEGA), ordinal_order_oracle(parse('w*2'))
    assert order_embeds(omega, omega_twice)
    assert not order_embeds(omega_twice, omega)


def test_order_embeds_agrees_with_ordinal_comparison() -> None:
    bounds = [parse(text) for text in ['2', '5', 'w', 'w+1', 'w*2', 'w^2']]
    for left in bounds:
        for right in bounds:
            embeds = order_embeds(ordinal_order_oracle(left), ordinal_order_oracle(right), 60)
            assert embeds == (left <= right), (left, right)


def test_structure_files(tmp_path) -> None:
    text = '# a three-cycle\n3\n0 1\n1 2\n2 0  # back\n'
    m, edges = parse_structure(text)
    assert (m, edges) == (3, frozenset({(0, 1), (1, 2), (2, 0)}))
    assert parse_structure(format_structure(m, edges)) == (m, edges)
    path = tmp_path / 'cycle.txt'
    path.write_text(text)
    assert read_structure(str(path)) == (m, edges)
    for bad in ['', '0 1\n', '2\n0\n', '2\n0 5\n']:
        with pytest.raises(CodingError):
            parse_structure(bad)
