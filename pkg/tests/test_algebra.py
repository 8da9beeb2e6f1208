import itertools
import json

import numpy as np
import pytest

from oracles import all_tables, identity_mask
from polysym.algebra import (
    AlgebraError,
    CapExceeded,
    FiniteAlgebra,
    NoTerm,
    PreconditionError,
    TermWitness,
    aut_pairs_without_common_fixed_point,
    automorphisms,
    closure_algebra,
    compose_s3,
    compose_s4,
    compose_t,
    divisor_cyclic,
    exists_cyclic_term,
    exists_symmetric_term,
    fixed_point_free_auts,
    free_algebra,
    is_automorphism,
    load_algebra,
    product_cyclic,
    subpower_closure,
    t_identities,
)
from polysym.core import (
    EXHAUSTIVE,
    IdentitySpec,
    Operation,
    Policy,
    SplitMix64,
    all_tuples,
    is_polymorphism,
    satisfies_identity,
)
from polysym.kwitness import default_witness, kop


def alg(d, **fns):
    ops = {}
    for name, (arity, fn) in fns.items():
        ops[name] = Operation.from_function(arity, d, fn, name=name)
    return FiniteAlgebra(d, ops)


XOR = alg(2, m=(3, lambda x, y, z: x ^ y ^ z))
MIN = alg(2, min=(2, min))
AFFINE3 = alg(3, m=(3, lambda x, y, z: (x - y + z) % 3))


def op_min(n, d=2):
    return Operation.from_function(n, d, lambda *a: min(a))


def op_sum(n, d=3):
    return Operation.from_function(n, d, lambda *a: sum(a) % d)


# loading ---------------------------------------------------------------------

def test_load_algebra():
    doc = {"universe": 2, "ops": {"m": {"arity": 3, "values": [x ^ y ^ z for x in (0, 1) for y in (0, 1) for z in (0, 1)]}}}
    A = load_algebra(json.dumps(doc))
    assert A.ops["m"](1, 1, 0) == 0
    assert load_algebra(json.dumps(AFFINE3.to_dict())).ops["m"](0, 1, 0) == 2


def test_load_algebra_rejects_short_table():
    doc = {"universe": 2, "ops": {"m": {"arity": 3, "values": [0] * 7}}}
    with pytest.raises(AlgebraError):
        load_algebra(json.dumps(doc))


# automorphisms ---------------------------------------------------------------

def test_automorphisms():
    assert [p.to_list() for p in automorphisms(AFFINE3)] == [list(p) for p in itertools.permutations(range(3))]
    assert [p.to_list() for p in automorphisms(XOR)] == [[0, 1], [1, 0]]
    assert [p.to_list() for p in automorphisms(MIN)] == [[0, 1]]


def test_fixed_point_free():
    assert sorted(p.to_list() for p in fixed_point_free_auts(AFFINE3)) == [[1, 2, 0], [2, 0, 1]]
    assert fixed_point_free_auts(MIN) == []
    assert [p.to_list() for p in fixed_point_free_auts(XOR)] == [[1, 0]]


def test_aut_pairs():
    pairs = aut_pairs_without_common_fixed_point(XOR)
    # the swap is fixed-point-free, so it pairs with the identity as well as with itself
    assert [(p.first.to_list(), p.second.to_list(), p.order_two) for p in pairs] == [
        ([1, 0], [0, 1], True), ([1, 0], [1, 0], True)]
    assert aut_pairs_without_common_fixed_point(MIN) == []
    got = {(tuple(p.first.to_list()), tuple(p.second.to_list())) for p in aut_pairs_without_common_fixed_point(AFFINE3)}
    assert ((1, 2, 0), (1, 2, 0)) in got
    for p in aut_pairs_without_common_fixed_point(AFFINE3):
        assert not p.first.fixed_points() & p.second.fixed_points()


def test_automorphism_cap():
    big = alg(9, f=(1, lambda x: x))
    with pytest.raises(CapExceeded):
        automorphisms(big)
    assert len(automorphisms(alg(4, f=(1, lambda x: x)), cap_universe=4)) == 24


# closure ---------------------------------------------------------------------

def projections(d, n):
    J = all_tuples(d, n)
    return [J[:, i] for i in range(n)]


def test_closure_examples():
    cl = subpower_closure(XOR, projections(2, 2))
    assert [list(v) for v in cl] == [[0, 0, 1, 1], [0, 1, 0, 1]]
    cl3 = subpower_closure(XOR, projections(2, 3))
    p1, p2, p3 = projections(2, 3)
    assert len(cl3) == 4 and tuple(p1 ^ p2 ^ p3) in cl3
    clm = subpower_closure(MIN, projections(2, 2))
    assert set(clm) == {(0, 0, 1, 1), (0, 1, 0, 1), (0, 0, 0, 1)}


@pytest.mark.parametrize("fn, n", [
    (lambda x, y: (x * y + 1) % 3, 1),
    (lambda x, y: (x + 2 * y) % 3, 2),
    (lambda x, y: max(x, y) if x != 2 else y, 2),
])
def test_closure_is_closed_and_minimal(fn, n):
    A = alg(3, f=(2, fn))
    gens = projections(3, n)
    cl = subpower_closure(A, gens)
    members = set(cl)
    f = A.ops["f"]
    for u, v in itertools.product(cl.vectors, repeat=2):
        assert tuple(int(f(a, b)) for a, b in zip(u, v)) in members
    again = subpower_closure(A, gens)
    assert np.array_equal(again.vectors, cl.vectors)


def test_closure_cap():
    A = alg(3, f=(2, lambda x, y: (x * y + 1) % 3))
    with pytest.raises(CapExceeded):
        free_algebra(A, 3, cap=5)


# term existence --------------------------------------------------------------

def test_xor_symmetric():
    res = exists_symmetric_term(XOR, 3)
    assert isinstance(res, TermWitness)
    assert res.operation.table.tolist() == [x ^ y ^ z for x in (0, 1) for y in (0, 1) for z in (0, 1)]
    res = exists_symmetric_term(XOR, 2)
    assert isinstance(res, NoTerm)
    assert res.pair.first.to_list() == [1, 0]
    assert res.pair.order_two and not res.pair.has_common_fixed_point


def test_no_branch_permutations_are_automorphisms():
    res = exists_symmetric_term(XOR, 2)
    B = closure_algebra(XOR, res.closure)
    assert is_automorphism(B, res.pair.first) and is_automorphism(B, res.pair.second)
    res = exists_cyclic_term(XOR, 2)
    assert isinstance(res, NoTerm) and res.automorphism.to_list() == [1, 0]
    assert not res.automorphism.fixed_points()


def test_min_terms():
    res = exists_symmetric_term(MIN, 2)
    assert isinstance(res, TermWitness) and res.operation.table.tolist() == [0, 0, 0, 1]
    res = exists_cyclic_term(MIN, 4)
    assert isinstance(res, TermWitness)
    assert res.operation.table.tolist() == op_min(4).table.tolist()
    assert isinstance(exists_cyclic_term(XOR, 3), TermWitness)


def test_free_algebra_pair_matches_f_times_f():
    # A1, A2 generated inside F x F for XOR with n = 3; their graphs must be the coordinate actions
    J, cl = free_algebra(XOR, 3)
    x = [cl.vectors[i] for i in range(3)]
    index = {tuple(int(a) for a in v): i for i, v in enumerate(cl.vectors)}

    def generated_graph(pairs):
        sub = subpower_closure(XOR, [np.concatenate([x[a], x[b]]) for a, b in pairs])
        size = len(J)
        return {(index[tuple(v[:size])], index[tuple(v[size:])]) for v in sub}

    def coordinate_graph(order):
        pos = [int(np.flatnonzero((J == J[k][order]).all(axis=1))[0]) for k in range(len(J))]
        return {(i, index[tuple(int(v[p]) for p in pos)]) for i, v in enumerate(cl.vectors)}

    assert generated_graph([(0, 1), (1, 0), (2, 2)]) == coordinate_graph([1, 0, 2])
    assert generated_graph([(0, 1), (1, 2), (2, 0)]) == coordinate_graph([1, 2, 0])


TWO_ELEMENT = {
    "xor": XOR,
    "min": MIN,
    "majority": alg(2, maj=(3, lambda x, y, z: int(x + y + z >= 2))),
    "implication": alg(2, imp=(2, lambda x, y: int(not x or y))),
    "negation": alg(2, neg=(1, lambda x: 1 - x)),
    "projection": alg(2, p=(2, lambda x, y: x)),
}


@pytest.mark.parametrize("name", sorted(TWO_ELEMENT))
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["symmetric", "cyclic"])
def test_term_existence_matches_brute_force(name, n, kind):
    A = TWO_ELEMENT[name]
    T = all_tables(2, n)
    _, cl = free_algebra(A, n)
    terms = {tuple(int(v) for v in row) for row in T[identity_mask(T, 2, n, kind)]} & set(cl)
    find = exists_symmetric_term if kind == "symmetric" else exists_cyclic_term
    res = find(A, n)
    assert isinstance(res, TermWitness) == bool(terms)
    if isinstance(res, TermWitness):
        assert tuple(res.operation.table.tolist()) in terms
        assert satisfies_identity(res.operation, IdentitySpec(kind, n), EXHAUSTIVE).passed


# composition rules ----------------------------------------------------------

def test_compose_s3_on_z3():
    s2 = Operation.from_function(2, 3, lambda x, y: (-x - y) % 3)
    s3 = compose_s3(s2, op_sum(3))
    assert s3.table.tolist() == op_sum(3).table.tolist()
    assert satisfies_identity(s3, IdentitySpec("symmetric", 3), EXHAUSTIVE).passed


def test_compose_min_chain():
    s3 = compose_s3(op_min(2), op_min(3))
    t = compose_t(op_min(2))
    assert t_identities(t).passed
    s4 = compose_s4(s3, t)
    assert s3.table.tolist() == op_min(3).table.tolist()
    assert s4.table.tolist() == op_min(4).table.tolist()


def test_compose_rejects_bad_inputs():
    with pytest.raises(PreconditionError):
        compose_s3(Operation.projection(2, 2, 0), op_min(3))
    with pytest.raises(PreconditionError):
        divisor_cyclic(Operation.projection(4, 2, 0), 2)
    with pytest.raises(ValueError):
        divisor_cyclic(op_min(6), 4)


@pytest.mark.parametrize("ops", [
    [Operation.from_function(2, 3, lambda x, y: (2 * x + 2 * y) % 3), op_sum(3, 3)],
    [Operation.from_function(2, 4, lambda x, y: x | y), Operation.from_function(3, 4, lambda x, y, z: x | y | z)],
])
def test_s3_s4_symmetric_under_all_permutations(ops):
    s2, c3 = ops
    s3 = compose_s3(s2, c3)
    s4 = compose_s4(s3, compose_t(s2))
    for op in (s3, s4):
        X = all_tuples(op.domain, op.arity)
        base = op.evaluate(X)
        for perm in itertools.permutations(range(op.arity)):
            assert np.array_equal(op.evaluate(X[:, list(perm)]), base)


def test_divisor_examples():
    g = divisor_cyclic(op_min(6), 3)
    assert g.materialize().table.tolist() == op_min(3).table.tolist()
    assert divisor_cyclic(op_min(4), 2).materialize().table.tolist() == op_min(2).table.tolist()


def test_product_examples():
    assert product_cyclic(op_min(2), op_min(2)).materialize().table.tolist() == op_min(4).table.tolist()
    nine = product_cyclic(op_sum(3), op_sum(3)).materialize()
    assert nine.table.tolist() == op_sum(9).table.tolist()


def test_k_divisor_and_product():
    W = default_witness()
    K = W.K.structure
    g = divisor_cyclic(kop(20), 5, check=False)
    assert satisfies_identity(g, IdentitySpec("cyclic", 5), EXHAUSTIVE).passed
    assert is_polymorphism(g, K, EXHAUSTIVE).passed
    rows = W.sample_tuples(SplitMix64(5), 6, 20000)
    # c'6 has outer c'3 over columns of c'2
    assert np.array_equal(product_cyclic(kop(3), kop(2)).evaluate(rows), kop(6).evaluate(rows))
    six = product_cyclic(kop(2), kop(3))
    policy = Policy(samples=200_000, seed=42)
    assert satisfies_identity(six, IdentitySpec("cyclic", 6), policy).passed
    assert is_polymorphism(six, K, policy).passed
    assert W.verify_kop(6, policy).passed
