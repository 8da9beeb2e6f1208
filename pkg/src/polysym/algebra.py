"""Finite algebras: automorphisms, subpower closure and term existence.

The free n-generated algebra of var(A) is realized as the closure of the n
projection vectors inside A^(A^n).  A closure element is the value table of
an n-ary term operation, indexed in row-major order of A^n.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .core.identity import IdentitySpec
from .core.operation import Operation, all_tuples, encode
from .core.structure import Permutation
from .core.verify import EXHAUSTIVE, Policy, VerificationReport, satisfies_identity

DEFAULT_CAP_UNIVERSE = 8
DEFAULT_CAP_CLOSURE = 1_000_000


class AlgebraError(ValueError):
    pass


class PreconditionError(ValueError):
    """An input operation failed the identity check a composition relies on."""

    def __init__(self, message: str, report: VerificationReport | None = None):
        super().__init__(message)
        self.report = report


class CapExceeded(RuntimeError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    universe_size: int
    ops: dict

    def __post_init__(self):
        for name, op in self.ops.items():
            if op.domain != self.universe_size:
                raise AlgebraError(f"ops.{name}: domain {op.domain} differs from universe {self.universe_size}")
            if op.table is None:
                raise AlgebraError(f"ops.{name}: basic operations must be tables")

    def to_dict(self) -> dict:
        return {"universe": self.universe_size,
                "ops": {name: {"arity": op.arity, "values": [int(v) for v in op.table]}
                        for name, op in self.ops.items()}}


def load_algebra(text: str) -> FiniteAlgebra:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlgebraError(f"line {exc.lineno} column {exc.colno}: malformed JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("universe"), int) or doc["universe"] < 1:
        raise AlgebraError("universe: expected a positive integer")
    d = doc["universe"]
    ops = doc.get("ops")
    if not isinstance(ops, dict):
        raise AlgebraError("ops: expected an object")
    parsed = {}
    for name, body in ops.items():
        if not isinstance(body, dict) or not isinstance(body.get("arity"), int) or body["arity"] < 1:
            raise AlgebraError(f"ops.{name}.arity: expected a positive integer")
        values = body.get("values")
        if not isinstance(values, list):
            raise AlgebraError(f"ops.{name}.values: expected a list")
        try:
            parsed[name] = Operation.from_dict({"arity": body["arity"], "domain": d, "values": values}, name=name)
        except ValueError as exc:
            raise AlgebraError(f"ops.{name}: {exc}") from None
    return FiniteAlgebra(d, parsed)


# automorphisms -------------------------------------------------------------

def is_automorphism(A: FiniteAlgebra, p) -> bool:
    p = np.asarray(p.image if isinstance(p, Permutation) else p, dtype=np.int64)
    for op in A.ops.values():
        rows = all_tuples(A.universe_size, op.arity)
        if not np.array_equal(op.table[encode(p[rows], A.universe_size)], p[op.table]):
            return False
    return True


def automorphisms(A: FiniteAlgebra, cap_universe: int = DEFAULT_CAP_UNIVERSE) -> list[Permutation]:
    """All automorphisms in ascending lexicographic order of their image lists."""
    d = A.universe_size
    if d > cap_universe:
        raise CapExceeded(f"universe size {d} exceeds the automorphism cap {cap_universe}")
    pre = [(all_tuples(d, op.arity), op.table) for op in A.ops.values()]
    out = []
    for perm in itertools.permutations(range(d)):
        p = np.array(perm, dtype=np.int64)
        if all(np.array_equal(tab[encode(p[rows], d)], p[tab]) for rows, tab in pre):
            out.append(Permutation(perm))
    return out


def fixed_point_free_auts(A: FiniteAlgebra, cap_universe: int = DEFAULT_CAP_UNIVERSE) -> list[Permutation]:
    return [p for p in automorphisms(A, cap_universe) if not p.fixed_points()]


@dataclass(frozen=True)
class AutPair:
    first: Permutation
    second: Permutation
    order_two: bool

    def to_dict(self) -> dict:
        return {"first": self.first.to_list(), "second": self.second.to_list(), "order_two": self.order_two}


def aut_pairs_without_common_fixed_point(A: FiniteAlgebra,
                                         cap_universe: int = DEFAULT_CAP_UNIVERSE) -> list[AutPair]:
    """Unordered pairs (p, q) with Fix(p) and Fix(q) disjoint; (p, p) when p alone is fixed-point-free.

    When exactly one of the two has order two it is listed first.
    """
    auts = automorphisms(A, cap_universe)
    out = []
    for i, p in enumerate(auts):
        for q in auts[i:]:
            if p.fixed_points() & q.fixed_points():
                continue
            if q.order() == 2 and p.order() != 2:
                p_, q_ = q, p
            else:
                p_, q_ = p, q
            out.append(AutPair(p_, q_, p_.order() == 2))
    return out


# subpower closure ----------------------------------------------------------

@dataclass
class Closure:
    vectors: np.ndarray
    complete: bool = True
    _index: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return (tuple(int(x) for x in v) for v in self.vectors)

    def index_of(self, vector) -> int:
        if not self._index:
            self._index = {v.tobytes(): i for i, v in enumerate(self.vectors)}
        return self._index[np.asarray(vector, dtype=np.int64).tobytes()]

    def __contains__(self, vector) -> bool:
        try:
            self.index_of(vector)
        except KeyError:
            return False
        return True


def subpower_closure(A: FiniteAlgebra, generators, cap: int = DEFAULT_CAP_CLOSURE) -> Closure:
    """Least set of vectors containing ``generators`` and closed coordinatewise.

    Breadth-first: round i applies every operation (in declaration order) to
    every argument tuple (lexicographic) that uses an element found in round
    i-1; new vectors are appended in discovery order.
    """
    d = A.universe_size
    gens = [np.asarray(g, dtype=np.int64) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    length = gens[0].shape[0]
    vecs: list[np.ndarray] = []
    index: dict[bytes, int] = {}

    def add(v) -> bool:
        key = v.tobytes()
        if key in index:
            return True
        index[key] = len(vecs)
        vecs.append(v)
        return len(vecs) <= cap

    for g in gens:
        if g.shape != (length,) or g.min() < 0 or g.max() >= d:
            raise ValueError("generators must be vectors over the universe of one length")
        add(g)
    old = 0
    while old < len(vecs):
        new_end = len(vecs)
        V = np.stack(vecs[:new_end])
        for op in A.ops.values():
            k = op.arity
            total = new_end**k
            for start in range(0, total, 1 << 14):
                combos = all_tuples(new_end, k, start, start + (1 << 14))
                combos = combos[(combos >= old).any(axis=1)]
                if not len(combos):
                    continue
                idx = np.zeros((len(combos), length), dtype=np.int64)
                for i in range(k):
                    idx = idx * d + V[combos[:, i]]
                for row in op.table[idx].astype(np.int64):
                    if not add(row):
                        return Closure(np.stack(vecs), complete=False, _index=index)
        old = new_end
    return Closure(np.stack(vecs), complete=True, _index=index)


def closure_algebra(A: FiniteAlgebra, cl: Closure) -> FiniteAlgebra:
    """The closure as an algebra on indices 0..len(cl)-1."""
    N = len(cl)
    ops = {}
    for name, op in A.ops.items():
        combos = all_tuples(N, op.arity)
        idx = np.zeros((len(combos), cl.vectors.shape[1]), dtype=np.int64)
        for i in range(op.arity):
            idx = idx * A.universe_size + cl.vectors[combos[:, i]]
        res = op.table[idx].astype(np.int64)
        ops[name] = Operation(op.arity, N, table=np.array([cl.index_of(r) for r in res]), name=name)
    return FiniteAlgebra(N, ops)


# term existence ------------------------------------------------------------

@dataclass(frozen=True)
class AutPairWitness:
    first: Permutation
    second: Permutation
    has_common_fixed_point: bool
    order_two: bool

    def to_dict(self) -> dict:
        return {"first": self.first.to_list(), "second": self.second.to_list(),
                "has_common_fixed_point": self.has_common_fixed_point, "order_two": self.order_two}


@dataclass(frozen=True, eq=False)
class TermWitness:
    operation: Operation
    closure: Closure
    position: int


@dataclass(frozen=True, eq=False)
class NoTerm:
    """No term of the requested kind; the free algebra's automorphism(s) prove it.

    ``pair`` is set for the symmetric question, ``automorphism`` for the cyclic one.
    """

    closure: Closure
    pair: AutPairWitness | None = None
    automorphism: Permutation | None = None


def free_algebra(A: FiniteAlgebra, n: int, cap: int = DEFAULT_CAP_CLOSURE) -> tuple[np.ndarray, Closure]:
    """(A^n in row-major order, closure of the n projections)."""
    if n < 1:
        raise ValueError("arity must be positive")
    d = A.universe_size
    if d**n > cap:
        raise CapExceeded(f"{d}^{n} coordinates exceeds the closure cap {cap}")
    J = all_tuples(d, n)
    cl = subpower_closure(A, [J[:, i] for i in range(n)], cap)
    if not cl.complete:
        raise CapExceeded(f"closure exceeded {cap} elements", partial=cl)
    return J, cl


def _coordinate_action(J: np.ndarray, cl: Closure, order: list[int], d: int) -> Permutation:
    idx = encode(J[:, order], d)
    return Permutation(tuple(cl.index_of(v[idx]) for v in cl.vectors))


def _first_invariant(J, cl, kind, n, d):
    canon = encode(IdentitySpec(kind, n).canonical_batch(J), d)
    good = np.flatnonzero((cl.vectors[:, canon] == cl.vectors).all(axis=1))
    return int(good[0]) if len(good) else None


def exists_symmetric_term(A: FiniteAlgebra, n: int, cap: int = DEFAULT_CAP_CLOSURE) -> TermWitness | NoTerm:
    """First symmetric term in closure order, or the swap/shift automorphism pair of the free algebra."""
    d = A.universe_size
    J, cl = free_algebra(A, n, cap)
    pos = _first_invariant(J, cl, "symmetric", n, d)
    if pos is not None:
        return TermWitness(Operation(n, d, table=cl.vectors[pos], name=f"symmetric{n}"), cl, pos)
    if n < 2:
        raise ValueError("every unary term is symmetric")
    swap = [1, 0] + list(range(2, n))
    shift = list(range(1, n)) + [0]
    first = _coordinate_action(J, cl, swap, d)
    second = _coordinate_action(J, cl, shift, d)
    common = bool(first.fixed_points() & second.fixed_points())
    return NoTerm(cl, pair=AutPairWitness(first, second, common, first.order() == 2))


def exists_cyclic_term(A: FiniteAlgebra, n: int, cap: int = DEFAULT_CAP_CLOSURE) -> TermWitness | NoTerm:
    """First cyclic term in closure order, or the fixed-point-free shift automorphism."""
    d = A.universe_size
    J, cl = free_algebra(A, n, cap)
    pos = _first_invariant(J, cl, "cyclic", n, d)
    if pos is not None:
        return TermWitness(Operation(n, d, table=cl.vectors[pos], name=f"cyclic{n}"), cl, pos)
    shift = _coordinate_action(J, cl, list(range(1, n)) + [0], d)
    return NoTerm(cl, automorphism=shift)


# composition rules --------------------------------------------------------

def _require(op: Operation, kind: str, policy: Policy, what: str):
    report = satisfies_identity(op, IdentitySpec(kind, op.arity), policy)
    if not report.passed:
        raise PreconditionError(f"{what} is not {kind}: {report.violations[0]}", report)


def _tabulate(arity: int, d: int, fn, name: str) -> Operation:
    X = all_tuples(d, arity)
    return Operation(arity, d, table=fn(X), name=name)


def compose_s3(s2: Operation, c3: Operation, check: bool = True) -> Operation:
    """s3(x,y,z) = s2(c3(x,y,z), c3(y,x,z))."""
    if s2.arity != 2 or c3.arity != 3 or s2.domain != c3.domain:
        raise ValueError("need a binary and a ternary operation on one domain")
    if check:
        _require(s2, "symmetric", EXHAUSTIVE, "s2")
        _require(c3, "cyclic", EXHAUSTIVE, "c3")
    return _tabulate(3, s2.domain, lambda X: s2.evaluate(np.stack(
        [c3.evaluate(X), c3.evaluate(X[:, [1, 0, 2]])], axis=1)), "s3")


def compose_t(s2: Operation, check: bool = True) -> Operation:
    """t(x,y,z,w) = s2(s2(x,y), s2(z,w))."""
    if s2.arity != 2:
        raise ValueError("need a binary operation")
    if check:
        _require(s2, "symmetric", EXHAUSTIVE, "s2")
    return _tabulate(4, s2.domain, lambda X: s2.evaluate(np.stack(
        [s2.evaluate(X[:, :2]), s2.evaluate(X[:, 2:])], axis=1)), "t")


# Argument orders under which t is invariant: the group generated by
# x<->y, z<->w and (x,y)<->(z,w).
T_INVARIANCES = ((1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2), (2, 3, 0, 1),
                 (2, 3, 1, 0), (3, 2, 0, 1), (3, 2, 1, 0))


def t_identities(t: Operation) -> VerificationReport:
    """Exhaustive check of t(x,y,z,w) against its seven rearrangements."""
    report = VerificationReport(mode="exhaustive")
    X = all_tuples(t.domain, 4)
    base = t.evaluate(X)
    for order in T_INVARIANCES:
        other = t.evaluate(X[:, list(order)])
        report.add_checks(str(order), len(X))
        for i in np.flatnonzero(other != base):
            report.record({"inputs": [X[i].tolist(), list(order)], "expected": int(base[i]), "got": int(other[i])})
    return report


def compose_s4(s3: Operation, t: Operation, check: bool = True) -> Operation:
    """s4(x,y,z,w) = s3(t(x,y,z,w), t(x,w,y,z), t(x,z,y,w))."""
    if s3.arity != 3 or t.arity != 4 or s3.domain != t.domain:
        raise ValueError("need a ternary and a 4-ary operation on one domain")
    if check:
        _require(s3, "symmetric", EXHAUSTIVE, "s3")
        rep = t_identities(t)
        if not rep.passed:
            raise PreconditionError(f"t violates its identities: {rep.violations[0]}", rep)
    return _tabulate(4, s3.domain, lambda X: s3.evaluate(np.stack(
        [t.evaluate(X), t.evaluate(X[:, [0, 3, 1, 2]]), t.evaluate(X[:, [0, 2, 1, 3]])], axis=1)), "s4")


def divisor_cyclic(c: Operation, k: int, policy: Policy = Policy(), check: bool = True) -> Operation:
    """g(x_1..x_k) = c(x_1..x_k, x_1..x_k, ...) with the block repeated n/k times."""
    n = c.arity
    if k <= 1 or n % k:
        raise ValueError(f"{k} is not a divisor of {n} greater than 1")
    if check:
        _require(c, "cyclic", policy, "input")
    reps = n // k
    return Operation.from_batch(k, c.domain, lambda X: c.evaluate(np.tile(np.asarray(X), (1, reps))),
                                name=f"{c.name or 'c'}|{k}")


def product_cyclic(cm: Operation, cq: Operation, policy: Policy = Policy(), check: bool = True) -> Operation:
    """Strided grid composition of arity m*q.

    Argument i (0-based) goes to column i mod m; each column of q arguments
    is combined by ``cq`` and the m column values by ``cm``.  A unit rotation
    shifts the columns cyclically and rotates one column internally.
    """
    if cm.domain != cq.domain:
        raise ValueError("operations must share a domain")
    if check:
        _require(cm, "cyclic", policy, "outer operation")
        _require(cq, "cyclic", policy, "inner operation")
    m, q = cm.arity, cq.arity

    def batch(X):
        X = np.asarray(X, dtype=np.int64)
        N = X.shape[0]
        cols = np.concatenate([X[:, i::m] for i in range(m)], axis=0)
        inner = cq.evaluate(cols).reshape(m, N).T
        return cm.evaluate(inner)

    return Operation.from_batch(m * q, cm.domain, batch, name=f"{cm.name or 'c'}x{cq.name or 'c'}")
