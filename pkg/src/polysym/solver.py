"""Polymorphism search on the indicator quotient of a direct power.

An n-ary polymorphism of S satisfying an identity is a homomorphism from
S^n, with the identity's tuple orbits glued, back to S.  The quotient's
vertices ("classes") are the canonical tuples; each relation tuple of the
quotient becomes one constraint.  Domains are bitsets over the universe.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .core.identity import IdentitySpec
from .core.operation import Operation, all_tuples, encode
from .core.structure import RelStructure, as_permutation
from .core.verify import EXHAUSTIVE, is_polymorphism, satisfies_identity

MAX_POINTS = 20_000_000
FORCED = "<forced>"


class SolverError(RuntimeError):
    """A witness failed re-verification: a bug, never a user error."""


def _bits(v: int):
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def _mask(values) -> int:
    m = 0
    for v in values:
        m |= 1 << int(v)
    return m


class _Table:
    """Allowed value tuples over a constraint's distinct classes, shared by pattern."""

    def __init__(self, allowed):
        self.allowed = tuple(sorted(allowed))
        self.unary_mask = _mask(t[0] for t in self.allowed) if self.allowed and len(self.allowed[0]) == 1 else 0
        self.succ: dict[int, int] = {}
        self.pred: dict[int, int] = {}
        for t in self.allowed:
            if len(t) == 2:
                a, b = t
                self.succ[a] = self.succ.get(a, 0) | (1 << b)
                self.pred[b] = self.pred.get(b, 0) | (1 << a)


@dataclass(frozen=True)
class Constraint:
    """Tuples of ``relation`` allowed on the distinct classes ``scope``."""

    relation: str
    scope: tuple[int, ...]
    raw_scope: tuple[int, ...]
    table: _Table = field(repr=False, compare=False)

    @property
    def allowed(self) -> tuple[tuple[int, ...], ...]:
        return self.table.allowed

    def revise(self, dom: list[int]) -> list[tuple[int, int, int]]:
        """Narrow the domains in place; return (class, old, new) per change."""
        scope = self.scope
        changes = []
        if len(scope) == 1:
            x = scope[0]
            new = dom[x] & self.table.unary_mask
            if new != dom[x]:
                changes.append((x, dom[x], new))
                dom[x] = new
            return changes
        if len(scope) == 2:
            x, y = scope
            dx, dy = dom[x], dom[y]
            succ, pred = self.table.succ, self.table.pred
            nx = 0
            for a in _bits(dx):
                if succ.get(a, 0) & dy:
                    nx |= 1 << a
            ny = 0
            for b in _bits(dy):
                if pred.get(b, 0) & nx:
                    ny |= 1 << b
            if nx != dx:
                changes.append((x, dx, nx))
                dom[x] = nx
            if ny != dy:
                changes.append((y, dy, ny))
                dom[y] = ny
            return changes
        support = [0] * len(scope)
        for t in self.table.allowed:
            if all(dom[v] >> t[i] & 1 for i, v in enumerate(scope)):
                for i, a in enumerate(t):
                    support[i] |= 1 << a
        for i, v in enumerate(scope):
            if support[i] != dom[v]:
                changes.append((v, dom[v], support[i]))
                dom[v] = support[i]
        return changes


def _pattern_table(tuples, pattern: tuple[int, ...], cache: dict) -> _Table:
    """Project relation tuples onto the equality pattern of a raw scope.

    ``pattern[i]`` is the first position holding the same class as position i.
    """
    if pattern not in cache:
        keep = sorted(set(pattern))
        allowed = {tuple(t[i] for i in keep) for t in tuples
                   if all(t[i] == t[j] for i, j in enumerate(pattern))}
        cache[pattern] = _Table(allowed)
    return cache[pattern]


def _make_constraint(relation: str, raw: tuple[int, ...], tuples, cache: dict) -> Constraint:
    pattern = tuple(raw.index(v) for v in raw)
    scope = tuple(dict.fromkeys(raw))
    return Constraint(relation, scope, raw, _pattern_table(tuples, pattern, cache))


@dataclass(frozen=True)
class IndicatorInstance:
    structure: RelStructure
    identity: IdentitySpec
    classes: np.ndarray
    quotient_relations: dict
    constraints: tuple[Constraint, ...]
    domains: tuple[int, ...]
    forced: dict
    conflict: int | None = None

    @property
    def arity(self) -> int:
        return self.identity.arity

    @property
    def universe_size(self) -> int:
        return self.structure.universe_size

    def __len__(self):
        return len(self.classes)

    def class_tuple(self, cid: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.classes[cid])

    @cached_property
    def class_index(self) -> dict:
        return {self.class_tuple(i): i for i in range(len(self.classes))}

    @cached_property
    def _keys(self):
        d, n = self.universe_size, self.arity
        if d**n < 2**62:
            return encode(self.classes, d)
        return None

    def lookup(self, canon_rows: np.ndarray) -> np.ndarray:
        """Class ids of rows that are already canonical."""
        canon_rows = np.asarray(canon_rows, dtype=np.int64)
        keys = self._keys
        if keys is None:
            idx = self.class_index
            return np.array([idx[tuple(map(int, r))] for r in canon_rows], dtype=np.int64)
        k = encode(canon_rows, self.universe_size)
        pos = np.searchsorted(keys, k)
        if np.any(pos >= len(keys)) or np.any(keys[np.minimum(pos, len(keys) - 1)] != k):
            raise KeyError("row is not a canonical class")
        return pos

    def class_of(self, t) -> int:
        return self.class_index[self.identity.canonical(t)]

    @cached_property
    def incident(self) -> list[list[int]]:
        inc: list[list[int]] = [[] for _ in range(len(self.classes))]
        for ci, con in enumerate(self.constraints):
            if len(con.scope) > 1:
                for v in con.scope:
                    inc[v].append(ci)
        return inc


def enumerate_classes(d: int, spec: IdentitySpec) -> np.ndarray:
    """All canonical n-tuples, lexicographically sorted."""
    n = spec.arity
    if spec.kind == "symmetric":
        rows = list(itertools.combinations_with_replacement(range(d), n))
    elif spec.kind in ("totally-symmetric", "tsi"):
        rows = []
        for k in range(1, min(n, d) + 1):
            for c in itertools.combinations(range(d), k):
                rows.append(c + (c[-1],) * (n - k))
        rows.sort()
    else:
        if d**n > MAX_POINTS:
            raise ValueError(f"{d}^{n} tuples is too many to enumerate classes")
        canon = spec.canonical_batch(all_tuples(d, n))
        return np.unique(canon, axis=0)
    return np.array(rows, dtype=np.int64).reshape(len(rows), n)


def build_indicator(S: RelStructure, n: int, spec: IdentitySpec) -> IndicatorInstance:
    """Quotient of S^n by the identity's orbit rule, with forced values installed."""
    if spec.arity != n:
        raise ValueError(f"identity arity {spec.arity} does not match {n}")
    d = S.universe_size
    classes = enumerate_classes(d, spec)
    shell = IndicatorInstance(S, spec, classes, {}, (), (), {})
    quotient = {}
    constraints = []
    for rel in S.relations:
        perm = as_permutation(rel, d)
        if perm is not None:
            nbr = shell.lookup(spec.canonical_batch(perm.array[classes]))
            scopes = set(zip(range(len(nbr)), nbr.tolist()))
        else:
            scopes = set()
            m = len(rel)
            if m:
                total = m**n
                if total > MAX_POINTS:
                    raise ValueError(f"{m}^{n} tuple selections of {rel.name} is too many")
                R = rel.array
                for start in range(0, total, 1 << 16):
                    sel = all_tuples(m, n, start, start + (1 << 16))
                    ids = np.stack([shell.lookup(spec.canonical_batch(R[sel, j]))
                                    for j in range(rel.arity)], axis=1)
                    scopes.update(map(tuple, np.unique(ids, axis=0).tolist()))
        quotient[rel.name] = frozenset(scopes)
        tuples = list(rel.tuples)
        cache: dict = {}
        for raw in sorted(scopes):
            constraints.append(_make_constraint(rel.name, raw, tuples, cache))
    # unary constraints first, by class then relation order
    order = {rel.name: i for i, rel in enumerate(S.relations)}
    constraints.sort(key=lambda c: (len(c.scope) > 1, c.scope, order[c.relation]))

    full = (1 << d) - 1
    domains = [full] * len(classes)
    forced: dict[int, int] = {}
    conflict = None
    for t, v in spec.forced_values(d):
        cid = int(shell.lookup(np.array([t]))[0])
        if cid in forced and forced[cid] != v:
            if conflict is None:
                conflict = cid
            domains[cid] = 0
            continue
        forced[cid] = v
        if conflict != cid:
            domains[cid] = 1 << v
    return IndicatorInstance(S, spec, classes, quotient, tuple(constraints), tuple(domains),
                             forced, conflict)


# propagation ---------------------------------------------------------------

@dataclass
class EmptyDomain:
    class_id: int
    trail: list = field(default_factory=list)


def _propagate(ind: IndicatorInstance, dom: list[int], start, events: list | None) -> int | None:
    cons = ind.constraints
    inc = ind.incident
    queue = deque(start)
    inq = bytearray(len(cons))
    for ci in queue:
        inq[ci] = 1
    while queue:
        ci = queue.popleft()
        inq[ci] = 0
        for var, old, new in cons[ci].revise(dom):
            if events is not None:
                events.append((var, ci, old, new))
            if new == 0:
                return var
            for cj in inc[var]:
                if cj != ci and not inq[cj]:
                    inq[cj] = 1
                    queue.append(cj)
    return None


def _root(ind: IndicatorInstance, dom: list[int], events: list | None) -> int | None:
    pending = []
    for ci, con in enumerate(ind.constraints):
        if len(con.scope) == 1:
            for var, old, new in con.revise(dom):
                if events is not None:
                    events.append((var, ci, old, new))
                if new == 0:
                    return var
        else:
            pending.append(ci)
    return _propagate(ind, dom, pending, events)


def _trail(ind: IndicatorInstance, cid: int, events) -> list[dict]:
    out = []
    for var, ci, old, new in events:
        if var != cid:
            continue
        con = ind.constraints[ci]
        out.append({
            "relation": con.relation,
            "scope": [list(ind.class_tuple(v)) for v in con.raw_scope],
            "removed": sorted(_bits(old & ~new)),
            "kept": sorted(_bits(new)),
        })
    return out


def _conflict_trail(ind: IndicatorInstance) -> list[dict]:
    cid = ind.conflict
    pins = [v for t, v in ind.identity.forced_values(ind.universe_size)
            if ind.class_of(t) == cid]
    return [{"relation": FORCED, "scope": [list(ind.class_tuple(cid))],
             "removed": [], "kept": [], "forced": sorted(set(pins))}]


def arc_consistency(ind: IndicatorInstance) -> IndicatorInstance | EmptyDomain:
    """Delete unsupported values to a fixpoint, or report the first emptied class."""
    if ind.conflict is not None:
        return EmptyDomain(ind.conflict, _conflict_trail(ind))
    dom = list(ind.domains)
    events: list = []
    bad = _root(ind, dom, events)
    if bad is not None:
        return EmptyDomain(bad, _trail(ind, bad, events))
    return replace(ind, domains=tuple(dom))


# search --------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    assignment: tuple[int, ...]
    nodes: int = 0


@dataclass(frozen=True)
class Unsat:
    class_id: int
    class_tuple: tuple[int, ...]
    trail: tuple = ()
    reason: str = "propagation"
    nodes: int = 0

    def certificate(self) -> dict:
        return {"class": list(self.class_tuple), "reason": self.reason, "trail": list(self.trail)}


def _choose(dom: list[int]) -> int | None:
    best, best_count = None, 1 << 30
    for i, v in enumerate(dom):
        c = v.bit_count()
        if 1 < c < best_count:
            best, best_count = i, c
            if c == 2:
                break
    return best


def solve(ind: IndicatorInstance) -> Witness | Unsat:
    """Backtracking with full propagation after each choice.

    Branch on the smallest domain (ties: lowest class id), values ascending.
    """
    if ind.conflict is not None:
        cid = ind.conflict
        return Unsat(cid, ind.class_tuple(cid), tuple(_conflict_trail(ind)))
    dom = list(ind.domains)
    events: list = []
    bad = _root(ind, dom, events)
    if bad is not None:
        return Unsat(bad, ind.class_tuple(bad), tuple(_trail(ind, bad, events)))
    first = _choose(dom)
    nodes = 0
    stack = [(dom, _choose(dom), None)]
    while stack:
        dom, var, vals = stack.pop()
        if var is None:
            return Witness(tuple(v.bit_length() - 1 for v in dom), nodes)
        if vals is None:
            vals = list(_bits(dom[var]))
        while vals:
            val = vals.pop(0)
            child = list(dom)
            child[var] = 1 << val
            nodes += 1
            if _propagate(ind, child, ind.incident[var], None) is None:
                stack.append((dom, var, vals))
                stack.append((child, _choose(child), None))
                break
    return Unsat(first, ind.class_tuple(first), (), reason="search-exhausted", nodes=nodes)


def decode_witness(ind: IndicatorInstance, assignment, verify: bool = True) -> Operation:
    """Tabulate f(t) = assignment[class of t] and re-verify it exhaustively."""
    d, n = ind.universe_size, ind.arity
    total = d**n
    if total > MAX_POINTS:
        raise ValueError(f"{total} table entries is too many to decode")
    vals = np.asarray(assignment, dtype=np.int64)
    table = np.empty(total, dtype=np.int64)
    for start in range(0, total, 1 << 17):
        rows = all_tuples(d, n, start, start + (1 << 17))
        table[start:start + len(rows)] = vals[ind.lookup(ind.identity.canonical_batch(rows))]
    op = Operation(n, d, table=table, name=f"{ind.identity.kind}{n}")
    if verify:
        ident = satisfies_identity(op, ind.identity, EXHAUSTIVE)
        poly = is_polymorphism(op, ind.structure, EXHAUSTIVE)
        if not (ident.passed and poly.passed):
            raise SolverError(
                f"decoded witness failed re-verification: identity {ident.violations[:1]}, "
                f"polymorphism {poly.violations[:1]}")
    return op


def find_polymorphism(S: RelStructure, spec: IdentitySpec) -> tuple[Operation | None, Witness | Unsat]:
    """Build, solve and decode; returns (operation or None, outcome)."""
    ind = build_indicator(S, spec.arity, spec)
    outcome = solve(ind)
    if isinstance(outcome, Witness):
        return decode_witness(ind, outcome.assignment), outcome
    return None, outcome
