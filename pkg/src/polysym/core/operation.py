"""Finite operations stored as dense tables or as batch procedures."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

# Dense tables above this many entries are never built implicitly.
MAX_TABLE = 50_000_000

BatchFn = Callable[[np.ndarray], np.ndarray]


def all_tuples(domain: int, arity: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows ``start..stop-1`` of the row-major enumeration of ``domain**arity``.

    Row ``i`` is the base-``domain`` expansion of ``i`` (most significant first).
    """
    total = domain**arity
    stop = total if stop is None else min(stop, total)
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, arity), dtype=np.int64)
    for pos in range(arity - 1, -1, -1):
        out[:, pos] = idx % domain
        idx //= domain
    return out


def encode(rows: np.ndarray, domain: int) -> np.ndarray:
    """Row-major index of each row: sum of x_i * domain**(n-1-i)."""
    rows = np.asarray(rows, dtype=np.int64)
    idx = np.zeros(rows.shape[0], dtype=np.int64)
    for pos in range(rows.shape[1]):
        idx = idx * domain + rows[:, pos]
    return idx


def _value_dtype(domain: int):
    return np.int16 if domain <= 32767 else np.int64


@dataclass(frozen=True, eq=False)
class Operation:
    """An n-ary operation on {0..domain-1}.

    ``table`` is the flat row-major value array; ``batch`` maps an (N, arity)
    integer array to N values.  At least one of the two is present.
    """

    arity: int
    domain: int
    table: np.ndarray | None = None
    batch: BatchFn | None = field(default=None, repr=False)
    name: str = ""

    def __post_init__(self):
        if self.arity < 1 or self.domain < 1:
            raise ValueError("arity and domain must be positive")
        if self.table is None and self.batch is None:
            raise ValueError("an operation needs a table or a batch procedure")
        if self.table is not None:
            tab = np.asarray(self.table)
            if tab.shape != (self.domain**self.arity,):
                raise ValueError(
                    f"table has {tab.size} entries, expected {self.domain ** self.arity}")
            if tab.size and (tab.min() < 0 or tab.max() >= self.domain):
                raise ValueError("table value out of range")
            tab = tab.astype(_value_dtype(self.domain))
            tab.setflags(write=False)
            object.__setattr__(self, "table", tab)

    # construction -----------------------------------------------------

    @classmethod
    def from_function(cls, arity: int, domain: int, fn: Callable[..., int], name: str = "") -> Operation:
        rows = all_tuples(domain, arity)
        table = np.fromiter((fn(*map(int, row)) for row in rows), dtype=np.int64, count=len(rows))
        return cls(arity, domain, table=table, name=name)

    @classmethod
    def from_batch(cls, arity: int, domain: int, batch: BatchFn, name: str = "") -> Operation:
        return cls(arity, domain, batch=batch, name=name)

    @classmethod
    def projection(cls, arity: int, domain: int, index: int) -> Operation:
        return cls.from_batch(arity, domain, lambda rows: np.asarray(rows)[:, index],
                              name=f"pi{index + 1}")

    # evaluation -------------------------------------------------------

    def evaluate(self, rows: np.ndarray, chunk: int = 1 << 18) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != self.arity:
            raise ValueError(f"expected rows of length {self.arity}")
        if self.table is not None:
            return self.table[encode(rows, self.domain)]
        if rows.shape[0] <= chunk:
            return np.asarray(self.batch(rows))
        parts = [np.asarray(self.batch(rows[i:i + chunk])) for i in range(0, rows.shape[0], chunk)]
        return np.concatenate(parts)

    def __call__(self, *args: int) -> int:
        if len(args) != self.arity:
            raise ValueError(f"{self.name or 'operation'} takes {self.arity} arguments")
        if self.table is not None:
            idx = 0
            for a in args:
                idx = idx * self.domain + int(a)
            return int(self.table[idx])
        return int(self.batch(np.array([args], dtype=np.int64))[0])

    @property
    def size(self) -> int:
        return self.domain**self.arity

    def materialize(self, chunk: int = 1 << 18) -> Operation:
        """Return a table-backed copy (keeps the batch procedure)."""
        if self.table is not None:
            return self
        if self.size > MAX_TABLE:
            raise ValueError(f"refusing to tabulate {self.size} entries")
        out = np.empty(self.size, dtype=np.int64)
        for start in range(0, self.size, chunk):
            rows = all_tuples(self.domain, self.arity, start, start + chunk)
            out[start:start + len(rows)] = self.batch(rows)
        return Operation(self.arity, self.domain, table=out, batch=self.batch, name=self.name)

    # serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        tab = self.materialize().table
        return {"arity": self.arity, "domain": self.domain, "values": [int(v) for v in tab]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict, name: str = "") -> Operation:
        try:
            arity, domain, values = int(doc["arity"]), int(doc["domain"]), doc["values"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"operation document missing field: {exc}") from None
        if len(values) != domain**arity:
            raise ValueError(f"operation has {len(values)} values, expected {domain ** arity}")
        for i, v in enumerate(values):
            if not isinstance(v, int) or not 0 <= v < domain:
                raise ValueError(f"values[{i}] = {v!r} is not an element of the domain")
        return cls(arity, domain, table=np.array(values, dtype=np.int64), name=name)

    @classmethod
    def from_json(cls, text: str) -> Operation:
        return cls.from_dict(json.loads(text))


def compose(outer: Operation, inners: Sequence[Operation], name: str = "") -> Operation:
    """outer(inner_1(x), ..., inner_m(x)) for inners of a common arity."""
    if len(inners) != outer.arity:
        raise ValueError("need one inner operation per outer argument")
    arity = inners[0].arity
    if any(g.arity != arity or g.domain != outer.domain for g in inners):
        raise ValueError("inner operations must share arity and domain")

    def batch(rows):
        cols = np.stack([g.evaluate(rows) for g in inners], axis=1)
        return outer.evaluate(cols)

    return Operation.from_batch(arity, outer.domain, batch, name=name)


def permute_arguments(op: Operation, order: Iterable[int], name: str = "") -> Operation:
    """g(x_1..x_n) = op(x_order[0], ..., x_order[n-1])."""
    order = list(order)
    return Operation.from_batch(op.arity, op.domain,
                                lambda rows: op.evaluate(np.asarray(rows)[:, order]), name=name)
