"""Identity classes as orbit rules on argument tuples plus forced values."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("symmetric", "cyclic", "totally-symmetric", "tsi", "wnu", "maltsev", "idempotent")

_DIAGONAL_KINDS = {"tsi", "wnu", "idempotent"}


@dataclass(frozen=True)
class IdentitySpec:
    """An equational class of n-ary operations.

    Tuples with equal ``canonical`` form must take equal values; the
    ``forced_values`` map pins individual canonical tuples.  ``extra``
    adds further (tuple, value) pins to the kind's own.
    """

    kind: str
    arity: int
    extra: tuple[tuple[tuple[int, ...], int], ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown identity kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.arity < 1:
            raise ValueError("arity must be positive")
        if self.kind == "maltsev" and self.arity != 3:
            raise ValueError("a Mal'tsev operation is ternary")
        if self.kind == "wnu" and self.arity < 3:
            raise ValueError("a WNU operation has arity at least 3")

    # orbit rule -------------------------------------------------------

    def canonical(self, t) -> tuple[int, ...]:
        t = tuple(int(x) for x in t)
        if len(t) != self.arity:
            raise ValueError(f"expected a tuple of length {self.arity}")
        kind = self.kind
        if kind == "symmetric":
            return tuple(sorted(t))
        if kind == "cyclic":
            return min(t[i:] + t[:i] for i in range(len(t)))
        if kind in ("totally-symmetric", "tsi"):
            s = sorted(set(t))
            return tuple(s + [s[-1]] * (len(t) - len(s)))
        if kind == "wnu":
            dev = _single_deviation(t)
            if dev is not None:
                x, y = dev
                return (y,) + (x,) * (len(t) - 1)
        return t

    def canonical_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        kind = self.kind
        if kind == "symmetric":
            return np.sort(rows, axis=1)
        if kind == "cyclic":
            return least_rotation(rows)
        if kind in ("totally-symmetric", "tsi"):
            return _set_pad(rows)
        if kind == "wnu":
            return _wnu_batch(rows)
        return rows.copy()

    # forced values ----------------------------------------------------

    def forced_values(self, domain: int) -> list[tuple[tuple[int, ...], int]]:
        """(canonical tuple, value) pins, in a fixed order; may contain conflicts."""
        n = self.arity
        pins = []
        if self.kind in _DIAGONAL_KINDS:
            pins.extend(((x,) * n, x) for x in range(domain))
        if self.kind == "maltsev":
            for x in range(domain):
                for y in range(domain):
                    pins.append(((x, x, y), y))
                    pins.append(((y, x, x), y))
        pins.extend((self.canonical(t), int(v)) for t, v in self.extra)
        return pins

    def describe(self) -> str:
        return f"{self.kind}/{self.arity}"


def identity(kind: str, arity: int) -> IdentitySpec:
    return IdentitySpec(kind, arity)


def canonical_form(spec: IdentitySpec, t) -> tuple[int, ...]:
    return spec.canonical(t)


def _single_deviation(t):
    """(x, y) when every entry equals x except exactly one entry y != x."""
    if len(t) < 3:
        return None
    vals = set(t)
    if len(vals) != 2:
        return None
    a, b = vals
    ca = t.count(a)
    if ca == 1:
        return b, a
    if ca == len(t) - 1:
        return a, b
    return None


def least_rotation(rows: np.ndarray) -> np.ndarray:
    """Lexicographically least cyclic rotation of every row."""
    rows = np.asarray(rows, dtype=np.int64)
    best = rows.copy()
    n = rows.shape[1]
    for k in range(1, n):
        cand = np.roll(rows, -k, axis=1)
        diff = cand != best
        has = diff.any(axis=1)
        first = diff.argmax(axis=1)
        ar = np.arange(rows.shape[0])
        less = has & (cand[ar, first] < best[ar, first])
        best[less] = cand[less]
    return best


def _set_pad(rows: np.ndarray) -> np.ndarray:
    s = np.sort(rows, axis=1)
    keep = np.ones_like(s, dtype=bool)
    keep[:, 1:] = s[:, 1:] != s[:, :-1]
    order = np.argsort(~keep, axis=1, kind="stable")
    packed = np.take_along_axis(s, order, axis=1)
    count = keep.sum(axis=1)
    pos = np.arange(rows.shape[1])[None, :]
    top = s[:, -1:]
    return np.where(pos < count[:, None], packed, top)


def _wnu_batch(rows: np.ndarray) -> np.ndarray:
    out = rows.copy()
    n = rows.shape[1]
    if n < 3:
        return out
    for i in range(rows.shape[0]):
        dev = _single_deviation(tuple(rows[i]))
        if dev is not None:
            out[i, 0] = dev[1]
            out[i, 1:] = dev[0]
    return out
