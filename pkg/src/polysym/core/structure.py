"""Finite relational structures and permutations."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class StructureError(ValueError):
    """Malformed structure document; the message starts with the location."""


@dataclass(frozen=True)
class Relation:
    name: str
    arity: int
    tuples: frozenset

    @cached_property
    def array(self) -> np.ndarray:
        """Tuples as an (m, arity) array in sorted order."""
        rows = sorted(self.tuples)
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.arity)

    def __len__(self):
        return len(self.tuples)

    def __contains__(self, item):
        return tuple(item) in self.tuples


@dataclass(frozen=True)
class RelStructure:
    universe_size: int
    relations: tuple[Relation, ...]

    def __post_init__(self):
        if self.universe_size < 1:
            raise StructureError("universe: must be a positive integer")
        names = [rel.name for rel in self.relations]
        if len(set(names)) != len(names):
            raise StructureError("relations: duplicate relation name")
        for rel in self.relations:
            for t in rel.tuples:
                if len(t) != rel.arity:
                    raise StructureError(f"relations.{rel.name}: arity mismatch in {t}")
                if any(not 0 <= x < self.universe_size for x in t):
                    raise StructureError(f"relations.{rel.name}: element out of range in {t}")

    @classmethod
    def build(cls, universe_size: int, relations: dict[str, Iterable[Sequence[int]]]) -> RelStructure:
        rels = []
        for name, tuples in relations.items():
            tuples = frozenset(tuple(int(x) for x in t) for t in tuples)
            arity = len(next(iter(tuples))) if tuples else 2
            rels.append(Relation(name, arity, tuples))
        return cls(universe_size, tuple(rels))

    def relation(self, name: str) -> Relation:
        for rel in self.relations:
            if rel.name == name:
                return rel
        raise KeyError(name)

    def __getitem__(self, name: str) -> Relation:
        return self.relation(name)

    def to_dict(self) -> dict:
        return {
            "universe": self.universe_size,
            "relations": {
                rel.name: {"arity": rel.arity, "tuples": [list(map(int, t)) for t in sorted(rel.tuples)]}
                for rel in self.relations
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def load_structure(text: str) -> RelStructure:
    """Parse the structure JSON format, reporting the location of any error."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"line {exc.lineno} column {exc.colno}: malformed JSON: {exc.msg}") from None
    return structure_from_dict(doc)


def structure_from_dict(doc) -> RelStructure:
    if not isinstance(doc, dict):
        raise StructureError("<root>: expected an object")
    universe = doc.get("universe")
    if not isinstance(universe, int) or isinstance(universe, bool) or universe < 1:
        raise StructureError("universe: expected a positive integer")
    relations = doc.get("relations")
    if not isinstance(relations, dict):
        raise StructureError("relations: expected an object")
    rels = []
    for name, body in relations.items():
        where = f"relations.{name}"
        if not isinstance(body, dict):
            raise StructureError(f"{where}: expected an object")
        arity = body.get("arity")
        if not isinstance(arity, int) or isinstance(arity, bool) or arity < 1:
            raise StructureError(f"{where}.arity: expected a positive integer")
        tuples = body.get("tuples")
        if not isinstance(tuples, list):
            raise StructureError(f"{where}.tuples: expected a list")
        seen = set()
        for i, t in enumerate(tuples):
            if not isinstance(t, list):
                raise StructureError(f"{where}.tuples[{i}]: expected a list")
            if len(t) != arity:
                raise StructureError(f"{where}.tuples[{i}]: arity mismatch (length {len(t)}, arity {arity})")
            for j, x in enumerate(t):
                if not isinstance(x, int) or isinstance(x, bool):
                    raise StructureError(f"{where}.tuples[{i}][{j}]: expected an integer")
                if not 0 <= x < universe:
                    raise StructureError(f"{where}.tuples[{i}][{j}]: element out of range ({x} >= {universe})")
            seen.add(tuple(t))
        rels.append(Relation(name, arity, frozenset(seen)))
    return RelStructure(universe, tuple(rels))


@dataclass(frozen=True)
class Permutation:
    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if sorted(image) != list(range(len(image))):
            raise ValueError("not a bijection")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, size: int) -> Permutation:
        return cls(tuple(range(size)))

    @classmethod
    def from_cycles(cls, size: int, cycles: Iterable[Sequence[int]]) -> Permutation:
        img = list(range(size))
        for cyc in cycles:
            for i, x in enumerate(cyc):
                img[x] = cyc[(i + 1) % len(cyc)]
        return cls(tuple(img))

    def __len__(self):
        return len(self.image)

    def __call__(self, x: int) -> int:
        return self.image[x]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.image, dtype=np.int64)

    def inverse(self) -> Permutation:
        inv = [0] * len(self.image)
        for a, b in enumerate(self.image):
            inv[b] = a
        return Permutation(tuple(inv))

    def then(self, other: Permutation) -> Permutation:
        """x -> other(self(x))."""
        return Permutation(tuple(other.image[b] for b in self.image))

    def fixed_points(self) -> frozenset:
        return frozenset(a for a, b in enumerate(self.image) if a == b)

    def order(self) -> int:
        p, k = self, 1
        ident = tuple(range(len(self.image)))
        while p.image != ident:
            p, k = p.then(self), k + 1
        return k

    def to_list(self) -> list[int]:
        return list(self.image)


def permutation_graph(p: Permutation) -> frozenset:
    """The binary relation {(a, p(a))}."""
    return frozenset((a, b) for a, b in enumerate(p.image))


def loops(rel) -> frozenset:
    """Elements a with (a, a) in a binary relation."""
    if isinstance(rel, Relation):
        if rel.arity != 2:
            raise ValueError(f"relation {rel.name} is not binary")
        rel = rel.tuples
    out = set()
    for t in rel:
        if len(t) != 2:
            raise ValueError("relation is not binary")
        if t[0] == t[1]:
            out.add(t[0])
    return frozenset(out)


def as_permutation(rel: Relation, universe_size: int) -> Permutation | None:
    """The permutation whose graph is ``rel``, or None if there is none."""
    if rel.arity != 2 or len(rel.tuples) != universe_size:
        return None
    img = [-1] * universe_size
    for a, b in rel.tuples:
        if img[a] != -1:
            return None
        img[a] = b
    if sorted(img) != list(range(universe_size)):
        return None
    return Permutation(tuple(img))
