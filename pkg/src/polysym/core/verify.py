"""Direct (non-search) checks of polymorphism and identity conditions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .identity import IdentitySpec
from .operation import Operation, all_tuples, encode
from .rng import SplitMix64
from .structure import RelStructure, as_permutation

EXHAUSTIVE_LIMIT = 5_000_000
DEFAULT_SAMPLES = 1_000_000
MAX_RECORDED = 20
CHUNK = 1 << 17


@dataclass(frozen=True)
class Policy:
    """How many points to check.

    ``auto`` is exhaustive when the point count is at most ``threshold``
    and sampled otherwise.
    """

    mode: str = "auto"
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    threshold: int = EXHAUSTIVE_LIMIT

    def __post_init__(self):
        if self.mode not in ("auto", "exhaustive", "sampled"):
            raise ValueError(f"unknown policy mode {self.mode!r}")

    def resolve(self, points: int) -> str:
        if self.mode == "auto":
            return "exhaustive" if points <= self.threshold else "sampled"
        return self.mode


EXHAUSTIVE = Policy("exhaustive")


def sampled(count: int, seed: int) -> Policy:
    return Policy("sampled", samples=count, seed=seed)


@dataclass
class VerificationReport:
    mode: str
    checks_run: int = 0
    violations: list = field(default_factory=list)
    seed: int | None = None
    violation_count: int = 0
    families: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def record(self, violation: dict):
        self.violation_count += 1
        if len(self.violations) < MAX_RECORDED:
            self.violations.append(violation)

    def add_checks(self, family: str, count: int):
        self.checks_run += count
        self.families[family] = self.families.get(family, 0) + count

    def absorb(self, other: VerificationReport):
        if other.mode == "sampled":
            self.mode = "sampled"
            self.seed = other.seed
        self.checks_run += other.checks_run
        for k, v in other.families.items():
            self.families[k] = self.families.get(k, 0) + v
        for v in other.violations:
            if len(self.violations) < MAX_RECORDED:
                self.violations.append(v)
        self.violation_count += other.violation_count

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "verdict": "pass" if self.passed else "fail",
            "checks_run": self.checks_run,
            "families": dict(self.families),
            "violation_count": self.violation_count,
            "violations": self.violations,
            "seed": self.seed,
        }


def _row_batches(domain: int, arity: int, mode: str, policy: Policy, rng: SplitMix64 | None) -> Iterator[np.ndarray]:
    if mode == "exhaustive":
        total = domain**arity
        for start in range(0, total, CHUNK):
            yield all_tuples(domain, arity, start, start + CHUNK)
    else:
        left = policy.samples
        while left > 0:
            take = min(CHUNK, left)
            yield rng.integers(domain, (take, arity))
            left -= take


def _ilist(a) -> list:
    return [int(x) for x in np.asarray(a).ravel()]


def is_polymorphism(f: Operation, S: RelStructure, policy: Policy = Policy()) -> VerificationReport:
    """Check that ``f`` maps every selection of relation tuples back into the relation.

    Graphs of permutations are checked as commutation f(p(x_1), ...) = p(f(x)).
    """
    if f.domain != S.universe_size:
        raise ValueError(f"domain mismatch: operation on {f.domain}, structure on {S.universe_size}")
    d, n = f.domain, f.arity
    report = VerificationReport(mode="exhaustive")
    rng = None
    for rel in S.relations:
        perm = as_permutation(rel, d)
        points = d**n if perm is not None else len(rel) ** n
        if points == 0:
            continue
        mode = policy.resolve(points)
        if mode == "sampled":
            report.mode, report.seed = "sampled", policy.seed
            rng = rng or SplitMix64(policy.seed)
        if perm is not None:
            p = perm.array
            for rows in _row_batches(d, n, mode, policy, rng):
                img = f.evaluate(rows)
                moved = f.evaluate(p[rows])
                report.add_checks(rel.name, len(rows))
                for i in np.flatnonzero(moved != p[img]):
                    report.record({
                        "relation": rel.name,
                        "inputs": [[int(x), int(p[x])] for x in rows[i]],
                        "expected": f"pair in {rel.name}",
                        "got": [int(img[i]), int(moved[i])],
                    })
        else:
            R = rel.array
            keys = np.sort(encode(R, d))
            for sel in _row_batches(len(rel), n, mode, policy, rng):
                image = np.stack([f.evaluate(R[sel, j]) for j in range(rel.arity)], axis=1)
                ok = np.isin(encode(image, d), keys)
                report.add_checks(rel.name, len(sel))
                for i in np.flatnonzero(~ok):
                    report.record({
                        "relation": rel.name,
                        "inputs": [_ilist(R[k]) for k in sel[i]],
                        "expected": f"tuple in {rel.name}",
                        "got": _ilist(image[i]),
                    })
    return report


def satisfies_identity(f: Operation, spec: IdentitySpec, policy: Policy = Policy()) -> VerificationReport:
    """Check orbit constancy f(t) = f(canonical(t)) and every forced value."""
    if f.arity != spec.arity:
        raise ValueError(f"arity mismatch: operation {f.arity}, identity {spec.arity}")
    d, n = f.domain, f.arity
    mode = policy.resolve(d**n)
    report = VerificationReport(mode=mode, seed=policy.seed if mode == "sampled" else None)
    rng = SplitMix64(policy.seed) if mode == "sampled" else None
    if spec.kind not in ("maltsev", "idempotent"):
        for rows in _row_batches(d, n, mode, policy, rng):
            canon = spec.canonical_batch(rows)
            got = f.evaluate(rows)
            want = f.evaluate(canon)
            report.add_checks("orbit", len(rows))
            for i in np.flatnonzero(got != want):
                report.record({
                    "inputs": [_ilist(rows[i]), _ilist(canon[i])],
                    "expected": int(want[i]),
                    "got": int(got[i]),
                })
    pins = spec.forced_values(d)
    if pins:
        rows = np.array([t for t, _ in pins], dtype=np.int64)
        want = np.array([v for _, v in pins])
        got = f.evaluate(rows)
        report.add_checks("forced", len(pins))
        for i in np.flatnonzero(got != want):
            report.record({"inputs": [_ilist(rows[i])], "expected": int(want[i]), "got": int(got[i])})
    return report
