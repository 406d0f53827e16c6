"""Skeleton discovery from pooled and per-context independence tests.

Two testers answer the same query surface: `ExactTester` against the exact
rational joint, `SampleTester` against a dataset with a G-test.  On top of
them sit a deterministic PC-style skeleton search (pooled or masked to one
context value), the exhaustive per-context detection skeleton, and the
executable Markov check that verifies each designated separating set on the
exact distribution.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .data import Dataset
from .exact import SolvedModel
from .graphs import UndirectedSkeleton, acyclify
from .graph_objects import (
    descriptive_graph,
    ident_graph,
    is_strongly_regime_acyclic,
    union_graph,
)
from .independence import CiQuery, CiVerdict, ci_exact, g_test
from .scm import Scm

__all__ = [
    "DiscoveryError",
    "SeparationCertificate",
    "ExactTester",
    "SampleTester",
    "skeleton_pooled",
    "skeleton_masked",
    "intersection_graph",
    "detect_graph",
    "union_from_contexts",
    "MarkovObligation",
    "MarkovReport",
    "markov_check",
]

DEFAULT_MAX_SUBSETS = 4096


class DiscoveryError(ValueError):
    pass


@dataclass(frozen=True)
class SeparationCertificate:
    """Record of the first conditioning set found to separate a pair."""

    x: str
    y: str
    z: tuple[str, ...]
    regime: str | None
    method: str
    p_value: float


class ExactTester:
    """Answers independence queries from the exact joint of a solved model."""

    def __init__(self, solved: SolvedModel):
        self._solved = solved
        self.variables = solved.scm.variable_names
        self.context = solved.scm.context_variable
        self.regimes = solved.regimes

    def test(self, x: str, y: str, z: Sequence[str] = (), regime: str | None = None) -> CiVerdict:
        q = CiQuery(x, y, tuple(z), regime)
        return ci_exact(self._solved.joint, q, context=self.context)


class SampleTester:
    """Answers independence queries from a dataset with the stratified G-test."""

    def __init__(self, data: Dataset, alpha: float, context: str, min_expected: float = 5.0):
        if context not in data.columns:
            raise DiscoveryError("context column %r not in dataset" % (context,))
        if not (0.0 < alpha < 1.0):
            raise DiscoveryError("alpha must be in (0, 1)")
        self._data = data
        self._alpha = alpha
        self._min_expected = min_expected
        self.variables = data.columns
        self.context = context
        codes = sorted(set(data.column(context).tolist()))
        self.regimes = tuple(data.labels(context)[c] for c in codes)

    def test(self, x: str, y: str, z: Sequence[str] = (), regime: str | None = None) -> CiVerdict:
        q = CiQuery(x, y, tuple(z), regime)
        return g_test(
            self._data, q, self._alpha,
            context=self.context, min_expected=self._min_expected,
        )


def _record(certs, x, y, z, regime, verdict):
    if certs is not None:
        certs.append(SeparationCertificate(x, y, tuple(z), regime, verdict.method, verdict.p_value))


def _pc_skeleton(nodes, query, regime, certificates):
    """Stable PC: per round, candidate sets come from the round-start adjacency."""
    nodes = tuple(nodes)
    adj = {v: set(nodes) - {v} for v in nodes}
    k = 0
    while True:
        snapshot = {v: tuple(sorted(adj[v])) for v in nodes}
        pairs = sorted((a, b) for a in nodes for b in adj[a] if a < b)
        tested_any = False
        for a, b in pairs:
            cand_a = [c for c in snapshot[a] if c != b]
            cand_b = [c for c in snapshot[b] if c != a]
            if len(cand_a) < k and len(cand_b) < k:
                continue
            tested_any = True
            tried: set[tuple[str, ...]] = set()
            removed = False
            for pool in (cand_a, cand_b):
                if removed or len(pool) < k:
                    continue
                for z in itertools.combinations(pool, k):
                    if z in tried:
                        continue
                    tried.add(z)
                    verdict = query(a, b, z, regime)
                    if verdict.independent:
                        adj[a].discard(b)
                        adj[b].discard(a)
                        _record(certificates, a, b, z, regime, verdict)
                        removed = True
                        break
        if not tested_any:
            break
        k += 1
    return UndirectedSkeleton(nodes, [(a, b) for a in nodes for b in adj[a] if a < b])


def skeleton_pooled(
    tester,
    variables: Iterable[str] | None = None,
    certificates: list[SeparationCertificate] | None = None,
) -> UndirectedSkeleton:
    """PC-style skeleton over the pooled distribution (context included)."""
    nodes = tuple(variables) if variables is not None else tester.variables
    return _pc_skeleton(nodes, tester.test, None, certificates)


def skeleton_masked(
    tester,
    regime: str,
    certificates: list[SeparationCertificate] | None = None,
) -> UndirectedSkeleton:
    """PC-style skeleton over the non-context variables, every query masked to one context value."""
    if regime not in tester.regimes:
        raise DiscoveryError(
            "regime %r not available; observed regimes: %s"
            % (regime, ", ".join(tester.regimes))
        )
    nodes = tuple(v for v in tester.variables if v != tester.context)
    return _pc_skeleton(nodes, tester.test, regime, certificates)


def intersection_graph(
    pooled: UndirectedSkeleton,
    masked: UndirectedSkeleton,
    context: str,
) -> UndirectedSkeleton:
    """Pooled and masked evidence combined: non-context edges must appear in both."""
    if set(masked.nodes) != set(pooled.nodes) - {context}:
        raise DiscoveryError(
            "masked skeleton must cover exactly the pooled nodes without %r" % (context,)
        )
    pairs = [p for p in pooled.pairs if context in p]
    pairs += [p for p in pooled.pairs if context not in p and p in masked.pairs]
    return UndirectedSkeleton(pooled.nodes, pairs)


def _subset_pool(variables, exclude, max_subsets):
    pool = [v for v in variables if v not in exclude]
    if 2 ** len(pool) > max_subsets:
        raise DiscoveryError(
            "conditioning-set search over %d variables exceeds max_subsets=%d"
            % (len(pool), max_subsets)
        )
    for k in range(len(pool) + 1):
        yield from itertools.combinations(pool, k)


def detect_graph(
    tester,
    regime: str,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
    certificates: list[SeparationCertificate] | None = None,
) -> UndirectedSkeleton:
    """Exhaustive per-context skeleton: an edge survives only if no conditioning
    set separates the pair, neither pooled nor masked to the given context value.

    Context edges use pooled queries only (no masked test involves the context
    itself) and therefore come out identical for every regime.
    """
    if regime not in tester.regimes:
        raise DiscoveryError(
            "regime %r not available; observed regimes: %s"
            % (regime, ", ".join(tester.regimes))
        )
    ctx = tester.context
    nodes = tester.variables
    others = [v for v in nodes if v != ctx]
    pairs = []
    for x, y in itertools.combinations(sorted(others), 2):
        separated = False
        for z in _subset_pool(others, {x, y}, max_subsets):
            pooled = tester.test(x, y, z, None)
            if pooled.independent:
                _record(certificates, x, y, z, None, pooled)
                separated = True
                break
            masked = tester.test(x, y, z, regime)
            if masked.independent:
                _record(certificates, x, y, z, regime, masked)
                separated = True
                break
        if not separated:
            pairs.append((x, y))
    for y in sorted(others):
        separated = False
        for z in _subset_pool(others, {y}, max_subsets):
            pooled = tester.test(ctx, y, z, None)
            if pooled.independent:
                _record(certificates, ctx, y, z, None, pooled)
                separated = True
                break
        if not separated:
            pairs.append(tuple(sorted((ctx, y))))
    return UndirectedSkeleton(nodes, pairs)


def union_from_contexts(
    detect_by_regime: Mapping[str, UndirectedSkeleton],
    pooled: UndirectedSkeleton,
    context: str,
) -> UndirectedSkeleton:
    """Reassemble the pooled picture: union of per-context edges away from the
    context variable, context edges taken from the pooled skeleton."""
    if not detect_by_regime:
        raise DiscoveryError("need at least one per-regime detection skeleton")
    pairs = {p for p in pooled.pairs if context in p}
    for skel in detect_by_regime.values():
        pairs.update(p for p in skel.pairs if context not in p)
    return UndirectedSkeleton(pooled.nodes, pairs)


@dataclass(frozen=True)
class MarkovObligation:
    """One pair the Markov property speaks about, with the designated sets tried."""

    x: str
    y: str
    regime: str | None
    clause: str
    candidates: tuple[tuple[str, ...], ...]
    separator: tuple[str, ...] | None
    passed: bool


@dataclass
class MarkovReport:
    applicable: bool
    passed: bool
    obligations: list[MarkovObligation] = field(default_factory=list)

    @property
    def failures(self) -> list[MarkovObligation]:
        return [o for o in self.obligations if not o.passed]


def markov_check(s: Scm, solved: SolvedModel | None = None) -> MarkovReport:
    """Verify, on the exact joint, that every pair without an edge is separated
    by its designated conditioning set.

    Pairs of non-context variables are read off the per-regime graph with the
    ancestor correction: if both endpoints are pooled ancestors of the context
    the separator candidates are the pooled parent sets of the endpoints; else
    the per-regime parent sets (without the context) under masking.  Pairs
    involving the context fall back to the acyclified pooled skeleton with
    pooled parent sets.  Requires strong regime-acyclicity; otherwise the
    report is marked not applicable.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    if not is_strongly_regime_acyclic(s, solved):
        return MarkovReport(applicable=False, passed=False)
    union = union_graph(s, solved)
    anc_r = union.ancestors([ctx])
    joint = solved.joint
    names = sorted(v for v in s.variable_names if v != ctx)
    obligations: list[MarkovObligation] = []

    def run(x, y, regime, clause, candidates):
        separator = None
        for z in dict.fromkeys(candidates):
            q = CiQuery(x, y, z, regime)
            if ci_exact(joint, q, context=ctx).independent:
                separator = z
                break
        obligations.append(
            MarkovObligation(x, y, regime, clause, tuple(dict.fromkeys(candidates)),
                             separator, separator is not None)
        )

    for r in solved.regimes:
        ident = ident_graph(s, r, solved)
        descr = descriptive_graph(s, r, solved)
        skel = ident.skeleton()
        for x, y in itertools.combinations(names, 2):
            if skel.adjacent(x, y):
                continue
            if x in anc_r and y in anc_r:
                run(x, y, None, "pooled_ancestors", [
                    tuple(sorted(union.parents(x))),
                    tuple(sorted(union.parents(y))),
                ])
            else:
                run(x, y, r, "masked_regime", [
                    tuple(sorted(set(descr.parents(x)) - {ctx})),
                    tuple(sorted(set(descr.parents(y)) - {ctx})),
                ])

    fallback = acyclify(union).skeleton()
    for y in names:
        if fallback.adjacent(ctx, y):
            continue
        run(ctx, y, None, "context_fallback", [
            tuple(sorted(union.parents(ctx))),
            tuple(sorted(union.parents(y))),
        ])

    return MarkovReport(
        applicable=True,
        passed=all(o.passed for o in obligations),
        obligations=obligations,
    )
