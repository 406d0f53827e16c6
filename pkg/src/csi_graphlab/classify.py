"""Rule-based labeling of edges that vanish in one context value.

An edge present in the pooled graph but absent from a per-context detection
skeleton vanished either because the mechanism really differs in that
context (physical) or because the context merely starves the support the
edge needs to show up (non-physical).  Two orientation regimes are
supported: `oriented` mode consumes a directed pooled graph and applies the
parent- and ancestry-based rules; `skeleton` mode consumes an undirected
pooled skeleton and only uses inferences that hold under every orientation
of it, which leaves non-adjacency as the single usable fact.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .graphs import DirectedGraph, UndirectedSkeleton

__all__ = [
    "ClassifyError",
    "PHYSICAL",
    "NON_PHYSICAL",
    "UNDETERMINED",
    "RULE_R1_PARENT",
    "RULE_R1_SKELETON",
    "RULE_R2",
    "RULE_R2_CYCLE",
    "EdgeChange",
    "ChangeReport",
    "classify_changes",
]

PHYSICAL = "physical"
NON_PHYSICAL = "non_physical"
UNDETERMINED = "undetermined"

RULE_R1_PARENT = "R1-parent"
RULE_R1_SKELETON = "R1-skeleton"
RULE_R2 = "R2"
RULE_R2_CYCLE = "R2-cycle"


class ClassifyError(ValueError):
    """Raised for inconsistent inputs to change classification."""


@dataclass(frozen=True)
class EdgeChange:
    """Verdict for one pooled edge missing from one context's skeleton."""

    edge: tuple[str, str]
    regime: str
    in_union: bool
    in_detect_r: bool
    classification: str
    rule: str | None
    justification: str

    def __post_init__(self) -> None:
        if self.classification != UNDETERMINED and self.rule is None:
            raise ClassifyError("a determined verdict must cite a rule")


@dataclass(frozen=True)
class ChangeReport:
    """Per-context verdicts plus any detected-but-not-pooled violations."""

    mode: str
    context: str
    changes: Mapping[str, tuple[EdgeChange, ...]]
    violations: Mapping[str, tuple[tuple[str, str], ...]]

    def rows(self) -> list[tuple[str, str, str, str, str, str]]:
        """Flatten to (regime, tail, head, classification, rule, note) rows."""
        out = []
        for r in sorted(self.changes):
            for c in self.changes[r]:
                out.append(
                    (r, c.edge[0], c.edge[1], c.classification, c.rule or "",
                     c.justification)
                )
        return out

    def counts(self) -> dict[str, int]:
        tally = {PHYSICAL: 0, NON_PHYSICAL: 0, UNDETERMINED: 0}
        for items in self.changes.values():
            for c in items:
                tally[c.classification] += 1
        return tally


def _ordered_pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _classify_oriented(
    union: DirectedGraph, context: str, edge: tuple[str, str], regime: str
) -> EdgeChange:
    x, y = edge
    base = dict(edge=edge, regime=regime, in_union=True, in_detect_r=False)
    if y == context:
        return EdgeChange(
            classification=UNDETERMINED,
            rule=None,
            justification="edges into the context are outside the rules",
            **base,
        )
    if context not in union.parents(y):
        return EdgeChange(
            classification=NON_PHYSICAL,
            rule=RULE_R1_PARENT,
            justification=(
                "%s is not a pooled parent of %s, so the mechanism of %s is "
                "the same in every context; the edge vanished for lack of "
                "support" % (context, y, y)
            ),
            **base,
        )
    if x == context:
        return EdgeChange(
            classification=UNDETERMINED,
            rule=None,
            justification=(
                "the vanished edge leaves the context itself; the rules "
                "address non-context parents"
            ),
            **base,
        )
    anc_ctx = union.ancestors([context])
    others = sorted(union.parents(y) - {context})
    if anc_ctx.isdisjoint(union.ancestors(others)):
        scc = union.scc_of()[y]
        if any(len(c) >= 2 and c & anc_ctx
               for c in union.strongly_connected_components()):
            return EdgeChange(
                classification=UNDETERMINED,
                rule=None,
                justification=(
                    "the pooled graph has a cycle through an ancestor of "
                    "%s, so the disjoint-ancestry rule is not known to be "
                    "sound here" % context
                ),
                **base,
            )
        # Defensive: with reflexive ancestor sets the disjointness above
        # cannot hold while y sits on a cycle (the cycle re-enters y through
        # a parent whose ancestors include the context), so this branch is
        # unreachable for consistent directed inputs.
        if len(scc) >= 2:
            return EdgeChange(
                classification=PHYSICAL,
                rule=RULE_R2_CYCLE,
                justification=(
                    "ancestries of %s and of the other parents of %s are "
                    "disjoint; some mechanism feeding the cycle %s changed "
                    "physically, though not necessarily this exact edge"
                    % (context, y, sorted(scc))
                ),
                **base,
            )
        return EdgeChange(
            classification=PHYSICAL,
            rule=RULE_R2,
            justification=(
                "%s is a pooled parent of %s and no ancestor of %s is "
                "shared with the remaining parents of %s, so only a "
                "mechanism change can explain the missing edge"
                % (context, y, context, y)
            ),
            **base,
        )
    return EdgeChange(
        classification=UNDETERMINED,
        rule=None,
        justification=(
            "ancestors of %s meet ancestors of the other parents of %s; "
            "the vanishing could be physical or support-induced" % (context, y)
        ),
        **base,
    )


def _classify_skeleton(
    union: UndirectedSkeleton, context: str, pair: tuple[str, str], regime: str
) -> EdgeChange:
    a, b = pair
    base = dict(edge=pair, regime=regime, in_union=True, in_detect_r=False)
    if context in pair:
        return EdgeChange(
            classification=UNDETERMINED,
            rule=None,
            justification="the pair touches the context itself",
            **base,
        )
    if not union.adjacent(context, a) and not union.adjacent(context, b):
        return EdgeChange(
            classification=NON_PHYSICAL,
            rule=RULE_R1_SKELETON,
            justification=(
                "%s is adjacent to neither %s nor %s, so neither endpoint's "
                "mechanism can take %s as a parent under any orientation"
                % (context, a, b, context)
            ),
            **base,
        )
    return EdgeChange(
        classification=UNDETERMINED,
        rule=None,
        justification=(
            "%s is adjacent to an endpoint and the skeleton does not "
            "determine parent or ancestor facts" % context
        ),
        **base,
    )


def classify_changes(
    union: DirectedGraph | UndirectedSkeleton,
    detect: Mapping[str, UndirectedSkeleton],
    mode: str = "oriented",
    context: str = "R",
    regimes: Sequence[str] | None = None,
) -> ChangeReport:
    """Label every pooled edge missing from a per-context skeleton.

    `oriented` mode requires a directed pooled graph; `skeleton` mode
    accepts an undirected one (or the skeleton of a directed one) and is
    deliberately conservative.  Detected pairs absent from the pooled input
    are collected under `violations` instead of failing.
    """
    if mode not in ("oriented", "skeleton"):
        raise ClassifyError("mode must be 'oriented' or 'skeleton': %r" % mode)
    if mode == "oriented":
        if not isinstance(union, DirectedGraph):
            raise ClassifyError("oriented mode needs a directed pooled graph")
        pooled_pairs = {_ordered_pair(*e) for e in union.edges}
    else:
        if isinstance(union, DirectedGraph):
            union = union.skeleton()
        pooled_pairs = set(union.pairs)
    if context not in union.nodes:
        raise ClassifyError("context %r is not a node of the pooled graph" % context)
    if not detect:
        raise ClassifyError("detect map is empty")
    if regimes is None:
        regimes = sorted(detect)
    missing = [r for r in regimes if r not in detect]
    if missing:
        raise ClassifyError("regimes absent from detect map: %s" % missing)

    changes: dict[str, tuple[EdgeChange, ...]] = {}
    violations: dict[str, tuple[tuple[str, str], ...]] = {}
    for r in regimes:
        sk = detect[r]
        if set(sk.nodes) != set(union.nodes):
            raise ClassifyError(
                "detection skeleton for regime %r has different nodes" % r
            )
        if mode == "oriented":
            vanished = [e for e in union.sorted_edges() if not sk.adjacent(*e)]
            labeled = [
                _classify_oriented(union, context, e, r) for e in vanished
            ]
        else:
            vanished = [p for p in union.sorted_pairs() if not sk.adjacent(*p)]
            labeled = [
                _classify_skeleton(union, context, p, r) for p in vanished
            ]
        changes[r] = tuple(labeled)
        violations[r] = tuple(
            p for p in sk.sorted_pairs() if p not in pooled_pairs
        )
    return ChangeReport(
        mode=mode, context=context, changes=changes, violations=violations
    )
