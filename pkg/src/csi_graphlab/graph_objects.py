"""Graph objects attached to a model and its distribution.

A mechanism edge X -> Y exists when Y's mechanism is non-constant in X
somewhere on the full input grid; the observable variants restrict the
non-constancy search to the support of a given joint.  Per context value r
the module builds four graphs: descriptive (support given R=r), physical
(mechanisms pinned at R=r, pooled support), counterfactual (the intervened
model's own visible graph), and an identification variant that re-adds
pooled edges between ancestors of the context.  Edges touching the context
variable are carried over from the pooled visible graph by convention; in
the counterfactual graph they are annotations, not claims.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import JointPmf, SolvedModel, joint_pmf, solve_all
from .graphs import DirectedGraph, union_graphs
from .independence import CiQuery, ci_exact
from .scm import MechanismTable, Scm, ScmError, intervene

__all__ = [
    "mechanism_graph",
    "observable_graph",
    "union_graph",
    "visible_context_edges",
    "descriptive_graph",
    "physical_graph",
    "counterfactual_graph",
    "ident_graph",
    "is_weakly_regime_acyclic",
    "is_strongly_regime_acyclic",
    "support_reduction_witnesses",
    "RegimeGraphs",
    "GraphObjectSet",
    "ground_truth",
    "FaithfulnessReport",
    "check_R_faithfulness",
    "check_strong_R_faithfulness",
]


def mechanism_graph(s: Scm) -> DirectedGraph:
    """Edge X -> Y iff f_Y is non-constant in X over the full parent grid.

    Noise labels with probability zero are ignored: they cannot ever matter
    to the solved model.
    """
    edges = []
    for v in s.variables:
        mech = s.mechanisms[v.name]
        pa_domains = [s.domain(p) for p in mech.parents]
        noise_support = s.noises[v.name].support
        for i, x in enumerate(mech.parents):
            found = False
            others = pa_domains[:i] + pa_domains[i + 1:]
            for rest in itertools.product(*others) if others else [()]:
                for n in noise_support:
                    outs = set()
                    for xval in pa_domains[i]:
                        pa = rest[:i] + (xval,) + rest[i:]
                        outs.add(mech.value(pa, n))
                        if len(outs) > 1:
                            found = True
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                edges.append((x, v.name))
    return DirectedGraph(s.variable_names, edges)


def observable_graph(
    s: Scm,
    q: JointPmf,
    mechanisms: Mapping[str, MechanismTable] | None = None,
) -> DirectedGraph:
    """Edge X -> Y iff f_Y is non-constant in X on the support of q.

    Non-constancy means: two parent assignments in the support of q's
    marginal over Y's declared parents that differ only in X and give
    different outputs under a common positive-probability noise label.
    """
    mechanisms = mechanisms if mechanisms is not None else s.mechanisms
    edges = []
    for v in s.variables:
        y = v.name
        mech = mechanisms[y]
        if not mech.parents:
            continue
        sup = q.support(mech.parents)
        noise_support = s.noises[y].support
        for i, x in enumerate(mech.parents):
            groups: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
            for row in sup:
                key = row[:i] + row[i + 1:]
                groups.setdefault(key, []).append(row)
            found = False
            for members in groups.values():
                if len(members) < 2:
                    continue
                for n in noise_support:
                    outs = set()
                    for row in members:
                        outs.add(mech.value(row, n))
                        if len(outs) > 1:
                            found = True
                            break
                    if found:
                        break
                if found:
                    break
            if found:
                edges.append((x, y))
    return DirectedGraph(s.variable_names, edges)


def union_graph(s: Scm, solved: SolvedModel | None = None) -> DirectedGraph:
    """Visible graph of the pooled distribution (all contexts mixed)."""
    q = solved.joint if solved is not None else joint_pmf(s)
    return observable_graph(s, q)


def visible_context_edges(union: DirectedGraph, context: str) -> list[tuple[str, str]]:
    return [e for e in union.sorted_edges() if context in e]


def _with_context_edges(
    g: DirectedGraph, union: DirectedGraph, context: str
) -> DirectedGraph:
    edges = set(g.edges) | set(visible_context_edges(union, context))
    return DirectedGraph(g.nodes, edges)


def descriptive_graph(s: Scm, r: str, solved: SolvedModel | None = None) -> DirectedGraph:
    """Edges visible within the stratum R=r, plus pooled edges touching R."""
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    _require_regime(solved, r)
    cut = intervene(s, ctx, r)
    cond = solved.joint.conditional({ctx: r})
    barred = observable_graph(s, cond, mechanisms=cut.mechanisms)
    return _with_context_edges(barred, union_graph(s, solved), ctx)


def physical_graph(s: Scm, r: str, solved: SolvedModel | None = None) -> DirectedGraph:
    """Edges the mechanisms can still exhibit with the context held at r.

    Candidate parents of Y are its pooled-graph parents; declared arguments
    outside that set are marginalized away rather than pinned.  Two
    pooled-support rows over the declared parents witness X -> Y when their
    candidate-parent projections differ only in X, the context coordinate
    equals r whenever the context is itself a candidate, and a shared
    positive-probability noise label maps the rows to different outputs.
    Mechanism changes hidden by support gating leave no trace here, so the
    per-regime graphs always union back to the pooled graph.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    _require_regime(solved, r)
    union = union_graph(s, solved)
    joint = solved.joint
    edges = []
    for v in s.variables:
        y = v.name
        if y == ctx:
            continue
        mech = s.mechanisms[y]
        cand = [p for p in mech.parents if p in union.parents(y)]
        if not cand:
            continue
        rows = joint.support(mech.parents)
        if ctx in cand:
            ci = mech.parents.index(ctx)
            rows = [w for w in rows if w[ci] == r]
        idx = [mech.parents.index(p) for p in cand]
        noise_support = s.noises[y].support
        for k, x in enumerate(cand):
            if x == ctx:
                continue
            xi = idx[k]
            key_idx = idx[:k] + idx[k + 1:]
            groups: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
            for w in rows:
                groups.setdefault(tuple(w[j] for j in key_idx), []).append(w)
            found = False
            for members in groups.values():
                if len({w[xi] for w in members}) < 2:
                    continue
                for n in noise_support:
                    if len({mech.value(w, n) for w in members}) > 1:
                        found = True
                        break
                if found:
                    break
            if found:
                edges.append((x, y))
    barred = DirectedGraph(s.variable_names, edges)
    return _with_context_edges(barred, union, ctx)


def counterfactual_graph(s: Scm, r: str, solved: SolvedModel | None = None) -> DirectedGraph:
    """Visible graph of the model intervened to R=r, plus annotation R edges.

    The returned graph's edges touching the context come from the original
    pooled graph for display symmetry only; the intervened model itself has
    no such edges.  Raises if the intervened model is not uniquely solvable.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    _require_regime(solved, r)
    cut = intervene(s, ctx, r)
    cut_joint = joint_pmf(cut)
    barred = observable_graph(s, cut_joint, mechanisms=cut.mechanisms)
    return _with_context_edges(barred, union_graph(s, solved), ctx)


def ident_graph(s: Scm, r: str, solved: SolvedModel | None = None) -> DirectedGraph:
    """Descriptive graph plus pooled edges between ancestors of the context.

    Between variables that are pooled-graph ancestors of R, context-specific
    structure is not identifiable from the distribution, so those pooled
    edges are restored.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    union = union_graph(s, solved)
    anc = union.ancestors({s.context_variable})
    descr = descriptive_graph(s, r, solved)
    extra = [(u, v) for u, v in union.edges if u in anc and v in anc]
    return DirectedGraph(descr.nodes, set(descr.edges) | set(extra))


def _require_regime(solved: SolvedModel, r: str) -> None:
    if r not in solved.regimes:
        raise ScmError(
            "context value %r has zero probability (attained: %s)"
            % (r, ", ".join(solved.regimes))
        )


def is_weakly_regime_acyclic(s: Scm, solved: SolvedModel | None = None) -> bool:
    """Every per-context descriptive graph is acyclic."""
    solved = solved if solved is not None else SolvedModel.of(s)
    return all(
        descriptive_graph(s, r, solved).is_acyclic() for r in solved.regimes
    )


def is_strongly_regime_acyclic(s: Scm, solved: SolvedModel | None = None) -> bool:
    """Weakly regime-acyclic and no pooled cycle touches an ancestor of the context."""
    solved = solved if solved is not None else SolvedModel.of(s)
    if not is_weakly_regime_acyclic(s, solved):
        return False
    union = union_graph(s, solved)
    anc = union.ancestors({s.context_variable})
    for comp in union.strongly_connected_components():
        if len(comp) > 1 and comp & anc:
            return False
    return True


def _reduction_scan(mech, keep_idx, rows, noise_support, clause, regime, out):
    groups: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
    for row in rows:
        groups.setdefault(tuple(row[j] for j in keep_idx), []).append(row)
    for members in groups.values():
        if len(members) < 2:
            continue
        for n in noise_support:
            seen: dict[str, tuple[str, ...]] = {}
            for row in members:
                seen.setdefault(mech.value(row, n), row)
                if len(seen) > 1:
                    a, b = (seen[v] for v in list(seen)[:2])
                    out.append({
                        "variable": mech.variable,
                        "clause": clause,
                        "regime": regime,
                        "visible_parents": [mech.parents[j] for j in keep_idx],
                        "rows": [list(a), list(b)],
                        "noise": n,
                    })
                    return


def support_reduction_witnesses(s: Scm, solved: SolvedModel | None = None) -> list[dict]:
    """Mechanism evaluations that disagree across support rows sharing their
    visible-parent projection.

    Empty means every mechanism factors through its visible parents on the
    realized support, pooled and within every context stratum, so solutions
    compose along the corresponding graphs.  A witness marks fine-tuned
    support that couples an invisible declared argument to the outcome; the
    solution-side laws are only meaningful without such coupling.  At most
    one witness per variable and clause.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    union = union_graph(s, solved)
    out: list[dict] = []
    for v in s.variables:
        y = v.name
        mech = s.mechanisms[y]
        if not mech.parents:
            continue
        keep = [i for i, p in enumerate(mech.parents) if p in union.parents(y)]
        rows = solved.joint.support(mech.parents)
        _reduction_scan(mech, keep, rows, s.noises[y].support, "pooled", None, out)
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        cond = solved.joint.conditional({ctx: r})
        for v in s.variables:
            y = v.name
            mech = s.mechanisms[y]
            if y == ctx or not mech.parents:
                continue
            keep = [i for i, p in enumerate(mech.parents) if p in descr.parents(y)]
            rows = cond.support(mech.parents)
            _reduction_scan(
                mech, keep, rows, s.noises[y].support, "per_context", r, out
            )
    return out


@dataclass
class RegimeGraphs:
    regime: str
    descriptive: DirectedGraph
    physical: DirectedGraph
    counterfactual: DirectedGraph
    ident: DirectedGraph


@dataclass
class GraphObjectSet:
    """Everything derivable from one solve: pooled graphs and the per-regime family."""

    context: str
    regimes: tuple[str, ...]
    mechanism: DirectedGraph
    union: DirectedGraph
    per_regime: dict[str, RegimeGraphs]
    weakly_regime_acyclic: bool
    strongly_regime_acyclic: bool


def ground_truth(s: Scm, solved: SolvedModel | None = None) -> GraphObjectSet:
    solved = solved if solved is not None else SolvedModel.of(s)
    per: dict[str, RegimeGraphs] = {}
    for r in solved.regimes:
        per[r] = RegimeGraphs(
            regime=r,
            descriptive=descriptive_graph(s, r, solved),
            physical=physical_graph(s, r, solved),
            counterfactual=counterfactual_graph(s, r, solved),
            ident=ident_graph(s, r, solved),
        )
    return GraphObjectSet(
        context=s.context_variable,
        regimes=solved.regimes,
        mechanism=mechanism_graph(s),
        union=union_graph(s, solved),
        per_regime=per,
        weakly_regime_acyclic=is_weakly_regime_acyclic(s, solved),
        strongly_regime_acyclic=is_strongly_regime_acyclic(s, solved),
    )


# --- faithfulness -------------------------------------------------------------

@dataclass
class FaithfulnessReport:
    holds: bool
    violations: list[dict] = field(default_factory=list)
    # strong variant only: mechanisms re-expressible over different parents
    rewrite_witnesses: list[dict] = field(default_factory=list)


def _subsets(pool: list[str]):
    for k in range(len(pool) + 1):
        yield from itertools.combinations(pool, k)


def check_R_faithfulness(s: Scm, solved: SolvedModel | None = None) -> FaithfulnessReport:
    """Exhaustive check: adjacency in a per-context graph must defeat every separator.

    For each context value r and each pair adjacent in the descriptive graph
    of r, no conditioning set may render the pair independent, neither
    pooled nor within the stratum R=r (the latter only for pairs away from
    the context variable).  Runs the exact oracle over all subsets.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    ctx = s.context_variable
    names = list(solved.joint.scope)
    report = FaithfulnessReport(holds=True)
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        for x, y in descr.skeleton().sorted_pairs():
            pooled_pool = [v for v in names if v not in (x, y)]
            masked_pool = [v for v in names if v not in (x, y, ctx)]
            hit = None
            for z in _subsets(pooled_pool):
                if ci_exact(solved.joint, CiQuery(x, y, z)).independent:
                    hit = {"regime": r, "x": x, "y": y, "z": list(z), "masked": False}
                    break
            if hit is None and ctx not in (x, y):
                for z in _subsets(masked_pool):
                    verdict = ci_exact(
                        solved.joint, CiQuery(x, y, z, regime=r), context=ctx
                    )
                    if verdict.independent:
                        hit = {"regime": r, "x": x, "y": y, "z": list(z), "masked": True}
                        break
            if hit is not None:
                report.holds = False
                report.violations.append(hit)
    return report


def _rewrite_witnesses(s: Scm, solved: SolvedModel, cap: int) -> list[dict]:
    """Mechanisms expressible over an alternative parent set, support-exactly.

    Bounded search: drop one visible parent X of Y at a time and test whether
    (remaining parents [+ context], Y's noise) functionally determine Y on
    the realized noise-observable rows.  A hit means an observationally
    identical model with different minimal parents exists.

    Both the visible and the declared remainder are tried: a declared parent
    that is invisible pooled can still split support rows that the visible
    remainder alone cannot tell apart, and the rewrite over (declared - X,
    context) is the one that always exists when X is visible pooled but in
    no single-context graph.
    """
    ctx = s.context_variable
    union = union_graph(s, solved)
    nj = solved.noise_joint
    scope_pos = {name: i for i, name in enumerate(nj.scope)}
    witnesses: list[dict] = []
    budget = cap
    from .exact import noise_name

    for y in s.variable_names:
        visible = sorted(union.parents(y))
        for x in visible:
            if x == ctx:
                continue
            kept = [p for p in visible if p != x]
            declared = [p for p in s.mechanisms[y].parents if p != x]
            candidates = []
            for base in (kept, declared):
                if ctx not in base and y != ctx:
                    candidates.append(base + [ctx])
                candidates.append(base)
            candidates = [c for i, c in enumerate(candidates) if c not in candidates[:i]]
            for cand in candidates:
                if budget <= 0:
                    return witnesses
                budget -= 1
                cols = [scope_pos[c] for c in cand] + [scope_pos[noise_name(y)]]
                ycol = scope_pos[y]
                seen: dict[tuple[str, ...], str] = {}
                fd_holds = True
                for key in nj.table:
                    sig = tuple(key[c] for c in cols)
                    val = key[ycol]
                    prev = seen.setdefault(sig, val)
                    if prev != val:
                        fd_holds = False
                        break
                if fd_holds:
                    witnesses.append(
                        {"variable": y, "dropped": x, "parents": list(cand)}
                    )
                    break
    return witnesses


def check_strong_R_faithfulness(
    s: Scm, solved: SolvedModel | None = None, cap: int = 1000
) -> FaithfulnessReport:
    """Faithfulness plus absence of support-equivalent re-parameterizations.

    The re-parameterization search is bounded and best-effort (one dropped
    parent at a time, at most `cap` candidate checks); a clean report is
    therefore evidence, not proof, while any witness is definite.
    """
    solved = solved if solved is not None else SolvedModel.of(s)
    report = check_R_faithfulness(s, solved)
    report.rewrite_witnesses = _rewrite_witnesses(s, solved, cap)
    if report.rewrite_witnesses:
        report.holds = False
    return report
