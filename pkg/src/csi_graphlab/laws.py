"""Randomized structural-law suite over the exact machinery.

Each check replays one relation between the graph family and the exact
solution of a model, in exact arithmetic, and a failure carries a minimal
witness.  Models that do not meet a law's hypotheses yield a skipped result,
never a silent pass or a spurious failure.  `random_scm` draws small models
by rejection so the relations get exercised far from the curated corpus.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Mapping

from .discovery import markov_check
from .exact import SolveError, SolvedModel
from .graph_objects import (
    check_R_faithfulness,
    check_strong_R_faithfulness,
    descriptive_graph,
    ident_graph,
    is_strongly_regime_acyclic,
    is_weakly_regime_acyclic,
    physical_graph,
    support_reduction_witnesses,
    union_graph,
)
from .rng import derive_seed
from .scm import MechanismTable, NoiseSpec, Scm, VariableSpec

__all__ = [
    "LawsError",
    "Requirements",
    "RandomModelSpec",
    "SampledModel",
    "CheckResult",
    "random_scm",
    "check_edge_inclusions",
    "check_union_property",
    "check_regime_children",
    "check_ident_sandwich",
    "check_solution_locality",
    "check_noise_factorization",
    "check_local_markov",
    "check_markov",
    "DEFAULT_CHECKS",
    "SuiteSummary",
    "run_suite",
]


class LawsError(ValueError):
    """Invalid suite configuration or exhausted model search."""


# --- random models -----------------------------------------------------------------

@dataclass(frozen=True)
class Requirements:
    """Properties the sampler must certify before accepting a draw."""

    solvable: bool = True
    strongly_regime_acyclic: bool = False
    R_faithful: bool = False


@dataclass(frozen=True)
class RandomModelSpec:
    """Size and admission bounds for randomly drawn models."""

    n_vars: int = 5
    max_domain: int = 3
    max_parents: int = 3
    seed: int = 0
    require: Requirements = field(default_factory=Requirements)

    def __post_init__(self):
        if self.n_vars < 1:
            raise LawsError("n_vars must be at least 1")
        # noise pmfs share one denominator <= 8, so label counts must fit it
        if not (2 <= self.max_domain <= 8):
            raise LawsError("max_domain must be in 2..8")
        if self.max_parents < 0:
            raise LawsError("max_parents must be nonnegative")


@dataclass(frozen=True)
class SampledModel:
    scm: Scm
    solved: SolvedModel | None
    attempts: int
    rejections: Mapping[str, int]


def _composition(rng: random.Random, total: int, parts: int) -> list[int]:
    # positive integers summing to total; needs total >= parts
    cuts = sorted(rng.sample(range(1, total), parts - 1))
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def _draw_model(rng: random.Random, spec: RandomModelSpec) -> Scm:
    n = spec.n_vars
    names = ["R"] + ["V%d" % i for i in range(1, n)]
    domains = {
        v: tuple(str(i) for i in range(rng.randint(2, spec.max_domain)))
        for v in names
    }
    order = list(names)
    rng.shuffle(order)
    noises: dict[str, NoiseSpec] = {}
    mechanisms: dict[str, MechanismTable] = {}
    for pos, y in enumerate(order):
        labels = ["u%d" % i for i in range(rng.randint(1, spec.max_domain))]
        denom = rng.randint(len(labels), 8)
        parts = _composition(rng, denom, len(labels))
        noises[y] = NoiseSpec(
            y, tuple((lbl, Fraction(k, denom)) for lbl, k in zip(labels, parts))
        )
        pool = order[:pos]
        parents = rng.sample(pool, rng.randint(0, min(spec.max_parents, len(pool))))
        if len(parents) < spec.max_parents and pos + 1 < n and rng.random() < 0.2:
            # occasional forward pick declares a cycle; solvability screening
            # decides whether the model survives
            parents.append(rng.choice(order[pos + 1:]))
        dom_y = domains[y]
        mechanisms[y] = MechanismTable.from_function(
            y, parents, [domains[p] for p in parents], labels,
            lambda *_args: rng.choice(dom_y),
        )
    variables = tuple(VariableSpec(v, domains[v]) for v in names)
    return Scm(variables, "R", noises, mechanisms)


def random_scm(spec: RandomModelSpec, max_attempts: int = 1000) -> SampledModel:
    """Rejection-sample a model meeting `spec.require`; deterministic in the seed.

    Mechanism outputs are uniform per table row and noise pmfs are random
    rationals over a shared denominator of at most 8.  Solvable draws whose
    mechanisms do not factor through their visible parents on support are
    always rejected (reason "support_entangled"): the solution-side laws
    quantify over models without such fine-tuned coupling.  Raises LawsError
    with the rejection tally when no admissible model appears within the cap.
    """
    rejections: dict[str, int] = {}
    need_solution = (
        spec.require.solvable
        or spec.require.strongly_regime_acyclic
        or spec.require.R_faithful
    )
    for attempt in range(max_attempts):
        s = _draw_model(random.Random(derive_seed(spec.seed, attempt)), spec)
        solved = None
        reason = None
        try:
            solved = SolvedModel.of(s)
        except SolveError:
            if need_solution:
                reason = "unsolvable"
        if reason is None and solved is not None:
            if support_reduction_witnesses(s, solved):
                reason = "support_entangled"
        if reason is None and spec.require.strongly_regime_acyclic:
            if not is_strongly_regime_acyclic(s, solved):
                reason = "not_strongly_regime_acyclic"
        if reason is None and spec.require.R_faithful:
            if not check_R_faithfulness(s, solved).holds:
                reason = "not_R_faithful"
        if reason is None:
            return SampledModel(s, solved, attempt + 1, dict(rejections))
        rejections[reason] = rejections.get(reason, 0) + 1
    raise LawsError(
        "no admissible model in %d attempts (rejections: %s)"
        % (
            max_attempts,
            ", ".join("%s=%d" % kv for kv in sorted(rejections.items())) or "none",
        )
    )


# --- check results -----------------------------------------------------------------

_WITNESS_CAP = 10


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one law on one model; failures carry minimal witnesses."""

    name: str
    passed: bool
    skipped: bool = False
    reason: str | None = None
    witnesses: tuple[dict, ...] = ()
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.skipped and not self.reason:
            raise LawsError("skipped check needs a reason")
        if self.skipped and (not self.passed or self.witnesses):
            raise LawsError("skipped check cannot fail or carry witnesses")
        if not self.passed and not self.witnesses:
            raise LawsError("failed check needs at least one witness")


def _done(name: str, witnesses: list[dict], notes: tuple[str, ...] = ()) -> CheckResult:
    witnesses = witnesses[:_WITNESS_CAP]
    return CheckResult(
        name, passed=not witnesses, witnesses=tuple(witnesses), notes=tuple(notes)
    )


def _skip(name: str, reason: str) -> CheckResult:
    return CheckResult(name, passed=True, skipped=True, reason=reason)


def _solve(s: Scm, solved: SolvedModel | None) -> SolvedModel:
    return solved if solved is not None else SolvedModel.of(s)


# --- graph-family laws ---------------------------------------------------------------

def check_edge_inclusions(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """Per context value: descriptive edges within physical edges within pooled."""
    solved = _solve(s, solved)
    union = union_graph(s, solved)
    wit: list[dict] = []
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        phys = physical_graph(s, r, solved)
        for e in sorted(descr.edges - phys.edges):
            wit.append({"relation": "descriptive_within_physical", "regime": r, "edge": e})
        for e in sorted(phys.edges - union.edges):
            wit.append({"relation": "physical_within_pooled", "regime": r, "edge": e})
    return _done("edge_inclusions", wit)


def check_union_property(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """The pooled graph is exactly the union of the per-context physical graphs.

    The union of descriptive graphs may fall short of the pooled graph, but
    only when some mechanism is re-expressible over other parents; the
    rewrite search must then produce a witness.
    """
    solved = _solve(s, solved)
    union = union_graph(s, solved)
    phys_edges: set[tuple[str, str]] = set()
    descr_edges: set[tuple[str, str]] = set()
    for r in solved.regimes:
        phys_edges |= physical_graph(s, r, solved).edges
        descr_edges |= descriptive_graph(s, r, solved).edges
    wit: list[dict] = []
    notes: list[str] = []
    for e in sorted(union.edges - phys_edges):
        wit.append({"relation": "pooled_edge_in_no_physical", "edge": e})
    for e in sorted(phys_edges - union.edges):
        wit.append({"relation": "physical_union_exceeds_pooled", "edge": e})
    gap = sorted(union.edges - descr_edges)
    if gap:
        faith = check_strong_R_faithfulness(s, solved)
        if faith.holds:
            wit.append({"relation": "descriptive_gap_without_rewrite", "edges": gap})
        else:
            notes.append(
                "descriptive union misses %d pooled edge(s); mechanism rewrite witnessed"
                % len(gap)
            )
    return _done("union_property", wit, tuple(notes))


def check_regime_children(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """No pooled context arrow into Y means Y keeps its pooled parents in
    every per-context physical graph."""
    solved = _solve(s, solved)
    ctx = s.context_variable
    union = union_graph(s, solved)
    phys = {r: physical_graph(s, r, solved) for r in solved.regimes}
    wit: list[dict] = []
    for y in s.variable_names:
        if y == ctx or ctx in union.parents(y):
            continue
        want = set(union.parents(y))
        for r in solved.regimes:
            got = set(phys[r].parents(y))
            if got != want:
                wit.append({
                    "variable": y,
                    "regime": r,
                    "physical_parents": sorted(got),
                    "pooled_parents": sorted(want),
                })
    return _done("regime_children", wit)


def check_ident_sandwich(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """Descriptive within identified within pooled; under strong regime-
    acyclicity the identified graph also stays within the physical graph."""
    solved = _solve(s, solved)
    union = union_graph(s, solved)
    strong = is_strongly_regime_acyclic(s, solved)
    wit: list[dict] = []
    notes: list[str] = []
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        ident = ident_graph(s, r, solved)
        for e in sorted(descr.edges - ident.edges):
            wit.append({"relation": "descriptive_within_ident", "regime": r, "edge": e})
        for e in sorted(ident.edges - union.edges):
            wit.append({"relation": "ident_within_pooled", "regime": r, "edge": e})
        if strong:
            phys = physical_graph(s, r, solved)
            for e in sorted(ident.edges - phys.edges):
                wit.append({"relation": "ident_within_physical", "regime": r, "edge": e})
    if not strong:
        notes.append(
            "ident-within-physical clause not checked:"
            " model is not strongly regime-acyclic"
        )
    return _done("ident_sandwich", wit, tuple(notes))


# --- solution-function laws ----------------------------------------------------------

def check_solution_locality(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """Solved values depend only on ancestral noises.

    Pooled clause: two noise assignments agreeing on the pooled ancestors of X
    solve to the same X.  Per-context clause: within a context stratum,
    agreement on the descriptive ancestors of X suffices.  Needs weak
    regime-acyclicity.
    """
    solved = _solve(s, solved)
    if not is_weakly_regime_acyclic(s, solved):
        return _skip("solution_locality", "model is not weakly regime-acyclic")
    table = solved.table
    names = table.variables
    pos = {v: i for i, v in enumerate(names)}
    union = union_graph(s, solved)
    ctx = s.context_variable
    wit: list[dict] = []

    def scan(var, anc, rows, clause, regime=None):
        cols = [pos[a] for a in sorted(anc)]
        vi = pos[var]
        seen: dict[tuple[str, ...], tuple[tuple[str, ...], str]] = {}
        for noise, vals in rows:
            key = tuple(noise[c] for c in cols)
            prev = seen.setdefault(key, (noise, vals[vi]))
            if prev[1] != vals[vi]:
                wit.append({
                    "clause": clause,
                    "variable": var,
                    "regime": regime,
                    "noise_rows": [list(prev[0]), list(noise)],
                    "values": [prev[1], vals[vi]],
                })
                return

    all_rows = list(zip(table.noise_assignments, table.values))
    for v in names:
        scan(v, union.ancestors([v]), all_rows, "pooled")
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        rows_r = [(n, vals) for n, vals in all_rows if vals[pos[ctx]] == r]
        for v in names:
            scan(v, descr.ancestors([v]), rows_r, "per_context", r)
    return _done("solution_locality", wit)


def check_noise_factorization(
    s: Scm, solved: SolvedModel | None = None, cap: int | None = None
) -> CheckResult:
    """Conditioning on observables only ties together ancestral noises.

    For observed Z the noise posterior factors into the block over the pooled
    ancestors of Z times untouched priors; with the context pinned to r (and
    outside Z) the block is over pooled ancestors of the context plus
    descriptive ancestors of Z.  Exact equality, subsets up to `cap` names
    (default: all but the full set).  Needs weak regime-acyclicity.
    """
    solved = _solve(s, solved)
    if not is_weakly_regime_acyclic(s, solved):
        return _skip("noise_factorization", "model is not weakly regime-acyclic")
    names = solved.table.variables
    n = len(names)
    cap = (n - 1) if cap is None else cap
    if cap < 0:
        raise LawsError("cap must be nonnegative")
    nj = solved.noise_joint
    npos = {v: i for i, v in enumerate(names)}
    vpos = {v: n + i for i, v in enumerate(names)}
    rows = list(nj.table.items())
    union = union_graph(s, solved)
    ctx = s.context_variable
    rcol = vpos[ctx]
    priors = {v: dict(s.noises[v].pmf) for v in names}
    anc_ctx = union.ancestors([ctx])
    descr = {r: descriptive_graph(s, r, solved) for r in solved.regimes}
    wit: list[dict] = []

    def verify(conditioned_on, anc, group, clause, regime=None):
        anc_cols = [npos[a] for a in sorted(anc)]
        outside = [v for v in names if v not in anc]
        block: dict[tuple[str, ...], Fraction] = {}
        for key, p in group:
            sig = tuple(key[c] for c in anc_cols)
            block[sig] = block.get(sig, Fraction(0)) + p
        for key, p in group:
            expected = block[tuple(key[c] for c in anc_cols)]
            for v in outside:
                expected *= priors[v][key[npos[v]]]
            if p != expected:
                wit.append({
                    "clause": clause,
                    "regime": regime,
                    "conditioned_on": conditioned_on,
                    "noise_row": [key[npos[v]] for v in names],
                    "probability": str(p),
                    "factored": str(expected),
                })
                return

    for size in range(1, min(cap, n) + 1):
        for z_vars in itertools.combinations(names, size):
            if len(wit) >= _WITNESS_CAP:
                return _done("noise_factorization", wit)
            zcols = [vpos[z] for z in z_vars]
            groups: dict[tuple[str, ...], list] = {}
            for key, p in rows:
                groups.setdefault(tuple(key[c] for c in zcols), []).append((key, p))
            anc = union.ancestors(z_vars)
            for z_vals in sorted(groups):
                verify(dict(zip(z_vars, z_vals)), anc, groups[z_vals], "pooled")
            if ctx in z_vars:
                continue
            strata: dict[tuple[tuple[str, ...], str], list] = {}
            for key, p in rows:
                sig = (tuple(key[c] for c in zcols), key[rcol])
                strata.setdefault(sig, []).append((key, p))
            for z_vals, r in sorted(strata):
                anc_r = anc_ctx | descr[r].ancestors(z_vars)
                given = dict(zip(z_vars, z_vals))
                given[ctx] = r
                verify(given, anc_r, strata[(z_vals, r)], "per_context", r)
    notes = ()
    if cap < n:
        notes = ("conditioning sets of more than %d variables not checked" % cap,)
    return _done("noise_factorization", wit, notes)


def check_local_markov(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """Parent sets act as barriers against all other noise terms.

    Pooled clause: a variable off every pooled cycle is independent of the
    other noises given its pooled parents.  Per-context clause: a variable
    off every descriptive cycle that is no pooled ancestor of the context is
    independent of the other noises given its descriptive parents, within
    the stratum.
    """
    solved = _solve(s, solved)
    nj = solved.noise_joint
    names = solved.table.variables
    n = len(names)
    npos = {v: i for i, v in enumerate(names)}
    vpos = {v: n + i for i, v in enumerate(names)}
    rows = list(nj.table.items())
    union = union_graph(s, solved)
    ctx = s.context_variable
    scc = union.scc_of()
    wit: list[dict] = []
    obligations = 0

    def barrier_test(y, b_vars, subset, clause, regime=None):
        ycol = vpos[y]
        other = [npos[v] for v in names if v != y]
        bcols = [vpos[b] for b in sorted(b_vars)]
        groups: dict[tuple[str, ...], list] = {}
        for key, p in subset:
            groups.setdefault(tuple(key[c] for c in bcols), []).append((key, p))
        for b_vals in sorted(groups):
            grp = groups[b_vals]
            mass = sum(p for _, p in grp)
            m_y: dict[str, Fraction] = {}
            m_e: dict[tuple[str, ...], Fraction] = {}
            m_pair: dict[tuple[str, tuple[str, ...]], Fraction] = {}
            for key, p in grp:
                yv = key[ycol]
                ev = tuple(key[c] for c in other)
                m_y[yv] = m_y.get(yv, Fraction(0)) + p
                m_e[ev] = m_e.get(ev, Fraction(0)) + p
                m_pair[(yv, ev)] = m_pair.get((yv, ev), Fraction(0)) + p
            for yv in sorted(m_y):
                for ev in sorted(m_e):
                    if m_pair.get((yv, ev), Fraction(0)) * mass != m_y[yv] * m_e[ev]:
                        wit.append({
                            "clause": clause,
                            "variable": y,
                            "regime": regime,
                            "barrier": sorted(b_vars),
                            "barrier_value": list(b_vals),
                            "value": yv,
                            "other_noises": list(ev),
                        })
                        return

    for y in names:
        if len(scc[y]) > 1:
            continue
        obligations += 1
        barrier_test(y, union.parents(y), rows, "pooled")
    anc_ctx = union.ancestors([ctx])
    for r in solved.regimes:
        descr = descriptive_graph(s, r, solved)
        dscc = descr.scc_of()
        rows_r = [(key, p) for key, p in rows if key[vpos[ctx]] == r]
        for y in names:
            if y == ctx or y in anc_ctx or len(dscc[y]) > 1:
                continue
            obligations += 1
            barrier_test(y, set(descr.parents(y)) - {ctx}, rows_r, "per_context", r)
    if obligations == 0:
        return _skip("local_markov", "no variable meets the barrier hypotheses")
    return _done("local_markov", wit)


def check_markov(s: Scm, solved: SolvedModel | None = None) -> CheckResult:
    """Every non-adjacent pair is separated by its designated conditioning set
    (delegates to the discovery-side checker); needs strong regime-acyclicity."""
    solved = _solve(s, solved)
    report = markov_check(s, solved)
    if not report.applicable:
        return _skip("markov", "model is not strongly regime-acyclic")
    wit = [
        {
            "x": o.x,
            "y": o.y,
            "regime": o.regime,
            "clause": o.clause,
            "candidates": [list(c) for c in o.candidates],
        }
        for o in report.failures
    ]
    return _done("markov", wit)


DEFAULT_CHECKS: tuple[Callable[..., CheckResult], ...] = (
    check_edge_inclusions,
    check_union_property,
    check_regime_children,
    check_ident_sandwich,
    check_solution_locality,
    check_noise_factorization,
    check_local_markov,
    check_markov,
)


# --- suite -------------------------------------------------------------------------

@dataclass
class SuiteSummary:
    """Aggregated outcome of the law suite over randomly drawn models."""

    count: int
    seed: int
    models: tuple[dict, ...]
    tallies: dict[str, dict[str, int]]
    failures: tuple[dict, ...]
    rejections: dict[str, int]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "seed": self.seed,
            "ok": self.ok,
            "tallies": {k: dict(v) for k, v in sorted(self.tallies.items())},
            "failures": [dict(f) for f in self.failures],
            "rejections": dict(sorted(self.rejections.items())),
            "models": [dict(m) for m in self.models],
        }


def run_suite(
    count: int,
    spec: RandomModelSpec | None = None,
    seed: int | None = None,
    checks: tuple[Callable[..., CheckResult], ...] = DEFAULT_CHECKS,
) -> SuiteSummary:
    """Run every law on `count` random models; deterministic in (spec, seed).

    Model sizes cycle from 2 variables up to spec.n_vars.  Models admitted
    without a solution (possible only when `spec.require.solvable` is off)
    are recorded but no checks run on them.
    """
    if count < 0:
        raise LawsError("count must be nonnegative")
    spec = spec if spec is not None else RandomModelSpec()
    seed = spec.seed if seed is None else seed
    sizes = list(range(2, spec.n_vars + 1)) or [spec.n_vars]
    tallies: dict[str, dict[str, int]] = {}
    models: list[dict] = []
    failures: list[dict] = []
    rejections: dict[str, int] = {}
    for i in range(count):
        mspec = replace(spec, n_vars=sizes[i % len(sizes)], seed=derive_seed(seed, i))
        sampled = random_scm(mspec)
        for reason, k in sampled.rejections.items():
            rejections[reason] = rejections.get(reason, 0) + k
        models.append({
            "index": i,
            "seed": mspec.seed,
            "n_vars": mspec.n_vars,
            "attempts": sampled.attempts,
            "solved": sampled.solved is not None,
        })
        if sampled.solved is None:
            continue
        for chk in checks:
            res = chk(sampled.scm, sampled.solved)
            tally = tallies.setdefault(
                res.name, {"passed": 0, "failed": 0, "skipped": 0}
            )
            if res.skipped:
                tally["skipped"] += 1
            elif res.passed:
                tally["passed"] += 1
            else:
                tally["failed"] += 1
                failures.append({
                    "model_index": i,
                    "model_seed": mspec.seed,
                    "check": res.name,
                    "witnesses": [dict(w) for w in res.witnesses],
                })
    return SuiteSummary(
        count=count,
        seed=seed,
        models=tuple(models),
        tallies=tallies,
        failures=tuple(failures),
        rejections=rejections,
    )
