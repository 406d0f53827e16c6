"""Command-line front end over the library pipelines.

One executable, seven subcommands: exact ground-truth graphs, skeleton
discovery (exact or sampled), edge-change classification, the bootstrap
transfer test, dataset sampling, the law suite, and corpus access.  Every
run emits a single structured JSON document (sorted keys, embedded DOT
text) so scripts and tests share one parser; `--out DIR` additionally
materializes the per-graph DOT files and CSV tables.  Outputs are
byte-stable for fixed inputs and seeds.

Exit codes: 0 success, 2 validation error, 3 law-check failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .classify import classify_changes
from .corpus import get_example, list_examples
from .data import Dataset
from .discovery import (
    ExactTester,
    SampleTester,
    detect_graph,
    intersection_graph,
    skeleton_masked,
    skeleton_pooled,
    union_from_contexts,
)
from .exact import SolvedModel, draw_samples, solve_all
from .graph_objects import ground_truth, union_graph
from .graphs import DirectedGraph, UndirectedSkeleton, acyclify
from .laws import DEFAULT_CHECKS, RandomModelSpec, Requirements, run_suite
from .scm import load_scm, serialize_scm
from .transfer import TransferConfig, transfer_evidence

__all__ = ["main", "EXIT_OK", "EXIT_USAGE", "EXIT_LAW_FAILURE"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_LAW_FAILURE = 3


class CliError(ValueError):
    """Invalid flags, files, or fields caught by the command layer."""


# --- shared plumbing -----------------------------------------------------------------

def _read_source(path: str, flag: str) -> str:
    """Read a positional input; '-' means stdin."""
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError("cannot read %s file %r: %s" % (flag, path, e.strerror)) from None


def _json_doc(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _deliver(args, files: dict[str, str], stdout_name: str) -> None:
    """Print one file to stdout, or write all of them under --out.

    Existing files abort the whole run before anything is written unless
    --force is set.
    """
    if args.out is None:
        sys.stdout.write(files[stdout_name])
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not args.force:
        clashes = sorted(name for name in files if (out / name).exists())
        if clashes:
            raise CliError(
                "refusing to overwrite %s in %r (pass --force)"
                % (", ".join(clashes), str(out))
            )
    for name, text in files.items():
        (out / name).write_text(text)


def _resolve_seed(explicit: int | None) -> int:
    """Flag wins, then CSI_GRAPHLAB_SEED, then 0."""
    if explicit is not None:
        return explicit
    env = os.environ.get("CSI_GRAPHLAB_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(
            "environment variable CSI_GRAPHLAB_SEED must be an integer, got %r" % env
        ) from None


def _check_threads(args) -> None:
    if args.threads < 1:
        raise CliError("--threads must be at least 1")


def _load_model(path: str, flag: str):
    s = load_scm(_read_source(path, flag))
    return s, SolvedModel.of(s)


def _pairs(skel: UndirectedSkeleton) -> list[list[str]]:
    return [list(p) for p in skel.sorted_pairs()]


def _csv_text(header: list[str], rows: list[list]) -> str:
    def cell(v) -> str:
        text = str(v)
        if any(ch in text for ch in ",\"\n"):
            text = '"%s"' % text.replace('"', '""')
        return text

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# --- ground-truth --------------------------------------------------------------------

def _cmd_ground_truth(args) -> int:
    _check_threads(args)
    s, solved = _load_model(args.scm, "model")
    gt = ground_truth(s, solved)

    dots = {
        "mechanism.dot": gt.mechanism.to_dot("mechanism"),
        "union.dot": gt.union.to_dot("union"),
        "acyclified-union.dot": acyclify(gt.union).to_dot("acyclified-union"),
    }
    for r in gt.regimes:
        rg = gt.per_regime[r]
        dots["descriptive-%s.dot" % r] = rg.descriptive.to_dot("descriptive-%s" % r)
        dots["physical-%s.dot" % r] = rg.physical.to_dot("physical-%s" % r)
        if args.full:
            dots["counterfactual-%s.dot" % r] = rg.counterfactual.to_dot(
                "counterfactual-%s" % r
            )
            dots["ident-%s.dot" % r] = rg.ident.to_dot("ident-%s" % r)

    all_edges: set[tuple[str, str]] = set(gt.mechanism.edges) | set(gt.union.edges)
    for rg in gt.per_regime.values():
        for g in (rg.descriptive, rg.physical, rg.counterfactual, rg.ident):
            all_edges |= g.edges
    table = []
    for e in sorted(all_edges):
        table.append({
            "edge": list(e),
            "mechanism": e in gt.mechanism.edges,
            "union": e in gt.union.edges,
            "descriptive": {r: e in gt.per_regime[r].descriptive.edges for r in gt.regimes},
            "physical": {r: e in gt.per_regime[r].physical.edges for r in gt.regimes},
            "counterfactual": {
                r: e in gt.per_regime[r].counterfactual.edges for r in gt.regimes
            },
            "ident": {r: e in gt.per_regime[r].ident.edges for r in gt.regimes},
        })

    doc = {
        "command": "ground-truth",
        "context": gt.context,
        "regimes": list(gt.regimes),
        "weakly_regime_acyclic": gt.weakly_regime_acyclic,
        "strongly_regime_acyclic": gt.strongly_regime_acyclic,
        "edges": table,
        "dot": dots,
    }
    files = {"report.json": _json_doc(doc)}
    files.update(dots)
    _deliver(args, files, "report.json")
    return EXIT_OK


# --- discover ------------------------------------------------------------------------

def _cmd_discover(args) -> int:
    _check_threads(args)
    if args.exact is not None:
        s, solved = _load_model(args.exact, "--exact")
        tester = ExactTester(solved)
        mode = "exact"
    else:
        if args.alpha is None:
            raise CliError("--alpha is required with --data")
        data = Dataset.from_csv(_read_source(args.data, "--data"))
        tester = SampleTester(data, args.alpha, args.context)
        mode = "sample"

    regimes = list(tester.regimes)
    if args.regime is not None:
        if args.regime not in tester.regimes:
            raise CliError(
                "--regime %r is not an observed context value (have: %s)"
                % (args.regime, ", ".join(tester.regimes))
            )
        regimes = [args.regime]

    certs: list = []
    pooled = skeleton_pooled(tester, certificates=certs)
    per_regime: dict[str, dict] = {}
    detect_by_regime: dict[str, UndirectedSkeleton] = {}
    for r in regimes:
        masked = skeleton_masked(tester, r, certificates=certs)
        det = detect_graph(tester, r, certificates=certs)
        inter = intersection_graph(pooled, masked, tester.context)
        detect_by_regime[r] = det
        per_regime[r] = {
            "masked": _pairs(masked),
            "detect": _pairs(det),
            "intersection": _pairs(inter),
        }
    reunion = union_from_contexts(detect_by_regime, pooled, tester.context)

    dots = {"pooled-skeleton.dot": pooled.to_dot("pooled-skeleton")}
    for r in regimes:
        dots["detect-%s.dot" % r] = detect_by_regime[r].to_dot("detect-%s" % r)
    dots["union-reconstruction.dot"] = reunion.to_dot("union-reconstruction")

    doc = {
        "command": "discover",
        "mode": mode,
        "context": tester.context,
        "nodes": list(tester.variables),
        "regimes": regimes,
        "observed_regimes": list(tester.regimes),
        "pooled_skeleton": _pairs(pooled),
        "per_regime": per_regime,
        "union_reconstruction": _pairs(reunion),
        "certificates": [
            {
                "x": c.x,
                "y": c.y,
                "z": list(c.z),
                "regime": c.regime,
                "method": c.method,
                "p_value": c.p_value,
            }
            for c in certs
        ],
        "dot": dots,
    }
    if mode == "exact":
        # oracle orientations, so classify --mode oriented has a pooled graph to work from
        doc["union_directed"] = [list(e) for e in union_graph(s, solved).sorted_edges()]

    files = {"report.json": _json_doc(doc)}
    files.update(dots)
    _deliver(args, files, "report.json")
    return EXIT_OK


# --- classify ------------------------------------------------------------------------

def _require_key(doc: dict, key: str, where: str):
    if key not in doc:
        raise CliError("%s: missing key %r" % (where, key))
    return doc[key]


def _cmd_classify(args) -> int:
    _check_threads(args)
    where = "discovery report %r" % args.report
    try:
        doc = json.loads(_read_source(args.report, "report"))
    except json.JSONDecodeError as e:
        raise CliError("%s is not valid JSON: %s" % (where, e)) from None
    if not isinstance(doc, dict):
        raise CliError("%s: top level must be an object" % where)

    context = _require_key(doc, "context", where)
    nodes = _require_key(doc, "nodes", where)
    per_regime = _require_key(doc, "per_regime", where)
    if not isinstance(per_regime, dict) or not per_regime:
        raise CliError("%s: key 'per_regime' must be a non-empty object" % where)
    detect = {}
    for r, entry in per_regime.items():
        pairs = _require_key(entry, "detect", "%s, regime %r" % (where, r))
        detect[r] = UndirectedSkeleton(nodes, [tuple(p) for p in pairs])

    if args.mode == "oriented":
        if "union_directed" not in doc:
            raise CliError(
                "%s has no key 'union_directed'; oriented mode needs the "
                "directed pooled graph that exact-mode discover emits" % where
            )
        pooled = DirectedGraph(nodes, [tuple(e) for e in doc["union_directed"]])
    else:
        pairs = _require_key(doc, "pooled_skeleton", where)
        pooled = UndirectedSkeleton(nodes, [tuple(p) for p in pairs])

    report = classify_changes(
        pooled, detect, mode=args.mode, context=context, regimes=sorted(detect)
    )
    rows = report.rows()
    out_doc = {
        "command": "classify",
        "mode": report.mode,
        "context": report.context,
        "counts": report.counts(),
        "changes": {
            r: [
                {
                    "edge": list(c.edge),
                    "in_union": c.in_union,
                    "in_detect_r": c.in_detect_r,
                    "classification": c.classification,
                    "rule": c.rule,
                    "justification": c.justification,
                }
                for c in items
            ]
            for r, items in report.changes.items()
        },
        "violations": {
            r: [list(p) for p in pairs_] for r, pairs_ in report.violations.items()
        },
    }
    files = {
        "report.json": _json_doc(out_doc),
        "changes.csv": _csv_text(
            ["regime", "tail", "head", "classification", "rule", "justification"],
            [list(row) for row in rows],
        ),
    }
    _deliver(args, files, "report.json")
    return EXIT_OK


# --- transfer-test -------------------------------------------------------------------

def _cmd_transfer_test(args) -> int:
    _check_threads(args)
    data = Dataset.from_csv(_read_source(args.csv, "data"))
    z = tuple(t for t in (args.z or "").split(",") if t)
    cfg = TransferConfig(
        K=args.K,
        N=args.N,
        alpha=args.alpha,
        seed=_resolve_seed(args.seed),
        min_power=args.min_power,
    )
    verdict = transfer_evidence(
        data, args.x, args.y, z, args.r0, cfg,
        context=args.context, pooled_null=args.pooled_null,
    )
    details = dict(verdict.details)
    p_values = list(details.pop("per_replicate_p_values"))
    replicate_rows = [
        [k, p, p < cfg.alpha] for k, p in enumerate(p_values)
    ]
    doc = {
        "command": "transfer-test",
        "x": args.x,
        "y": args.y,
        "z": list(z),
        "r0": args.r0,
        "context": args.context,
        "config": {
            "K": cfg.K,
            "N": cfg.N,
            "alpha": cfg.alpha,
            "seed": cfg.seed,
            "min_power": cfg.min_power,
            "pooled_null": args.pooled_null,
        },
        "estimated_power_under_null": verdict.estimated_power_under_null,
        "observed_independent_in_r0": verdict.observed_independent_in_r0,
        "evidence_physical": verdict.evidence_physical,
        "details": details,
        "replicates": [
            {"index": k, "p_value": p, "rejects_null": bool(rej)}
            for k, p, rej in replicate_rows
        ],
    }
    files = {
        "report.json": _json_doc(doc),
        "replicates.csv": _csv_text(
            ["replicate", "p_value", "rejects_null"],
            [[k, p, str(bool(rej)).lower()] for k, p, rej in replicate_rows],
        ),
    }
    _deliver(args, files, "report.json")
    return EXIT_OK


# --- sample --------------------------------------------------------------------------

def _cmd_sample(args) -> int:
    _check_threads(args)
    s = load_scm(_read_source(args.scm, "model"))
    table = solve_all(s)
    data = draw_samples(s, args.n, _resolve_seed(args.seed), table)
    files = {"samples.csv": data.to_csv()}
    _deliver(args, files, "samples.csv")
    return EXIT_OK


# --- verify --------------------------------------------------------------------------

def _spec_from_file(path: str) -> RandomModelSpec:
    where = "spec file %r" % path
    try:
        doc = json.loads(_read_source(path, "--spec"))
    except json.JSONDecodeError as e:
        raise CliError("%s is not valid JSON: %s" % (where, e)) from None
    if not isinstance(doc, dict):
        raise CliError("%s: top level must be an object" % where)
    known = {"n_vars", "max_domain", "max_parents", "seed", "require"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise CliError("%s: unknown key(s) %s" % (where, ", ".join(map(repr, unknown))))
    kwargs = {k: doc[k] for k in ("n_vars", "max_domain", "max_parents", "seed") if k in doc}
    for k, v in kwargs.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise CliError("%s: key %r must be an integer" % (where, k))
    if "require" in doc:
        req = doc["require"]
        if not isinstance(req, dict):
            raise CliError("%s: key 'require' must be an object" % where)
        fields = {"solvable", "strongly_regime_acyclic", "R_faithful"}
        bad = sorted(set(req) - fields)
        if bad:
            raise CliError(
                "%s: unknown require key(s) %s" % (where, ", ".join(map(repr, bad)))
            )
        for k, v in req.items():
            if not isinstance(v, bool):
                raise CliError("%s: require key %r must be a boolean" % (where, k))
        kwargs["require"] = Requirements(**req)
    return RandomModelSpec(**kwargs)


def _cmd_verify(args) -> int:
    _check_threads(args)
    spec = _spec_from_file(args.spec) if args.spec else RandomModelSpec()
    seed = args.seed
    if seed is None and os.environ.get("CSI_GRAPHLAB_SEED") is not None:
        seed = _resolve_seed(None)

    fixture_results: dict[str, dict[str, str]] = {}
    fixture_failures: list[dict] = []
    for name in list_examples():
        s = get_example(name)
        solved = SolvedModel.of(s)
        statuses: dict[str, str] = {}
        for chk in DEFAULT_CHECKS:
            res = chk(s, solved)
            statuses[res.name] = (
                "skipped" if res.skipped else "passed" if res.passed else "failed"
            )
            if not res.passed:
                fixture_failures.append({
                    "fixture": name,
                    "check": res.name,
                    "witnesses": [dict(w) for w in res.witnesses],
                })
        fixture_results[name] = statuses

    summary = run_suite(args.count, spec=spec, seed=seed)
    ok = not fixture_failures and summary.ok
    doc = {
        "command": "verify",
        "ok": ok,
        "fixtures": fixture_results,
        "fixture_failures": fixture_failures,
        "suite": summary.to_dict(),
    }
    _deliver(args, {"report.json": _json_doc(doc)}, "report.json")
    return EXIT_OK if ok else EXIT_LAW_FAILURE


# --- corpus --------------------------------------------------------------------------

def _cmd_corpus(args) -> int:
    _check_threads(args)
    if args.action == "list":
        _deliver(args, {"corpus-list.txt": "\n".join(list_examples()) + "\n"},
                 "corpus-list.txt")
        return EXIT_OK
    if args.name is None:
        raise CliError("corpus export needs a fixture name (see 'corpus list')")
    try:
        s = get_example(args.name)
    except ValueError as e:
        raise CliError("corpus export: %s" % e) from None
    _deliver(args, {"model.scm": serialize_scm(s)}, "model.scm")
    return EXIT_OK


# --- parser --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR",
                        help="write output files into DIR instead of stdout")
    common.add_argument("--force", action="store_true",
                        help="overwrite existing files under --out")
    common.add_argument("--threads", type=int, default=1, metavar="N",
                        help="cap internal parallelism (pipelines are single-process)")

    parser = argparse.ArgumentParser(
        prog="csi-graphlab",
        description="Exact regime graphs, context-specific discovery, change "
                    "classification, and transfer evidence for finite categorical "
                    "models with a context variable.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-truth", parents=[common],
                       help="solve a model and emit every graph object")
    p.add_argument("scm", help="model JSON file, or - for stdin")
    p.add_argument("--full", action="store_true",
                   help="also emit counterfactual and audit graphs as DOT")
    p.set_defaults(handler=_cmd_ground_truth)

    p = sub.add_parser("discover", parents=[common],
                       help="skeleton discovery from a model or a dataset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--exact", metavar="SCM",
                     help="model JSON file for exact-oracle discovery, or -")
    src.add_argument("--data", metavar="CSV",
                     help="dataset CSV for G-test discovery, or -")
    p.add_argument("--alpha", type=float, help="test level for --data mode")
    p.add_argument("--regime", help="restrict per-context output to one context value")
    p.add_argument("--context", default="R",
                   help="context column name for --data mode (default R)")
    p.set_defaults(handler=_cmd_discover)

    p = sub.add_parser("classify", parents=[common],
                       help="label vanished edges from a discovery report")
    p.add_argument("report", help="discover output JSON, or - for stdin")
    p.add_argument("--mode", choices=("skeleton", "oriented"), default="skeleton",
                   help="evidence strength; oriented needs union_directed in the report")
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("transfer-test", parents=[common],
                       help="bootstrap evidence that a mechanism changed in one context")
    p.add_argument("csv", help="dataset CSV, or - for stdin")
    p.add_argument("--x", required=True, help="candidate cause column")
    p.add_argument("--y", required=True, help="outcome column")
    p.add_argument("--z", default="", help="comma-separated conditioning columns")
    p.add_argument("--r0", required=True, help="context value whose stratum lost the edge")
    p.add_argument("--K", type=int, default=200, help="bootstrap replicates (default 200)")
    p.add_argument("--N", type=int, default=2000, help="rows per replicate (default 2000)")
    p.add_argument("--alpha", type=float, default=0.05, help="test level (default 0.05)")
    p.add_argument("--seed", type=int, default=None,
                   help="replicate seed (default: CSI_GRAPHLAB_SEED or 0)")
    p.add_argument("--min-power", type=float, default=0.8, dest="min_power",
                   help="power gate for an evidence verdict (default 0.8)")
    p.add_argument("--context", default="R", help="context column name (default R)")
    p.add_argument("--pooled-null", action="store_true", dest="pooled_null",
                   help="estimate the null mechanism from all rows, not just other contexts")
    p.set_defaults(handler=_cmd_transfer_test)

    p = sub.add_parser("sample", parents=[common],
                       help="draw iid rows from a model's observable joint")
    p.add_argument("scm", help="model JSON file, or - for stdin")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, default=None,
                   help="sampling seed (default: CSI_GRAPHLAB_SEED or 0)")
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("verify", parents=[common],
                       help="run every law on the corpus and on random models")
    p.add_argument("--count", type=int, default=50,
                   help="number of random models (default 50)")
    p.add_argument("--seed", type=int, default=None,
                   help="suite seed (default: CSI_GRAPHLAB_SEED, else the spec seed)")
    p.add_argument("--spec", metavar="JSON",
                   help="random-model spec file overriding the defaults")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("corpus", parents=[common],
                       help="list built-in example models or export one")
    p.add_argument("action", choices=("list", "export"))
    p.add_argument("name", nargs="?", help="fixture name for export")
    p.set_defaults(handler=_cmd_corpus)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed the usage message
        return int(e.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
