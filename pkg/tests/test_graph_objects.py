import pytest

from csi_graphlab.corpus import get_example, list_examples
from csi_graphlab.exact import SolvedModel
from csi_graphlab.graph_objects import (
    check_R_faithfulness,
    check_strong_R_faithfulness,
    counterfactual_graph,
    descriptive_graph,
    ground_truth,
    ident_graph,
    is_strongly_regime_acyclic,
    is_weakly_regime_acyclic,
    mechanism_graph,
    observable_graph,
    physical_graph,
    union_graph,
)
from csi_graphlab.graphs import union_graphs


def edges(g):
    return sorted(g.edges)


def solved(name):
    return SolvedModel.of(get_example(name))


# Expected edge sets derived by hand from each fixture's mechanism tables
# and exact distribution (support-restricted non-constancy per regime).
EXPECTED = {
    "intro": {
        "union": [("R", "T"), ("T", "Y")],
        "descriptive": {"0": [("R", "T")], "1": [("R", "T"), ("T", "Y")]},
        "physical": {
            "0": [("R", "T"), ("T", "Y")],
            "1": [("R", "T"), ("T", "Y")],
        },
        "counterfactual": {"0": [("R", "T")], "1": [("R", "T"), ("T", "Y")]},
        "ident": {"0": [("R", "T")], "1": [("R", "T"), ("T", "Y")]},
    },
    "intro-mediator": {
        "union": [("M", "T"), ("R", "M"), ("T", "Y")],
        "descriptive": {
            "0": [("R", "M")],
            "1": [("M", "T"), ("R", "M"), ("T", "Y")],
        },
        "physical": {
            "0": [("M", "T"), ("R", "M"), ("T", "Y")],
            "1": [("M", "T"), ("R", "M"), ("T", "Y")],
        },
    },
    "exo-gate": {
        "union": [("R", "Y"), ("X", "Y")],
        "descriptive": {"0": [("R", "Y")], "1": [("R", "Y"), ("X", "Y")]},
        "physical": {"0": [("R", "Y")], "1": [("R", "Y"), ("X", "Y")]},
        "counterfactual": {"0": [("R", "Y")], "1": [("R", "Y"), ("X", "Y")]},
        "ident": {"0": [("R", "Y")], "1": [("R", "Y"), ("X", "Y")]},
    },
    "non-markov(1/3)": {
        "union": [("X", "R"), ("X", "Y"), ("Y", "R")],
        "descriptive": {
            "a0": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "a1": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "b0": [("X", "R"), ("Y", "R")],
            "b1": [("X", "R"), ("Y", "R")],
        },
        "physical": {
            "a0": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "a1": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "b0": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "b1": [("X", "R"), ("X", "Y"), ("Y", "R")],
        },
        "ident": {
            "b0": [("X", "R"), ("X", "Y"), ("Y", "R")],
            "b1": [("X", "R"), ("X", "Y"), ("Y", "R")],
        },
    },
    "cf-example": {
        "union": [("R", "Y"), ("X", "R")],
        "descriptive": {
            "0": [("R", "Y"), ("X", "R")],
            "1": [("R", "Y"), ("X", "R")],
        },
        # The pair (X=+1, R=1) is never realized, so the per-value graph at
        # r=1 cannot claim an X->Y difference even though the intervened
        # model would expose one; only the counterfactual graph keeps it.
        "physical": {
            "0": [("R", "Y"), ("X", "R")],
            "1": [("R", "Y"), ("X", "R")],
        },
        "counterfactual": {"1": [("R", "Y"), ("X", "R"), ("X", "Y")]},
    },
    "not-strong-faithful": {
        "union": [("R", "X"), ("X", "Y")],
        "descriptive": {"0": [("R", "X")], "1": [("R", "X")]},
        "physical": {
            "0": [("R", "X"), ("X", "Y")],
            "1": [("R", "X"), ("X", "Y")],
        },
        "ident": {"0": [("R", "X")], "1": [("R", "X")]},
    },
    "p1-limit": {
        "union": [],
        "descriptive": {"0": []},
        "physical": {"0": []},
    },
    "fig1-change-overlap": {
        "union": [("C", "Y"), ("X", "Y")],
        "descriptive": {"0": [("C", "Y")], "1": [("C", "Y"), ("X", "Y")]},
        "physical": {"0": [("C", "Y")], "1": [("C", "Y"), ("X", "Y")]},
    },
    "fig1-nochange-gated": {
        "union": [("C", "X"), ("X", "Y")],
        "descriptive": {"0": [("C", "X")], "1": [("C", "X"), ("X", "Y")]},
        "physical": {
            "0": [("C", "X"), ("X", "Y")],
            "1": [("C", "X"), ("X", "Y")],
        },
    },
    "fig1-nochange-overlap": {
        "union": [("X", "Y")],
        "descriptive": {"0": [("X", "Y")], "1": [("X", "Y")]},
        "physical": {"0": [("X", "Y")], "1": [("X", "Y")]},
    },
    "fig1-change-gated": {
        "union": [("C", "X"), ("X", "Y")],
        "descriptive": {"0": [("C", "X")], "1": [("C", "X"), ("X", "Y")]},
        # The Y mechanism does change with C, but the change is confined to
        # an X state gated off in C=0, so the pooled graph carries no C -> Y
        # edge and the per-regime physical graphs cannot drop X -> Y.
        "physical": {"0": [("C", "X"), ("X", "Y")], "1": [("C", "X"), ("X", "Y")]},
    },
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_frozen_graph_families(name):
    m = solved(name)
    want = EXPECTED[name]
    assert edges(union_graph(m.scm, m)) == want["union"]
    for r, e in want["descriptive"].items():
        assert edges(descriptive_graph(m.scm, r, m)) == e, ("descriptive", r)
    for r, e in want["physical"].items():
        assert edges(physical_graph(m.scm, r, m)) == e, ("physical", r)
    for r, e in want.get("counterfactual", {}).items():
        assert edges(counterfactual_graph(m.scm, r, m)) == e, ("cf", r)
    for r, e in want.get("ident", {}).items():
        assert edges(ident_graph(m.scm, r, m)) == e, ("ident", r)


def test_cf_edge_absent_from_union():
    m = solved("cf-example")
    assert ("X", "Y") in counterfactual_graph(m.scm, "1", m).edges
    assert ("X", "Y") not in union_graph(m.scm, m).edges


def test_union_is_union_of_physical():
    for name in sorted(EXPECTED):
        m = solved(name)
        per_regime = [physical_graph(m.scm, r, m) for r in m.regimes]
        assert union_graphs(per_regime).edges == union_graph(m.scm, m).edges, name


def test_descriptive_union_gap_matches_faithfulness():
    # Exactly one fixture misses union edges across contexts, and it is the
    # one whose strong faithfulness check fails.
    for name in sorted(EXPECTED):
        m = solved(name)
        pooled = union_graphs([descriptive_graph(m.scm, r, m) for r in m.regimes])
        gap = sorted(set(union_graph(m.scm, m).edges) - set(pooled.edges))
        if name == "not-strong-faithful":
            assert gap == [("X", "Y")]
        else:
            assert gap == [], name


@pytest.mark.parametrize("name", list_examples())
def test_all_fixtures_strongly_regime_acyclic(name):
    m = solved(name)
    assert is_weakly_regime_acyclic(m.scm, m)
    assert is_strongly_regime_acyclic(m.scm, m)


def test_mechanism_graph_reads_raw_tables():
    m = solved("exo-gate")
    assert edges(mechanism_graph(m.scm)) == [("R", "Y"), ("X", "Y")]


def test_observable_graph_prunes_off_support_arguments():
    # Restricted to R=0 rows, Y no longer responds to X.
    m = solved("cf-example")
    cond = m.joint.conditional({"R": "0"}).marginal(("X", "R"))
    g = observable_graph(m.scm, cond)
    assert ("X", "Y") not in g.edges


def test_physical_graph_forces_context_argument():
    # Under the off regime the gate is closed for every pooled input row.
    m = solved("exo-gate")
    assert edges(physical_graph(m.scm, "0", m)) == [("R", "Y")]


def test_ground_truth_bundle_shape():
    m = solved("intro")
    gt = ground_truth(m.scm, m)
    assert gt.regimes == ("0", "1")
    assert edges(gt.union) == EXPECTED["intro"]["union"]
    for r in gt.regimes:
        per = gt.per_regime[r]
        assert edges(per.descriptive) == EXPECTED["intro"]["descriptive"][r]
        assert edges(per.physical) == EXPECTED["intro"]["physical"][r]
        assert edges(per.counterfactual) == EXPECTED["intro"]["counterfactual"][r]
        assert edges(per.ident) == EXPECTED["intro"]["ident"][r]
    assert gt.weakly_regime_acyclic and gt.strongly_regime_acyclic


def test_unknown_regime_rejected():
    m = solved("intro")
    with pytest.raises(Exception):
        descriptive_graph(m.scm, "7", m)
    with pytest.raises(Exception):
        physical_graph(get_example_solved_regimeless(), "1", None)


def get_example_solved_regimeless():
    # p1-limit gives regime "1" zero probability.
    return get_example("p1-limit")


def test_faithfulness_verdicts():
    for name in ["intro", "exo-gate", "non-markov(1/3)"]:
        m = solved(name)
        rep = check_R_faithfulness(m.scm, m)
        assert rep.holds, name
        strong = check_strong_R_faithfulness(m.scm, m)
        assert strong.holds, name
    m = solved("not-strong-faithful")
    assert check_R_faithfulness(m.scm, m).holds
    strong = check_strong_R_faithfulness(m.scm, m)
    assert not strong.holds
    assert strong.rewrite_witnesses == [
        {"variable": "Y", "dropped": "X", "parents": ["R"]}
    ]
