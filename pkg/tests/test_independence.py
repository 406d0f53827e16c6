import math
from fractions import Fraction

import pytest

from csi_graphlab.corpus import get_example
from csi_graphlab.exact import SolvedModel, draw_samples, joint_pmf
from csi_graphlab.independence import (
    CiQuery,
    IndependenceError,
    ci_exact,
    conditional_mutual_information,
    g_test,
)
from csi_graphlab.scm import MechanismTable, NoiseSpec, Scm, VariableSpec


def intro_joint():
    return joint_pmf(get_example("intro"))


def two_coins():
    variables = (
        VariableSpec("R", ("0", "1")),
        VariableSpec("A", ("0", "1")),
        VariableSpec("B", ("0", "1")),
    )
    half = Fraction(1, 2)
    noises = {v.name: NoiseSpec(v.name, (("0", half), ("1", half))) for v in variables}
    mechanisms = {
        v.name: MechanismTable.from_function(v.name, (), (), ["0", "1"], lambda n: n)
        for v in variables
    }
    return Scm(variables, "R", noises, mechanisms)


def test_query_validation():
    with pytest.raises(IndependenceError):
        CiQuery("X", "X")
    with pytest.raises(IndependenceError):
        CiQuery("X", "Y", ("X",))
    with pytest.raises(IndependenceError):
        ci_exact(intro_joint(), CiQuery("T", "Y", regime="0"), context=None)
    with pytest.raises(IndependenceError):
        ci_exact(intro_joint(), CiQuery("T", "R", regime="0"), context="R")


def test_exact_verdicts_on_intro():
    p = intro_joint()
    masked0 = ci_exact(p, CiQuery("T", "Y", regime="0"), context="R")
    assert masked0.independent and masked0.p_value == 1.0
    masked1 = ci_exact(p, CiQuery("T", "Y", regime="1"), context="R")
    assert not masked1.independent and masked1.p_value == 0.0
    pooled = ci_exact(p, CiQuery("T", "Y"))
    assert not pooled.independent
    given_r = ci_exact(p, CiQuery("T", "Y", ("R",)))
    assert not given_r.independent  # the r=1 stratum breaks factorization


def test_exact_verdict_is_per_stratum():
    # Dependence confined to one regime stratum still fails the query.
    p = joint_pmf(get_example("non-markov(1/3)"))
    v = ci_exact(p, CiQuery("X", "Y", regime="b0"), context="R")
    assert not v.independent
    mi = conditional_mutual_information(p, CiQuery("X", "Y", regime="b0"), context="R")
    assert abs(mi - 0.0566) < 5e-4


def test_unrelated_variable_leaves_verdicts_unchanged():
    base = two_coins()
    p = joint_pmf(base)
    for q in [CiQuery("A", "B"), CiQuery("A", "B", ("R",))]:
        assert ci_exact(p, q).independent
    # MI of independent coins is exactly zero
    assert conditional_mutual_information(p, CiQuery("A", "B")) == 0.0


def test_zero_probability_regime_errors():
    p = joint_pmf(get_example("p1-limit"))
    with pytest.raises(IndependenceError):
        ci_exact(p, CiQuery("T", "Y", regime="1"), context="R")


def test_mi_nonnegative_and_zero_iff_independent():
    p = intro_joint()
    mi0 = conditional_mutual_information(p, CiQuery("T", "Y", regime="0"), context="R")
    assert mi0 == 0.0
    mi1 = conditional_mutual_information(p, CiQuery("T", "Y", regime="1"), context="R")
    assert mi1 > 0.01
    # hand value: given R=1, T uniform on {-1,+1}; Y spreads by eta
    # I(T;Y|R=1) = H(Y|R=1) - H(Y|T,R=1) = (1.5 - 1) * ln 2
    assert abs(mi1 - 0.5 * math.log(2)) < 1e-12


def test_g_test_flags_dependence_with_enough_data():
    s = get_example("intro")
    d = draw_samples(s, 10_000, seed=5)
    dep = g_test(d, CiQuery("T", "Y", regime="1"), alpha=0.05, context="R")
    assert not dep.independent
    assert dep.p_value < 1e-6


def test_g_test_degenerate_stratum_returns_independent_with_warning():
    s = get_example("intro")
    d = draw_samples(s, 4_000, seed=5)
    v = g_test(d, CiQuery("T", "Y", regime="0"), alpha=0.05, context="R")
    assert v.independent and v.p_value == 1.0
    assert v.warning is not None and "no qualifying strata" in v.warning


def test_g_test_skips_thin_strata():
    s = get_example("intro")
    d = draw_samples(s, 40, seed=2)
    v = g_test(d, CiQuery("T", "Y", regime="1"), alpha=0.05, context="R",
               min_expected=10_000.0)
    assert v.independent and v.p_value == 1.0
    assert v.warning is not None


def test_g_test_calibration_under_null():
    s = two_coins()
    rejections = 0
    trials = 60
    for seed in range(trials):
        d = draw_samples(s, 2000, seed=seed)
        v = g_test(d, CiQuery("A", "B"), alpha=0.05)
        rejections += 0 if v.independent else 1
    assert rejections / trials < 0.15


def test_g_test_agrees_with_exact_oracle_when_signal_is_strong():
    m = SolvedModel.of(get_example("non-markov(1/3)"))
    d = draw_samples(m.scm, 10_000, seed=9, table=m.table)
    sampled = g_test(d, CiQuery("X", "Y", regime="b0"), alpha=0.05, context="R")
    exact = ci_exact(m.joint, CiQuery("X", "Y", regime="b0"), context="R")
    assert sampled.independent == exact.independent == False  # noqa: E712


def test_g_test_rejects_bad_alpha_and_empty_selection():
    d = draw_samples(get_example("intro"), 100, seed=1)
    with pytest.raises(IndependenceError):
        g_test(d, CiQuery("T", "Y"), alpha=0.0)
    with pytest.raises(IndependenceError):
        g_test(d, CiQuery("T", "Y", regime="7"), alpha=0.05, context="R")
