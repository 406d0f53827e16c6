"""Built-in example models.

Each fixture is a small finite-category SCM with a context variable, chosen
to exercise one specific behavior: context-specific edge loss, physically
removed mechanisms, masked dependence that no conditioning set removes,
counterfactual-only edges, faithfulness failure, a single-context limit, and
the four transfer-test scenarios (mechanism change vs support gating).
"""

from __future__ import annotations

from fractions import Fraction

from .scm import MechanismTable, NoiseSpec, Scm, ScmError, VariableSpec

__all__ = ["list_examples", "get_example"]


def _uniform(variable: str, labels: list[str]) -> NoiseSpec:
    p = Fraction(1, len(labels))
    return NoiseSpec(variable=variable, pmf=tuple((lbl, p) for lbl in labels))


def _weighted(variable: str, pairs: list[tuple[str, Fraction]]) -> NoiseSpec:
    return NoiseSpec(variable=variable, pmf=tuple(pairs))


def _intro(p_r1: Fraction = Fraction(1, 2)) -> Scm:
    """Chain R -> T -> Y where the context pins T at one value in regime 0.

    In regime 0 the T mechanism ignores its noise and outputs -1, so the
    T -> Y edge is invisible there descriptively although the Y mechanism
    never changes.
    """
    variables = (
        VariableSpec("R", ("0", "1")),
        VariableSpec("T", ("-1", "+1")),
        VariableSpec("Y", ("0", "1", "2")),
    )
    noises = {
        "R": _weighted("R", [("0", 1 - p_r1), ("1", p_r1)]),
        "T": _uniform("T", ["0", "1"]),
        "Y": _uniform("Y", ["0", "1"]),
    }
    mechanisms = {
        "R": MechanismTable.from_function("R", (), (), ["0", "1"], lambda n: n),
        "T": MechanismTable.from_function(
            "T", ("R",), [("0", "1")], ["0", "1"],
            lambda r, n: "-1" if r == "0" else ("-1" if n == "0" else "+1"),
        ),
        "Y": MechanismTable.from_function(
            "Y", ("T",), [("-1", "+1")], ["0", "1"],
            lambda t, n: str((1 if t == "+1" else 0) + int(n)),
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


def _intro_mediator() -> Scm:
    """Variant of the intro chain with the context acting through a mediator M."""
    variables = (
        VariableSpec("R", ("0", "1")),
        VariableSpec("M", ("0", "1")),
        VariableSpec("T", ("-1", "+1")),
        VariableSpec("Y", ("0", "1", "2")),
    )
    noises = {
        "R": _uniform("R", ["0", "1"]),
        "M": _uniform("M", ["0", "1"]),
        "T": _uniform("T", ["0", "1"]),
        "Y": _uniform("Y", ["0", "1"]),
    }
    mechanisms = {
        "R": MechanismTable.from_function("R", (), (), ["0", "1"], lambda n: n),
        "M": MechanismTable.from_function(
            "M", ("R",), [("0", "1")], ["0", "1"],
            lambda r, n: "1" if (r == "1" and n == "1") else "0",
        ),
        "T": MechanismTable.from_function(
            "T", ("M",), [("0", "1")], ["0", "1"],
            lambda m, n: "-1" if m == "0" else ("-1" if n == "0" else "+1"),
        ),
        "Y": MechanismTable.from_function(
            "Y", ("T",), [("-1", "+1")], ["0", "1"],
            lambda t, n: str((1 if t == "+1" else 0) + int(n)),
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


_LETTERS = ("a0", "a1", "b0", "b1")


def _non_markov(p: Fraction) -> Scm:
    """Endogenous context with a masked X-Y dependence no conditioning set removes.

    Within context b0 the Y mechanism is constant in X, yet X and Y stay
    dependent given the context because selecting R = b0 couples the noises
    (the coupling strength needs p != 1/2).  The pair is therefore kept by
    causally-minimal detection although it leaves the per-context graph.
    """
    if not (0 <= p <= 1):
        raise ScmError("noise probability must lie in [0, 1], got %s" % (p,))

    def letter(lbl: str) -> str:
        return lbl[0]

    def idx(lbl: str) -> int:
        return int(lbl[1])

    variables = (
        VariableSpec("X", _LETTERS),
        VariableSpec("Y", _LETTERS),
        VariableSpec("R", _LETTERS),
    )
    noises = {
        "X": _uniform("X", list(_LETTERS)),
        "Y": _uniform("Y", ["0", "1"]),
        "R": _weighted("R", [("0", 1 - p), ("1", p)]),
    }
    mechanisms = {
        "X": MechanismTable.from_function("X", (), (), list(_LETTERS), lambda n: n),
        "Y": MechanismTable.from_function(
            "Y", ("X",), [_LETTERS], ["0", "1"],
            lambda x, n: ("a%d" % (idx(x) ^ int(n))) if letter(x) == "a" else ("b%s" % n),
        ),
        "R": MechanismTable.from_function(
            "R", ("X", "Y"), [_LETTERS, _LETTERS], ["0", "1"],
            lambda x, y, n: "%s%d" % (letter(x), int(n) ^ idx(x) ^ idx(y)),
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


def _exo_gate() -> Scm:
    """Exogenous context that physically removes the X -> Y mechanism edge at R=0."""
    variables = (
        VariableSpec("R", ("0", "1")),
        VariableSpec("X", ("0", "1")),
        VariableSpec("Y", ("0", "1")),
    )
    noises = {
        "R": _uniform("R", ["0", "1"]),
        "X": _uniform("X", ["0", "1"]),
        "Y": _weighted("Y", [("0", Fraction(3, 4)), ("1", Fraction(1, 4))]),
    }
    mechanisms = {
        "R": MechanismTable.from_function("R", (), (), ["0", "1"], lambda n: n),
        "X": MechanismTable.from_function("X", (), (), ["0", "1"], lambda n: n),
        "Y": MechanismTable.from_function(
            "Y", ("R", "X"), [("0", "1"), ("0", "1")], ["0", "1"],
            lambda r, x, n: str(int(x) ^ int(n)) if r == "1" else n,
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


def _cf_example() -> Scm:
    """X gates its own visibility: X affects Y only where R=1, never observed with X=+1.

    The combination (X=+1, R=1) has probability zero, so the union graph has
    no X -> Y edge, yet intervening on the context to 1 makes it appear in
    the counterfactual graph.
    """
    variables = (
        VariableSpec("X", ("-1", "+1")),
        VariableSpec("R", ("0", "1")),
        VariableSpec("Y", ("0", "1", "2", "3")),
    )
    noises = {
        "X": _uniform("X", ["-1", "+1"]),
        "R": _uniform("R", ["0", "1"]),
        "Y": _uniform("Y", ["0", "1"]),
    }
    mechanisms = {
        "X": MechanismTable.from_function("X", (), (), ["-1", "+1"], lambda n: n),
        "R": MechanismTable.from_function(
            "R", ("X",), [("-1", "+1")], ["0", "1"],
            lambda x, n: n if x == "-1" else "0",
        ),
        "Y": MechanismTable.from_function(
            "Y", ("X", "R"), [("-1", "+1"), ("0", "1")], ["0", "1"],
            lambda x, r, n: n if r == "0" else str(1 + (1 if x == "+1" else 0) + int(n)),
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


def _not_strong_faithful() -> Scm:
    """Context splits the support of X so Y's mechanism re-expresses through R.

    Y depends on the sign of X, and the two context values confine X to one
    sign each: per-context graphs lose X -> Y in every regime, their union is
    strictly below the pooled graph, and an alternative mechanism with parent
    R reproduces the observable joint exactly.
    """
    variables = (
        VariableSpec("R", ("0", "1")),
        VariableSpec("X", ("-2", "-1", "+1", "+2")),
        VariableSpec("Y", ("0", "1", "2")),
    )
    noises = {
        "R": _uniform("R", ["0", "1"]),
        "X": _uniform("X", ["0", "1"]),
        "Y": _uniform("Y", ["0", "1"]),
    }
    mechanisms = {
        "R": MechanismTable.from_function("R", (), (), ["0", "1"], lambda n: n),
        "X": MechanismTable.from_function(
            "X", ("R",), [("0", "1")], ["0", "1"],
            lambda r, n: ("-2" if n == "0" else "-1") if r == "0" else ("+1" if n == "0" else "+2"),
        ),
        "Y": MechanismTable.from_function(
            "Y", ("X",), [("-2", "-1", "+1", "+2")], ["0", "1"],
            lambda x, n: str((1 if x in ("+1", "+2") else 0) + int(n)),
        ),
    }
    return Scm(variables, "R", noises, mechanisms)


def _p1_limit() -> Scm:
    """Intro chain with the context pinned to one value: a single attained regime."""
    return _intro(p_r1=Fraction(0))


def _fig1(change: bool, gated: bool) -> Scm:
    """Transfer-test scenario grid: mechanism change at C=0 vs support gating.

    The Y mechanism is flat on X in {0, 1} and jumps at X = 2.  `gated`
    confines X to the flat region when C=0; `change` replaces Y's mechanism
    at C=0 by a constant one.  In every variant X and Y test independent
    within C=0; they differ in whether that reflects a physical change.
    """
    x_dom = ("0", "1", "2")
    variables = (
        VariableSpec("C", ("0", "1")),
        VariableSpec("X", x_dom),
        VariableSpec("Y", ("0", "1")),
    )
    noises = {
        "C": _uniform("C", ["0", "1"]),
        "X": _uniform("X", ["0", "1", "2"]),
        "Y": _weighted("Y", [("0", Fraction(7, 8)), ("1", Fraction(1, 8))]),
    }

    def base(x: str, n: str) -> str:
        return str((1 if x == "2" else 0) ^ int(n))

    mechanisms = {
        "C": MechanismTable.from_function("C", (), (), ["0", "1"], lambda n: n),
    }
    if gated:
        mechanisms["X"] = MechanismTable.from_function(
            "X", ("C",), [("0", "1")], ["0", "1", "2"],
            lambda c, n: n if (c == "1" or n in ("0", "1")) else "0",
        )
    else:
        mechanisms["X"] = MechanismTable.from_function(
            "X", (), (), ["0", "1", "2"], lambda n: n,
        )
    if change:
        mechanisms["Y"] = MechanismTable.from_function(
            "Y", ("C", "X"), [("0", "1"), x_dom], ["0", "1"],
            lambda c, x, n: base(x, n) if c == "1" else n,
        )
    else:
        mechanisms["Y"] = MechanismTable.from_function(
            "Y", ("X",), [x_dom], ["0", "1"], base,
        )
    return Scm(variables, "C", noises, mechanisms)


_BUILDERS = {
    "intro": lambda: _intro(),
    "intro-mediator": _intro_mediator,
    "exo-gate": _exo_gate,
    "cf-example": _cf_example,
    "not-strong-faithful": _not_strong_faithful,
    "p1-limit": _p1_limit,
    "fig1-nochange-overlap": lambda: _fig1(change=False, gated=False),
    "fig1-nochange-gated": lambda: _fig1(change=False, gated=True),
    "fig1-change-overlap": lambda: _fig1(change=True, gated=False),
    "fig1-change-gated": lambda: _fig1(change=True, gated=True),
}


def list_examples() -> list[str]:
    """All fixture names, sorted; the masked-dependence family at its default strength."""
    return sorted(list(_BUILDERS) + ["non-markov(1/3)"])


def get_example(name: str) -> Scm:
    """Build a fixture by name; `non-markov(p)` accepts any rational p in [0, 1]."""
    if name.startswith("non-markov(") and name.endswith(")"):
        inner = name[len("non-markov("):-1]
        try:
            p = Fraction(inner)
        except (ValueError, ZeroDivisionError):
            raise ScmError("bad probability %r in %r" % (inner, name)) from None
        return _non_markov(p)
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ScmError(
            "unknown example %r; available: %s" % (name, ", ".join(list_examples()))
        ) from None
    return builder()
