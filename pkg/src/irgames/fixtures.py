"""Small reference games and bidding specs used by the tests, docs and CLI."""
from fractions import Fraction

from .game import MAX, MIN, Chance, Control, GameTree, Leaf


def g1() -> GameTree:
    """One-player absent-minded game: Max plays twice in the same infoset ``I``."""
    return GameTree.build(
        Control(MAX, "I", [
            ("a", Control(MAX, "I", [("a", Leaf(0)), ("b", Leaf(1))])),
            ("b", Leaf(0)),
        ]))


def g2() -> GameTree:
    """Min moves first (infoset ``r``); Max forgets whether she saw u1 or u2 at ``u34``."""
    return GameTree.build(
        Control(MIN, "r", [
            ("A", Control(MAX, "u1", [
                ("a", Leaf(1)),
                ("b", Control(MAX, "u34", [("a", Leaf(2)), ("b", Leaf(0))])),
            ])),
            ("B", Control(MAX, "u2", [
                ("a", Control(MAX, "u34", [("a", Leaf(0)), ("b", Leaf(2))])),
                ("b", Leaf(1)),
            ])),
        ]))


def chance_chain() -> GameTree:
    """Two nested uniform chance nodes over leaves 1..4 (expected value 5/2)."""
    half = Fraction(1, 2)
    return GameTree.build(Chance([
        (half, Chance([(half, Leaf(1)), (half, Leaf(2))])),
        (half, Chance([(half, Leaf(3)), (half, Leaf(4))])),
    ]))


FIG5_SPEC = """\
n=5 m=4
secrets N: ♠ ♦
secrets E: ⊥
secrets S: ♠ ♦
secrets W: ⊥
prob ♠ ⊥ ♠ ⊥ = 1/4
prob ♠ ⊥ ♦ ⊥ = 1/4
prob ♦ ⊥ ♠ ⊥ = 1/4
prob ♦ ⊥ ♦ ⊥ = 1/4
theta N ♠ ⊥ ♠ ⊥ = 4
theta N ♠ ⊥ ♦ ⊥ = 2
theta S ♠ ⊥ ♠ ⊥ = 2
theta S ♦ ⊥ ♠ ⊥ = 2
"""

FIG6_SPEC = """\
n=5 m=5
secrets N: h1 h2 h3 h4 h5 h6
secrets E: ⊥
secrets S: ⊥
secrets W: ⊥
prob h1 ⊥ ⊥ ⊥ = 1/6
prob h2 ⊥ ⊥ ⊥ = 1/6
prob h3 ⊥ ⊥ ⊥ = 1/6
prob h4 ⊥ ⊥ ⊥ = 1/6
prob h5 ⊥ ⊥ ⊥ = 1/6
prob h6 ⊥ ⊥ ⊥ = 1/6
theta N h1 ⊥ ⊥ ⊥ = 3
theta N h2 ⊥ ⊥ ⊥ = 4
theta N h3 ⊥ ⊥ ⊥ = 5
theta E h1 ⊥ ⊥ ⊥ = 1
theta E h2 ⊥ ⊥ ⊥ = 3
theta E h3 ⊥ ⊥ ⊥ = 2
theta E h4 ⊥ ⊥ ⊥ = 2
theta E h5 ⊥ ⊥ ⊥ = 2
theta E h6 ⊥ ⊥ ⊥ = 4
theta S h4 ⊥ ⊥ ⊥ = 3
theta S h5 ⊥ ⊥ ⊥ = 4
theta S h6 ⊥ ⊥ ⊥ = 5
"""


def fig5_spec():
    from .bridge import parse_spec
    return parse_spec(FIG5_SPEC)


def fig6_spec():
    from .bridge import parse_spec
    return parse_spec(FIG6_SPEC)
