"""Constructions between polynomials and games, plus hardness gadgets."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import GameError, ParseError
from .game import (CHANCE, LEAF, MAX, MIN, Chance, Control, GameTree, Leaf,
                   format_game)
from .poly import (GeneralPoly, MultilinearPoly, RecallWitness, is_perfect_recall,
                   parse_general)

LEFT, RIGHT = "l", "r"


class NotPerfectRecallError(GameError):
    def __init__(self, failing):
        self.failing = failing
        super().__init__(f"polynomial does not have perfect recall (stuck at {failing})")


def poly_to_game(F: GeneralPoly, player: int = MAX) -> GameTree:
    """One-player game whose payoff under "play l with probability x" equals ``F(x)``.

    A uniform chance root picks one of the k terms; term ``c * x^2 * y`` becomes
    the path x, x, y of control nodes (infoset = variable) ending in a leaf
    worth ``k*c``.  Every ``r`` edge exits to a zero leaf.
    """
    if F.is_zero():
        raise GameError("empty polynomial")
    terms = F.sorted_terms()
    k = len(terms)
    branches = []
    for mono, c in terms:
        sub = Leaf(k * c)
        for v, e in reversed(mono):
            for _ in range(e):
                sub = Control(player, v, [(LEFT, sub), (RIGHT, Leaf(0))])
        branches.append((Fraction(1, k), sub))
    return GameTree.build(Chance(branches))


def pr_poly_to_game(f, witness: RecallWitness | None = None, player: int = MAX) -> GameTree:
    """Perfect-information game with payoff polynomial ≡ ``f``.

    Follows the witness tree: a pivot ``x`` with parts ``f0, f1, f2`` becomes a
    fair coin between (control node ``x`` over games of f0/f1) and the game of
    f2, with all leaves of that subtree doubled.
    """
    if witness is None:
        check = is_perfect_recall(f)
        if not check:
            raise NotPerfectRecallError(check.failing)
        witness = check.witness

    def build(w: RecallWitness, scale: Fraction):
        d = w.decomposition
        if d is None:
            g = w.poly.full_expand()
            vs = g.variables
            if not vs:
                return Leaf(scale * g.terms.get(frozenset(), Fraction(0)))
            (x,) = vs
            base = g.terms.get(frozenset(), Fraction(0))
            slope = g.terms.get(frozenset([(x, False)]), Fraction(0))
            return Control(player, x, [(LEFT, Leaf(scale * (base + slope))), (RIGHT, Leaf(scale * base))])
        w0, w1, w2 = w.parts
        s = scale * 2
        half = Fraction(1, 2)
        return Chance([
            (half, Control(player, d.pivot, [(LEFT, build(w0, s)), (RIGHT, build(w1, s))])),
            (half, build(w2, s)),
        ])

    return GameTree.build(build(witness, Fraction(1)))


def game_to_poly(game: GameTree, player: int | None = None) -> GeneralPoly:
    """Symbolic payoff with one variable per infoset (probability of its first move).

    With ``player`` given, the other player must be absent from the game.
    Without it, the infosets of both players stay symbolic.
    """
    active = game.active_players()
    if player is not None and active - {player}:
        raise GameError("fix one side first: the game has two active players")
    for iid, info in game.infosets.items():
        if len(info.moves) > 2:
            raise GameError(f"infoset {iid!r} has more than two moves; symbolic payoff needs binary moves")
    total = GeneralPoly()
    for leaf, edges in game.leaf_paths.items():
        u = game.nodes[leaf].utility
        if not u:
            continue
        term = GeneralPoly.const(u)
        for node, k in edges:
            n = game.nodes[node]
            if n.kind == CHANCE:
                term = term * n.labels[k]
            elif len(n.labels) == 2:
                x = GeneralPoly.var(n.infoset)
                term = term * (x if k == 0 else 1 - x)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# Quantified formulas

RELATIONS = (">=", ">")


@dataclass(frozen=True)
class FormulaText:
    exists: tuple
    forall: tuple
    matrix: GeneralPoly
    relation: str = ">="
    threshold: Fraction = Fraction(0)

    def __str__(self):
        return format_formula(self)


def _domain(vs) -> str:
    return " & ".join(f"0 <= {v} & {v} <= 1" for v in vs)


def format_formula(phi: FormulaText) -> str:
    lhs = phi.matrix - phi.threshold if phi.threshold else phi.matrix
    core = f"({lhs} {phi.relation} 0)"
    if phi.forall:
        core = f"({_domain(phi.forall)}) -> {core}"
        if phi.exists:
            core = f"({core})"
    if phi.exists:
        core = f"({_domain(phi.exists)}) & {core}"
    prefix = ""
    if phi.exists:
        prefix += "exists " + " ".join(phi.exists) + ". "
    if phi.forall:
        prefix += "forall " + " ".join(phi.forall) + ". "
    return prefix + core


def encode_maxmin_formula(game: GameTree, threshold=0, relation: str = ">=") -> FormulaText:
    """∃ Max-variables ∀ Min-variables: payoff ``relation`` threshold."""
    if relation not in RELATIONS:
        raise GameError(f"relation must be one of {RELATIONS}")
    poly = game_to_poly(game)
    return FormulaText(tuple(game.player_infosets(MAX)), tuple(game.player_infosets(MIN)),
                       poly, relation, Fraction(threshold))


_PREFIX_RE = re.compile(r"^(exists|forall)\s+([^.]+?)\.\s*")


def parse_formula(text: str) -> FormulaText:
    """Inverse of :func:`format_formula` (threshold folded into the matrix)."""
    rest = text.strip()
    blocks = {}
    while True:
        m = _PREFIX_RE.match(rest)
        if not m:
            break
        if m.group(1) in blocks or ("exists" in blocks and m.group(1) == "exists"):
            raise ParseError(f"repeated {m.group(1)} block")
        blocks[m.group(1)] = tuple(m.group(2).split())
        rest = rest[m.end():]
    ex, fa = blocks.get("exists", ()), blocks.get("forall", ())
    m = re.search(r"\(([^()]*?)\s*(>=|>)\s*0\)\)*$", rest)
    if not m:
        raise ParseError("could not find the '(poly >= 0)' matrix")
    matrix = parse_general(m.group(1))
    phi = FormulaText(ex, fa, matrix, m.group(2))
    if format_formula(phi) != text.strip():
        raise ParseError("formula is not in canonical form")
    return phi


# ---------------------------------------------------------------------------
# Hardness gadgets

def gadget_sqrt(n: int, prefix: str = "") -> GameTree:
    """Game whose behavioural maxmin is ``-sqrt(n)``.

    Max picks a0/a1 (infoset I1) then forgets it and picks b0/b1 (I2); Min
    then picks c0/c1 in a single infoset J over all four nodes.  Only
    (a0,b0,c0) pays (n-1)^2 and (a1,b1,c1) pays (n-1)^2/n; a fair coin
    otherwise ends in -(n+1).
    """
    if n <= 1:
        raise GameError("degenerate gadget: n must be at least 2")
    n = Fraction(n)
    top, low = (n - 1) ** 2, (n - 1) ** 2 / n
    I1, I2, J = prefix + "I1", prefix + "I2", prefix + "J"

    def min_node(i, j):
        good0 = top if (i, j) == (0, 0) else 0
        good1 = low if (i, j) == (1, 1) else 0
        return Control(MIN, J, [("c0", Leaf(good0)), ("c1", Leaf(good1))])

    def second(i):
        return Control(MAX, I2, [("b0", min_node(i, 0)), ("b1", min_node(i, 1))])

    left = Control(MAX, I1, [("a0", second(0)), ("a1", second(1))])
    half = Fraction(1, 2)
    return GameTree.build(Chance([(half, left), (half, Leaf(-(n + 1)))]))


def _subtree_spec(game: GameTree, u: int = None, prefix: str = ""):
    u = game.root if u is None else u
    n = game.nodes[u]
    if n.kind == LEAF:
        return Leaf(n.utility)
    branches = [(lbl, _subtree_spec(game, v, prefix)) for lbl, v in zip(n.labels, n.children)]
    if n.kind == CHANCE:
        return Chance(branches)
    return Control(n.player, prefix + n.infoset, branches, n.agent)


def gadget_sqrtsum(a, p) -> GameTree:
    """Uniform chance over the ``-sqrt(a_i)`` gadgets and a leaf worth ``p``.

    Max can guarantee 0 iff ``sum(sqrt(a_i)) <= p``.
    """
    a = list(a)
    if not a:
        raise GameError("need at least one integer a_i")
    w = Fraction(1, len(a) + 1)
    branches = [(w, _subtree_spec(gadget_sqrt(ai, prefix=f"g{i}_"))) for i, ai in enumerate(a)]
    branches.append((w, Leaf(p)))
    return GameTree.build(Chance(branches))


def description_bits(game: GameTree) -> int:
    return 8 * len(format_game(game).encode("utf-8"))


def gap_chain_poly(t: int, prefix: str = "gap_y") -> GeneralPoly:
    """``-sum F_i^2`` with ``F_i = y_{i-1} - y_i^2`` (i = 1..t) and ``y_t - 1/2``.

    Its only zero on [0,1]^(t+1) is ``y_t = 1/2``, ``y_{i-1} = y_i^2``, so
    ``y_0 = 2^(-2^t)``.
    """
    if t < 1:
        raise GameError("chain length must be at least 1")
    y = [GeneralPoly.var(f"{prefix}{i}") for i in range(t + 1)]
    total = (y[t] - Fraction(1, 2)) ** 2
    for i in range(1, t + 1):
        total = total + (y[i - 1] - y[i] ** 2) ** 2
    return -total


def build_gap_game(game: GameTree, t: int | None = None, prefix: str = "gap_y") -> GameTree:
    """Three-way fair chance over ``game``, the chain penalty game and a ``y_0`` probe.

    The probe is a node of infoset ``y_0`` whose l-leaf pays 1, so it pays
    exactly ``y_0`` and the optimum exceeds ``game``'s by the tiny chain value.
    ``t`` defaults to the bit length of the game description plus 5.
    """
    if len(game.active_players()) > 1:
        raise GameError("gap construction expects a one-player game")
    player = next(iter(game.active_players()), MAX)
    clash = [i for i in game.infosets if i.startswith(prefix)]
    if clash:
        raise GameError(f"infoset ids {clash} collide with the chain prefix {prefix!r}")
    if t is None:
        t = description_bits(game) + 5
    chain = poly_to_game(gap_chain_poly(t, prefix), player)
    probe = Control(player, f"{prefix}0", [(LEFT, Leaf(1)), (RIGHT, Leaf(0))])
    third = Fraction(1, 3)
    return GameTree.build(Chance([
        (third, _subtree_spec(game)),
        (third, _subtree_spec(chain)),
        (third, probe),
    ]))
