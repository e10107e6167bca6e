"""Extensive-form game trees with imperfect information.

A :class:`GameTree` is an immutable, index-addressed tree.  Nodes are
chance nodes, control nodes owned by ``MAX`` (1) or ``MIN`` (2), or
leaves carrying a rational utility paid by Min to Max.  Information sets
are declared explicitly on control nodes by id.
"""
from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Sequence, Union

from .errors import GameError, IncompleteStrategyError, ParseError

MAX, MIN = 1, 2
PLAYER_NAMES = {MAX: "Max", MIN: "Min"}

Number = Union[int, Fraction, float]
PureStrategy = dict  # infoset id -> action
BehaviouralStrategy = dict  # infoset id -> {action: probability}

CHANCE, CONTROL, LEAF = "chance", "control", "leaf"


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"refusing to convert float {value!r} to an exact rational")
    return Fraction(value)


def opponent(player: int) -> int:
    return MIN if player == MAX else MAX


@dataclass(frozen=True)
class Node:
    kind: str
    children: tuple = ()
    # actions for control nodes, probabilities for chance nodes
    labels: tuple = ()
    player: int | None = None
    infoset: str | None = None
    agent: str | None = None
    utility: Fraction | None = None


@dataclass(frozen=True)
class Infoset:
    id: str
    player: int
    moves: tuple
    agent: str | None = None


# -- nested construction helpers -------------------------------------------

@dataclass
class Leaf:
    utility: Number


@dataclass
class Chance:
    branches: list  # [(probability, subtree)]


@dataclass
class Control:
    player: int
    infoset: str
    branches: list  # [(action, subtree)]
    agent: str | None = None


class GameTree:
    """Immutable game tree.  Build with :meth:`build` or from raw nodes."""

    def __init__(self, nodes: Sequence[Node], root: int = 0):
        self.nodes = tuple(nodes)
        self.root = root
        if not 0 <= root < len(self.nodes):
            raise GameError("root index out of range")

    @classmethod
    def build(cls, spec) -> "GameTree":
        nodes: list = []

        def add(s) -> int:
            idx = len(nodes)
            nodes.append(None)
            if isinstance(s, Leaf):
                nodes[idx] = Node(LEAF, utility=s.utility if isinstance(s.utility, float)
                                  else as_fraction(s.utility))
            elif isinstance(s, Chance):
                kids = tuple(add(sub) for _, sub in s.branches)
                probs = tuple(p if isinstance(p, float) else as_fraction(p) for p, _ in s.branches)
                nodes[idx] = Node(CHANCE, kids, probs)
            elif isinstance(s, Control):
                kids = tuple(add(sub) for _, sub in s.branches)
                acts = tuple(str(a) for a, _ in s.branches)
                nodes[idx] = Node(CONTROL, kids, acts, s.player, s.infoset, s.agent)
            else:
                raise TypeError(f"not a tree spec: {s!r}")
            return idx

        add(spec)
        return cls(nodes, 0)

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, GameTree):
            return NotImplemented
        return format_game(self) == format_game(other)

    def __hash__(self):
        return hash(format_game(self))

    def __repr__(self):
        return f"GameTree({len(self.nodes)} nodes, {len(self.infosets)} infosets)"

    @cached_property
    def parents(self) -> tuple:
        par = [None] * len(self.nodes)
        for u, node in enumerate(self.nodes):
            for v in node.children:
                if 0 <= v < len(par) and par[v] is None:
                    par[v] = u
        return tuple(par)

    def preorder(self) -> list:
        """Node indices reachable from the root, depth-first, children in order."""
        out, stack, seen = [], [self.root], set()
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            out.append(u)
            stack.extend(reversed([v for v in self.nodes[u].children if 0 <= v < len(self.nodes)]))
        return out

    def path_to(self, v: int) -> list:
        path = [v]
        while path[-1] != self.root:
            p = self.parents[path[-1]]
            if p is None:
                raise GameError(f"node {v} is not connected to the root")
            path.append(p)
        path.reverse()
        return path

    @cached_property
    def leaves(self) -> tuple:
        return tuple(u for u in self.preorder() if self.nodes[u].kind == LEAF)

    @cached_property
    def infosets(self) -> dict:
        """Infoset id -> :class:`Infoset`, in order of first appearance (preorder)."""
        out = {}
        for u in self.preorder():
            n = self.nodes[u]
            if n.kind == CONTROL and n.infoset not in out:
                out[n.infoset] = Infoset(n.infoset, n.player, n.labels, n.agent)
        return out

    def infoset_nodes(self, infoset: str) -> list:
        return [u for u in self.preorder()
                if self.nodes[u].kind == CONTROL and self.nodes[u].infoset == infoset]

    def player_infosets(self, player: int, agent: str | None = None) -> list:
        """Sorted infoset ids of ``player`` (optionally of one agent of a team)."""
        return sorted(i.id for i in self.infosets.values()
                      if i.player == player and (agent is None or i.agent == agent))

    def active_players(self) -> set:
        return {i.player for i in self.infosets.values()}

    @cached_property
    def leaf_paths(self) -> dict:
        """Leaf -> tuple of (node, child position) edges along its root path."""
        out = {}
        for leaf in self.leaves:
            path = self.path_to(leaf)
            out[leaf] = tuple((u, self.nodes[u].children.index(v)) for u, v in zip(path, path[1:]))
        return out


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    nodes: tuple
    message: str

    def __str__(self):
        return f"{self.code} at nodes {list(self.nodes)}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate(game: GameTree) -> ValidationReport:
    """Check every structural invariant; violations are reported, never raised."""
    rep = ValidationReport()
    add = lambda code, nodes, msg: rep.violations.append(Violation(code, tuple(nodes), msg))
    n = len(game.nodes)
    indegree = [0] * n
    for u, node in enumerate(game.nodes):
        for v in node.children:
            if not 0 <= v < n:
                add("bad-child", [u], f"child index {v} out of range")
            else:
                indegree[v] += 1
    if indegree[game.root]:
        add("root-has-parent", [game.root], "the root has an incoming edge")
    for v in range(n):
        if v != game.root and indegree[v] != 1:
            add("not-a-tree", [v], f"node has {indegree[v]} parents, expected exactly 1")
    reach = set(game.preorder())
    if len(reach) != n:
        missing = sorted(set(range(n)) - reach)
        add("unreachable", missing, "nodes not reachable from the root (or part of a cycle)")

    for u, node in enumerate(game.nodes):
        if node.kind == LEAF:
            if node.children:
                add("leaf-with-children", [u], "a leaf has outgoing edges")
            if node.utility is None:
                add("missing-utility", [u], "leaf without utility")
        elif node.kind in (CHANCE, CONTROL):
            if not node.children:
                add("dead-end", [u], f"{node.kind} node without children")
            if len(node.labels) != len(node.children):
                add("label-mismatch", [u], "edge label count differs from child count")
            if node.kind == CHANCE:
                if any(p <= 0 for p in node.labels):
                    add("chance-nonpositive", [u], "chance probabilities must be positive")
                if sum(node.labels) != 1:
                    add("chance-sum", [u], f"chance probabilities sum ≠ 1 (sum is {sum(node.labels)})")
            else:
                if node.player not in (MAX, MIN):
                    add("bad-player", [u], f"control node owned by {node.player!r}")
                if not node.infoset:
                    add("missing-infoset", [u], "control node without information set")
                if len(set(node.labels)) != len(node.labels):
                    add("duplicate-action", [u], "two outgoing edges carry the same action")
        else:
            add("bad-kind", [u], f"unknown node kind {node.kind!r}")

    first = {}
    for u, node in enumerate(game.nodes):
        if node.kind != CONTROL or not node.infoset:
            continue
        if node.infoset not in first:
            first[node.infoset] = u
            continue
        w = first[node.infoset]
        ref = game.nodes[w]
        if ref.player != node.player:
            add("infoset-player", [w, u], f"infoset {node.infoset!r} spans two players")
        if ref.labels != node.labels:
            add("infoset-moves", [w, u], f"infoset {node.infoset!r} has differing move lists")
    return rep


def check_valid(game: GameTree) -> None:
    rep = validate(game)
    if not rep.ok:
        raise GameError("invalid game: " + "; ".join(str(v) for v in rep.violations))


# -- histories and recall ---------------------------------------------------

def _owner(node: Node, per_agent: bool):
    return (node.player, node.agent) if per_agent else node.player


def history(game: GameTree, node: int, per_agent: bool = False) -> tuple:
    """Signals and actions of the node's owner along its root path.

    Even positions hold infoset ids, odd positions the action played; the last
    entry is the node's own infoset.  With ``per_agent`` only nodes of the same
    team member (``Node.agent``) count.
    """
    target = game.nodes[node]
    if target.kind != CONTROL:
        raise GameError("no history owner: node is not a control node")
    who = _owner(target, per_agent)
    path = game.path_to(node)
    out = []
    for u, v in zip(path, path[1:]):
        n = game.nodes[u]
        if n.kind == CONTROL and _owner(n, per_agent) == who:
            out.append(n.infoset)
            out.append(n.labels[n.children.index(v)])
    out.append(target.infoset)
    return tuple(out)


class Recall(str, enum.Enum):
    PERFECT = "PerfectRecall"
    A_LOSS = "ALoss"
    SIGNAL_LOSS = "SignalLoss"
    ABSENT_MINDED = "AbsentMinded"


@dataclass(frozen=True)
class RecallClass:
    kind: Recall
    witness: tuple | None = None

    def __str__(self):
        if self.witness is None:
            return self.kind.value
        return f"{self.kind.value} witness={self.witness[0]},{self.witness[1]}"


def _divergence(h1: tuple, h2: tuple) -> int:
    for i, (a, b) in enumerate(zip(h1, h2)):
        if a != b:
            return i
    return min(len(h1), len(h2))


def classify_recall(game: GameTree, player: int, agent: str | None = None) -> RecallClass:
    """Recall class of ``player`` (or of a single agent of that team)."""
    per_agent = agent is not None
    groups: dict = {}
    for u in game.preorder():
        n = game.nodes[u]
        if n.kind == CONTROL and n.player == player and (agent is None or n.agent == agent):
            groups.setdefault(n.infoset, []).append(u)

    for members in groups.values():
        mset = set(members)
        for v in members:
            u = game.parents[v]
            while u is not None:
                if u in mset:
                    return RecallClass(Recall.ABSENT_MINDED, (u, v))
                u = game.parents[u]

    a_loss_witness = None
    for members in groups.values():
        reps: dict = {}
        for u in members:
            reps.setdefault(history(game, u, per_agent), u)
        hist = list(reps.items())
        for (h1, u1), (h2, u2) in itertools.combinations(hist, 2):
            d = _divergence(h1, h2)
            if d % 2 == 0 or d >= min(len(h1), len(h2)):
                return RecallClass(Recall.SIGNAL_LOSS, (u1, u2))
            if a_loss_witness is None:
                a_loss_witness = (u1, u2)
    if a_loss_witness is not None:
        return RecallClass(Recall.A_LOSS, a_loss_witness)
    return RecallClass(Recall.PERFECT)


# -- chance degree and payoff ----------------------------------------------

def chance_degree(game: GameTree) -> int:
    deg: dict = {}
    for u in reversed(game.preorder()):
        n = game.nodes[u]
        if n.kind == LEAF:
            deg[u] = 1
        elif n.kind == CHANCE:
            deg[u] = sum(deg[v] for v in n.children)
        else:
            deg[u] = max(deg[v] for v in n.children)
    return deg[game.root]


def as_behavioural(game: GameTree, strategy: Mapping | None, player: int) -> dict:
    """Normalise a pure or behavioural strategy to ``{infoset: {action: p}}``."""
    strategy = strategy or {}
    out = {}
    for iid in game.player_infosets(player):
        if iid not in strategy:
            raise IncompleteStrategyError(
                f"incomplete strategy: no entry for {PLAYER_NAMES[player]} infoset {iid!r}")
        moves = game.infosets[iid].moves
        entry = strategy[iid]
        if isinstance(entry, str):
            if entry not in moves:
                raise GameError(f"action {entry!r} is not a move of infoset {iid!r}")
            out[iid] = {a: (1 if a == entry else 0) for a in moves}
        elif isinstance(entry, Mapping):
            out[iid] = {a: entry.get(a, 0) for a in moves}
        else:
            vec = list(entry)
            if len(vec) != len(moves):
                raise GameError(f"probability vector for {iid!r} has wrong length")
            out[iid] = dict(zip(moves, vec))
    return out


def payoff(game: GameTree, sigma: Mapping | None = None, tau: Mapping | None = None):
    """Expected utility for Max; exact when every probability is rational."""
    probs = {**as_behavioural(game, sigma, MAX), **as_behavioural(game, tau, MIN)}
    total = Fraction(0)
    for leaf, edges in game.leaf_paths.items():
        w = game.nodes[leaf].utility
        if not w:
            continue
        for u, k in edges:
            n = game.nodes[u]
            w = w * (n.labels[k] if n.kind == CHANCE else probs[n.infoset][n.labels[k]])
            if not w:
                break
        total += w
    return total


def enumerate_pure(game: GameTree, player: int) -> Iterator[dict]:
    """Every pure strategy of ``player``: lexicographic in sorted infoset ids, then move index."""
    ids = game.player_infosets(player)
    moves = [game.infosets[i].moves for i in ids]
    for combo in itertools.product(*moves):
        yield dict(zip(ids, combo))


def fix_player(game: GameTree, player: int, strategy: Mapping) -> GameTree:
    """Replace ``player``'s nodes by chance nodes playing ``strategy``.

    Edges of probability zero are removed together with their subtrees.
    """
    beh = as_behavioural(game, strategy, player)

    def spec(u):
        n = game.nodes[u]
        if n.kind == LEAF:
            return Leaf(n.utility)
        if n.kind == CHANCE:
            return Chance([(p, spec(v)) for p, v in zip(n.labels, n.children)])
        if n.player == player:
            dist = beh[n.infoset]
            return Chance([(dist[a], spec(v)) for a, v in zip(n.labels, n.children) if dist[a]])
        return Control(n.player, n.infoset, [(a, spec(v)) for a, v in zip(n.labels, n.children)], n.agent)

    return GameTree.build(spec(game.root))


def scale_utilities(game: GameTree, factor) -> GameTree:
    nodes = [Node(n.kind, n.children, n.labels, n.player, n.infoset, n.agent,
                  None if n.utility is None else n.utility * factor) for n in game.nodes]
    return GameTree(nodes, game.root)


# -- text format ------------------------------------------------------------

_TOKEN_RE = re.compile(r"\S+")
_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")


def parse_rational(text: str, line=None, column=None) -> Fraction:
    if not _RATIONAL_RE.match(text):
        raise ParseError(f"expected a rational like 3 or -1/2, got {text!r}", line, column)
    value = Fraction(text)
    return value


def format_rational(value) -> str:
    return str(value) if isinstance(value, Fraction) else str(Fraction(value))


def format_game(game: GameTree) -> str:
    """Canonical text form: one node per line, two spaces of indent per depth."""
    lines = []

    def emit(u, depth, edge):
        n = game.nodes[u]
        if n.kind == LEAF:
            parts = ["L", f"u={format_rational(n.utility)}"]
        elif n.kind == CHANCE:
            parts = ["C"]
        else:
            parts = [f"P{n.player}", f"I={n.infoset}"]
            if n.agent is not None:
                parts.append(f"g={n.agent}")
        if edge:
            parts.append(edge)
        lines.append("  " * depth + " ".join(parts))
        for label, v in zip(n.labels, n.children):
            emit(v, depth + 1, f"p={format_rational(label)}" if n.kind == CHANCE else f"a={label}")

    emit(game.root, 0, "")
    return "\n".join(lines) + "\n"


def parse_game(text: str) -> GameTree:
    """Parse the indentation-based game format produced by :func:`format_game`."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        stripped = raw.lstrip(" ")
        if stripped.startswith("\t") or "\t" in raw[: len(raw) - len(stripped)]:
            raise ParseError("tabs are not allowed in indentation", lineno, 1)
        indent = len(raw) - len(stripped)
        if indent % 2:
            raise ParseError("indentation must be a multiple of two spaces", lineno, 1)
        entries.append((lineno, indent // 2, raw, stripped))
    if not entries:
        raise ParseError("empty game description")

    nodes: list = []
    # per node: list of (label, child)
    kids: list = []
    stack: list = []  # (depth, node index)
    for lineno, depth, raw, body in entries:
        tokens = [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(raw)]
        head, col = tokens[0]
        fields = {}
        for tok, c in tokens[1:]:
            if "=" not in tok:
                raise ParseError(f"expected key=value, got {tok!r}", lineno, c)
            key, _, val = tok.partition("=")
            if key in fields:
                raise ParseError(f"duplicate field {key!r}", lineno, c)
            if not val:
                raise ParseError(f"empty value for {key!r}", lineno, c)
            fields[key] = (val, c)

        if head == "L":
            allowed = {"u"}
        elif head == "C":
            allowed = set()
        elif head in ("P1", "P2"):
            allowed = {"I", "g"}
        else:
            raise ParseError(f"unknown node kind {head!r} (expected C, P1, P2 or L)", lineno, col)
        edge_keys = {"p", "a"} & fields.keys()
        for k, (_, c) in fields.items():
            if k not in allowed | {"p", "a"}:
                raise ParseError(f"unexpected field {k!r} for node kind {head}", lineno, c)
        if len(edge_keys) > 1:
            raise ParseError("a node has at most one incoming edge annotation", lineno)

        while stack and stack[-1][0] >= depth:
            stack.pop()
        if not stack:
            if nodes:
                raise ParseError("more than one root line", lineno, 1)
            if depth:
                raise ParseError("the root line must not be indented", lineno, 1)
            if edge_keys:
                raise ParseError("the root line carries no edge annotation", lineno)
            parent = None
        else:
            pdepth, parent = stack[-1]
            if depth != pdepth + 1:
                raise ParseError("indentation jumps more than one level", lineno, 1)
            pkind = nodes[parent]["kind"]
            if pkind == LEAF:
                raise ParseError("a leaf cannot have children", lineno, 1)
            want = "p" if pkind == CHANCE else "a"
            if want not in fields:
                raise ParseError(f"missing edge annotation {want}= for child of a {pkind} node", lineno)
            if edge_keys != {want}:
                raise ParseError(f"edge annotation must be {want}= under a {pkind} node", lineno)

        idx = len(nodes)
        if head == "L":
            if "u" not in fields:
                raise ParseError("leaf without u=", lineno, col)
            val, c = fields["u"]
            nodes.append({"kind": LEAF, "utility": parse_rational(val, lineno, c)})
        elif head == "C":
            nodes.append({"kind": CHANCE})
        else:
            if "I" not in fields:
                raise ParseError("control node without I=", lineno, col)
            nodes.append({"kind": CONTROL, "player": int(head[1]), "infoset": fields["I"][0],
                          "agent": fields["g"][0] if "g" in fields else None})
        kids.append([])
        if parent is not None:
            if "p" in fields:
                label = parse_rational(fields["p"][0], lineno, fields["p"][1])
            else:
                label = fields["a"][0]
            kids[parent].append((label, idx))
        stack.append((depth, idx))

    built = []
    for i, d in enumerate(nodes):
        ch = tuple(v for _, v in kids[i])
        labels = tuple(lbl for lbl, _ in kids[i])
        if d["kind"] == LEAF:
            built.append(Node(LEAF, utility=d["utility"]))
        elif d["kind"] == CHANCE:
            built.append(Node(CHANCE, ch, labels))
        else:
            built.append(Node(CONTROL, ch, labels, d["player"], d["infoset"], d["agent"]))
    return GameTree(built, 0)


def render_tree(game: GameTree) -> str:
    """Human-oriented tree dump (``--dump-tree``)."""
    out = []

    def walk(u, prefix, last, edge):
        n = game.nodes[u]
        if n.kind == LEAF:
            desc = f"leaf {format_rational(n.utility)}"
        elif n.kind == CHANCE:
            desc = "chance"
        else:
            desc = f"{PLAYER_NAMES[n.player]} [{n.infoset}]"
            if n.agent:
                desc += f" ({n.agent})"
        conn = "" if edge is None else ("└─" if last else "├─") + f"{edge}─ "
        out.append(f"{prefix}{conn}{desc}  #{u}")
        child_prefix = prefix if edge is None else prefix + ("   " if last else "│  ")
        for i, (lbl, v) in enumerate(zip(n.labels, n.children)):
            text = format_rational(lbl) if n.kind == CHANCE else lbl
            walk(v, child_prefix, i == len(n.children) - 1, text)

    walk(game.root, "", True, None)
    return "\n".join(out) + "\n"
