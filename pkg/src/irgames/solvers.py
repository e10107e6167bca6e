"""Pure-strategy solvers, backward induction and a behavioural maxmin estimator."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.optimize import minimize

from .errors import BudgetExceeded, GameError
from .game import (CHANCE, CONTROL, LEAF, MAX, MIN, PLAYER_NAMES, GameTree,
                   Recall, chance_degree, classify_recall, fix_player,
                   format_rational, opponent)

DEFAULT_SEED = 20240611


@dataclass
class SolveResult:
    """Value plus witness strategies.  ``label`` names the value in reports."""
    label: str
    value: object
    method: str
    witness: dict = field(default_factory=dict)
    response: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    tol: float | None = None
    seed: int | None = None

    @property
    def exact(self) -> bool:
        return isinstance(self.value, (int, Fraction))

    def _value_text(self):
        if self.exact:
            return format_rational(self.value)
        return repr(float(self.value))

    @staticmethod
    def _entry_text(entry):
        if isinstance(entry, str):
            return entry
        return "(" + ",".join(repr(float(p)) for p in entry) + ")"

    def to_text(self) -> str:
        lines = [f"{self.label} = {self._value_text()}", f"method = {self.method}"]
        if self.tol is not None:
            lines.append(f"tol = {self.tol!r}")
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        for k in sorted(self.stats):
            lines.append(f"{k} = {self.stats[k]}")
        for title, strat in (("witness", self.witness), ("response", self.response)):
            if strat:
                lines.append(f"{title}:")
                lines.extend(f"{i}={self._entry_text(strat[i])}" for i in sorted(strat))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        def enc(strat):
            return {i: a if isinstance(a, str) else [float(p) for p in a] for i, a in strat.items()}
        out = {self.label: self._value_text(), "method": self.method}
        if self.tol is not None:
            out["tol"] = self.tol
        if self.seed is not None:
            out["seed"] = self.seed
        out.update(self.stats)
        out["witness"] = enc(self.witness)
        out["response"] = enc(self.response)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)

    def __str__(self):
        return self.to_text()


def _fill(game: GameTree, player: int, partial: Mapping) -> dict:
    """Complete ``partial`` with the first move at every unassigned infoset."""
    return {i: partial.get(i, game.infosets[i].moves[0]) for i in game.player_infosets(player)}


def _lex_key(game: GameTree, strat: Mapping) -> tuple:
    return tuple(game.infosets[i].moves.index(strat[i]) for i in sorted(strat))


# ---------------------------------------------------------------------------
# Bounded chance degree

@dataclass(frozen=True)
class BagPartition:
    bags: tuple  # tuple of tuples of leaf node indices

    def __len__(self):
        return len(self.bags)

    def bag_of(self) -> dict:
        return {leaf: b for b, bag in enumerate(self.bags) for leaf in bag}


def _root_paths(game: GameTree) -> dict:
    return {leaf: game.path_to(leaf) for leaf in game.leaves}


def _lca(p1: list, p2: list) -> int:
    last = p1[0]
    for a, b in zip(p1, p2):
        if a != b:
            break
        last = a
    return last


def bag_partition(game: GameTree) -> BagPartition:
    """First-fit partition of the leaves (depth-first order).

    A leaf joins the first bag in which it shares no chance-node lowest
    common ancestor with any member.
    """
    paths = _root_paths(game)
    bags: list = []
    for leaf in game.leaves:
        for bag in bags:
            if all(game.nodes[_lca(paths[leaf], paths[v])].kind != CHANCE for v in bag):
                bag.append(leaf)
                break
        else:
            bags.append([leaf])
    return BagPartition(tuple(tuple(b) for b in bags))


def _single_player(game: GameTree, player: int | None) -> int:
    active = game.active_players()
    if len(active) > 1:
        raise GameError("two active players: fix one side before the one-player solver")
    if player is None:
        player = next(iter(active), MAX)
    elif active and active != {player}:
        raise GameError(f"{PLAYER_NAMES[player]} is not the active player")
    return player


def solve_pure_one_player(game: GameTree, player: int | None = None,
                          fixed: Mapping | None = None) -> SolveResult:
    """Exact optimum over pure strategies, polynomial for fixed chance degree.

    Leaves are split into K bags (K = chance degree).  A pure strategy
    reaches at most one leaf per bag, so the candidates are leaf tuples with
    at most one leaf per bag that agree on every infoset and cover every
    child of each chance ancestor.  ``fixed`` pins the opponent's strategy
    first (its nodes become chance nodes).
    """
    if fixed is not None:
        if player is None:
            raise GameError("name the optimising player when fixing the other one")
        game = fix_player(game, opponent(player), fixed)
    player = _single_player(game, player)
    sign = 1 if player == MAX else -1
    root = game.nodes[game.root]
    K = chance_degree(game)
    if root.kind == LEAF:
        return SolveResult(_label(player), root.utility, "bags", {}, {},
                           {"bags": 1, "candidates": 1, "nodes_visited": 1})

    parts = bag_partition(game)
    order = {leaf: i for i, leaf in enumerate(game.leaves)}
    # leaf-order interval and latest bag below every node
    lo, hi, last_bag = {}, {}, {}
    bag_of = parts.bag_of()
    for u in reversed(game.preorder()):
        n = game.nodes[u]
        if n.kind == LEAF:
            lo[u], hi[u], last_bag[u] = order[u], order[u] + 1, bag_of[u]
        else:
            lo[u] = min(lo[v] for v in n.children)
            hi[u] = max(hi[v] for v in n.children)
            last_bag[u] = max(last_bag[v] for v in n.children)

    info = {}
    for leaf, edges in game.leaf_paths.items():
        weight = game.nodes[leaf].utility
        needs, acts = [], []
        for u, k in edges:
            n = game.nodes[u]
            if n.kind == CHANCE:
                weight = weight * n.labels[k]
                needs.extend(v for j, v in enumerate(n.children) if j != k)
            else:
                acts.append((n.infoset, n.labels[k]))
        if len(dict(acts)) < len(set(acts)):
            continue  # absent-minded path needing two moves at one infoset
        info[leaf] = (weight, tuple(needs), tuple(acts))

    bags = parts.bags
    stats = {"bags": len(bags), "candidates": 0, "nodes_visited": len(game.nodes)}
    best = [None, None, None]  # value, key, strategy

    def covered(v, chosen):
        return any(lo[v] <= order[c] < hi[v] for c in chosen)

    def rec(b, chosen, assign, obligations, total):
        # prune obligations that no later bag can meet
        for v in obligations:
            if last_bag[v] < b and not covered(v, chosen):
                return
        if b == len(bags):
            if not chosen:
                return
            stats["candidates"] += 1
            val = sign * total
            strat = _fill(game, player, assign)
            key = _lex_key(game, strat)
            if best[0] is None or val > best[0] or (val == best[0] and key < best[1]):
                best[:] = [val, key, strat]
            return
        rec(b + 1, chosen, assign, obligations, total)
        for leaf in bags[b]:
            if leaf not in info:
                continue
            w, needs, acts = info[leaf]
            if any(assign.get(i, a) != a for i, a in acts):
                continue
            new = dict(assign)
            new.update(acts)
            rec(b + 1, chosen + [leaf], new, obligations + list(needs), total + w)

    rec(0, [], {}, [], Fraction(0))
    if best[0] is None:
        raise GameError("no consistent leaf tuple found")
    assert len(bags) == K
    return SolveResult(_label(player), sign * best[0], "bags", best[2], {}, stats)


def _label(player: int) -> str:
    return "max_pure" if player == MAX else "min_pure"


def solve_pure_exhaustive(game: GameTree, player: int | None = None) -> SolveResult:
    """Reference optimum: every pure strategy, evaluated by :func:`payoff`."""
    from .game import enumerate_pure, payoff
    player = _single_player(game, player)
    sign = 1 if player == MAX else -1
    best = None
    count = 0
    for strat in enumerate_pure(game, player):
        count += 1
        v = sign * payoff(game, strat if player == MAX else {}, strat if player == MIN else {})
        if best is None or v > best[0]:
            best = (v, strat)
    return SolveResult(_label(player), sign * best[0], "exhaustive", best[1], {}, {"candidates": count})


# ---------------------------------------------------------------------------
# Two-player pure maxmin

def _reduced_strategies(game: GameTree, player: int):
    """Reduced pure strategies of ``player``: only reachable infosets get moves."""
    def first_open(assign):
        stack = [game.root]
        while stack:
            u = stack.pop()
            n = game.nodes[u]
            if n.kind == LEAF:
                continue
            if n.kind == CONTROL and n.player == player:
                if n.infoset not in assign:
                    return n.infoset
                stack.append(n.children[n.labels.index(assign[n.infoset])])
            else:
                stack.extend(reversed(n.children))
        return None

    def rec(assign):
        iid = first_open(assign)
        if iid is None:
            yield dict(assign)
            return
        for a in game.infosets[iid].moves:
            assign[iid] = a
            yield from rec(assign)
            del assign[iid]

    yield from rec({})


def _solve_outer(game: GameTree, outer: int, budget: int | None = None) -> SolveResult:
    inner = opponent(outer)
    sign = 1 if outer == MAX else -1
    label = "maxmin_pure" if outer == MAX else "minmax_pure"
    root = game.nodes[game.root]
    if root.kind == LEAF:
        return SolveResult(label, root.utility, "reduced-enumeration", {}, {},
                           {"candidates": 1, "inner_candidates": 0})
    best = None
    stats = {"candidates": 0, "inner_candidates": 0}
    for partial in _reduced_strategies(game, outer):
        stats["candidates"] += 1
        if budget is not None and stats["candidates"] > budget:
            raise BudgetExceeded(f"more than {budget} reduced strategies to enumerate")
        strat = _fill(game, outer, partial)
        res = solve_pure_one_player(game, inner, fixed=strat)
        stats["inner_candidates"] += res.stats.get("candidates", 0)
        val = sign * res.value
        key = _lex_key(game, strat)
        if best is None or val > best[0] or (val == best[0] and key < best[1]):
            response = _fill(game, inner, res.witness)
            best = (val, key, strat, response)
    return SolveResult(label, sign * best[0], "reduced-enumeration", best[2], best[3], stats)


def solve_pure_maxmin(game: GameTree, minmax: bool = False, budget: int | None = None) -> SolveResult:
    """Best value Max guarantees with a pure strategy (Min answers knowing it).

    With ``minmax`` the roles swap: Min commits first and Max responds.
    """
    return _solve_outer(game, MIN if minmax else MAX, budget)


def solve_pure_minmax(game: GameTree, budget: int | None = None) -> SolveResult:
    return _solve_outer(game, MIN, budget)


# ---------------------------------------------------------------------------
# Backward induction

def solve_backward_induction(game: GameTree) -> SolveResult:
    """Expectimax for one-player games with singleton infosets."""
    player = _single_player(game, None)
    for iid in game.infosets:
        if len(game.infoset_nodes(iid)) > 1:
            raise GameError(f"not perfect information: infoset {iid!r} has several nodes")
    sign = 1 if player == MAX else -1
    val, choice = {}, {}
    for u in reversed(game.preorder()):
        n = game.nodes[u]
        if n.kind == LEAF:
            val[u] = n.utility
        elif n.kind == CHANCE:
            val[u] = sum((p * val[v] for p, v in zip(n.labels, n.children)), Fraction(0))
        else:
            k = max(range(len(n.children)), key=lambda j: (sign * val[n.children[j]], -j))
            val[u] = val[n.children[k]]
            choice[n.infoset] = n.labels[k]
    return SolveResult("value", val[game.root], "backward-induction", choice, {},
                       {"nodes_visited": len(val)})


# ---------------------------------------------------------------------------
# Behavioural maxmin estimator

class _LeafTable:
    """Max's payoff polynomial per Min pure response, as (coef, factors, min-moves) rows."""

    def __init__(self, game: GameTree, infosets: list):
        self.offsets = {}
        pos = 0
        for iid in infosets:
            self.offsets[iid] = pos
            pos += len(game.infosets[iid].moves)
        self.size = pos
        self.rows = []
        for leaf, edges in game.leaf_paths.items():
            c = game.nodes[leaf].utility
            if not c:
                continue
            factors, needs = [], []
            for u, k in edges:
                n = game.nodes[u]
                if n.kind == CHANCE:
                    c = c * n.labels[k]
                elif n.player == MAX:
                    factors.append(self.offsets[n.infoset] + k)
                else:
                    needs.append((n.infoset, n.labels[k]))
            self.rows.append((float(c), tuple(factors), tuple(needs)))

    def restrict(self, tau: Mapping):
        return [(c, f) for c, f, needs in self.rows if all(tau[i] == a for i, a in needs)]

    @staticmethod
    def value(terms, x):
        total = 0.0
        for c, f in terms:
            t = c
            for j in f:
                t *= x[j]
            total += t
        return total

    def grad(self, terms, x):
        g = np.zeros(self.size)
        for c, f in terms:
            for pos, j in enumerate(f):
                t = c
                for q, i in enumerate(f):
                    if q != pos:
                        t *= x[i]
                g[j] += t
        return g


def estimate_maxmin_beh(game: GameTree, starts: int = 8, tol: float = 1e-6,
                        seed: int = DEFAULT_SEED) -> SolveResult:
    """Numeric lower estimate of Max's behavioural maxmin.

    Each start runs a projected coordinate search (pairwise probability
    moves inside each simplex, halving steps) on the exact inner minimum,
    then polishes with SLSQP on the epigraph of the Min responses met so far.
    The inner minimum is exact and pure because Min is not absent-minded.
    """
    if tol <= 0:
        raise GameError("tol must be positive")
    if MIN in game.active_players():
        if classify_recall(game, MIN).kind == Recall.ABSENT_MINDED:
            raise GameError("inner minimization not pure-reducible: Min is absent-minded")
    max_ids = game.player_infosets(MAX)
    table = _LeafTable(game, max_ids)
    blocks = [(table.offsets[i], len(game.infosets[i].moves)) for i in max_ids]
    min_ids = game.player_infosets(MIN)
    stats = {"inner_solves": 0, "starts": starts + 1}

    def to_strategy(x):
        return {i: tuple(float(p) for p in x[o:o + m]) for i, (o, m) in zip(max_ids, blocks)}

    def inner(x):
        stats["inner_solves"] += 1
        if not min_ids:
            return table.value(table.restrict({}), x), {}
        res = solve_pure_one_player(game, MIN, fixed=to_strategy(x))
        tau = _fill(game, MIN, res.witness)
        return float(res.value), tau

    def project(x):
        x = np.clip(x, 0.0, None)
        for o, m in blocks:
            s = x[o:o + m].sum()
            x[o:o + m] = x[o:o + m] / s if s > 0 else 1.0 / m
        return x

    def coordinate_search(x):
        v, tau = inner(x)
        seen = {_freeze(tau): tau}
        step = 0.25
        while step >= tol / 10:
            improved = False
            for o, m in blocks:
                for a in range(o, o + m):
                    for b in range(o, o + m):
                        if a == b or x[a] <= 0:
                            continue
                        y = x.copy()
                        d = min(step, y[a])
                        y[a] -= d
                        y[b] += d
                        w, t = inner(y)
                        seen.setdefault(_freeze(t), t)
                        if w > v + 1e-15:
                            x, v, improved = y, w, True
            if not improved:
                step /= 2
        return x, v, seen

    def polish(x, v, seen):
        if not min_ids:
            terms = [table.restrict({})]
        for _ in range(25):
            if min_ids:
                terms = [table.restrict(t) for t in seen.values()]
            z0 = np.append(x, v)
            cons = [{"type": "ineq",
                     "fun": (lambda z, T=T: table.value(T, z[:-1]) - z[-1]),
                     "jac": (lambda z, T=T: np.append(table.grad(T, z[:-1]), -1.0))}
                    for T in terms]
            for o, m in blocks:
                cons.append({"type": "eq",
                             "fun": (lambda z, o=o, m=m: z[o:o + m].sum() - 1.0),
                             "jac": (lambda z, o=o, m=m: _indicator(len(z), o, m))})
            res = minimize(lambda z: -z[-1], z0,
                           jac=lambda z: _indicator(len(z), len(z) - 1, 1) * -1.0,
                           bounds=[(0.0, 1.0)] * table.size + [(None, None)],
                           constraints=cons, method="SLSQP",
                           options={"ftol": 1e-15, "maxiter": 500})
            y = project(res.x[:-1].copy())
            w, tau = inner(y)
            key = _freeze(tau)
            if w >= v - 1e-12:
                if w > v:
                    x, v = y, w
                if key in seen:
                    break
            elif key in seen:
                break
            seen[key] = tau
        return x, v

    rng = np.random.default_rng(seed)
    points = [project(np.ones(table.size))]
    for _ in range(starts):
        x = np.empty(table.size)
        for o, m in blocks:
            x[o:o + m] = rng.dirichlet(np.ones(m))
        points.append(x)

    best = None
    for x0 in points:
        x, v, seen = coordinate_search(x0)
        x, v = polish(x, v, seen)
        if best is None or v > best[1] + 1e-12:
            best = (x, v)
    x, v = best
    _, tau = inner(x)
    return SolveResult("maxmin_beh", float(v), "coordinate-search+slsqp", to_strategy(x), tau,
                       stats, tol=tol, seed=seed)


def _freeze(strat: Mapping) -> tuple:
    return tuple(sorted(strat.items()))


def _indicator(n, o, m):
    g = np.zeros(n)
    g[o:o + m] = 1.0
    return g


__all__ = [
    "SolveResult", "BagPartition", "bag_partition", "solve_pure_one_player",
    "solve_pure_exhaustive", "solve_pure_maxmin", "solve_pure_minmax",
    "solve_backward_induction", "estimate_maxmin_beh", "DEFAULT_SEED",
]
