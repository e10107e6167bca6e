"""A four-player bidding game (N, S against E, W) and its solvers.

Players bid in turn N, E, S, W.  A bid is 0 (pass) or strictly above the
last nonzero bid, up to ``n``.  Bidding stops when the first four bids are
all 0, when three passes follow a nonzero bid, or when someone bids ``n``.
The last nonzero bidder is the declarer; with contract ``k`` the declarer's
team wins ``k`` if the declarer's table allows it (``theta >= k``) and loses
``k`` otherwise.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, GameError, ParseError
from .game import MAX, MIN, Chance, Control, GameTree, Leaf, payoff
from .solvers import SolveResult, solve_pure_maxmin

PLAYERS = ("N", "E", "S", "W")
TEAM = {"N": MAX, "S": MAX, "E": MIN, "W": MIN}
DEFAULT_BUDGET = 50_000_000


@dataclass(frozen=True)
class BridgeSpec:
    n: int
    m: int
    secrets: dict  # player -> tuple of symbols
    prob: dict  # profile (4-tuple) -> Fraction
    theta: dict = field(default_factory=dict)  # player -> {profile: int}

    def __post_init__(self):
        if self.n < 1:
            raise GameError("bid ceiling n must be at least 1")
        if not 0 <= self.m <= self.n:
            raise GameError(f"need 0 <= m <= n, got m={self.m} n={self.n}")
        for p in PLAYERS:
            if not self.secrets.get(p):
                raise GameError(f"player {p} has no secrets")
        for h, q in self.prob.items():
            self._check_profile(h)
            if q < 0:
                raise GameError(f"negative probability for {' '.join(h)}")
        if sum(self.prob.values(), Fraction(0)) != 1:
            raise GameError("secret distribution does not sum to 1")
        for p, table in self.theta.items():
            if p not in PLAYERS:
                raise GameError(f"unknown player {p!r}")
            for h, k in table.items():
                self._check_profile(h)
                if not 0 <= k <= self.m:
                    raise GameError(f"theta {p} {' '.join(h)} = {k} is outside 0..{self.m}")
        # zero entries are the default; drop them so equal specs compare equal
        object.__setattr__(self, "theta", {p: {h: k for h, k in t.items() if k}
                                           for p, t in self.theta.items() if any(t.values())})

    def _check_profile(self, h):
        if len(h) != 4:
            raise GameError("a secret profile has four entries")
        for p, s in zip(PLAYERS, h):
            if s not in self.secrets[p]:
                raise GameError(f"{s!r} is not a secret of {p}")

    def all_profiles(self):
        return list(itertools.product(*(self.secrets[p] for p in PLAYERS)))

    def profiles(self) -> list:
        """Profiles with positive probability, in product order."""
        return [h for h in self.all_profiles() if self.prob.get(h, 0) > 0]

    def theta_of(self, player: str, h) -> int:
        return self.theta.get(player, {}).get(tuple(h), 0)


# ---------------------------------------------------------------------------
# Text format

_HEADER_RE = re.compile(r"^n\s*=\s*(\d+)\s+m\s*=\s*(\d+)$")


def parse_spec(text: str) -> BridgeSpec:
    n = m = None
    secrets, prob, theta = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            mh = _HEADER_RE.match(line)
            if not mh:
                raise ParseError("expected header 'n=<int> m=<int>'", lineno, 1)
            n, m = int(mh.group(1)), int(mh.group(2))
            continue
        words = line.split()
        if words[0] == "secrets":
            if len(words) < 3 or not words[1].endswith(":") or words[1][:-1] not in PLAYERS:
                raise ParseError("expected 'secrets <N|E|S|W>: s1 s2 ...'", lineno, 1)
            p = words[1][:-1]
            if p in secrets:
                raise ParseError(f"secrets of {p} given twice", lineno, 1)
            if len(set(words[2:])) != len(words) - 2:
                raise ParseError(f"repeated secret for {p}", lineno, 1)
            secrets[p] = tuple(words[2:])
        elif words[0] in ("prob", "theta"):
            head = 6 if words[0] == "theta" else 5
            if len(words) != head + 2 or words[head] != "=":
                raise ParseError(f"malformed {words[0]} line", lineno, 1)
            h = tuple(words[head - 4:head])
            for p, s in zip(PLAYERS, h):
                if p not in secrets or s not in secrets[p]:
                    col = raw.find(s) + 1
                    raise ParseError(f"unknown secret {s!r} for {p}", lineno, col)
            value = words[head + 1]
            try:
                if words[0] == "prob":
                    if h in prob:
                        raise ParseError("probability given twice", lineno, 1)
                    prob[h] = Fraction(value)
                else:
                    if words[1] not in PLAYERS:
                        raise ParseError(f"unknown player {words[1]!r}", lineno, 1)
                    theta.setdefault(words[1], {})[h] = int(value)
            except ValueError:
                raise ParseError(f"bad number {value!r}", lineno, raw.rfind(value) + 1) from None
        else:
            raise ParseError(f"unknown directive {words[0]!r}", lineno, 1)
    if n is None:
        raise ParseError("empty bidding spec")
    missing = [p for p in PLAYERS if p not in secrets]
    if missing:
        raise ParseError(f"no secrets line for {', '.join(missing)}")
    return BridgeSpec(n, m, secrets, prob, theta)


def format_spec(spec: BridgeSpec) -> str:
    out = [f"n={spec.n} m={spec.m}"]
    out += [f"secrets {p}: {' '.join(spec.secrets[p])}" for p in PLAYERS]
    profiles = spec.all_profiles()
    out += [f"prob {' '.join(h)} = {spec.prob[h]}" for h in profiles if spec.prob.get(h, 0)]
    for p in PLAYERS:
        out += [f"theta {p} {' '.join(h)} = {spec.theta_of(p, h)}"
                for h in profiles if spec.theta_of(p, h)]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Bidding rules

def last_nonzero(bids: Sequence[int]) -> int | None:
    for i in range(len(bids) - 1, -1, -1):
        if bids[i]:
            return i
    return None


def is_legal_bid(bids: Sequence[int], bid: int, n: int) -> bool:
    if bid == 0:
        return True
    if not 0 < bid <= n:
        return False
    j = last_nonzero(bids)
    return j is None or bid > bids[j]


def legal_bids(bids: Sequence[int], n: int) -> list:
    j = last_nonzero(bids)
    floor = bids[j] if j is not None else 0
    return [0] + list(range(floor + 1, n + 1))


def is_terminal(bids: Sequence[int], n: int) -> bool:
    if not bids:
        return False
    if bids[-1] == n:
        return True
    j = last_nonzero(bids)
    if j is None:
        return len(bids) >= 4
    return len(bids) - 1 - j >= 3


def to_move(bids: Sequence[int]) -> str:
    return PLAYERS[len(bids) % 4]


@dataclass(frozen=True)
class Outcome:
    declarer: str | None
    contract: int
    payoff: int  # to the N/S team


def _score(spec: BridgeSpec, h, bids) -> Outcome:
    j = last_nonzero(bids)
    if j is None:
        return Outcome(None, 0, 0)
    who, k = PLAYERS[j % 4], bids[j]
    made = spec.theta_of(who, h) >= k
    sign = 1 if made else -1
    if TEAM[who] == MIN:
        sign = -sign
    return Outcome(who, k, sign * k)


def play_out(spec: BridgeSpec, h, bids: Sequence[int]) -> Outcome:
    """Declarer, contract and N/S payoff of a complete bid sequence."""
    h = tuple(h)
    spec._check_profile(h)
    bids = list(bids)
    for i, b in enumerate(bids):
        if is_terminal(bids[:i], spec.n):
            raise GameError(f"bidding already ended before position {i}")
        if not is_legal_bid(bids[:i], b, spec.n):
            raise GameError(f"illegal bid {b} at position {i}")
    if not is_terminal(bids, spec.n):
        raise GameError(f"sequence is not terminal at position {len(bids)}")
    return _score(spec, h, bids)


def all_sequences(n: int, first_round: bool = False):
    """Every reachable bid sequence in depth-first order (terminal or not)."""
    def rec(bids):
        yield tuple(bids)
        if is_terminal(bids, n) or (first_round and len(bids) == 4):
            return
        for b in legal_bids(bids, n):
            bids.append(b)
            yield from rec(bids)
            bids.pop()
    yield from rec([])


# ---------------------------------------------------------------------------
# Extensive form

def infoset_id(player: str, secret: str, bids: Sequence[int]) -> str:
    return f"{player}|{secret}|{'.'.join(map(str, bids))}"


def compile(spec: BridgeSpec, first_round: bool = False) -> GameTree:
    """Chance over secret profiles, then the bidding tree below each.

    A node's infoset is (mover, own secret, bids so far); the agent is the
    seat, so N and S form team Max and E and W team Min.  ``first_round``
    cuts the tree after everyone's first bid and passes afterwards.
    """
    def tree(h, bids):
        if is_terminal(bids, spec.n):
            return Leaf(_score(spec, h, bids).payoff)
        if first_round and len(bids) == 4:
            return Leaf(_score(spec, h, bids + [0, 0, 0]).payoff)
        who = to_move(bids)
        secret = h[PLAYERS.index(who)]
        return Control(TEAM[who], infoset_id(who, secret, bids),
                       [(str(b), tree(h, bids + [b])) for b in legal_bids(bids, spec.n)], who)

    return GameTree.build(Chance([(spec.prob[h], tree(h, [])) for h in spec.profiles()]))


# ---------------------------------------------------------------------------
# Non-overbidding strategies

@dataclass
class NonOverbiddingStrategy:
    """Intended first-turn bid per seat.

    Keys of ``bids[p]`` are either a secret (the bid ignores what was seen)
    or a ``(secret, prefix)`` pair, the prefix being the bids before the
    seat's first turn.  Missing entries mean pass; illegal bids degrade to pass.
    """
    bids: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, quad: Sequence[int], spec: BridgeSpec) -> "NonOverbiddingStrategy":
        return cls({p: {s: int(b) for s in spec.secrets[p]} for p, b in zip(PLAYERS, quad)})

    def intended(self, player: str, secret: str, prefix: Sequence[int]) -> int:
        table = self.bids.get(player, {})
        key = (secret, tuple(prefix))
        return table[key] if key in table else table.get(secret, 0)


def _as_strategy(f, spec) -> NonOverbiddingStrategy:
    if isinstance(f, NonOverbiddingStrategy):
        return f
    return NonOverbiddingStrategy.constant(f, spec)


def realized_sequence(spec: BridgeSpec, h, f) -> tuple:
    """Roll out a non-overbidding quadruple: first turn as intended (if legal), then pass."""
    f = _as_strategy(f, spec)
    bids: list = []
    while not is_terminal(bids, spec.n):
        who = to_move(bids)
        b = 0
        if len(bids) < 4:
            b = f.intended(who, h[PLAYERS.index(who)], bids)
            if not is_legal_bid(bids, b, spec.n):
                b = 0
        bids.append(b)
    return tuple(bids)


def induced_strategies(spec: BridgeSpec, game: GameTree, f) -> tuple:
    """Pure team strategies on ``compile(spec)`` that play ``f``: (Max, Min)."""
    f = _as_strategy(f, spec)
    sigma, tau = {}, {}
    for iid, info in game.infosets.items():
        who, secret, seq = iid.split("|")
        prefix = [int(b) for b in seq.split(".")] if seq else []
        b = 0
        if len(prefix) < 4:
            b = f.intended(who, secret, prefix)
            if not is_legal_bid(prefix, b, spec.n):
                b = 0
        (sigma if info.player == MAX else tau)[iid] = str(b)
    return sigma, tau


def outcome_table(spec: BridgeSpec) -> np.ndarray:
    """N/S payoff of every (profile, intended quadruple): shape (|H|, n+1, n+1, n+1, n+1)."""
    profiles = spec.profiles()
    r = spec.n + 1
    table = np.zeros((len(profiles), r, r, r, r), dtype=np.int64)
    for k, h in enumerate(profiles):
        for quad in itertools.product(range(r), repeat=4):
            table[(k,) + quad] = _score(spec, h, realized_sequence(spec, h, quad)).payoff
    return table


def strategy_space_size(spec: BridgeSpec, player: str, strategy_class: str = "prefix") -> int:
    """Number of pure non-overbidding strategies of one seat."""
    seat = PLAYERS.index(player)
    used = {h[seat] for h in spec.profiles()}
    if strategy_class == "secret":
        return (spec.n + 1) ** len(used)
    if strategy_class != "prefix":
        raise GameError(f"unknown strategy class {strategy_class!r}")
    total = 1
    for seq in all_sequences(spec.n, first_round=True):
        if len(seq) == seat and not is_terminal(seq, spec.n):
            total *= len(legal_bids(seq, spec.n)) ** len(used)
    return total


# ---------------------------------------------------------------------------
# Exact solvers

class _PublicTreeDP:
    """Maxmin over the public bidding tree, memoised on (bids, live profiles).

    Valid when every Min seat either has one secret on the live profiles or
    moves after all Max decisions; ``exact`` reports whether that held.
    """

    def __init__(self, spec: BridgeSpec, first_round: bool, table=None):
        self.spec = spec
        self.first_round = first_round
        self.profiles = spec.profiles()
        self.weight = [spec.prob[h] for h in self.profiles]
        self.table = table
        self.memo = {}
        self.exact = True
        self.states = 0

    def leaf_value(self, bids, live):
        if self.first_round:
            quad = tuple(bids) + (0,) * (4 - len(bids))
            return sum((self.weight[k] * int(self.table[(k,) + quad]) for k in live), Fraction(0))
        return sum((self.weight[k] * _score(self.spec, self.profiles[k], bids).payoff
                    for k in live), Fraction(0))

    def done(self, bids):
        return is_terminal(bids, self.spec.n) or (self.first_round and len(bids) == 4)

    def value(self, bids: tuple, live: frozenset):
        key = (bids, live)
        if key in self.memo:
            return self.memo[key][0]
        self.states += 1
        if self.done(bids):
            out = (self.leaf_value(bids, live), {})
            self.memo[key] = out
            return out[0]
        who = to_move(bids)
        seat = PLAYERS.index(who)
        groups: dict = {}
        for k in sorted(live):
            groups.setdefault(self.profiles[k][seat], []).append(k)
        secrets = list(groups)
        options = legal_bids(bids, self.spec.n)

        def child(b, ks):
            return self.value(bids + (b,), frozenset(ks))

        if len(secrets) == 1:
            vals = [child(b, live) for b in options]
            target = max(vals) if TEAM[who] == MAX else min(vals)
            best = vals.index(target)
            out = (vals[best], {secrets[0]: options[best]})
        elif TEAM[who] == MIN:
            if not self._min_last(bids):
                self.exact = False
            total, choice = Fraction(0), {}
            for s in secrets:
                vals = [child(b, groups[s]) for b in options]
                i = min(range(len(options)), key=lambda j: (vals[j], j))
                total += vals[i]
                choice[s] = options[i]
            out = (total, choice)
        else:
            out = self._assign(bids, groups, secrets, options)
        self.memo[key] = out
        return out[0]

    def _min_last(self, bids) -> bool:
        """True when no Max seat moves after this one in the remaining tree."""
        return self.first_round and len(bids) == 3

    def _assign(self, bids, groups, secrets, options):
        """Best map secret -> bid for a Max seat holding several secrets."""
        g = len(secrets)
        full = (1 << g) - 1
        members = [[] for _ in range(full + 1)]
        for mask in range(1, full + 1):
            low = mask & -mask
            members[mask] = members[mask ^ low] + groups[secrets[low.bit_length() - 1]]
        # best[mask] = (value, assignment tuple) using the bids seen so far
        best = {0: (Fraction(0), ())}
        for b in options:
            val_b = {0: Fraction(0)}
            for mask in range(1, full + 1):
                val_b[mask] = self.value(bids + (b,), frozenset(members[mask]))
            nxt = {}
            for mask in range(full + 1):
                cand = None
                sub = mask
                while True:
                    rest = mask ^ sub
                    if rest in best:
                        v = best[rest][0] + val_b[sub]
                        if cand is None or v > cand[0]:
                            cand = (v, best[rest][1] + ((sub, b),))
                    if sub == 0:
                        break
                    sub = (sub - 1) & mask
                if cand is not None:
                    nxt[mask] = cand
            best = nxt
        value, parts = best[full]
        choice = {}
        for sub, b in parts:
            for i in range(g):
                if sub >> i & 1:
                    choice[secrets[i]] = b
        return value, choice

    def witness(self, bids=(), live=None):
        """Walk the memo along reached states: ({infoset: bid}, {infoset: bid}).

        Infosets that the plan never reaches are left out.
        """
        live = frozenset(range(len(self.profiles))) if live is None else live
        sigma, tau = {}, {}
        stack = [(tuple(bids), live)]
        while stack:
            seq, ks = stack.pop()
            if self.done(seq) or not ks:
                continue
            self.value(seq, ks)
            who = to_move(seq)
            seat = PLAYERS.index(who)
            choice = self.memo[(seq, ks)][1]
            target = sigma if TEAM[who] == MAX else tau
            by_bid: dict = {}
            for k in ks:
                s = self.profiles[k][seat]
                target[infoset_id(who, s, seq)] = str(choice[s])
                # Max's plan must also cover every deviation of Min
                for b in ([choice[s]] if TEAM[who] == MAX else legal_bids(seq, self.spec.n)):
                    by_bid.setdefault((b, s if TEAM[who] == MIN else None), set()).add(k)
            for (b, _), group in by_bid.items():
                stack.append((seq + (b,), frozenset(group)))
        return sigma, tau


def _nob_secret_only(spec, table, budget):
    """Exact enumeration over secret-only first bids (bids ignore the prefix)."""
    r = spec.n + 1
    profiles = spec.profiles()
    used = [sorted({h[i] for h in profiles}, key=spec.secrets[p].index) for i, p in enumerate(PLAYERS)]
    size = r ** (len(used[0]) + len(used[2])) * r ** (len(used[1]) + len(used[3]))
    if size > budget:
        raise BudgetExceeded(f"enumeration size {size} exceeds budget {budget}")
    den = reduce(lcm, (spec.prob[h].denominator for h in profiles), 1)
    w = np.array([int(spec.prob[h] * den) for h in profiles], dtype=np.int64)
    idx = [np.array([used[i].index(h[i]) for h in profiles]) for i in range(4)]
    rows = np.arange(len(profiles))
    mins = list(itertools.product(itertools.product(range(r), repeat=len(used[1])),
                                  itertools.product(range(r), repeat=len(used[3]))))
    e_bid = np.array([[fe[j] for j in idx[1]] for fe, _ in mins])
    w_bid = np.array([[fw[j] for j in idx[3]] for _, fw in mins])
    best = None
    for fn in itertools.product(range(r), repeat=len(used[0])):
        n_bid = np.array([fn[j] for j in idx[0]])
        for fs in itertools.product(range(r), repeat=len(used[2])):
            s_bid = np.array([fs[j] for j in idx[2]])
            sl = table[rows, n_bid, :, s_bid, :]  # (|H|, r, r)
            vals = (sl[rows[None, :], e_bid, w_bid] * w[None, :]).sum(axis=1)
            j = int(np.argmin(vals))
            if best is None or vals[j] > best[0]:
                best = (int(vals[j]), fn, fs, mins[j])
    value, fn, fs, (fe, fw) = best
    f = NonOverbiddingStrategy({
        "N": dict(zip(used[0], fn)), "E": dict(zip(used[1], fe)),
        "S": dict(zip(used[2], fs)), "W": dict(zip(used[3], fw)),
    })
    return Fraction(value, den), f, size


def _nob_witness(f: NonOverbiddingStrategy):
    sigma, tau = {}, {}
    for p, table in f.bids.items():
        target = sigma if TEAM[p] == MAX else tau
        for key, b in table.items():
            if isinstance(key, tuple):
                target[infoset_id(p, key[0], key[1])] = str(b)
            else:
                target[f"{p}|{key}"] = str(b)
    return sigma, tau


def _strategy_from_witness(sigma, tau) -> NonOverbiddingStrategy:
    bids: dict = {}
    for iid, b in {**sigma, **tau}.items():
        who, secret, seq = iid.split("|")
        prefix = tuple(int(x) for x in seq.split(".")) if seq else ()
        bids.setdefault(who, {})[(secret, prefix)] = int(b)
    return NonOverbiddingStrategy(bids)


def solve_non_overbidding(spec: BridgeSpec, strategy_class: str = "prefix",
                          budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Maxmin over non-overbidding strategies (bid once, then always pass).

    Phase 1 tabulates the outcome of every intended quadruple for every
    profile.  Phase 2 is exact: for ``strategy_class="prefix"`` (first bid
    may depend on the bids already seen) a dynamic program over the first
    bidding round, for ``"secret"`` an enumeration of all secret -> bid maps
    guarded by ``budget``.
    """
    table = outcome_table(spec)
    stats = {"table_entries": int(table.size), "strategy_class": strategy_class}
    if strategy_class == "secret":
        value, f, size = _nob_secret_only(spec, table, budget)
        stats["enumeration_size"] = size
        sigma, tau = _nob_witness(f)
        return SolveResult("maxmin_nob", value, "table+enumeration", sigma, tau, stats)
    if strategy_class != "prefix":
        raise GameError(f"unknown strategy class {strategy_class!r}")
    dp = _PublicTreeDP(spec, first_round=True, table=table)
    value = dp.value((), frozenset(range(len(dp.profiles))))
    if dp.exact:
        sigma, tau = dp.witness()
        stats["states"] = dp.states
        return SolveResult("maxmin_nob", value, "table+public-dp", sigma, tau, stats)
    res = solve_pure_maxmin(compile(spec, first_round=True), budget=budget)
    stats["candidates"] = res.stats["candidates"]
    return SolveResult("maxmin_nob", res.value, "table+enumeration", res.witness, res.response, stats)


def solve_bridge_pure_maxmin(spec: BridgeSpec, budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Pure team maxmin of ``compile(spec)``.

    Uses the public-tree dynamic program when both Min seats hold a single
    live secret (then Min's choices depend on the public bids only);
    otherwise falls back to reduced-strategy enumeration on the game tree.
    """
    profiles = spec.profiles()
    trivial_min = all(len({h[i] for h in profiles}) == 1 for i in (1, 3))
    if trivial_min:
        dp = _PublicTreeDP(spec, first_round=False)
        value = dp.value((), frozenset(range(len(profiles))))
        sigma, tau = dp.witness()
        return SolveResult("maxmin_pure", value, "public-dp", sigma, tau, {"states": dp.states})
    res = solve_pure_maxmin(compile(spec), budget=budget)
    return res


__all__ = [
    "PLAYERS", "TEAM", "BridgeSpec", "Outcome", "NonOverbiddingStrategy", "parse_spec",
    "format_spec", "is_legal_bid", "legal_bids", "is_terminal", "play_out", "compile",
    "realized_sequence", "induced_strategies", "outcome_table", "strategy_space_size",
    "solve_non_overbidding", "solve_bridge_pure_maxmin", "all_sequences", "infoset_id",
]
