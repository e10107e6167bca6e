import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from irgames import fixtures
from irgames.bridge import (BridgeSpec, NonOverbiddingStrategy, all_sequences, compile,
                            format_spec, induced_strategies, is_legal_bid, is_terminal,
                            legal_bids, outcome_table, parse_spec, play_out, realized_sequence,
                            solve_bridge_pure_maxmin, solve_non_overbidding, strategy_space_size)
from irgames.errors import BudgetExceeded, GameError, ParseError
from irgames.game import MAX, MIN, Recall, chance_degree, classify_recall, payoff, validate
from irgames.solvers import solve_pure_maxmin

from gen import random_bridge_spec
from oracles import nob_secret_bruteforce

SP, DI, BOT = "♠", "♦", "⊥"


@pytest.fixture(scope="module")
def fig5():
    return fixtures.fig5_spec()


class TestRules:
    def test_legality(self):
        assert is_legal_bid([], 0, 3)
        assert is_legal_bid([2, 0], 3, 3)
        assert not is_legal_bid([2, 0], 2, 3)
        assert not is_legal_bid([], 4, 3)

    def test_terminal(self):
        assert is_terminal([0, 0, 0, 0], 3)
        assert not is_terminal([0, 0, 0], 3)
        assert is_terminal([1, 0, 0, 0], 3)
        assert not is_terminal([0, 1, 0, 0], 3)
        assert is_terminal([0, 3], 3)

    def test_legal_bids(self):
        assert legal_bids([0, 2], 4) == [0, 3, 4]

    def test_sequences_well_formed(self):
        seqs = list(all_sequences(2))
        assert seqs[0] == ()
        for s in seqs:
            for i, b in enumerate(s):
                assert not is_terminal(s[:i], 2)
                assert is_legal_bid(s[:i], b, 2)


class TestPlayOut:
    def test_fig5_examples(self, fig5):
        out = play_out(fig5, (SP, BOT, SP, BOT), (0, 1, 0, 2, 4, 0, 0, 0))
        assert (out.declarer, out.contract, out.payoff) == ("N", 4, 4)
        out = play_out(fig5, (SP, BOT, DI, BOT), (2, 3, 0, 0, 0))
        assert (out.declarer, out.contract, out.payoff) == ("E", 3, 3)

    def test_all_pass(self, fig5):
        out = play_out(fig5, (SP, BOT, SP, BOT), (0, 0, 0, 0))
        assert (out.declarer, out.contract, out.payoff) == (None, 0, 0)

    @pytest.mark.parametrize("bids,msg", [
        ((0, 1, 1), "illegal bid 1 at position 2"),
        ((1, 0, 0, 0, 0), "bidding already ended before position 4"),
        ((0, 1), "not terminal at position 2"),
    ])
    def test_errors(self, fig5, bids, msg):
        with pytest.raises(GameError, match=msg):
            play_out(fig5, (SP, BOT, SP, BOT), bids)

    def test_unknown_secret(self, fig5):
        with pytest.raises(GameError):
            play_out(fig5, ("x", BOT, SP, BOT), (0, 0, 0, 0))


class TestRealized:
    @pytest.mark.parametrize("quad,seq", [
        ((3, 1, 0, 0), (3, 0, 0, 0)),
        ((0, 0, 0, 0), (0, 0, 0, 0)),
        ((0, 2, 2, 0), (0, 2, 0, 0, 0)),
    ])
    def test_examples(self, fig5, quad, seq):
        assert realized_sequence(fig5, (SP, BOT, SP, BOT), quad) == seq

    def test_prefix_keys(self, fig5):
        f = NonOverbiddingStrategy({"S": {(SP, (0, 1)): 2, SP: 3}, "E": {BOT: 1}})
        assert realized_sequence(fig5, (SP, BOT, SP, BOT), f) == (0, 1, 2, 0, 0, 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_extensive_form_agrees(self, seed):
        rng = random.Random(seed)
        spec = random_bridge_spec(rng)
        game = compile(spec)
        quad = [rng.randint(0, spec.n) for _ in range(4)]
        sigma, tau = induced_strategies(spec, game, quad)
        direct = sum(spec.prob[h] * play_out(spec, h, realized_sequence(spec, h, quad)).payoff
                     for h in spec.profiles())
        assert payoff(game, sigma, tau) == direct


class TestCompile:
    def test_fig5(self, fig5):
        g = compile(fig5)
        assert validate(g).ok
        assert g.nodes[g.root].labels == (Fraction(1, 4),) * 4
        assert chance_degree(g) == 4
        assert classify_recall(g, MAX).kind == Recall.SIGNAL_LOSS
        for seat in "NESW":
            assert classify_recall(g, None, agent=seat).kind == Recall.PERFECT

    def test_first_round_is_smaller(self, fig5):
        assert len(compile(fig5, first_round=True).nodes) < len(compile(fig5).nodes)


class TestSpecFormat:
    def test_round_trip(self):
        for text in (fixtures.FIG5_SPEC, fixtures.FIG6_SPEC):
            spec = parse_spec(text)
            assert parse_spec(format_spec(spec)) == spec

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_random_round_trip(self, seed):
        spec = random_bridge_spec(random.Random(seed))
        assert parse_spec(format_spec(spec)) == spec

    @pytest.mark.parametrize("text,line", [
        ("n=2\n", 1),
        ("n=2 m=1\nsecrets N: a\nsecrets N: b\n", 3),
        ("n=2 m=1\nsecrets N: a\nprob z = 1\n", 3),
        ("n=2 m=1\nfoo\n", 2),
    ])
    def test_errors(self, text, line):
        with pytest.raises(ParseError) as err:
            parse_spec(text)
        assert err.value.line == line

    def test_invalid(self):
        secrets = {p: ("s",) for p in "NESW"}
        with pytest.raises(GameError, match="sum to 1"):
            BridgeSpec(2, 1, secrets, {("s",) * 4: Fraction(1, 2)}, {})
        with pytest.raises(GameError):
            BridgeSpec(2, 3, secrets, {("s",) * 4: Fraction(1)}, {})


class TestSolvers:
    def test_table_shape(self, fig5):
        assert outcome_table(fig5).shape == (4, 6, 6, 6, 6)

    def test_fig5_values(self, fig5):
        nob = solve_non_overbidding(fig5)
        pure = solve_bridge_pure_maxmin(fig5)
        assert nob.value == Fraction(3, 2)
        assert pure.value == 2
        g = compile(fig5)
        fill = {i: "0" for i in g.infosets}
        assert payoff(g, {**fill, **pure.witness}, {**fill, **pure.response}) == pure.value

    def test_secret_class_fig5(self, fig5):
        res = solve_non_overbidding(fig5, strategy_class="secret")
        assert res.value == Fraction(3, 2) == nob_secret_bruteforce(fig5)

    def test_secret_budget(self, fig5):
        with pytest.raises(BudgetExceeded):
            solve_non_overbidding(fig5, strategy_class="secret", budget=10)

    def test_unknown_class(self, fig5):
        with pytest.raises(GameError):
            solve_non_overbidding(fig5, strategy_class="other")

    def test_strategy_counts(self, fig5):
        assert strategy_space_size(fig5, "N", "secret") == 6 ** 2
        assert strategy_space_size(fig5, "E", "secret") == 6
        assert strategy_space_size(fig5, "N") == 6 ** 2
        # E moves after N's bid, so one bid per (secret, prefix)
        assert strategy_space_size(fig5, "E") == 6 * 5 * 4 * 3 * 2

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_against_generic_solvers(self, seed):
        spec = random_bridge_spec(random.Random(seed), n=2, max_secrets=(2, 1, 2, 1))
        nob = solve_non_overbidding(spec)
        assert nob.value == solve_pure_maxmin(compile(spec, first_round=True)).value
        pure = solve_bridge_pure_maxmin(spec)
        assert pure.value == solve_pure_maxmin(compile(spec)).value
        assert nob.value <= pure.value
        secret = solve_non_overbidding(spec, strategy_class="secret")
        assert secret.value == nob_secret_bruteforce(spec)
        assert secret.value <= nob.value
