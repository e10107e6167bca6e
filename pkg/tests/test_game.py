import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from irgames import fixtures
from irgames.errors import GameError, IncompleteStrategyError, ParseError
from irgames.game import (MAX, MIN, Chance, Control, GameTree, Leaf, Node, Recall,
                          chance_degree, check_valid, classify_recall, enumerate_pure,
                          fix_player, format_game, history, parse_game, payoff,
                          scale_utilities, validate)
from irgames.transforms import gadget_sqrt

from gen import random_game

HALF = Fraction(1, 2)


class TestValidate:
    def test_g2_is_valid(self):
        assert validate(fixtures.g2()).ok

    def test_single_leaf(self):
        assert validate(GameTree.build(Leaf(3))).ok

    def test_chance_sum(self):
        g = GameTree.build(Chance([(HALF, Leaf(1)), (Fraction(1, 3), Leaf(2))]))
        report = validate(g)
        assert not report.ok
        assert any("chance probabilities sum ≠ 1" in str(v) for v in report)
        with pytest.raises(GameError):
            check_valid(g)

    def test_duplicate_action(self):
        g = GameTree.build(Control(MAX, "I", [("a", Leaf(1)), ("a", Leaf(2))]))
        assert "duplicate-action" in {v.code for v in validate(g)}

    def test_infoset_moves_mismatch(self):
        g = GameTree.build(Chance([
            (HALF, Control(MAX, "I", [("a", Leaf(1)), ("b", Leaf(2))])),
            (HALF, Control(MAX, "I", [("a", Leaf(1)), ("c", Leaf(2))])),
        ]))
        assert "infoset-moves" in {v.code for v in validate(g)}

    def test_infoset_player_mismatch(self):
        g = GameTree.build(Chance([
            (HALF, Control(MAX, "I", [("a", Leaf(1)), ("b", Leaf(2))])),
            (HALF, Control(MIN, "I", [("a", Leaf(1)), ("b", Leaf(2))])),
        ]))
        assert "infoset-player" in {v.code for v in validate(g)}

    def test_not_a_tree(self):
        nodes = [Node("chance", (1, 1), (HALF, HALF)), Node("leaf", utility=Fraction(1))]
        assert "not-a-tree" in {v.code for v in validate(GameTree(nodes))}

    def test_unreachable(self):
        nodes = [Node("chance", (1,), (Fraction(1),)), Node("leaf", utility=Fraction(1)),
                 Node("leaf", utility=Fraction(2))]
        assert "unreachable" in {v.code for v in validate(GameTree(nodes))}

    def test_nonpositive_chance(self):
        g = GameTree.build(Chance([(0, Leaf(1)), (1, Leaf(2))]))
        assert "chance-nonpositive" in {v.code for v in validate(g)}


class TestHistory:
    def test_g2_histories(self):
        g = fixtures.g2()
        u3, u4 = g.infoset_nodes("u34")
        assert history(g, u3) == ("u1", "b", "u34")
        assert history(g, u4) == ("u2", "a", "u34")

    def test_root(self):
        g = fixtures.g2()
        assert history(g, g.root) == ("r",)

    def test_leaf_has_no_owner(self):
        g = fixtures.g2()
        with pytest.raises(GameError, match="no history owner"):
            history(g, g.leaves[0])


class TestRecall:
    def test_g1_absent_minded(self):
        g = fixtures.g1()
        rc = classify_recall(g, MAX)
        assert rc.kind == Recall.ABSENT_MINDED
        assert rc.witness == tuple(g.infoset_nodes("I"))

    def test_gadget_a_loss(self):
        for n in (2, 4, 9):
            g = gadget_sqrt(n)
            assert classify_recall(g, MAX).kind == Recall.A_LOSS
            assert classify_recall(g, MIN).kind == Recall.PERFECT

    def test_g2_signal_loss(self):
        g = fixtures.g2()
        rc = classify_recall(g, MAX)
        assert rc.kind == Recall.SIGNAL_LOSS
        assert set(rc.witness) == set(g.infoset_nodes("u34"))
        assert classify_recall(g, MIN).kind == Recall.PERFECT

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_perfect_recall_means_equal_histories(self, seed):
        g = random_game(random.Random(seed), players=(MAX, MIN))
        for p in (MAX, MIN):
            if classify_recall(g, p).kind == Recall.PERFECT:
                for iid in g.player_infosets(p):
                    assert len({history(g, u) for u in g.infoset_nodes(iid)}) == 1


class TestChanceDegree:
    def test_fixtures(self):
        assert chance_degree(fixtures.g2()) == 1
        assert chance_degree(gadget_sqrt(4)) == 2
        assert chance_degree(GameTree.build(Leaf(0))) == 1
        assert chance_degree(fixtures.chance_chain()) == 4

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_pure_play_reaches_at_most_k_leaves(self, seed):
        g = random_game(random.Random(seed), max_degree=4)
        k = chance_degree(g)
        for sigma in list(enumerate_pure(g, MAX))[:50]:
            reached = 0
            for leaf, edges in g.leaf_paths.items():
                ok = all(g.nodes[u].kind == "chance" or g.nodes[u].labels[j] == sigma[g.nodes[u].infoset]
                         for u, j in edges)
                reached += ok
            assert 1 <= reached <= k


class TestPayoff:
    def test_g1(self):
        g = fixtures.g1()
        assert payoff(g, {"I": "a"}) == 0
        assert payoff(g, {"I": {"a": HALF, "b": HALF}}) == Fraction(1, 4)
        assert payoff(g, {"I": (Fraction(1, 3), Fraction(2, 3))}) == Fraction(2, 9)

    def test_g2_all_left(self):
        g = fixtures.g2()
        assert payoff(g, {"u1": "a", "u2": "a", "u34": "a"}, {"r": "A"}) == 1

    def test_chance_chain(self):
        assert payoff(fixtures.chance_chain()) == Fraction(5, 2)

    def test_incomplete(self):
        with pytest.raises(IncompleteStrategyError, match="incomplete strategy"):
            payoff(fixtures.g2(), {"u1": "a"}, {"r": "A"})

    def test_enumerate_counts(self):
        assert [s["I"] for s in enumerate_pure(fixtures.g1(), MAX)] == ["a", "b"]
        assert len(list(enumerate_pure(fixtures.g2(), MAX))) == 8
        assert len(list(enumerate_pure(fixtures.g2(), MIN))) == 2

    def test_fix_player_matches_payoff(self):
        g = fixtures.g2()
        sigma = {"u1": (HALF, HALF), "u2": (Fraction(1, 3), Fraction(2, 3)), "u34": "b"}
        fixed = fix_player(g, MAX, sigma)
        for tau in enumerate_pure(g, MIN):
            assert payoff(fixed, {}, tau) == payoff(g, sigma, tau)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_multilinear_in_one_probability(self, seed):
        rng = random.Random(seed)
        g = random_game(rng, players=(MAX,))
        if not g.player_infosets(MAX) or classify_recall(g, MAX).kind == Recall.ABSENT_MINDED:
            return
        base = {i: [Fraction(1, len(g.infosets[i].moves))] * len(g.infosets[i].moves)
                for i in g.player_infosets(MAX)}
        iid = rng.choice(g.player_infosets(MAX))
        vals = []
        for t in (Fraction(0), Fraction(1, 2), Fraction(1)):
            s = dict(base)
            m = len(g.infosets[iid].moves)
            s[iid] = [t] + [(1 - t) / (m - 1)] * (m - 1)
            vals.append(payoff(g, s))
        assert vals[1] - vals[0] == vals[2] - vals[1]

    def test_scaling(self):
        g = fixtures.g2()
        scaled = scale_utilities(g, 3)
        for s in enumerate_pure(g, MAX):
            assert payoff(scaled, s, {"r": "B"}) == 3 * payoff(g, s, {"r": "B"})


class TestTextFormat:
    def test_round_trip_fixtures(self):
        for g in (fixtures.g1(), fixtures.g2(), fixtures.chance_chain(), gadget_sqrt(4)):
            text = format_game(g)
            assert format_game(parse_game(text)) == text
            assert parse_game(text) == g

    def test_comments_and_blank_lines(self):
        text = "# tiny\nC\n\n  L u=1 p=1/2\n  L u=-3/4 p=1/2\n"
        g = parse_game(text)
        assert payoff(g) == Fraction(1, 8)

    @pytest.mark.parametrize("text,line", [
        ("C\n  L u=1 p=1/2\n  L u=x p=1/2\n", 3),
        ("P1 I=a\n   L u=1 a=l\n", 2),
        ("P1 I=a\n  L u=1 p=1\n", 2),
        ("Q u=1\n", 1),
        ("L u=1\nL u=2\n", 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as err:
            parse_game(text)
        assert err.value.line == line

    def test_agent_field(self):
        text = "P1 I=x g=N\n  L u=1 a=l\n  L u=0 a=r\n"
        g = parse_game(text)
        assert g.infosets["x"].agent == "N"
        assert format_game(g) == text

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6))
    def test_round_trip_random(self, seed):
        g = random_game(random.Random(seed), players=(MAX, MIN))
        assert parse_game(format_game(g)) == g
