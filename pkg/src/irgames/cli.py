"""``irgames`` command line: thin adapters over the library calls.

Exit status is 0 on success, 1 on a domain error and 2 on malformed input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bridge, fixtures, solvers, transforms
from .errors import GameError, ParseError
from .game import (MAX, MIN, PLAYER_NAMES, chance_degree, classify_recall,
                   format_game, parse_game, render_tree, validate)
from .poly import is_perfect_recall, parse_general, parse_multilinear

EXAMPLES = {
    "g1": lambda: format_game(fixtures.g1()),
    "g2": lambda: format_game(fixtures.g2()),
    "chance-chain": lambda: format_game(fixtures.chance_chain()),
    "fig5": lambda: fixtures.FIG5_SPEC,
    "fig6": lambda: fixtures.FIG6_SPEC,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _read(path, stdin):
    if path in (None, "-"):
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a rational number, got {text!r}") from None


def _player(name):
    if name is None:
        return None
    return {"max": MAX, "min": MIN, "1": MAX, "2": MIN}[name.lower()]


class _Out:
    def __init__(self, args, stream):
        self.json = getattr(args, "json", False)
        self.dump_tree = getattr(args, "dump_tree", False)
        self.stream = stream

    def record(self, fields: dict):
        if self.json:
            self.stream.write(json.dumps(fields, ensure_ascii=False, default=str) + "\n")
        else:
            for k, v in fields.items():
                self.stream.write(f"{k} = {_text(v)}\n")

    def result(self, res: solvers.SolveResult):
        self.stream.write(res.to_json() + "\n" if self.json else res.to_text())

    def game(self, game):
        if self.json:
            self.stream.write(json.dumps({"game": format_game(game)}, ensure_ascii=False) + "\n")
        else:
            self.stream.write(render_tree(game) if self.dump_tree else format_game(game))

    def text(self, key, body: str):
        if self.json:
            self.stream.write(json.dumps({key: body}, ensure_ascii=False) + "\n")
        else:
            self.stream.write(body if body.endswith("\n") else body + "\n")


def _text(v):
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


# -- handlers -----------------------------------------------------------------

def _game(args, stdin):
    return parse_game(_read(args.game, stdin))


def cmd_validate(args, stdin, out):
    report = validate(_game(args, stdin))
    out.record({"valid": report.ok, "violations": len(report)})
    if not out.json:
        for v in report:
            out.stream.write(f"{v}\n")
    return 0 if report.ok else 1


def cmd_classify(args, stdin, out):
    game = _game(args, stdin)
    players = [_player(args.player)] if args.player else sorted(game.active_players())
    for p in players:
        rc = classify_recall(game, p, args.agent)
        fields = {"player": PLAYER_NAMES[p], "recall": rc.kind.value}
        if rc.witness:
            fields["witness"] = f"{rc.witness[0]},{rc.witness[1]}"
        out.record(fields)
    return 0


def cmd_chance_degree(args, stdin, out):
    out.record({"chance_degree": chance_degree(_game(args, stdin))})
    return 0


def cmd_solve_pure(args, stdin, out):
    out.result(solvers.solve_pure_maxmin(_game(args, stdin), minmax=args.minmax, budget=args.budget))
    return 0


def cmd_solve_pure_one(args, stdin, out):
    out.result(solvers.solve_pure_one_player(_game(args, stdin), _player(args.player)))
    return 0


def cmd_solve_beh(args, stdin, out):
    if args.tol <= 0:
        raise ParseError("--tol must be positive")
    out.result(solvers.estimate_maxmin_beh(_game(args, stdin), args.starts, args.tol, args.seed))
    return 0


def cmd_solve_bi(args, stdin, out):
    out.result(solvers.solve_backward_induction(_game(args, stdin)))
    return 0


def cmd_poly_check(args, stdin, out):
    check = is_perfect_recall(parse_multilinear(args.poly))
    fields = {"perfect_recall": check.perfect_recall}
    if not check.perfect_recall:
        fields["failing"] = str(check.failing)
    out.record(fields)
    if check.perfect_recall and args.witness and not out.json:
        out.stream.write(check.witness.pretty())
    return 0


def cmd_poly_to_game(args, stdin, out):
    out.game(transforms.poly_to_game(parse_general(args.poly)))
    return 0


def cmd_poly_pr_to_game(args, stdin, out):
    out.game(transforms.pr_poly_to_game(parse_multilinear(args.poly)))
    return 0


def cmd_game_to_poly(args, stdin, out):
    out.record({"poly": transforms.game_to_poly(_game(args, stdin), _player(args.player))})
    return 0


def cmd_encode(args, stdin, out):
    rel = ">" if args.strict else ">="
    phi = transforms.encode_maxmin_formula(_game(args, stdin), _rational(args.threshold), rel)
    out.text("formula", str(phi))
    return 0


def cmd_gadget_sqrt(args, stdin, out):
    out.game(transforms.gadget_sqrt(args.n))
    return 0


def cmd_gadget_sqrtsum(args, stdin, out):
    out.game(transforms.gadget_sqrtsum(args.a, _rational(args.p)))
    return 0


def cmd_gadget_gap(args, stdin, out):
    out.game(transforms.build_gap_game(_game(args, stdin), args.t))
    return 0


def _spec(args, stdin):
    return bridge.parse_spec(_read(args.spec, stdin))


def cmd_bridge_compile(args, stdin, out):
    out.game(bridge.compile(_spec(args, stdin), first_round=args.first_round))
    return 0


def cmd_bridge_nob(args, stdin, out):
    out.result(bridge.solve_non_overbidding(_spec(args, stdin), args.strategy_class, args.budget))
    return 0


def cmd_bridge_pure(args, stdin, out):
    out.result(bridge.solve_bridge_pure_maxmin(_spec(args, stdin), args.budget))
    return 0


def cmd_bridge_playout(args, stdin, out):
    spec = _spec(args, stdin)
    try:
        bids = [int(b) for b in args.bids.replace(",", " ").split()]
    except ValueError:
        raise ParseError(f"bids must be integers: {args.bids!r}") from None
    res = bridge.play_out(spec, args.secrets.split(), bids)
    out.record({"declarer": res.declarer or "-", "contract": res.contract, "payoff": res.payoff})
    return 0


def cmd_example(args, stdin, out):
    out.text("example", EXAMPLES[args.name]())
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    # SUPPRESS keeps a flag given before the subcommand from being reset after it
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="one JSON object per line")
    common.add_argument("--dump-tree", action="store_true", default=argparse.SUPPRESS,
                        help="print games as a drawn tree")

    p = _Parser(prog="irgames", description="Games with imperfect recall: solvers and constructions.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(parent, name, handler, help_text, game=False, spec=False):
        sp = parent.add_parser(name, help=help_text, parents=[common])
        sp.set_defaults(handler=handler)
        if game:
            sp.add_argument("--game", help="game file ('-' or omitted: stdin)")
        if spec:
            sp.add_argument("--spec", help="bidding spec file ('-' or omitted: stdin)")
        return sp

    add(sub, "validate", cmd_validate, "check structural invariants", game=True)
    sp = add(sub, "classify-recall", cmd_classify, "recall class per player", game=True)
    sp.add_argument("--player", choices=["max", "min"])
    sp.add_argument("--agent")
    add(sub, "chance-degree", cmd_chance_degree, "chance degree K", game=True)
    sp = add(sub, "solve-pure", cmd_solve_pure, "pure maxmin (or --minmax)", game=True)
    sp.add_argument("--minmax", action="store_true")
    sp.add_argument("--budget", type=int)
    sp = add(sub, "solve-pure-one", cmd_solve_pure_one, "one-player pure optimum", game=True)
    sp.add_argument("--player", choices=["max", "min"])
    sp = add(sub, "solve-beh", cmd_solve_beh, "estimate behavioural maxmin", game=True)
    sp.add_argument("--starts", type=int, default=8)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=solvers.DEFAULT_SEED)
    add(sub, "solve-bi", cmd_solve_bi, "backward induction", game=True)

    poly = sub.add_parser("poly", help="polynomial tools", parents=[common])
    psub = poly.add_subparsers(dest="poly_command", required=True, parser_class=_Parser)
    sp = add(psub, "check-pr", cmd_poly_check, "perfect-recall test")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--witness", action="store_true", help="print the decomposition tree")
    sp = add(psub, "to-game", cmd_poly_to_game, "one-player game with this payoff")
    sp.add_argument("--poly", required=True)
    sp = add(psub, "pr-to-game", cmd_poly_pr_to_game, "perfect-recall game with this payoff")
    sp.add_argument("--poly", required=True)

    game = sub.add_parser("game", help="game tools", parents=[common])
    gsub = game.add_subparsers(dest="game_command", required=True, parser_class=_Parser)
    sp = add(gsub, "to-poly", cmd_game_to_poly, "symbolic payoff polynomial", game=True)
    sp.add_argument("--player", choices=["max", "min"])

    sp = add(sub, "encode-formula", cmd_encode, "quantified formula for maxmin >= threshold", game=True)
    sp.add_argument("--threshold", default="0")
    sp.add_argument("--strict", action="store_true", help="use > instead of >=")

    gadget = sub.add_parser("gadget", help="hardness gadgets", parents=[common])
    gdsub = gadget.add_subparsers(dest="gadget_command", required=True, parser_class=_Parser)
    sp = add(gdsub, "sqrt", cmd_gadget_sqrt, "game with behavioural maxmin -sqrt(n)")
    sp.add_argument("--n", type=int, required=True)
    sp = add(gdsub, "sqrtsum", cmd_gadget_sqrtsum, "square-root-sum game")
    sp.add_argument("--a", type=int, nargs="+", required=True)
    sp.add_argument("--p", required=True)
    sp = add(gdsub, "gap", cmd_gadget_gap, "doubly-exponential gap game", game=True)
    sp.add_argument("--t", type=int)

    br = sub.add_parser("bridge", help="bidding game", parents=[common])
    bsub = br.add_subparsers(dest="bridge_command", required=True, parser_class=_Parser)
    sp = add(bsub, "compile", cmd_bridge_compile, "extensive form of a spec", spec=True)
    sp.add_argument("--first-round", action="store_true")
    sp = add(bsub, "solve-nob", cmd_bridge_nob, "non-overbidding maxmin", spec=True)
    sp.add_argument("--class", dest="strategy_class", choices=["prefix", "secret"], default="prefix")
    sp.add_argument("--budget", type=int, default=bridge.DEFAULT_BUDGET)
    sp = add(bsub, "solve-pure", cmd_bridge_pure, "pure team maxmin", spec=True)
    sp.add_argument("--budget", type=int, default=bridge.DEFAULT_BUDGET)
    sp = add(bsub, "playout", cmd_bridge_playout, "score one bid sequence", spec=True)
    sp.add_argument("--secrets", required=True, help="four secrets, N E S W")
    sp.add_argument("--bids", required=True, help="bids separated by spaces or commas")

    sp = add(sub, "example", cmd_example, "print a built-in example")
    sp.add_argument("name", choices=sorted(EXAMPLES))
    return p


def run(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args, stdin, _Out(args, stdout))
    except ParseError as exc:
        stderr.write(f"irgames: parse error: {exc}\n")
        return 2
    except GameError as exc:
        stderr.write(f"irgames: error: {exc}\n")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
