"""Extensive-form games with imperfect recall: exact pure solvers, polynomial
reductions, hardness gadgets and a bidding-game model."""
from .errors import BudgetExceeded, GameError, IncompleteStrategyError, ParseError
from .game import (MAX, MIN, Chance, Control, GameTree, Leaf, Recall, RecallClass,
                   as_behavioural, chance_degree, check_valid, classify_recall,
                   enumerate_pure, fix_player, format_game, history, parse_game,
                   payoff, render_tree, scale_utilities, validate)
from .poly import (Decomposition, GeneralPoly, MultilinearPoly, RecallCheck, cancels,
                   equivalent, full_expand, is_perfect_recall, parse_general,
                   parse_multilinear, x_decomposition)
from .solvers import (BagPartition, SolveResult, bag_partition, estimate_maxmin_beh,
                      solve_backward_induction, solve_pure_exhaustive, solve_pure_maxmin,
                      solve_pure_minmax, solve_pure_one_player)
from .transforms import (FormulaText, build_gap_game, encode_maxmin_formula, game_to_poly,
                         gadget_sqrt, gadget_sqrtsum, parse_formula, poly_to_game,
                         pr_poly_to_game)

__version__ = "0.1.0"
