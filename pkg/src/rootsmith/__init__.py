"""Problem-adapted scalar root finders.

Instead of forcing a general-purpose iteration onto every equation, each
solver here approximates its target by a function with the same structure
(rational parts, retained poles, dominating fits), so the iterates are
monotone and stay confined to the interval that brackets the root.
"""

from . import cli, core, knapsack, oracle, pellet, secular
from .core import (
    IterationTrace,
    OrderEstimate,
    ScalarFunction,
    SolverConfig,
    Termination,
    estimate_order,
    halley_step,
    iterate,
    newton_step,
    secant_step,
    solve_quadratic_stable,
)
from .knapsack import KnapsackDual
from .pellet import RadiiPair, Trinomial
from .secular import Method, SecularProblem

__version__ = "0.1.0"

__all__ = [
    "IterationTrace",
    "KnapsackDual",
    "Method",
    "OrderEstimate",
    "RadiiPair",
    "ScalarFunction",
    "SecularProblem",
    "SolverConfig",
    "Termination",
    "Trinomial",
    "cli",
    "core",
    "estimate_order",
    "halley_step",
    "iterate",
    "knapsack",
    "newton_step",
    "oracle",
    "pellet",
    "secant_step",
    "secular",
    "solve_quadratic_stable",
]
