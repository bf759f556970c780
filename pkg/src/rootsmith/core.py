"""Shared machinery for problem-adapted scalar root finding.

Everything here is a pure function of its inputs, so concurrent use from
multiple threads is safe.  The specialized solvers (secular, knapsack,
pellet) build their steps on top of these primitives; the classic one-point
steps (Newton, secant, Halley) double as baselines to race against.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional


class Breakdown(ArithmeticError):
    """A step formula lost its footing: zero derivative or denominator,
    a degenerate fitted quadratic, or a non-finite intermediate."""


class PoleHit(ValueError):
    """Evaluation requested exactly at a pole of the function."""


class DomainError(ValueError):
    """Argument outside the open domain of the function."""


class PreconditionViolated(ValueError):
    """A step was invoked from a point that violates its sign precondition."""


class NoRealRoots(ValueError):
    """Quadratic discriminant is negative."""


class DegenerateLinear(ValueError):
    """Leading quadratic coefficient is zero; the caller decides how to
    fall back to the linear equation."""


class InsufficientData(ValueError):
    """Too few usable iterates to estimate a convergence order."""


class InvalidBracket(ValueError):
    """Bracket endpoints do not have opposite nonzero signs."""


class NoRootFound(RuntimeError):
    """Scanning found no sign change at the maximum resolution."""


class Infeasible(ValueError):
    """Problem data admits no root in the solving interval."""


class NotApplicable(ValueError):
    """The trinomial has no pair of positive roots to compute."""


class DegenerateInput(ValueError):
    """Input data is degenerate (for example, all-zero coefficients)."""


class MaxItersExceeded(RuntimeError):
    """An inner iteration failed to reach its tolerance."""


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one real variable with optional derivatives.

    ``domain`` is an open interval; endpoints may be infinite.  ``f`` must
    be defined everywhere strictly inside it.
    """

    f: Callable[[float], float]
    df: Optional[Callable[[float], float]] = None
    d2f: Optional[Callable[[float], float]] = None
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __call__(self, x: float) -> float:
        return self.f(x)

    def contains(self, x: float) -> bool:
        lo, hi = self.domain
        return lo < x < hi


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules shared by every solver.

    An iteration converges once ``|f(x_k)| <= f_tol`` or the last step
    satisfies ``|x_k - x_{k-1}| <= step_tol * (1 + |x_k|)``.  ``inner_tol``
    bounds the residual of nested solves (the implicit inverse in the
    knapsack dual).
    """

    f_tol: float = 1e-13
    step_tol: float = 1e-14
    max_iters: int = 100
    inner_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.f_tol < 0 or self.step_tol < 0 or self.inner_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.f_tol == 0 and self.step_tol == 0:
            raise ValueError("f_tol and step_tol must not both be zero")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


class Termination(Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LEFT_DOMAIN = "LeftDomain"
    BREAKDOWN = "Breakdown"


@dataclass
class IterationTrace:
    """Ordered record of an iteration: (x_k, f(x_k)) pairs plus the outcome.

    ``root`` is set only when the run converged.  ``offending`` keeps the
    first value that left the domain, for diagnostics; it is never recorded
    among the iterates.
    """

    iterates: list[tuple[float, float]] = field(default_factory=list)
    termination: Termination = Termination.MAX_ITERS
    root: Optional[float] = None
    offending: Optional[float] = None

    @property
    def xs(self) -> list[float]:
        return [x for x, _ in self.iterates]

    @property
    def residuals(self) -> list[float]:
        return [fx for _, fx in self.iterates]

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def converged(self) -> bool:
        return self.termination is Termination.CONVERGED

    @property
    def final_x(self) -> float:
        return self.iterates[-1][0]


@dataclass(frozen=True)
class OrderEstimate:
    """Empirical convergence order ``q`` and the number of errors it used."""

    q: float
    samples_used: int


def newton_step(fn: ScalarFunction, x: float) -> float:
    """One tangent-line step: x - f(x)/f'(x)."""
    if fn.df is None:
        raise Breakdown("newton_step requires a first derivative")
    d = fn.df(x)
    if d == 0.0:
        raise Breakdown(f"zero derivative at x={x!r}")
    return x - fn.f(x) / d


def secant_step(fn: ScalarFunction, x: float, y: float) -> float:
    """One chord step through (x, f(x)) and (y, f(y))."""
    if x == y:
        raise Breakdown("secant_step needs two distinct points")
    fx, fy = fn.f(x), fn.f(y)
    if fx == fy:
        raise Breakdown(f"equal function values at x={x!r}, y={y!r}")
    return x - fx * (x - y) / (fx - fy)


def halley_step(fn: ScalarFunction, x: float) -> float:
    """One osculating-hyperbola step: x - 2ff'/(2(f')^2 - ff'')."""
    if fn.df is None or fn.d2f is None:
        raise Breakdown("halley_step requires first and second derivatives")
    fx = fn.f(x)
    d1 = fn.df(x)
    d2 = fn.d2f(x)
    den = 2.0 * d1 * d1 - fx * d2
    if den == 0.0:
        raise Breakdown(f"zero Halley denominator at x={x!r}")
    return x - 2.0 * fx * d1 / den


def iterate(
    stepper: Callable[[float], float],
    fn: ScalarFunction,
    x0: float,
    cfg: SolverConfig,
) -> IterationTrace:
    """Drive ``stepper`` from ``x0`` until convergence, domain exit,
    breakdown, or the iteration cap.

    Every in-domain iterate is recorded with its residual.  A stepper
    Breakdown is recorded in the trace rather than raised; an iterate that
    leaves the open domain ends the run with the offending value kept
    aside, never recorded.
    """
    if not fn.contains(x0):
        raise DomainError(f"x0={x0!r} outside domain {fn.domain}")
    x = float(x0)
    fx = fn.f(x)
    trace = IterationTrace(iterates=[(x, fx)])
    if abs(fx) <= cfg.f_tol:
        trace.termination = Termination.CONVERGED
        trace.root = x
        return trace
    for _ in range(cfg.max_iters):
        try:
            nxt = stepper(x)
        except Breakdown:
            trace.termination = Termination.BREAKDOWN
            return trace
        if not math.isfinite(nxt):
            trace.termination = Termination.BREAKDOWN
            return trace
        if not fn.contains(nxt):
            trace.termination = Termination.LEFT_DOMAIN
            trace.offending = nxt
            return trace
        fnxt = fn.f(nxt)
        trace.iterates.append((nxt, fnxt))
        if abs(fnxt) <= cfg.f_tol or abs(nxt - x) <= cfg.step_tol * (1.0 + abs(nxt)):
            trace.termination = Termination.CONVERGED
            trace.root = nxt
            return trace
        x = nxt
    trace.termination = Termination.MAX_ITERS
    return trace


def estimate_order(trace: IterationTrace, reference_root: float) -> OrderEstimate:
    """Estimate the convergence order from the error sequence of a trace.

    Uses the three-point quotient log(e_{k+1}/e_k) / log(e_k/e_{k-1}) over
    every consecutive error triple and takes the median, which resists the
    alternation such quotients show for non-integer orders (secant).
    Errors at or below 1e-14 * |reference_root| are rounding noise and are
    discarded; the usable prefix must also decrease strictly.
    """
    floor = 1e-14 * abs(reference_root)
    usable: list[float] = []
    for x, _ in trace.iterates:
        e = abs(x - reference_root)
        if e <= floor:
            break
        if usable and e >= usable[-1]:
            break
        usable.append(e)
    if len(usable) < 3:
        raise InsufficientData(
            f"need at least 3 usable errors, got {len(usable)}"
        )
    quotients = []
    for k in range(1, len(usable) - 1):
        num = math.log(usable[k + 1] / usable[k])
        den = math.log(usable[k] / usable[k - 1])
        quotients.append(num / den)
    q = statistics.median(quotients)
    if q <= 0.0:
        raise InsufficientData(f"non-positive order estimate {q!r}")
    return OrderEstimate(q=q, samples_used=len(usable))


def solve_quadratic_stable(a2: float, a1: float, a0: float) -> tuple[float, float]:
    """Both real roots of a2*x^2 + a1*x + a0 = 0, ascending.

    The larger-magnitude root comes from -(a1 + sign(a1)*sqrt(D)) / (2*a2)
    and the companion from a0 / (a2 * r), which avoids the cancellation the
    textbook formula suffers when a1*a1 >> |a2*a0|.
    """
    if a2 == 0.0:
        raise DegenerateLinear("leading coefficient is zero")
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        raise NoRealRoots(f"discriminant {disc!r} < 0")
    q = -(a1 + math.copysign(math.sqrt(disc), a1)) / 2.0
    if q == 0.0:
        r = -a1 / (2.0 * a2)
        return (r, r)
    r_big = q / a2
    r_small = a0 / q
    return (r_small, r_big) if r_small <= r_big else (r_big, r_small)
