"""Interior roots of the secular equation f(x) = 1 + sum b_j/(d_j - x).

Two specialized methods are provided, both with derived starting points
and iterates confined to the open interval between adjacent poles:

* the two-pole rational approximant (``Method.BNS``), which fits one
  hyperbola to the poles left of the interval and one to the poles at and
  beyond its right end, and steps to the root of the combined approximant;
* the reciprocal transform (``Method.TRANSFORMED``), which substitutes
  x = 1/z, keeps the dominant pole term of the transformed function F
  exactly, and linearizes the rest.

Plain Newton on F (``Method.NEWTON_ON_F``) is included as a baseline.
All arithmetic runs in the frame shifted so the left pole of the target
interval sits at the origin; results are shifted back on output.  Pole
terms are computed vectorized, but the reduction is always exact
compensated accumulation (math.fsum): near a pole the terms dwarf the
constant 1 and pairwise summation would lose it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    Breakdown,
    DegenerateLinear,
    DomainError,
    IterationTrace,
    PoleHit,
    PreconditionViolated,
    ScalarFunction,
    SolverConfig,
    Termination,
    solve_quadratic_stable,
)


class Method(Enum):
    BNS = "bns"
    TRANSFORMED = "transformed"
    NEWTON_ON_F = "newton-f"


@dataclass(frozen=True)
class SecularProblem:
    """Positive weights ``b`` and strictly increasing poles ``d``.

    The function has one root strictly inside each interval
    (d_i, d_{i+1}); those n-1 interior roots are what this module solves
    for (the root beyond d_n is out of scope).
    """

    b: tuple[float, ...]
    d: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "d", tuple(float(v) for v in self.d))
        if len(self.b) != len(self.d):
            raise ValueError("b and d must have the same length")
        if len(self.b) < 2:
            raise ValueError("need at least 2 pole terms for interior roots")
        for j, bj in enumerate(self.b):
            if not bj > 0:
                raise ValueError(f"b[{j}] must be positive")
        for j in range(1, len(self.d)):
            if not self.d[j] > self.d[j - 1]:
                raise ValueError(f"d[{j}] must exceed d[{j - 1}]")
        object.__setattr__(self, "_b_arr", np.asarray(self.b))
        object.__setattr__(self, "_d_arr", np.asarray(self.d))

    @property
    def n(self) -> int:
        return len(self.b)


@dataclass(frozen=True)
class ShiftedTask:
    """Solve frame for root index ``i`` (1-based, 1 <= i <= n-1).

    ``shifted_d`` are the poles with the origin moved to d_i, so
    ``shifted_d[i-1] == 0.0`` exactly, and ``interval`` is
    (0, d_{i+1} - d_i).
    """

    i: int
    shifted_d: tuple[float, ...]
    interval: tuple[float, float]

    def __post_init__(self) -> None:
        if self.shifted_d[self.i - 1] != 0.0:
            raise ValueError("shifted_d must place pole i at the origin")
        if not self.interval[1] > 0.0:
            raise ValueError("interval right endpoint must be positive")


def shift_task(p: SecularProblem, i: int) -> ShiftedTask:
    if not 1 <= i <= p.n - 1:
        raise ValueError(f"root index must be in 1..{p.n - 1}, got {i}")
    di = p.d[i - 1]
    delta = tuple(dj - di for dj in p.d)
    return ShiftedTask(i=i, shifted_d=delta, interval=(0.0, delta[i]))


def _pole_hit(x: float) -> PoleHit:
    return PoleHit(f"evaluation at {x!r} hits a pole")


def _exact_sum(terms: np.ndarray, extra: float) -> float:
    """Compensated sum of vectorized terms plus a scalar; rejects poles."""
    if not np.isfinite(terms).all():
        raise PoleHit("evaluation hit a pole")
    lst = terms.tolist()
    lst.append(extra)
    return math.fsum(lst)


class _Frame:
    """Per-task arrays for the shifted frame, shared by both methods.

    Building the splits once per solve makes every evaluation and fit a
    handful of vector operations plus one exact reduction.
    """

    __slots__ = ("i", "D", "di", "b", "dd", "b_left", "d_left", "b_right", "d_right")

    def __init__(self, p: SecularProblem, i: int) -> None:
        self.i = i
        self.di = p.d[i - 1]
        self.b = p._b_arr
        self.dd = p._d_arr - self.di
        self.D = float(self.dd[i])
        self.b_left = self.b[:i]
        self.d_left = self.dd[:i]
        self.b_right = self.b[i:]
        self.d_right = self.dd[i:]

    def f(self, x: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self.b / (self.dd - x)
        if not np.isfinite(terms).all():
            raise _pole_hit(x)
        lst = terms.tolist()
        lst.append(1.0)
        return math.fsum(lst)

    def fit(self, x_bar: float) -> BnsApproximant:
        dens = self.d_left - x_bar
        ws = self.b_left / (dens * dens)
        f1p = math.fsum(ws.tolist())
        if not f1p > 0.0 or not math.isfinite(f1p):
            raise Breakdown("left pole sum has non-positive slope")
        beta = math.fsum((ws * self.d_left).tolist()) / f1p
        alpha = (beta - x_bar) * (beta - x_bar) * f1p
        dens_r = self.d_right - x_bar
        f2 = math.fsum((self.b_right / dens_r).tolist())
        f2p = math.fsum((self.b_right / (dens_r * dens_r)).tolist())
        delta = (self.D - x_bar) * (self.D - x_bar) * f2p
        gamma = f2 - delta / (self.D - x_bar)
        return BnsApproximant(
            alpha=alpha, beta=beta, gamma=gamma, delta=delta, right_pole=self.D
        )


def eval_f(p: SecularProblem, x: float) -> float:
    """f(x) = 1 + sum b_j/(d_j - x), exactly compensated."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.asarray(p.b) / (np.asarray(p.d) - x)
    if not np.isfinite(terms).all():
        raise _pole_hit(x)
    lst = terms.tolist()
    lst.append(1.0)
    return math.fsum(lst)


def deriv_f(p: SecularProblem, x: float) -> float:
    """f'(x) = sum b_j/(d_j - x)^2 (positive wherever defined)."""
    dens = np.asarray(p.d) - x
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.asarray(p.b) / (dens * dens)
    if not np.isfinite(terms).all():
        raise _pole_hit(x)
    return math.fsum(terms.tolist())


def deriv2_f(p: SecularProblem, x: float) -> float:
    dens = np.asarray(p.d) - x
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = 2.0 * np.asarray(p.b) / (dens * dens * dens)
    if not np.isfinite(terms).all():
        raise _pole_hit(x)
    return math.fsum(terms.tolist())


def interval_function(p: SecularProblem, i: int) -> ScalarFunction:
    """f restricted to the open interval (d_i, d_{i+1})."""
    if not 1 <= i <= p.n - 1:
        raise ValueError(f"root index must be in 1..{p.n - 1}, got {i}")
    return ScalarFunction(
        f=lambda x: eval_f(p, x),
        df=lambda x: deriv_f(p, x),
        d2f=lambda x: deriv2_f(p, x),
        domain=(p.d[i - 1], p.d[i]),
    )


def _f_shifted(p: SecularProblem, task: ShiftedTask, x: float) -> float:
    return _Frame(p, task.i).f(x)


@dataclass(frozen=True)
class BnsApproximant:
    """g(x) = 1 + alpha/(beta - x) + gamma + delta/(right_pole - x).

    alpha and delta are positive and beta <= 0 (beta == 0 exactly when
    i == 1, where the only left pole sits at the shifted origin), so g is
    strictly increasing on (0, right_pole) and dominates f there.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    right_pole: float

    def value(self, x: float) -> float:
        return math.fsum(
            [
                1.0,
                self.alpha / (self.beta - x),
                self.gamma,
                self.delta / (self.right_pole - x),
            ]
        )


def fit_bns(p: SecularProblem, task: ShiftedTask, x_bar: float) -> BnsApproximant:
    """Fit the two-pole approximant to f at ``x_bar`` (shifted frame).

    The left part alpha/(beta - x) matches the value and slope of the
    poles j <= i; the right part gamma + delta/(D - x) does the same for
    j >= i+1.  beta comes from the weighted-pole form
    sum b_j d_j/(d_j - x)^2 / f1', which keeps beta <= 0 exactly instead
    of losing the sign to cancellation in x + f1/f1'.
    """
    return _Frame(p, task.i).fit(x_bar)


def _select_in_interval(candidates: tuple[float, ...], lo: float, hi: float) -> float:
    """Pick the unique candidate inside (lo, hi).

    The fitted approximants are strictly monotone on the interval, so
    exactly one root can lie inside; two inside is a defect.  If rounding
    pushed the root onto an endpoint, accept within an eps-scale slack.
    """
    inside = [r for r in candidates if lo < r < hi]
    if len(inside) == 1:
        return inside[0]
    if len(inside) > 1:
        raise Breakdown(f"both quadratic roots {candidates!r} lie in ({lo!r}, {hi!r})")
    bound = max(abs(lo), 1.0) if math.isinf(hi) else max(abs(lo), abs(hi), 1.0)
    slack = 8.0 * math.ulp(bound)
    near = [r for r in candidates if lo - slack <= r <= hi + slack]
    if near:
        return min(near, key=lambda r: min(abs(r - lo), abs(r - hi)))
    raise Breakdown(f"no quadratic root {candidates!r} in ({lo!r}, {hi!r})")


def _bns_root_from(g: BnsApproximant, x_bar: float, D: float) -> float:
    # (1+gamma)(beta - x)(D - x) + alpha(D - x) + delta(beta - x) = 0
    one_gamma = 1.0 + g.gamma
    a2 = one_gamma
    a1 = -(one_gamma * (g.beta + D) + g.alpha + g.delta)
    a0 = one_gamma * g.beta * D + g.alpha * D + g.delta * g.beta
    try:
        roots = solve_quadratic_stable(a2, a1, a0)
    except DegenerateLinear:
        if a1 == 0.0:
            raise Breakdown("degenerate approximant quadratic") from None
        roots = (-a0 / a1,)
    return _select_in_interval(roots, x_bar, D)


def bns_step(p: SecularProblem, task: ShiftedTask, x_bar: float) -> float:
    """Next iterate: the root of the fitted approximant in (x_bar, D).

    Because g dominates f and increases strictly, that root lies between
    x_bar and the true root whenever f(x_bar) < 0, which is why the method
    converges monotonically from the left.
    """
    lo, D = task.interval
    if not lo < x_bar < D:
        raise DomainError(f"x_bar={x_bar!r} outside (0, {D!r})")
    frame = _Frame(p, task.i)
    fx = frame.f(x_bar)
    if fx >= 0.0:
        raise PreconditionViolated(f"f(x_bar)={fx!r} must be strictly negative")
    return _bns_root_from(frame.fit(x_bar), x_bar, D)


def bns_initial_point(p: SecularProblem, task: ShiftedTask) -> float:
    """Starting point with f(x0) < 0, from a dominating bound on f.

    Freezing every pole term except i, i+1 at its value at D gives a
    strictly increasing bound >= f whose single root in (0, D) is the root
    of a quadratic.  If rounding leaves f(x0) >= 0 (the n = 2 case, where
    the bound equals f and x0 is the root itself), the point is nudged
    left by 1e-12 * D.
    """
    return _initial_point(_Frame(p, task.i))


def _initial_point(frame: _Frame) -> float:
    i = frame.i
    D = frame.D
    others_b = np.concatenate([frame.b[: i - 1], frame.b[i + 1 :]])
    others_d = np.concatenate([frame.dd[: i - 1], frame.dd[i + 1 :]])
    c = _exact_sum(others_b / (others_d - D), 1.0)
    bi = float(frame.b[i - 1])
    bi1 = float(frame.b[i])
    # c - bi/x + bi1/(D - x) = 0, cleared by x(D - x) > 0.
    try:
        roots = solve_quadratic_stable(-c, c * D + bi + bi1, -bi * D)
    except DegenerateLinear:
        roots = (bi * D / (bi + bi1),)
    x0 = _select_in_interval(roots, 0.0, D)
    if frame.f(x0) >= 0.0:
        x0 -= 1e-12 * D
        if not 0.0 < x0 < D or frame.f(x0) >= 0.0:
            raise Breakdown("could not place the starting point left of the root")
    return x0


class _TransformedFrame:
    """Per-task constants of F(z) = f(1/z) in expanded form.

    F(z) = 1 + sum_{j != i} b_j/d_j - b_i z
             + sum_{j != i} (b_j/d_j^2)/(z - 1/d_j)
    with the d_j in the shifted frame.
    """

    __slots__ = ("const", "locs", "weights", "b_i", "pole", "retained_w", "di")

    def __init__(self, p: SecularProblem, i: int) -> None:
        b = p._b_arr
        self.di = p.d[i - 1]
        dd = p._d_arr - self.di
        keep = np.arange(len(dd)) != i - 1
        ob, od = b[keep], dd[keep]
        self.const = _exact_sum(ob / od, 1.0)
        self.locs = 1.0 / od
        self.weights = ob / (od * od)
        self.b_i = float(b[i - 1])
        D = float(dd[i])
        self.pole = 1.0 / D
        self.retained_w = float(b[i]) / (D * D)

    def value(self, z: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self.weights / (z - self.locs)
        return _exact_sum(terms, self.const - self.b_i * z)

    def slope(self, z: float) -> float:
        dens = z - self.locs
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = self.weights / (dens * dens)
        return -_exact_sum(terms, self.b_i)


def eval_F(p: SecularProblem, task: ShiftedTask, z: float) -> float:
    """The transformed function F(z) = f(1/z) in expanded form.

    On (1/d_{i+1}, +inf) it is strictly decreasing and convex, falling
    from +inf to -inf, so it has exactly one root there: the reciprocal
    of the shifted interior root.
    """
    return _TransformedFrame(p, task.i).value(z)


def deriv_F(p: SecularProblem, task: ShiftedTask, z: float) -> float:
    """F'(z) = -b_i - sum_{j != i} (b_j/d_j^2)/(z - 1/d_j)^2 (< 0)."""
    return _TransformedFrame(p, task.i).slope(z)


def transformed_function(p: SecularProblem, i: int) -> ScalarFunction:
    """F on its solving interval (1/(d_{i+1}-d_i), +inf), shifted frame."""
    if not 1 <= i <= p.n - 1:
        raise ValueError(f"root index must be in 1..{p.n - 1}, got {i}")
    frame = _TransformedFrame(p, i)
    return ScalarFunction(f=frame.value, df=frame.slope, domain=(frame.pole, math.inf))


@dataclass(frozen=True)
class TransformedApproximant:
    """G(z) = a_lin + b_lin*z + pole_weight/(z - pole_loc).

    The retained pole term is the i+1 term of F kept exactly; the linear
    part is the tangent of the remainder F1, so b_lin < 0 and G decreases
    strictly on (pole_loc, +inf) with a unique root there.  Since F1 is
    convex its tangent lies below it, hence G <= F on the whole interval.
    """

    a_lin: float
    b_lin: float
    pole_weight: float
    pole_loc: float

    def value(self, z: float) -> float:
        return math.fsum(
            [self.a_lin, self.b_lin * z, self.pole_weight / (z - self.pole_loc)]
        )


def _fit_from_frame(
    frame: _TransformedFrame, z_bar: float, F_bar: float
) -> TransformedApproximant:
    s = frame.pole
    if not z_bar > s:
        raise DomainError(f"z_bar={z_bar!r} must exceed the pole {s!r}")
    w = frame.retained_w
    b_lin = frame.slope(z_bar) + w / ((z_bar - s) * (z_bar - s))
    if b_lin >= 0.0:
        raise Breakdown(f"tangent slope {b_lin!r} must be negative")
    F1 = F_bar - w / (z_bar - s)
    a_lin = F1 - b_lin * z_bar
    return TransformedApproximant(a_lin=a_lin, b_lin=b_lin, pole_weight=w, pole_loc=s)


def fit_transformed(
    p: SecularProblem, task: ShiftedTask, z_bar: float
) -> TransformedApproximant:
    frame = _TransformedFrame(p, task.i)
    return _fit_from_frame(frame, z_bar, frame.value(z_bar))


def _transformed_root(g: TransformedApproximant) -> float:
    # (z - s)(a + b z) + w = 0  ->  b z^2 + (a - b s) z + (w - a s) = 0
    s = g.pole_loc
    try:
        roots = solve_quadratic_stable(
            g.b_lin, g.a_lin - g.b_lin * s, g.pole_weight - g.a_lin * s
        )
    except DegenerateLinear:
        raise Breakdown("degenerate transformed quadratic") from None
    return _select_in_interval(roots, s, math.inf)


def transformed_step(p: SecularProblem, task: ShiftedTask, z_bar: float) -> float:
    """Next iterate: the root of G fitted at ``z_bar``, on (1/d_{i+1}, inf).

    Convergence is monotone from any point between the pole and the root;
    from the right of the root the step lands between the pole and the
    root, so the method is globally convergent on the interval.
    """
    return _transformed_root(fit_transformed(p, task, z_bar))


def transformed_initial_point(p: SecularProblem, task: ShiftedTask) -> float:
    """Average of the roots of two comparison functions bracketing F's root.

    Freezing every non-retained pole term of F at its value at the pole
    1/d_{i+1} gives a bound >= F (root right of F's); dropping those terms
    entirely gives a bound <= F (root left of F's).  Both roots come from
    quadratics of the same shape.
    """
    return _transformed_initial(_TransformedFrame(p, task.i))


def _transformed_initial(frame: _TransformedFrame) -> float:
    s = frame.pole
    w = frame.retained_w
    bi = frame.b_i
    c_low = frame.const
    # Drop the retained pole (present in locs/weights) from the frozen sum.
    with np.errstate(divide="ignore", invalid="ignore"):
        frozen = frame.weights / (s - frame.locs)
    mask = frame.locs != s
    c_high = c_low + math.fsum(frozen[mask].tolist())
    roots = []
    for c in (c_low, c_high):
        # (z - s)(c - bi z) + w = 0  ->  -bi z^2 + (c + bi s) z + (w - c s) = 0
        try:
            cand = solve_quadratic_stable(-bi, c + bi * s, w - c * s)
        except DegenerateLinear:
            raise Breakdown("degenerate comparison quadratic") from None
        roots.append(_select_in_interval(cand, s, math.inf))
    return 0.5 * (roots[0] + roots[1])


def _run_bns(p: SecularProblem, i: int, cfg: SolverConfig) -> IterationTrace:
    frame = _Frame(p, i)
    di = frame.di
    D = frame.D
    x = _initial_point(frame)
    fx = frame.f(x)
    trace = IterationTrace(iterates=[(di + x, fx)])
    for _ in range(cfg.max_iters):
        # f >= 0 can only mean rounding carried us onto (or past) the root:
        # the step is monotone from the left in exact arithmetic.
        if abs(fx) <= cfg.f_tol or fx >= 0.0:
            break
        try:
            nxt = _bns_root_from(frame.fit(x), x, D)
        except Breakdown:
            trace.termination = Termination.BREAKDOWN
            return trace
        if nxt <= x or di + nxt <= di + x:
            # The step collapsed to rounding width (in the shifted frame or
            # after un-shifting): we are at the root.  Not recording it
            # keeps the trace strictly increasing.
            break
        fnxt = frame.f(nxt)
        trace.iterates.append((di + nxt, fnxt))
        converged = abs(nxt - x) <= cfg.step_tol * (1.0 + abs(nxt))
        x, fx = nxt, fnxt
        if converged:
            break
    else:
        if not (abs(fx) <= cfg.f_tol or fx >= 0.0):
            trace.termination = Termination.MAX_ITERS
            return trace
    trace.termination = Termination.CONVERGED
    trace.root = di + x
    return trace


def _run_transformed(
    p: SecularProblem, i: int, cfg: SolverConfig, newton: bool
) -> IterationTrace:
    frame = _TransformedFrame(p, i)
    di = frame.di
    s = frame.pole
    z = _transformed_initial(frame)
    Fz = frame.value(z)
    x = di + 1.0 / z
    trace = IterationTrace(iterates=[(x, Fz)])
    for _ in range(cfg.max_iters):
        if abs(Fz) <= cfg.f_tol:
            break
        try:
            if newton:
                Fp = frame.slope(z)
                if Fp == 0.0:
                    raise Breakdown("flat tangent")
                nxt = z - Fz / Fp
            else:
                nxt = _transformed_root(_fit_from_frame(frame, z, Fz))
        except Breakdown:
            trace.termination = Termination.BREAKDOWN
            return trace
        if not nxt > s:
            trace.termination = Termination.LEFT_DOMAIN
            trace.offending = di + (1.0 / nxt if nxt != 0.0 else math.inf)
            return trace
        if nxt == z:
            break
        Fnxt = frame.value(nxt)
        x_nxt = di + 1.0 / nxt
        trace.iterates.append((x_nxt, Fnxt))
        # The stopping rule is stated on the x iterates; measuring the step
        # in z would chatter at the noise floor when z is large.
        converged = abs(x_nxt - x) <= cfg.step_tol * (1.0 + abs(x_nxt))
        z, Fz, x = nxt, Fnxt, x_nxt
        if converged:
            break
    else:
        if abs(Fz) > cfg.f_tol:
            trace.termination = Termination.MAX_ITERS
            return trace
    trace.termination = Termination.CONVERGED
    trace.root = di + 1.0 / z
    return trace


def solve_root(
    p: SecularProblem,
    i: int,
    method: Method = Method.BNS,
    cfg: Optional[SolverConfig] = None,
) -> IterationTrace:
    """Solve for the interior root on (d_i, d_{i+1}), 1 <= i <= n-1.

    The trace records unshifted iterates with their residuals; for the
    transformed methods the residual is F at the corresponding z, which
    equals f at the recorded x.
    """
    cfg = cfg or SolverConfig()
    if not 1 <= i <= p.n - 1:
        raise ValueError(f"root index must be in 1..{p.n - 1}, got {i}")
    if method is Method.BNS:
        return _run_bns(p, i, cfg)
    if method is Method.TRANSFORMED:
        return _run_transformed(p, i, cfg, newton=False)
    if method is Method.NEWTON_ON_F:
        return _run_transformed(p, i, cfg, newton=True)
    raise ValueError(f"unknown method {method!r}")


def solve_all_roots(
    p: SecularProblem,
    method: Method = Method.BNS,
    cfg: Optional[SolverConfig] = None,
) -> list[IterationTrace]:
    """All n-1 interior roots, ordered by index.

    Each root is an independent pure computation, so callers may fan the
    indices out across threads; this convenience wrapper runs them in
    sequence.
    """
    return [solve_root(p, i, method, cfg) for i in range(1, p.n)]
