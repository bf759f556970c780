"""Root of the convexified knapsack-dual equation.

The dual function f(x) = sum alpha_j * phi(beta_j x) - K on (0, gamma),
gamma = min_j 1/beta_j, is strictly decreasing but neither convex nor
concave, and phi itself has no closed form: phi is the inverse of
h(x) = 1 - (1 + 1/x) exp(-1/x) and every evaluation is an inner solve.
Multiplying by L(x) = 1 - x/gamma makes L*f convex with the same root,
so Newton started left of the root climbs to it monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import (
    Breakdown,
    DomainError,
    Infeasible,
    IterationTrace,
    MaxItersExceeded,
    SolverConfig,
    Termination,
)

_HALLEY_CAP = 50


@dataclass(frozen=True)
class KnapsackDual:
    """Weights alpha_j > 0, rates beta_j > 0, and budget K > 0."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    budget: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "budget", float(self.budget))
        if len(self.alpha) != len(self.beta) or not self.alpha:
            raise ValueError("alpha and beta must be non-empty and equally long")
        for j, a in enumerate(self.alpha):
            if not a > 0:
                raise ValueError(f"alpha[{j}] must be positive")
        for j, b in enumerate(self.beta):
            if not b > 0:
                raise ValueError(f"beta[{j}] must be positive")
        if not self.budget > 0:
            raise ValueError("budget must be positive")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def gamma(self) -> float:
        return 1.0 / max(self.beta)


@dataclass(frozen=True)
class PhiValue:
    """An inner-solve result y = phi(x) with its accepted residual |h(y) - x|."""

    y: float
    residual: float


def _h_of_recip(t: float) -> float:
    """1 - (1 + t) e^{-t}, accurate for small t where the direct form cancels."""
    if t < 1e-4:
        # (k-1)/k! * (-t)^k summed from k = 2
        t2 = t * t
        return t2 * (0.5 - t / 3.0 + t2 / 8.0 - t2 * t / 30.0)
    return -math.expm1(-t) - t * math.exp(-t)


def h_eval(x: float) -> float:
    """h(x) = 1 - (1 + 1/x) e^{-1/x}, strictly decreasing from 1 to 0 on (0, inf)."""
    if not x > 0:
        raise DomainError(f"h is defined for x > 0, got {x!r}")
    return _h_of_recip(1.0 / x)


def phi_eval(x: float, cfg: Optional[SolverConfig] = None) -> PhiValue:
    """Invert h: solve h(y) = x for y > 0.

    Substituting y = 1/z turns the equation into p(z) = h~(z) - x = 0 with
    h~(z) = 1 - (1+z)e^{-z}, which is strictly increasing in z.  Halley's
    method runs from z = 1 (clamping any non-positive iterate to z/2) and
    is polished to step stagnation; if after 50 steps the residual still
    exceeds the inner tolerance, a guaranteed bisection on p takes over.
    """
    if not 0.0 < x < 1.0:
        raise DomainError(f"phi is defined on (0, 1), got {x!r}")
    cfg = cfg or SolverConfig()
    tol = cfg.inner_tol
    z = 1.0
    pv = _h_of_recip(z) - x
    for _ in range(_HALLEY_CAP):
        if pv == 0.0:
            break
        ez = math.exp(-z)
        pd = z * ez
        pdd = (1.0 - z) * ez
        den = 2.0 * pd * pd - pv * pdd
        if den == 0.0 or pd == 0.0:
            break
        nxt = z - 2.0 * pv * pd / den
        if nxt <= 0.0:
            nxt = 0.5 * z
        step = abs(nxt - z)
        z = nxt
        pv = _h_of_recip(z) - x
        if step <= 4.0 * math.ulp(z):
            break
    if abs(pv) > tol:
        z, pv = _phi_bisect(x, z, tol)
    if abs(pv) > tol:
        raise MaxItersExceeded(
            f"inner solve for phi({x!r}) stalled at residual {abs(pv)!r}"
        )
    return PhiValue(y=1.0 / z, residual=abs(pv))


def _phi_bisect(x: float, z_hint: float, tol: float) -> tuple[float, float]:
    """Bisection fallback on p(z) = h~(z) - x; p increases from -x to 1-x."""
    if x <= 1e-8:
        # Dominant balance h~(z) ~ z^2/2 for small z brackets the tiny root.
        guess = math.sqrt(2.0 * x)
        lo, hi = guess / 8.0, guess * 8.0
    else:
        lo = hi = max(z_hint, 1e-300)
        while _h_of_recip(lo) - x > 0.0:
            lo *= 0.5
        while _h_of_recip(hi) - x < 0.0:
            hi *= 2.0
    flo = _h_of_recip(lo) - x
    fhi = _h_of_recip(hi) - x
    if flo > 0.0 or fhi < 0.0:
        raise MaxItersExceeded(f"could not bracket phi({x!r})")
    best_z, best_v = (lo, flo) if abs(flo) <= abs(fhi) else (hi, fhi)
    while hi - lo > math.ulp(hi):
        m = 0.5 * (lo + hi)
        if m <= lo or m >= hi:
            break
        fm = _h_of_recip(m) - x
        if abs(fm) < abs(best_v):
            best_z, best_v = m, fm
        if abs(fm) <= tol:
            return m, fm
        if fm < 0.0:
            lo = m
        else:
            hi = m
    return best_z, best_v


def phi_derivatives(y: float) -> tuple[float, float]:
    """(phi', phi'') expressed at y = phi(x): (-y^3 e^{1/y}, y^4 (3y-1) e^{2/y}).

    The exponential overflows for y below about 1/700; that is reported as
    OverflowError rather than saturated.
    """
    if not y > 0:
        raise DomainError(f"derivatives defined for y > 0, got {y!r}")
    t = 1.0 / y
    if t > 700.0:
        raise OverflowError(f"exp(1/y) overflows for y={y!r}")
    e = math.exp(t)
    return (-(y ** 3) * e, (y ** 4) * (3.0 * y - 1.0) * e * e)


def _inner_cfg(p: KnapsackDual, cfg: SolverConfig) -> SolverConfig:
    # Outer residual accuracy is limited by inner phi accuracy, so tie the
    # inner tolerance to f_tol spread over the weights.
    tied = cfg.f_tol / (10.0 * math.fsum(p.alpha))
    return SolverConfig(
        f_tol=cfg.f_tol,
        step_tol=cfg.step_tol,
        max_iters=cfg.max_iters,
        inner_tol=min(cfg.inner_tol, tied) if tied > 0 else cfg.inner_tol,
    )


def _assemble(p: KnapsackDual, x: float, cfg: SolverConfig) -> tuple[float, float]:
    """f(x) and f'(x) from one inner solve per term.

    phi'(beta_j x) uses the identity e^{1/y} = (y+1)/(y (1 - beta_j x)),
    valid because h(y) = beta_j x at the solved y; it avoids the raw
    exponential entirely.
    """
    vals = []
    ders = []
    for aj, bj in zip(p.alpha, p.beta):
        u = bj * x
        y = phi_eval(u, cfg).y
        vals.append(aj * y)
        ders.append(aj * bj * (-(y * y) * (y + 1.0) / (1.0 - u)))
    return math.fsum(vals + [-p.budget]), math.fsum(ders)


def eval_f(p: KnapsackDual, x: float, cfg: Optional[SolverConfig] = None) -> float:
    """f(x) = sum alpha_j phi(beta_j x) - K on (0, gamma)."""
    if not 0.0 < x < p.gamma:
        raise DomainError(f"x={x!r} outside (0, {p.gamma!r})")
    cfg = _inner_cfg(p, cfg or SolverConfig())
    return _assemble(p, x, cfg)[0]


def eval_Lf(
    p: KnapsackDual, x: float, cfg: Optional[SolverConfig] = None
) -> tuple[float, float]:
    """L(x) f(x) and its analytic derivative, L(x) = 1 - x/gamma."""
    if not 0.0 < x < p.gamma:
        raise DomainError(f"x={x!r} outside (0, {p.gamma!r})")
    cfg = _inner_cfg(p, cfg or SolverConfig())
    f, fp = _assemble(p, x, cfg)
    g_inv = 1.0 / p.gamma
    L = 1.0 - g_inv * x
    return L * f, -g_inv * f + L * fp


def initial_point(p: KnapsackDual) -> float:
    """x0 = gamma * h(K / sum alpha), never right of the root.

    Replacing every rate by the largest one bounds f from below by a
    function of phi(x/gamma) alone, whose root is x0 in closed form.
    """
    return p.gamma * h_eval(p.budget / math.fsum(p.alpha))


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    margin: float
    boundary_limit: float


def check_feasible(
    p: KnapsackDual, cfg: Optional[SolverConfig] = None
) -> FeasibilityReport:
    """Does f have a root on (0, gamma)?  Requires K > lim_{x->gamma-} f(x).

    Terms with the maximal rate vanish in the limit (phi -> 0 at 1), so
    the limit sums only the slower rates.
    """
    cfg = _inner_cfg(p, cfg or SolverConfig())
    bmax = max(p.beta)
    terms = []
    for aj, bj in zip(p.alpha, p.beta):
        if bj == bmax:
            continue
        terms.append(aj * phi_eval(bj * p.gamma, cfg).y)
    limit = math.fsum(terms)
    margin = p.budget - limit
    return FeasibilityReport(feasible=margin > 0.0, margin=margin, boundary_limit=limit)


def solve(p: KnapsackDual, cfg: Optional[SolverConfig] = None) -> IterationTrace:
    """Newton on the convex L*f from the derived starting point.

    Iterates increase monotonically inside (0, gamma); the trace records
    (x_k, f(x_k)) and the accepted root satisfies |f| <= f_tol or the
    step criterion.
    """
    cfg = cfg or SolverConfig()
    report = check_feasible(p, cfg)
    if not report.feasible:
        raise Infeasible(
            f"budget {p.budget!r} does not exceed the boundary limit "
            f"{report.boundary_limit!r} (margin {report.margin!r})"
        )
    inner = _inner_cfg(p, cfg)
    g_inv = 1.0 / p.gamma
    x = initial_point(p)
    f, fp = _assemble(p, x, inner)
    trace = IterationTrace(iterates=[(x, f)])
    for _ in range(cfg.max_iters):
        if abs(f) <= cfg.f_tol:
            trace.termination = Termination.CONVERGED
            trace.root = x
            return trace
        L = 1.0 - g_inv * x
        val = L * f
        der = -g_inv * f + L * fp
        if der == 0.0:
            trace.termination = Termination.BREAKDOWN
            return trace
        nxt = x - val / der
        if not 0.0 < nxt < p.gamma:
            trace.termination = Termination.LEFT_DOMAIN
            trace.offending = nxt
            return trace
        if nxt <= x:
            # Convex L*f from the left can only stall at the root.
            trace.termination = Termination.CONVERGED
            trace.root = x
            return trace
        f, fp = _assemble(p, nxt, inner)
        trace.iterates.append((nxt, f))
        if abs(nxt - x) <= cfg.step_tol * (1.0 + abs(nxt)):
            trace.termination = Termination.CONVERGED
            trace.root = nxt
            return trace
        x = nxt
    if abs(f) <= cfg.f_tol:
        trace.termination = Termination.CONVERGED
        trace.root = x
    else:
        trace.termination = Termination.MAX_ITERS
    return trace
