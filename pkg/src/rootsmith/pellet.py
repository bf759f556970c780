"""Positive root pair of a trinomial a x^n - b x^k + c, from the inside.

The substitution z = x^k turns the trinomial into F(z) = a z^{n/k} - b z + c.
Fitting R(z) = alpha/(beta - z) to z^{n/k} (value and slope) produces an
approximant G(z) = a R(z) - b z + c that dominates F, so both roots of G
lie between F's roots: iterating the smaller root downward and the larger
upward converges to the pair from within the interval, and stopping early
still yields valid inner bounds.  Radii of this kind certify zero-free
annuli for polynomials whose coefficient moduli form the trinomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from . import oracle
from .core import (
    Breakdown,
    DegenerateInput,
    IterationTrace,
    MaxItersExceeded,
    NotApplicable,
    PreconditionViolated,
    ScalarFunction,
    SolverConfig,
    Termination,
    solve_quadratic_stable,
)


@dataclass(frozen=True)
class Trinomial:
    """a x^n - b x^k + c with a, b, c > 0, n >= 3, 1 <= k <= n-1."""

    a: float
    b: float
    c: float
    n: int
    k: int

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.n) != self.n or self.n < 3:
            raise ValueError("n must be an integer >= 3")
        if int(self.k) != self.k or not 1 <= self.k <= self.n - 1:
            raise ValueError("k must be an integer in 1..n-1")


def power_ratio(z: float, num: int, den: int) -> float:
    """z**(num/den) for z >= 0, with a log-space polish when den does not
    divide num (keeps large fractional exponents near 1 ulp)."""
    if z < 0:
        raise ValueError(f"power_ratio needs z >= 0, got {z!r}")
    if z == 0.0:
        return 0.0
    if num % den == 0:
        return z ** (num // den)
    t = (num / den) * math.log(z)
    w = math.exp(t)
    return w * (1.0 - (math.log(w) - t))


def eval_transformed(t: Trinomial, z: float) -> float:
    """F(z) = a z^{n/k} - b z + c."""
    return math.fsum([t.a * power_ratio(z, t.n, t.k), -t.b * z, t.c])


def deriv_transformed(t: Trinomial, z: float) -> float:
    """F'(z) = (n/k) a z^{n/k - 1} - b."""
    return (t.n / t.k) * t.a * power_ratio(z, t.n - t.k, t.k) - t.b


def eval_poly(t: Trinomial, x: float) -> float:
    """The trinomial itself: a x^n - b x^k + c."""
    return math.fsum([t.a * x ** t.n, -t.b * x ** t.k, t.c])


def poly_function(t: Trinomial) -> ScalarFunction:
    return ScalarFunction(
        f=lambda x: eval_poly(t, x),
        df=lambda x: t.n * t.a * x ** (t.n - 1) - t.k * t.b * x ** (t.k - 1),
        domain=(0.0, math.inf),
    )


@dataclass(frozen=True)
class ApplicabilityReport:
    """Minimizer z0 of F and the value F(z0); two positive roots exist
    exactly when that value is negative."""

    minimizer: float
    value: float
    applicable: bool


def applicability(t: Trinomial) -> ApplicabilityReport:
    """z0 = (k b / (n a))^{k/(n-k)} makes F'(z0) = 0; test F(z0) < 0."""
    z0 = power_ratio(t.k * t.b / (t.n * t.a), t.k, t.n - t.k)
    v = eval_transformed(t, z0)
    return ApplicabilityReport(minimizer=z0, value=v, applicable=v < 0.0)


class Branch(Enum):
    LOWER = "lower"
    UPPER = "upper"


def trinomial_step(t: Trinomial, z_bar: float, branch: Branch) -> float:
    """Next iterate on the chosen branch: a root of the dominating G.

    R(z) = alpha/(beta - z) with alpha = (k/n) zbar^{1 + n/k} and
    beta = (1 + k/n) zbar matches z^{n/k} to first order at zbar and
    dominates it (1/R is the tangent of the convex z^{-n/k}).  Clearing
    the denominator in G(z) = 0 leaves
    b z^2 - (c + b beta) z + (c beta + a alpha) = 0; both roots satisfy
    F <= 0, so they bound the true pair from the inside.
    """
    if not z_bar > 0:
        raise ValueError(f"z_bar must be positive, got {z_bar!r}")
    Fz = eval_transformed(t, z_bar)
    if Fz >= 0.0:
        raise PreconditionViolated(f"F(z_bar)={Fz!r} must be strictly negative")
    ratio = t.k / t.n
    alpha = ratio * z_bar * power_ratio(z_bar, t.n, t.k)
    beta = (1.0 + ratio) * z_bar
    a2 = t.b
    a1 = -(t.c + t.b * beta)
    a0 = t.c * beta + t.a * alpha
    lo, hi = solve_quadratic_stable(a2, a1, a0)
    return lo if branch is Branch.LOWER else hi


@dataclass(frozen=True)
class RadiiPair:
    """The two positive roots r1 < r2 with the branch traces that found
    them.  ``near_degenerate`` marks a coalesced pair reported as the
    double point at the minimizer."""

    r1: float
    r2: float
    trace_lower: IterationTrace
    trace_upper: IterationTrace
    near_degenerate: bool = False


def _run_branch(
    t: Trinomial, z0: float, F0: float, branch: Branch, cfg: SolverConfig
) -> IterationTrace:
    z, Fz = z0, F0
    trace = IterationTrace(iterates=[(z, Fz)])
    for _ in range(cfg.max_iters):
        # F >= 0 only happens by rounding at the root (G >= F keeps the
        # iterates on the F <= 0 side in exact arithmetic).
        if abs(Fz) <= cfg.f_tol or Fz >= 0.0:
            break
        try:
            nxt = trinomial_step(t, z, branch)
        except Breakdown:
            trace.termination = Termination.BREAKDOWN
            return trace
        moved = nxt < z if branch is Branch.LOWER else nxt > z
        if not moved:
            # Step collapsed to rounding width; not recording it keeps
            # the branch strictly monotone.
            break
        Fnxt = eval_transformed(t, nxt)
        trace.iterates.append((nxt, Fnxt))
        converged = abs(nxt - z) <= cfg.step_tol * (1.0 + abs(nxt))
        z, Fz = nxt, Fnxt
        if converged:
            break
    else:
        if not (abs(Fz) <= cfg.f_tol or Fz >= 0.0):
            trace.termination = Termination.MAX_ITERS
            return trace
    trace.termination = Termination.CONVERGED
    trace.root = z
    return trace


def solve_radii(t: Trinomial, cfg: Optional[SolverConfig] = None) -> RadiiPair:
    """Both positive roots, iterated from the minimizer of F.

    The lower branch decreases monotonically to r1^k and the upper
    increases to r2^k; every recorded iterate z keeps F(z) <= f_tol, so
    the pair [z_lower^{1/k}, z_upper^{1/k}] is a valid inner bound at any
    stage.  A nearly tangent minimum (|F(z0)| below 1e-12 of the term
    scale) is reported as a double point instead of iterating on a
    quadratic whose roots coalesce.
    """
    cfg = cfg or SolverConfig()
    rep = applicability(t)
    if not rep.applicable:
        raise NotApplicable(f"F at its minimum is {rep.value!r} >= 0")
    z0 = rep.minimizer
    scale = math.fsum(
        [t.a * power_ratio(z0, t.n, t.k), t.b * z0, t.c]
    )
    if abs(rep.value) <= 1e-12 * scale:
        x = power_ratio(z0, 1, t.k)
        stub = IterationTrace(
            iterates=[(z0, rep.value)], termination=Termination.CONVERGED, root=z0
        )
        return RadiiPair(
            r1=x, r2=x, trace_lower=stub, trace_upper=stub, near_degenerate=True
        )
    lower = _run_branch(t, z0, rep.value, Branch.LOWER, cfg)
    upper = _run_branch(t, z0, rep.value, Branch.UPPER, cfg)
    if not (lower.converged and upper.converged):
        raise MaxItersExceeded(
            f"branch iteration did not converge within {cfg.max_iters} steps"
        )
    return RadiiPair(
        r1=power_ratio(lower.root, 1, t.k),
        r2=power_ratio(upper.root, 1, t.k),
        trace_lower=lower,
        trace_upper=upper,
    )


def pellet_radii_general(
    coeff_moduli: Sequence[float], ell: int, cfg: Optional[SolverConfig] = None
) -> Optional[RadiiPair]:
    """Radii pair of q(z) = sum_{j != ell} m_j z^j - m_ell z^ell, or None.

    ``coeff_moduli`` are the non-negative coefficient magnitudes of a
    polynomial, lowest degree first.  q has at most two positive roots;
    when they exist the polynomial has exactly ell zeros inside the
    smaller radius and none strictly between the two.  The roots are
    located by the scan-and-bisect oracle directly (no trinomial
    approximation), so this path is slower but assumption-free.
    """
    m = [float(v) for v in coeff_moduli]
    if any(v < 0 for v in m):
        raise ValueError("coefficient moduli must be non-negative")
    while m and m[-1] == 0.0:
        m.pop()
    if not m or all(v == 0.0 for v in m):
        raise DegenerateInput("all coefficient moduli are zero")
    degree = len(m) - 1
    if degree < 2:
        raise ValueError("polynomial degree must be at least 2")
    if not 1 <= ell <= degree - 1:
        raise ValueError(f"ell must be in 1..{degree - 1}, got {ell}")
    if m[ell] == 0.0:
        raise ValueError(f"coefficient modulus of degree {ell} must be nonzero")

    signed = [(-v if j == ell else v) for j, v in enumerate(m)]

    def q(z: float) -> float:
        acc = 0.0
        for coef in reversed(signed):
            acc = acc * z + coef
        return acc

    bound = 1.0 + max(m[:degree]) / m[degree]
    fn = ScalarFunction(f=q, domain=(0.0, math.inf))
    cfg = cfg or SolverConfig()
    samples = 64
    brackets: list[oracle.Bracket] = []
    while samples <= oracle.MAX_SCAN_SAMPLES:
        brackets = oracle.bracket_scan(fn, (bound * 1e-9, bound), samples)
        if len(brackets) >= 2:
            break
        samples *= 2
    if len(brackets) < 2:
        return None
    roots = []
    traces = []
    for br in (brackets[0], brackets[-1]):
        tol = 1e-13 * max(1.0, br.hi)
        r = oracle.bisect(fn, br, tol)
        roots.append(r)
        traces.append(
            IterationTrace(
                iterates=[(r, q(r))], termination=Termination.CONVERGED, root=r
            )
        )
    return RadiiPair(
        r1=roots[0], r2=roots[1], trace_lower=traces[0], trace_upper=traces[1]
    )
