"""Brute-force ground truth: sign-change scanning and pure bisection.

The oracle deliberately avoids any acceleration so it stays logically
independent of the solvers it checks.  It is allowed to be slow.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import (
    InvalidBracket,
    NoRootFound,
    ScalarFunction,
    SolverConfig,
)

logger = logging.getLogger(__name__)

MAX_SCAN_SAMPLES = 65536


@dataclass(frozen=True)
class Bracket:
    """An interval whose endpoints carry opposite nonzero function signs."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got ({self.lo!r}, {self.hi!r})")


def _try_eval(fn: ScalarFunction, x: float) -> float | None:
    try:
        v = fn.f(x)
    except (ValueError, ZeroDivisionError, OverflowError):
        return None
    if not math.isfinite(v):
        return None
    return v


def _encloses_root(fn: ScalarFunction, a: float, b: float, fa: float, fb: float) -> bool:
    # A sign change can mark a root or a pole crossing.  Shrinking the
    # bracket separates them: |f| collapses at a root and blows up at a
    # pole.  40 halvings shrink the width by ~1e12, which is decisive.
    bound = max(abs(fa), abs(fb))
    for _ in range(40):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = _try_eval(fn, m)
        if fm is None:
            return False
        if fm == 0.0:
            return True
        if (fm > 0.0) == (fb > 0.0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    return min(abs(fa), abs(fb)) <= bound


def bracket_scan(
    fn: ScalarFunction, interval: tuple[float, float], samples: int
) -> list[Bracket]:
    """Scan ``samples + 1`` equispaced points and return every adjacent
    sign-change pair that encloses a root.

    Evaluation failures (pole hits, overflow, non-finite values) are
    skipped and logged; sign changes caused by crossing a pole rather than
    a root are filtered out.  An empty result is a valid answer.
    """
    lo, hi = interval
    if not lo < hi:
        raise ValueError(f"interval needs lo < hi, got ({lo!r}, {hi!r})")
    if samples < 2:
        raise ValueError("samples must be at least 2")
    width = hi - lo
    prev: tuple[float, float] | None = None
    skipped = 0
    found: list[Bracket] = []
    for j in range(samples + 1):
        x = lo + width * (j / samples)
        v = _try_eval(fn, x)
        if v is None:
            skipped += 1
            continue
        if v == 0.0:
            # An exact-zero sample sits on the root; neighbours straddle it.
            continue
        if prev is not None and (prev[1] > 0.0) != (v > 0.0):
            if _encloses_root(fn, prev[0], x, prev[1], v):
                found.append(Bracket(prev[0], x))
            else:
                logger.debug("discarded pole crossing in (%r, %r)", prev[0], x)
        prev = (x, v)
    if skipped:
        logger.debug("bracket_scan skipped %d failed evaluations", skipped)
    return found


def bisect(fn: ScalarFunction, br: Bracket, tol: float) -> float:
    """Pure bisection to a final interval of width <= tol.

    The sign condition is an invariant of every step, so the returned
    midpoint always lies within tol of a sign change of f.
    """
    lo, hi = br.lo, br.hi
    fa = fn.f(lo)
    fb = fn.f(hi)
    if fa == 0.0 or fb == 0.0 or (fa > 0.0) == (fb > 0.0):
        raise InvalidBracket(f"no sign change on ({lo!r}, {hi!r})")
    while hi - lo > tol:
        m = 0.5 * (lo + hi)
        if m <= lo or m >= hi:
            break
        fm = fn.f(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fb > 0.0):
            hi, fb = m, fm
        else:
            lo, fa = m, fm
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class VerificationReport:
    """Comparison of a claimed root against the bisection oracle."""

    claimed: float
    oracle: float
    abs_error: float
    rel_error: float

    def agrees(self, rel_tol: float = 1e-10) -> bool:
        return self.rel_error <= rel_tol


def verify_root(
    fn: ScalarFunction,
    claimed: float,
    interval: tuple[float, float],
    cfg: SolverConfig | None = None,
) -> VerificationReport:
    """Locate the root independently and report how far ``claimed`` is.

    The scanning resolution doubles from 64 until a bracket appears or
    65536 samples have been tried, since roots can hide very close to
    poles.  Bisection then runs to 1e-13 * max(1, |claimed|).
    """
    del cfg  # reserved for tolerance overrides; the oracle scale suffices
    samples = 64
    bracket: Bracket | None = None
    while samples <= MAX_SCAN_SAMPLES:
        brackets = bracket_scan(fn, interval, samples)
        if brackets:
            containing = [b for b in brackets if b.lo <= claimed <= b.hi]
            if containing:
                bracket = containing[0]
            else:
                bracket = min(
                    brackets, key=lambda b: abs(0.5 * (b.lo + b.hi) - claimed)
                )
            break
        samples *= 2
    if bracket is None:
        raise NoRootFound(
            f"no sign change on {interval!r} at up to {MAX_SCAN_SAMPLES} samples"
        )
    scale = max(1.0, abs(claimed))
    root = bisect(fn, bracket, 1e-13 * scale)
    abs_err = abs(claimed - root)
    rel_err = abs_err / max(abs(root), 1e-300)
    return VerificationReport(
        claimed=claimed, oracle=root, abs_error=abs_err, rel_error=rel_err
    )
