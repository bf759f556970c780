import math


def pure_bisect(f, lo, hi, rel_tol=1e-12):
    """Plain bisection used as an in-test reference.

    Deliberately self-contained so test expectations never depend on the
    code paths they are checking.
    """
    flo, fhi = f(lo), f(hi)
    assert flo * fhi < 0, "test bracket must straddle a root"
    while True:
        m = 0.5 * (lo + hi)
        if m <= lo or m >= hi:
            return m
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fhi > 0):
            hi, fhi = m, fm
        else:
            lo, flo = m, fm
        if hi - lo <= rel_tol * max(abs(lo), abs(hi)):
            return 0.5 * (lo + hi)


# Instance whose interior root sits ~1e-6 away from the right pole while
# the derived starting point lands mid-interval: plain Newton overshoots
# out of the interval from there.
NEWTON_ESCAPE_B = (12.0, 1e-6, 2e-5)
NEWTON_ESCAPE_D = (0.0, 1.0, 1.0 + 1e-6)

GOLDEN_LOW = (3.0 - math.sqrt(5.0)) / 2.0
GOLDEN_HIGH = (3.0 + math.sqrt(5.0)) / 2.0
