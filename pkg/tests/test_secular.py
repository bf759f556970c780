import math
import random

import pytest

from rootsmith import oracle, secular
from rootsmith.core import (
    PoleHit,
    PreconditionViolated,
    ScalarFunction,
    SolverConfig,
    Termination,
    estimate_order,
    solve_quadratic_stable,
)

from conftest import GOLDEN_LOW, GOLDEN_HIGH, pure_bisect


def n2():
    return secular.SecularProblem(b=(1.0, 1.0), d=(0.0, 1.0))


def n3():
    return secular.SecularProblem(b=(1.0, 1.0, 1.0), d=(0.0, 1.0, 2.0))


def random_problem(rng, n_lo=3, n_hi=10):
    n = rng.randint(n_lo, n_hi)
    d = sorted(rng.uniform(0.0, 10.0) for _ in range(n))
    b = [rng.uniform(1e-3, 1.0) for _ in range(n)]
    return secular.SecularProblem(b=b, d=d)


def test_validation_messages():
    with pytest.raises(ValueError, match=r"b\[1\] must be positive"):
        secular.SecularProblem(b=(1.0, -1.0), d=(0.0, 1.0))
    with pytest.raises(ValueError, match=r"d\[1\] must exceed"):
        secular.SecularProblem(b=(1.0, 1.0), d=(1.0, 1.0))
    with pytest.raises(ValueError, match="same length"):
        secular.SecularProblem(b=(1.0,), d=(0.0, 1.0))


def test_eval_f_direct():
    assert secular.eval_f(n2(), 0.5) == 1.0


def test_eval_f_at_golden_root():
    assert abs(secular.eval_f(n2(), GOLDEN_LOW)) <= 1e-13


def test_eval_f_pole_hit():
    with pytest.raises(PoleHit):
        secular.eval_f(n2(), 0.0)


def test_derivatives_match_finite_differences():
    p = n3()
    h = 1e-6
    for x in (0.3, 0.7, 1.5):
        fd1 = (secular.eval_f(p, x + h) - secular.eval_f(p, x - h)) / (2 * h)
        assert secular.deriv_f(p, x) == pytest.approx(fd1, rel=1e-8)
        fd2 = (
            secular.eval_f(p, x + h) - 2 * secular.eval_f(p, x) + secular.eval_f(p, x - h)
        ) / (h * h)
        assert secular.deriv2_f(p, x) == pytest.approx(fd2, rel=1e-3)


def test_shift_task_places_origin():
    p = n3()
    task = secular.shift_task(p, 2)
    assert task.shifted_d[1] == 0.0
    assert task.interval == (0.0, 1.0)
    with pytest.raises(ValueError):
        secular.shift_task(p, 3)
    with pytest.raises(ValueError):
        secular.shift_task(p, 0)


def test_fit_bns_n2_closed_form():
    p = n2()
    task = secular.shift_task(p, 1)
    g = secular.fit_bns(p, task, 0.25)
    assert g.alpha == pytest.approx(1.0, rel=1e-14)
    assert g.beta == 0.0
    assert g.gamma == pytest.approx(0.0, abs=1e-14)
    assert g.delta == pytest.approx(1.0, rel=1e-14)


def test_fit_bns_matches_value_and_slope():
    rng = random.Random(5)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        D = task.interval[1]
        x_bar = rng.uniform(0.2, 0.8) * D
        g = secular.fit_bns(p, task, x_bar)
        f_val = secular.eval_f(p, p.d[i - 1] + x_bar)
        assert g.value(x_bar) == pytest.approx(f_val, rel=1e-9, abs=1e-9)
        h = 1e-7 * D
        fd = (g.value(x_bar + h) - g.value(x_bar - h)) / (2 * h)
        fp = secular.deriv_f(p, p.d[i - 1] + x_bar)
        assert fd == pytest.approx(fp, rel=1e-5)


def test_fit_bns_beta_sign():
    rng = random.Random(11)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        x_bar = 0.5 * task.interval[1]
        g = secular.fit_bns(p, task, x_bar)
        if i == 1:
            assert g.beta == 0.0
        else:
            assert g.beta <= 0.0
        assert g.alpha > 0.0
        assert g.delta > 0.0


def test_bns_step_exact_for_n2():
    p = n2()
    task = secular.shift_task(p, 1)
    nxt = secular.bns_step(p, task, 0.25)
    assert nxt == pytest.approx(GOLDEN_LOW, rel=1e-14)


def test_bns_step_requires_negative_value():
    p = n2()
    task = secular.shift_task(p, 1)
    # f(0.5) = 1 > 0
    with pytest.raises(PreconditionViolated):
        secular.bns_step(p, task, 0.5)


def test_bns_step_progresses_and_stays_left():
    p = n3()
    task = secular.shift_task(p, 1)
    x0 = secular.bns_initial_point(p, task)
    nxt = secular.bns_step(p, task, x0)
    assert x0 < nxt < 1.0
    assert secular.eval_f(p, nxt) < 0.0


def test_bns_initial_point_n2():
    p = n2()
    task = secular.shift_task(p, 1)
    x0 = secular.bns_initial_point(p, task)
    assert abs(x0 - GOLDEN_LOW) <= 2e-12  # up to one nudge of 1e-12*D
    assert secular.eval_f(p, x0) < 0.0


def test_bns_initial_point_n3():
    p = n3()
    task = secular.shift_task(p, 1)
    x0 = secular.bns_initial_point(p, task)
    assert x0 == pytest.approx(1.0 - math.sqrt(2.0) / 2.0, rel=1e-12)
    assert 0.0 < x0 < 1.0
    assert secular.eval_f(p, x0) < 0.0


def test_bns_initial_point_dominates():
    rng = random.Random(31)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        x0 = secular.bns_initial_point(p, task)
        assert 0.0 < x0 < task.interval[1]
        assert secular.eval_f(p, p.d[i - 1] + x0) < 0.0


def test_eval_F_direct():
    p = n2()
    task = secular.shift_task(p, 1)
    assert secular.eval_F(p, task, 2.0) == 1.0


def test_eval_F_at_golden_root():
    p = n2()
    task = secular.shift_task(p, 1)
    assert abs(secular.eval_F(p, task, GOLDEN_HIGH)) <= 1e-13


def test_eval_F_pole_hit():
    p = n2()
    task = secular.shift_task(p, 1)
    with pytest.raises(PoleHit):
        secular.eval_F(p, task, 1.0)


def test_eval_F_consistent_with_eval_f():
    rng = random.Random(17)
    p = random_problem(rng, n_lo=4, n_hi=8)
    i = 2
    task = secular.shift_task(p, i)
    s = 1.0 / task.interval[1]
    for _ in range(100):
        z = s * (1.0 + rng.uniform(1e-6, 50.0))
        Fz = secular.eval_F(p, task, z)
        fx = secular.eval_f(p, p.d[i - 1] + 1.0 / z)
        assert abs(Fz - fx) <= 1e-12 * (1.0 + abs(Fz))


def test_transformed_step_exact_for_n2():
    p = n2()
    task = secular.shift_task(p, 1)
    assert secular.transformed_step(p, task, 2.0) == pytest.approx(GOLDEN_HIGH, rel=1e-14)


def test_transformed_step_fixed_point():
    p = n2()
    task = secular.shift_task(p, 1)
    z_root = GOLDEN_HIGH
    nxt = secular.transformed_step(p, task, z_root)
    assert abs(nxt - z_root) <= 1e-13


def test_transformed_step_overshoot_recovers():
    p = n3()
    task = secular.shift_task(p, 1)
    s = 1.0 / task.interval[1]
    z_root = pure_bisect(lambda z: secular.eval_F(p, task, z), s * (1 + 1e-9), 1e6)
    z_bar = z_root + 5.0
    nxt = secular.transformed_step(p, task, z_bar)
    assert s < nxt <= z_root * (1.0 + 1e-12)


def test_transformed_initial_point_n2_exact():
    p = n2()
    task = secular.shift_task(p, 1)
    z0 = secular.transformed_initial_point(p, task)
    assert z0 == pytest.approx(GOLDEN_HIGH, rel=1e-14)


def test_transformed_initial_point_brackets_root():
    # re-derive the two comparison quadratics and check they straddle F's root
    p = n3()
    i = 1
    task = secular.shift_task(p, i)
    D = task.interval[1]
    s = 1.0 / D
    w = p.b[i] / (D * D)
    bi = p.b[i - 1]
    base = 1.0 + math.fsum(
        bj / dj for j, (bj, dj) in enumerate(zip(p.b, task.shifted_d)) if j != i - 1
    )
    extra = math.fsum(
        (bj / dj ** 2) / (s - 1.0 / dj)
        for j, (bj, dj) in enumerate(zip(p.b, task.shifted_d))
        if j not in (i - 1, i)
    )
    z_root = pure_bisect(lambda z: secular.eval_F(p, task, z), s * (1 + 1e-9), 1e6)
    lows = solve_quadratic_stable(-bi, base + bi * s, w - base * s)
    highs = solve_quadratic_stable(-bi, (base + extra) + bi * s, w - (base + extra) * s)
    z_low = max(lows)
    z_high = max(highs)
    assert z_low <= z_root <= z_high
    z0 = secular.transformed_initial_point(p, task)
    assert z0 == pytest.approx(0.5 * (z_low + z_high), rel=1e-12)
    assert z0 > s


def test_transformed_initial_point_beyond_pole():
    rng = random.Random(23)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        z0 = secular.transformed_initial_point(p, task)
        assert z0 > 1.0 / task.interval[1]


def test_solve_root_n2_both_methods():
    p = n2()
    for method in (secular.Method.BNS, secular.Method.TRANSFORMED):
        trace = secular.solve_root(p, 1, method)
        assert trace.termination is Termination.CONVERGED
        assert abs(trace.root - GOLDEN_LOW) <= 1e-12


def test_solve_root_rejects_last_interval():
    with pytest.raises(ValueError):
        secular.solve_root(n2(), 2)


def test_solve_all_roots_n2():
    traces = secular.solve_all_roots(n2())
    assert len(traces) == 1


def test_solve_all_roots_n3_against_oracle():
    p = n3()
    for method in (secular.Method.BNS, secular.Method.TRANSFORMED):
        traces = secular.solve_all_roots(p, method)
        assert len(traces) == 2
        for i, trace in enumerate(traces, start=1):
            assert trace.converged
            ref = pure_bisect(
                lambda x: secular.eval_f(p, x),
                p.d[i - 1] + 1e-9,
                p.d[i] - 1e-9,
                rel_tol=1e-13,
            )
            assert abs(trace.root - ref) <= 1e-10 * max(1.0, abs(ref))


def test_roots_interlace_poles():
    rng = random.Random(41)
    for _ in range(10):
        p = random_problem(rng)
        for i, trace in enumerate(secular.solve_all_roots(p), start=1):
            assert trace.converged
            assert p.d[i - 1] < trace.root < p.d[i]


def test_bns_domination():
    rng = random.Random(53)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        D = task.interval[1]
        x_bar = rng.uniform(0.05, 0.95) * D
        g = secular.fit_bns(p, task, x_bar)
        di = p.d[i - 1]
        for k in range(1, 65):
            x = x_bar + (D - x_bar) * k / 65.0
            gv = g.value(x)
            fv = secular.eval_f(p, di + x)
            scale = 1.0 + abs(gv) + abs(fv)
            assert gv >= fv - 1e-10 * scale


def test_transformed_domination_left_of_root():
    rng = random.Random(59)
    for _ in range(25):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        task = secular.shift_task(p, i)
        s = 1.0 / task.interval[1]
        z_root = pure_bisect(
            lambda z: secular.eval_F(p, task, z), s * (1 + 1e-12), s * 1e8
        )
        z_bar = s + (z_root - s) * rng.uniform(0.05, 3.0)
        g = secular.fit_transformed(p, task, z_bar)
        for k in range(1, 65):
            z = s + (z_root - s) * k / 64.0
            Gv = g.value(z)
            Fv = secular.eval_F(p, task, z)
            scale = 1.0 + abs(Gv) + abs(Fv)
            assert Gv <= Fv + 1e-10 * scale


def test_transformed_F_is_convex():
    rng = random.Random(61)
    p = random_problem(rng)
    i = 1
    task = secular.shift_task(p, i)
    s = 1.0 / task.interval[1]
    for k in range(1, 50):
        z = s * (1.0 + k * 0.25)
        h = z * 1e-5
        f0 = secular.eval_F(p, task, z - h)
        f1 = secular.eval_F(p, task, z)
        f2 = secular.eval_F(p, task, z + h)
        second = (f2 - 2.0 * f1 + f0) / (h * h)
        scale = 1.0 + abs(f1)
        assert second >= -1e-8 * scale


def test_bns_trace_monotone_confined():
    rng = random.Random(67)
    for _ in range(20):
        p = random_problem(rng)
        i = rng.randint(1, p.n - 1)
        trace = secular.solve_root(p, i, secular.Method.BNS)
        assert trace.converged
        di = p.d[i - 1]
        xs = [x - di for x, _ in trace.iterates]
        D = p.d[i] - di
        assert all(0.0 < x < D for x in xs)
        assert all(xs[k] < xs[k + 1] for k in range(len(xs) - 1))
        # strictly negative residuals before convergence
        assert all(fx < 0.0 for _, fx in trace.iterates[:-1])


def test_transformed_trace_monotone_after_first():
    p = n3()
    trace = secular.solve_root(p, 1, secular.Method.TRANSFORMED)
    di = p.d[0]
    zs = [1.0 / (x - di) for x, _ in trace.iterates]
    assert all(zs[k] <= zs[k + 1] * (1 + 1e-12) for k in range(1, len(zs) - 1))


def test_newton_on_f_baseline_converges():
    p = n3()
    for i in (1, 2):
        trace = secular.solve_root(p, i, secular.Method.NEWTON_ON_F)
        assert trace.converged
        ref = pure_bisect(
            lambda x: secular.eval_f(p, x), p.d[i - 1] + 1e-9, p.d[i] - 1e-9
        )
        assert abs(trace.root - ref) <= 1e-9


def test_method_orders_are_quadratic():
    p = n3()
    ref = pure_bisect(lambda x: secular.eval_f(p, x), 1e-9, 1.0 - 1e-9, rel_tol=1e-15)
    for method in (secular.Method.BNS, secular.Method.TRANSFORMED):
        trace = secular.solve_root(p, 1, method)
        est = estimate_order(trace, ref)
        assert est.q >= 1.7


def test_interval_function_domain():
    p = n3()
    fn = secular.interval_function(p, 2)
    assert fn.domain == (1.0, 2.0)
    assert fn.contains(1.5)
    assert not fn.contains(0.5)
