import numpy as np
import pytest

from parab.errors import UsageError
from parab.grid import GridPlan, coarse_trajectory, optimize_grid, select_orders
from parab.problem import InitialData, heat, ohta_kawasaki, swift_hohenberg
from parab.sequences import FourierSeq
from parab.solver import SpectralModel, relax, steady_newton

SH_TAU = 0.5 / 81


@pytest.fixture(scope="module")
def ok_plan():
    p, u0 = ohta_kawasaki()
    return p, u0, optimize_grid(p, u0, 40 / 128, 80, N=16)


def test_plan_invariants_are_enforced():
    with pytest.raises(UsageError):
        GridPlan([0.0, 1.0, 1.0], [1, 1], [1, 1], [0.1, 0.1])
    with pytest.raises(UsageError):
        GridPlan([0.0, 1.0], [65], [65], [0.1])
    with pytest.raises(UsageError):
        GridPlan([0.0, 1.0], [3], [3], [np.nan])
    plan = GridPlan([0.0, 0.5, 1.0], [3, 4], [9, 12], [0.1, 0.2], 1e-9)
    assert GridPlan.from_dict(plan.to_dict()) == plan


def test_heat_needs_one_domain_for_any_target():
    # the linearization is exact, so the surrogate contraction vanishes
    p, u0 = heat()
    counts = [optimize_grid(p, u0, 1.0, 20, N=8, target=z).M for z in (0.1, 0.2, 0.4)]
    assert counts == [1, 1, 1]


def test_doubling_target_cuts_domains_by_root_two():
    # the block deviation grows like the step and is integrated over it,
    # so the surrogate scales with the square of the domain length
    p, u0 = swift_hohenberg()
    coarse = coarse_trajectory(p, u0, SH_TAU, 10, steps=1 << 12)
    m1 = optimize_grid(p, u0, SH_TAU, 200, coarse=coarse, N=10, target=0.1).M
    m2 = optimize_grid(p, u0, SH_TAU, 200, coarse=coarse, N=10, target=0.2).M
    assert 1.15 <= m1 / m2 <= 1.7


def test_equilibrium_gives_uniform_grid():
    p, u0 = ohta_kawasaki()
    N = 12
    st = steady_newton(SpectralModel(p, N), relax(p, u0, 60 / 128, N, 3000))
    start = InitialData(FourierSeq.from_array(st, 1.05, "even"), p)
    plan = optimize_grid(p, start, 0.05, 40, N=N, target=0.05)
    L = plan.lengths()[:-1]
    assert plan.M >= 3 and plan.complete
    assert np.ptp(L) <= 1e-12 * L.max() + 0.05 / 2 ** 14


def test_ok_grid_is_long_on_plateau_and_short_in_transition(ok_plan):
    p, u0, plan = ok_plan
    g = np.asarray(plan.grid) * 128
    L = plan.lengths() * 128
    plateau = L[(g[:-1] > 2) & (g[:-1] < 12)]
    transition = L[(g[:-1] > 15) & (g[:-1] < 21)]
    assert plan.complete
    assert transition.min() < 0.25 * plateau.max()
    assert np.allclose(plan.surrogate_diag[:-1], 0.2, atol=0.02)


def test_plans_are_deterministic():
    p, u0 = swift_hohenberg()
    a = optimize_grid(p, u0, SH_TAU, 40, N=8)
    b = optimize_grid(p, u0, SH_TAU, 40, N=8)
    assert a == b


def test_too_few_domains_flags_best_effort():
    p, u0 = swift_hohenberg()
    plan = optimize_grid(p, u0, SH_TAU, 2, N=8)
    assert plan.M == 2 and not plan.complete and plan.grid[-1] == SH_TAU


def test_exact_constant_solution_gets_order_one():
    p, _ = heat()
    const = InitialData.from_modes({0: "0.3"}, 1.05, "even", p)
    plan = GridPlan([0.0, 0.5, 1.0], [1, 1], [1, 1], [0.0, 0.0])
    out = select_orders(plan, p, const, 1e-12, N=6)
    assert out.orders == [1, 1] and out.refine == []


def test_orders_grow_slowly_with_threshold():
    p, u0 = swift_hohenberg()
    plan = optimize_grid(p, u0, SH_TAU, 40, N=10)
    a = select_orders(plan, p, u0, 1e-9, N=10)
    b = select_orders(plan, p, u0, 1e-10, N=10)
    diff = np.array(b.orders) - np.array(a.orders)
    assert np.all(diff >= 0) and np.all(diff <= 4)
    assert all(y < 1e-10 for y in b.surrogate_y)
    assert all(k2 >= k for k, k2 in zip(b.orders, b.interp_orders))


def test_initial_transient_needs_large_first_order(ok_plan):
    p, u0, plan = ok_plan
    head = GridPlan(plan.grid[:7], plan.orders[:6], plan.interp_orders[:6], plan.surrogate_diag[:6])
    out = select_orders(head, p, u0, 1e-10, N=16)
    assert out.orders[0] == max(out.orders) and out.orders[0] > np.median(out.orders)


def test_order_cap_flags_refinement():
    p, u0 = swift_hohenberg()
    plan = GridPlan([0.0, SH_TAU], [1], [1], [0.5])
    out = select_orders(plan, p, u0, 1e-30, N=8, k_max=4)
    assert out.refine == [1] and out.orders == [4]
