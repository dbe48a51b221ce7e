import math

import numpy as np
import pytest

from prophetsim.common import CapacityError
from prophetsim.instances import gen_xos
from prophetsim.lp import (
    InfeasibleError,
    LpProblem,
    UnboundedError,
    solve_configuration_lp,
    solve_lp,
    xos_base_prices,
)
from prophetsim.offline import expected_opt
from prophetsim.valuations import BuyerValuationDistribution, additive


def test_box_lp():
    x, obj = solve_lp(
        LpProblem([1.0, 1.0], [([1.0, 0.0], "<=", 1.0), ([0.0, 1.0], "<=", 2.0)])
    )
    assert obj == pytest.approx(3.0)
    assert x == pytest.approx([1.0, 2.0])


def test_equality_constraint():
    x, obj = solve_lp(
        LpProblem([2.0, 1.0], [([1.0, 1.0], "==", 1.0)])
    )
    assert obj == pytest.approx(2.0)
    assert x == pytest.approx([1.0, 0.0])


def test_degenerate_lp_with_redundant_rows():
    x, obj = solve_lp(
        LpProblem(
            [1.0],
            [([1.0], "<=", 2.0), ([1.0], "<=", 2.0), ([2.0], "==", 4.0)],
        )
    )
    assert obj == pytest.approx(2.0)


def test_infeasible_detected():
    with pytest.raises(InfeasibleError):
        solve_lp(LpProblem([1.0], [([1.0], "<=", 1.0), ([1.0], "==", 3.0)]))


def test_unbounded_detected():
    with pytest.raises(UnboundedError):
        solve_lp(LpProblem([1.0], [([-1.0], "<=", 1.0)]))


def test_negative_rhs_normalized():
    # x >= 1 written as -x <= -1, minimizing -x means maximizing x... keep it
    # simple: max -x s.t. -x <= -1 has optimum x = 1.
    x, obj = solve_lp(LpProblem([-1.0], [([-1.0], "<=", -1.0)]))
    assert obj == pytest.approx(-1.0)


@pytest.mark.parametrize("seed", range(8))
def test_random_lp_sanity(seed):
    # Optimum of max c@x, 0 <= x, Ax <= b with b > 0 is finite, feasible, and
    # at least as good as any random feasible point.
    rng = np.random.default_rng(seed)
    n, m = 4, 3
    A = rng.uniform(0.1, 1.0, (m, n))
    b = rng.uniform(1.0, 2.0, m)
    c = rng.uniform(0.0, 1.0, n)
    x, obj = solve_lp(LpProblem(c, [(A[i], "<=", float(b[i])) for i in range(m)]))
    assert (x >= -1e-9).all()
    assert (A @ x <= b + 1e-7).all()
    for _ in range(50):
        y = rng.uniform(0, 1, n)
        scale = min(float(b[i] / (A[i] @ y)) for i in range(m))
        y = y * min(1.0, scale)
        assert c @ y <= obj + 1e-7


def _deterministic_xos_instance():
    from prophetsim.instances import Instance

    buyer = BuyerValuationDistribution([(1.0, additive([3.0, 4.0]))])
    return Instance("xos", [buyer], items=2, name="det")


def test_config_lp_deterministic_additive():
    inst = _deterministic_xos_instance()
    sol = solve_configuration_lp(inst)
    assert sol.objective_value == pytest.approx(7.0, abs=1e-7)
    # All mass on the full set.
    assert sol.mass(0, 0, 0b11) == pytest.approx(1.0, abs=1e-7)


def test_config_lp_base_prices_sum_to_objective():
    rng = np.random.default_rng(11)
    inst = gen_xos(rng, 3, 3)
    sol = solve_configuration_lp(inst)
    b = xos_base_prices(inst, sol)
    assert math.fsum(b) == pytest.approx(sol.objective_value, abs=1e-6)


def test_config_lp_upper_bounds_expected_opt():
    rng = np.random.default_rng(12)
    for _ in range(3):
        inst = gen_xos(rng, 3, 3)
        sol = solve_configuration_lp(inst)
        assert sol.objective_value >= expected_opt(inst).mean - 1e-7


def test_config_lp_set_distribution_is_a_distribution():
    rng = np.random.default_rng(13)
    inst = gen_xos(rng, 2, 3)
    sol = solve_configuration_lp(inst)
    for i, buyer in enumerate(inst.buyers):
        for k in range(len(buyer)):
            dist = sol.set_distribution(inst, i, k)
            total = math.fsum(q for _, q in dist)
            assert total == pytest.approx(1.0, abs=1e-9)
            assert all(q >= 0 for _, q in dist)


def test_config_lp_capacity_guard():
    rng = np.random.default_rng(14)
    inst = gen_xos(rng, 2, 9)
    with pytest.raises(CapacityError):
        solve_configuration_lp(inst)
