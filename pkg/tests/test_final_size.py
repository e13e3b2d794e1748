import numpy as np
import pytest
from pydantic import ValidationError

from goldilocks_sir.dynamics import (
    EpiState,
    IntegrationOptions,
    ReproductionSchedule,
    integrate,
)
from goldilocks_sir.errors import NonPositiveRError, PreconditionViolation
from goldilocks_sir.final_size import (
    FinalSizeQuery,
    final_size,
    final_size_array,
    final_size_optimum,
    final_size_residual,
    herd_immunity_threshold,
    s_infinity,
)

R0 = 2.5
S_STAR = 0.4
REFERENCE_FINAL_SIZE = 0.1074


@pytest.mark.parametrize(
    ("r", "expected"),
    [(0.5, 1.0), (1.0, 1.0), (2.5, 0.4), (4.0, 0.25)],
)
def test_herd_immunity_threshold(r: float, expected: float) -> None:
    assert herd_immunity_threshold(r) == pytest.approx(expected)


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_non_positive_r_rejected(r: float) -> None:
    with pytest.raises(NonPositiveRError):
        herd_immunity_threshold(r)
    with pytest.raises(NonPositiveRError):
        s_infinity(r, 0.9, 0.1)


def test_query_rejects_points_outside_simplex() -> None:
    with pytest.raises(ValidationError):
        FinalSizeQuery(r=R0, s0=0.8, i0=0.3)
    with pytest.raises(ValidationError):
        FinalSizeQuery(r=0.0, s0=0.8, i0=0.1)


def test_equilibrium_below_threshold_is_fixed() -> None:
    assert s_infinity(R0, S_STAR, 0.0) == pytest.approx(S_STAR, abs=1e-12)


def test_reference_outbreak(outbreak: EpiState) -> None:
    q = FinalSizeQuery(r=R0, s0=outbreak.s, i0=outbreak.i)
    s_inf = final_size(q)
    assert s_inf == pytest.approx(REFERENCE_FINAL_SIZE, abs=1e-3)
    traj = integrate(outbreak, ReproductionSchedule.constant(R0), 200.0)
    assert s_inf == pytest.approx(float(traj.s[-1]), abs=1e-4)


def test_zero_susceptibles_give_positive_zero() -> None:
    value = s_infinity(R0, 0.0, 0.5)
    assert value == 0.0
    assert not np.signbit(value)


def test_residual_and_upper_bound_on_random_queries(rng: np.random.Generator) -> None:
    count = 10_000
    r = rng.uniform(0.1, 10.0, count)
    s0 = rng.uniform(0.0, 1.0, count)
    i0 = rng.uniform(0.0, 1.0, count) * (1.0 - s0)
    s_inf = final_size_array(r, s0, i0)
    lhs = s0 * np.exp(-r * (s0 + i0))
    rhs = s_inf * np.exp(-r * s_inf)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
    assert np.all(s_inf <= np.minimum(1.0, 1.0 / r) + 1e-12)
    assert np.all(s_inf >= 0.0)


def test_residual_helper() -> None:
    q = FinalSizeQuery(r=R0, s0=0.7, i0=0.2)
    assert abs(final_size_residual(q, final_size(q))) <= 1e-12


def test_limits_in_r() -> None:
    s0, i0 = 0.9, 0.05
    large_r = 50.0
    small_r = 0.01
    assert s_infinity(large_r, s0, i0) < 0.03
    assert s_infinity(small_r, s0, i0) == pytest.approx(s0, rel=0.01)


def test_decreasing_in_s0_above_threshold() -> None:
    i0 = 0.05
    s0 = np.arange(S_STAR + 1e-3, 1.0 - i0, 1e-3)
    values = final_size_array(R0, s0, i0)
    assert np.all(np.diff(values) < 0.0)


def test_increasing_in_s0_below_threshold() -> None:
    i0 = 0.05
    s0 = np.arange(0.0, S_STAR, 1e-3)
    values = final_size_array(R0, s0, i0)
    assert np.all(np.diff(values) > 0.0)


def test_decreasing_in_i0() -> None:
    s0 = 0.6
    i0 = np.linspace(0.0, 0.4, 401)
    values = final_size_array(R0, s0, i0)
    assert np.all(np.diff(values) < 0.0)


@pytest.mark.parametrize("delta", [0.0, 0.02, 0.1])
def test_grid_maximum_matches_optimum(delta: float) -> None:
    step = 5e-4
    grid = np.linspace(0.0, 1.0, 2001)
    s, i = np.meshgrid(grid, grid, indexing="ij")
    feasible = (s + i <= 1.0 + 1e-12) & (i >= delta - 1e-12)
    s_pts, i_pts = s[feasible], i[feasible]
    values = final_size_array(R0, s_pts, i_pts)
    k = int(np.argmax(values))
    best = final_size_optimum(R0, delta)
    assert abs(s_pts[k] - best.s_op) <= step + 1e-9
    assert abs(i_pts[k] - best.i_op) <= step + 1e-9
    assert values[k] == pytest.approx(best.s_inf_op, abs=1e-6)


def test_optimum_examples() -> None:
    sub_critical = final_size_optimum(0.8, 0.0)
    assert sub_critical == (1.0, 0.0, 1.0)
    seeded = final_size_optimum(R0, 0.05)
    assert seeded.s_op == pytest.approx(S_STAR)
    assert seeded.i_op == pytest.approx(0.05)
    assert seeded.s_inf_op < S_STAR


@pytest.mark.parametrize("delta", [-0.1, 1.5])
def test_optimum_rejects_delta_outside_unit_interval(delta: float) -> None:
    with pytest.raises(PreconditionViolation):
        final_size_optimum(R0, delta)


def test_matches_long_integration_on_grid() -> None:
    opts = IntegrationOptions(sample_step=1.0)
    for r in (0.8, 1.5, 2.0, 2.5, 3.5):
        for s0 in np.linspace(0.2, 0.9, 5):
            for i0 in (0.005, 0.05):
                x0 = EpiState(s=float(s0), i=i0, c=1.0 - float(s0) - i0)
                traj = integrate(x0, ReproductionSchedule.constant(r), 400.0, opts)
                expected = s_infinity(r, float(s0), i0)
                assert float(traj.s[-1]) == pytest.approx(expected, abs=1e-4)
