"""
Equilibria of the SIR flow and the Lyapunov functions that certify them.

Every point (s_bar, 0, 1 - s_bar) is an equilibrium. Those with s_bar <= S*
form the stable set; those above S* are unstable, since any infected
perturbation sets off an outbreak that ends below S*. Two functions give
level sets around the stable point (S*, 0):

    V(s, i) = s - s_bar - s_bar ln(s / s_bar) + i,   dV/dtau = i (r s_bar - 1)
    V(s, i) = S* - S_inf(r, s, i),                   conserved by the flow
"""

import enum
import io
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from goldilocks_sir.dynamics import (
    EpiState,
    FloatArray,
    IntegrationOptions,
    ReproductionSchedule,
    Trajectory,
    integrate,
)
from goldilocks_sir.errors import DomainError, EmptyCurveError, PreconditionViolation
from goldilocks_sir.final_size import (
    final_size_array,
    herd_immunity_threshold,
    s_infinity,
)
from goldilocks_sir.lambert_w import w0

logger = logging.getLogger(__name__)

CURVE_TOL = 1e-8
CURVE_CSV_HEADER = "curve,s,i"
DEFAULT_PORTRAIT_STARTS = 12
DEFAULT_PORTRAIT_HORIZON = 100.0
DEFAULT_PERTURBATION = 1e-4
DEFAULT_PERTURBATION_HORIZON = 200.0
_ROOT_XTOL = 1e-14


class Stability(enum.StrEnum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


class EquilibriumPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    s_bar: float = Field(ge=0.0, le=1.0)

    @property
    def c_bar(self) -> float:
        return 1.0 - self.s_bar

    def as_state(self) -> EpiState:
        return EpiState(s=self.s_bar, i=0.0, c=self.c_bar)


@dataclass(frozen=True, eq=False)
class LevelCurve:
    level: float
    s: FloatArray
    i: FloatArray

    def __len__(self) -> int:
        return int(self.s.size)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(s), float(i)) for s, i in zip(self.s, self.i, strict=True)]


def equilibrium_class(p: EquilibriumPoint, r: float) -> Stability:
    if p.s_bar <= herd_immunity_threshold(r):
        return Stability.STABLE
    return Stability.UNSTABLE


def distance_to_stable_set(state: EpiState, r: float) -> float:
    """(s, i)-distance from a state to the stable equilibria {(s, 0): s <= S*}."""
    excess = max(0.0, state.s - herd_immunity_threshold(r))
    return float(np.hypot(excess, state.i))


def _require_s_bar(s_bar: float) -> None:
    if not 0.0 < s_bar <= 1.0:
        msg = f"s_bar must lie in (0, 1] (got {s_bar!r})"
        raise PreconditionViolation(msg)


def lyapunov_v(state: EpiState, s_bar: float) -> float:
    _require_s_bar(s_bar)
    if state.s <= 0.0:
        msg = "the Lyapunov function is singular at s = 0"
        raise DomainError(msg)
    return state.s - s_bar - s_bar * float(np.log(state.s / s_bar)) + state.i


def lyapunov_v_array(s: FloatArray, i: FloatArray, s_bar: float) -> FloatArray:
    """V along a sampled trajectory."""
    _require_s_bar(s_bar)
    if np.any(s <= 0.0):
        msg = "the Lyapunov function is singular at s = 0"
        raise DomainError(msg)
    return s - s_bar - s_bar * np.log(s / s_bar) + i


def lyapunov_vdot(state: EpiState, s_bar: float, r: float) -> float:
    return state.i * (r * s_bar - 1.0)


def _check_level(level: float, n: int) -> None:
    if n < 2:  # noqa: PLR2004
        msg = f"a level curve needs at least two samples (got {n})"
        raise PreconditionViolation(msg)
    if level < 0.0:
        msg = f"level sets of a non-negative function need level >= 0 (got {level})"
        raise EmptyCurveError(msg)


def _outbreak_root(r: float, target: float) -> float:
    """Largest s in [S*, 1] with S_inf(r, s, 0) >= target."""
    s_star = herd_immunity_threshold(r)

    def excess(s: float) -> float:
        return s_infinity(r, s, 0.0) - target

    if s_star >= 1.0 or excess(1.0) >= 0.0:
        return 1.0
    return float(brentq(excess, s_star, 1.0, xtol=_ROOT_XTOL))


def final_size_level_set(r: float, level: float, n: int = 200) -> LevelCurve:
    """
    Samples of S* - S_inf(r, s, i) = level.

    s runs over a grid between the two points where the curve meets i = 0;
    for each s the matching i is bracketed in [0, 1 - s]. Grid points whose
    bracket falls outside the simplex are dropped.
    """
    _check_level(level, n)
    s_star = herd_immunity_threshold(r)
    if level >= s_star:
        msg = f"S_inf is non-negative, so level {level} >= S* = {s_star} is empty"
        raise EmptyCurveError(msg)
    if level == 0.0:
        return LevelCurve(level, np.full(n, s_star), np.zeros(n))

    target = s_star - level
    s_grid = np.linspace(target, _outbreak_root(r, target), n)
    s_pts: list[float] = []
    i_pts: list[float] = []
    for s in s_grid:
        i_max = 1.0 - s

        def excess(i: float, s: float = float(s)) -> float:
            return s_infinity(r, s, i) - target

        at_zero = excess(0.0)
        if abs(at_zero) <= CURVE_TOL:
            s_pts.append(float(s))
            i_pts.append(0.0)
            continue
        if i_max <= 0.0 or excess(i_max) > 0.0:
            continue
        s_pts.append(float(s))
        i_pts.append(float(brentq(excess, 0.0, i_max, xtol=_ROOT_XTOL)))
    if not s_pts:
        msg = f"no point of the simplex has S_inf = {target:.6g} for r={r}"
        raise EmptyCurveError(msg)
    logger.debug("level %.4g: %d of %d grid points on the curve", level, len(s_pts), n)
    return LevelCurve(level, np.array(s_pts), np.array(i_pts))


def lyapunov_level_set(s_bar: float, level: float, n: int = 200) -> LevelCurve:
    """
    Samples of V(s, i) = level for the logarithmic Lyapunov function,
    restricted to the simplex.
    """
    _require_s_bar(s_bar)
    _check_level(level, n)
    if level == 0.0:
        return LevelCurve(level, np.full(n, s_bar), np.zeros(n))

    def height(s: FloatArray | float) -> FloatArray:
        return np.asarray(s - s_bar - s_bar * np.log(s / s_bar))

    # below s_bar, s / s_bar = -W0(-exp(-1 - level / s_bar))
    s_lo = -s_bar * w0(-np.exp(-1.0 - level / s_bar))
    if s_bar >= 1.0 or float(height(1.0)) <= level:
        s_hi = 1.0
    else:
        s_hi = float(
            brentq(lambda s: float(height(s)) - level, s_bar, 1.0, xtol=_ROOT_XTOL)
        )
    s = np.linspace(s_lo, s_hi, n)
    i = np.clip(level - height(s), 0.0, None)
    inside = s + i <= 1.0 + CURVE_TOL
    if not np.any(inside):
        msg = f"V = {level} lies outside the simplex for s_bar={s_bar}"
        raise EmptyCurveError(msg)
    return LevelCurve(level, s[inside], i[inside])


def default_portrait_starts(count: int = DEFAULT_PORTRAIT_STARTS) -> list[EpiState]:
    """Evenly spaced starts on the c = 0 edge, both vertices excluded."""
    return [
        EpiState(s=float(s), i=1.0 - float(s), c=0.0)
        for s in np.linspace(0.0, 1.0, count + 2)[1:-1]
    ]


def phase_portrait(
    r_schedule: ReproductionSchedule,
    starts: Sequence[EpiState] | None = None,
    tau_end: float = DEFAULT_PORTRAIT_HORIZON,
    opts: IntegrationOptions | None = None,
    *,
    jobs: int = 1,
) -> list[Trajectory]:
    """One trajectory per start, in the order of starts."""
    starts = list(starts) if starts is not None else default_portrait_starts()

    def run(x0: EpiState) -> Trajectory:
        return integrate(x0, r_schedule, tau_end, opts)

    logger.debug("phase portrait: %d starts, %d job(s)", len(starts), jobs)
    if jobs <= 1:
        return [run(x0) for x0 in starts]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, starts))


def sinfinity_invariance_check(traj: Trajectory, r: float) -> float:
    """Largest drift of S_inf(r, s, i) from its initial value along traj."""
    values = final_size_array(r, traj.s, traj.i)
    return float(np.max(np.abs(values - values[0])))


def sinfinity_drift_by_segment(traj: Trajectory) -> list[float]:
    """
    S_inf drift within each constant-r piece of traj, each measured from the
    sample where the piece begins.
    """
    starts = np.concatenate(([0], np.flatnonzero(np.diff(traj.r) != 0.0) + 1))
    bounds = [*starts[1:].tolist(), len(traj)]
    drifts: list[float] = []
    for a, b in zip(starts.tolist(), bounds, strict=True):
        first = max(a - 1, 0)
        values = final_size_array(traj.r[a], traj.s[first:b], traj.i[first:b])
        drifts.append(float(np.max(np.abs(values - values[0]))))
    return drifts


def perturbation_response(
    s_bar: float,
    r: float,
    eps: float = DEFAULT_PERTURBATION,
    opts: IntegrationOptions | None = None,
    *,
    tau_end: float = DEFAULT_PERTURBATION_HORIZON,
) -> float:
    """
    Terminal s after seeding the equilibrium at s_bar with eps infected.

    Above S* the answer stays a finite distance below S* however small eps
    is; at or below S* it tends to s_bar.
    """
    _require_s_bar(s_bar)
    if not 0.0 < eps < 1.0:
        msg = f"the perturbation must lie in (0, 1) (got {eps})"
        raise PreconditionViolation(msg)
    s = min(s_bar, 1.0 - eps)
    x0 = EpiState(s=s, i=eps, c=1.0 - s - eps)
    traj = integrate(x0, ReproductionSchedule.constant(r), tau_end, opts)
    return float(traj.s[-1])


def _curves_to_csv(curves: Sequence[tuple[FloatArray, FloatArray]]) -> str:
    rows = [
        np.column_stack([np.full(s.size, k, dtype=np.float64), s, i])
        for k, (s, i) in enumerate(curves)
    ]
    table = np.vstack(rows) if rows else np.empty((0, 3))
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        table,
        fmt=["%d", "%.17g", "%.17g"],
        delimiter=",",
        header=CURVE_CSV_HEADER,
        comments="",
    )
    return buffer.getvalue()


def level_curves_to_csv(curves: Sequence[LevelCurve]) -> str:
    return _curves_to_csv([(c.s, c.i) for c in curves])


def portrait_to_csv(trajectories: Sequence[Trajectory]) -> str:
    return _curves_to_csv([(t.s, t.i) for t in trajectories])
