"""
Nondimensional SIR dynamics under a piecewise-constant reproduction number.

    ds/dtau = -r s i
    di/dtau =  r s i - i
    dc/dtau =  i

Time is tau = t * gamma and r = beta / gamma. Each constant-r segment of a
ReproductionSchedule is integrated separately (Dormand-Prince 5(4) through
scipy), so no step straddles a jump of r. The infected peak of a segment is
the zero of r*s - 1 crossed downwards; solve_ivp locates it by root-finding
on the dense output.

The absolute tolerance on i sits far below the others, but it is still a
floor: under long strong distancing i settles near abs_tol * 1e-12 instead
of decaying on towards zero. Final sizes are unaffected, while a second wave
seeded from that floor peaks earlier than the exact solution would.
"""

import io
import logging
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import solve_ivp

from goldilocks_sir.errors import (
    InvalidHorizonError,
    InvalidStateError,
    NoQssError,
    StepFailureError,
)

logger = logging.getLogger(__name__)

CONSERVATION_TOL = 1e-9
DEFAULT_EPSILON = 0.005
CSV_HEADER = "tau,S,I,C,R"

# local maxima of i below this are solver noise in an extinct tail
_PEAK_FLOOR = 1e-10
_BOUNDARY_TOL = 1e-12
# i decays exponentially under distancing and must keep its sign through
# long windows, so its absolute tolerance sits far below the others
_INFECTED_ATOL_SCALE = 1e-12

FloatArray = NDArray[np.float64]


class EpiState(BaseModel):
    """A point (s, i, c) of the unit simplex."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(ge=0.0, le=1.0)
    i: float = Field(ge=0.0, le=1.0)
    c: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_conservation(self) -> Self:
        total = self.s + self.i + self.c
        if abs(total - 1.0) > CONSERVATION_TOL:
            msg = f"s + i + c must equal 1 (got {total!r})"
            raise ValueError(msg)
        return self

    @classmethod
    def outbreak(cls, epsilon: float = DEFAULT_EPSILON) -> Self:
        """The initial condition (1 - epsilon, epsilon, 0)."""
        return cls(s=1.0 - epsilon, i=epsilon, c=0.0)

    @classmethod
    def from_si(cls, s: float, i: float) -> Self:
        return cls(s=s, i=i, c=max(0.0, 1.0 - s - i))

    def as_array(self) -> FloatArray:
        return np.array([self.s, self.i, self.c], dtype=np.float64)


class ScheduleSegment(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau_start: float = Field(ge=0.0)
    r: float = Field(gt=0.0)


class ReproductionSchedule(BaseModel):
    """
    Piecewise-constant r(tau). Segment k holds from its tau_start up to the
    next segment's tau_start; the last segment extends to infinity.
    """

    model_config = ConfigDict(frozen=True)

    segments: tuple[ScheduleSegment, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_ordering(self) -> Self:
        if self.segments[0].tau_start != 0.0:
            msg = "the first schedule segment must start at tau = 0"
            raise ValueError(msg)
        starts = [seg.tau_start for seg in self.segments]
        if any(b <= a for a, b in zip(starts, starts[1:], strict=False)):
            msg = f"segment start times must be strictly increasing: {starts}"
            raise ValueError(msg)
        return self

    @classmethod
    def constant(cls, r: float) -> Self:
        return cls(segments=(ScheduleSegment(tau_start=0.0, r=r),))

    @classmethod
    def single_interval(
        cls, r0: float, r_s: float, tau_s: float, tau_f: float
    ) -> Self:
        """r0 before tau_s, r_s on [tau_s, tau_f], r0 afterwards."""
        return cls(
            segments=(
                ScheduleSegment(tau_start=0.0, r=r0),
                ScheduleSegment(tau_start=tau_s, r=r_s),
                ScheduleSegment(tau_start=tau_f, r=r0),
            )
        )

    def r_at(self, tau: float) -> float:
        current = self.segments[0].r
        for seg in self.segments:
            if seg.tau_start > tau:
                break
            current = seg.r
        return current

    def pieces(
        self, tau0: float, tau_end: float
    ) -> Iterator[tuple[float, float, float]]:
        """Yield (start, stop, r) for every segment overlapping [tau0, tau_end]."""
        bounds = [seg.tau_start for seg in self.segments[1:]] + [np.inf]
        for seg, upper in zip(self.segments, bounds, strict=True):
            start = max(seg.tau_start, tau0)
            stop = min(upper, tau_end)
            if stop > start:
                yield start, stop, seg.r


class DimensionalParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0, description="transmission rate, 1/time-unit")
    gamma: float = Field(gt=0.0, description="recovery/death rate, 1/time-unit")


class IntegrationOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-9, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    sample_step: float = Field(default=0.05, gt=0.0)
    i_qss_threshold: float = Field(default=1e-6, gt=0.0)
    qss_multiplier: float = Field(default=5.0, ge=1.0)
    qss_horizon: float = Field(default=2000.0, gt=0.0)


@dataclass(frozen=True)
class PeakEvent:
    tau: float
    i: float
    s: float
    at_breakpoint: bool = False


@dataclass(frozen=True)
class QssEvent:
    tau: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    tau: FloatArray
    s: FloatArray
    i: FloatArray
    c: FloatArray
    r: FloatArray
    peaks: tuple[PeakEvent, ...] = ()
    qss: QssEvent | None = None
    releases: tuple[float, ...] = ()

    def __len__(self) -> int:
        return int(self.tau.size)

    @property
    def second_waves(self) -> tuple[PeakEvent, ...]:
        """
        Peaks that follow the QSS flag or a release: a breakpoint where r
        rises while r * s > 1. Peaks forced by a drop of r never count.
        """
        marks = [*self.releases]
        if self.qss is not None:
            marks.append(self.qss.tau)
        if not marks:
            return ()
        first = min(marks)
        return tuple(p for p in self.peaks if p.tau > first and not p.at_breakpoint)

    @property
    def final_state(self) -> EpiState:
        return self.state(len(self) - 1)

    def state(self, k: int) -> EpiState:
        return EpiState(s=float(self.s[k]), i=float(self.i[k]), c=float(self.c[k]))

    def state_at(self, tau: float) -> EpiState:
        """Exact at sample times (every breakpoint is one), linear in between."""
        k = int(np.searchsorted(self.tau, tau))
        if k < len(self) and abs(self.tau[k] - tau) <= _BOUNDARY_TOL:
            return self.state(k)
        s = float(np.interp(tau, self.tau, self.s))
        i = float(np.interp(tau, self.tau, self.i))
        return EpiState.from_si(s, i)

    def peaks_after(self, tau: float) -> tuple[PeakEvent, ...]:
        return tuple(p for p in self.peaks if p.tau > tau)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        table = np.column_stack([self.tau, self.s, self.i, self.c, self.r])
        np.savetxt(
            buffer,
            table,
            fmt="%.17g",
            delimiter=",",
            header=CSV_HEADER,
            comments="",
        )
        return buffer.getvalue()


class _ThresholdCrossing:
    """Event r*s - 1 = 0 crossed downwards: the infected maximum."""

    direction = -1.0

    def __init__(self, r: float, *, terminal: bool = False) -> None:
        self.r = r
        self.terminal = terminal

    def __call__(self, _tau: float, y: FloatArray) -> float:
        return self.r * float(y[0]) - 1.0


class _InfectedBelow:
    direction = -1.0
    terminal = True

    def __init__(self, threshold: float) -> None:
        self.threshold = threshold

    def __call__(self, _tau: float, y: FloatArray) -> float:
        return float(y[1]) - self.threshold


def _rates(s: float, i: float, r: float) -> tuple[float, float, float]:
    infection = r * s * i
    return -infection, infection - i, i


def derivatives(state: EpiState, r: float) -> tuple[float, float, float]:
    """(ds, di, dc) at a state; the three rates sum to zero."""
    return _rates(state.s, state.i, r)


def _rhs(r: float):  # noqa: ANN202
    def rhs(_tau: float, y: FloatArray) -> FloatArray:
        return np.array(_rates(float(y[0]), float(y[1]), r))

    return rhs


def _sample_grid(start: float, stop: float, step: float) -> FloatArray:
    grid = np.arange(start, stop, step, dtype=np.float64)
    grid = grid[grid < stop - _BOUNDARY_TOL]
    return np.append(grid, stop)


def _solve(
    y0: FloatArray,
    r: float,
    span: tuple[float, float],
    opts: IntegrationOptions,
    **kwargs: object,
):  # noqa: ANN202
    sol = solve_ivp(
        _rhs(r),
        span,
        y0,
        method="RK45",
        rtol=opts.rel_tol,
        atol=np.array(
            [opts.abs_tol, opts.abs_tol * _INFECTED_ATOL_SCALE, opts.abs_tol]
        ),
        **kwargs,
    )
    if sol.status == -1:
        msg = f"integration failed on [{span[0]}, {span[1]}] with r={r}: {sol.message}"
        raise StepFailureError(msg)
    return sol


def _integrate_segment(
    y0: FloatArray,
    r: float,
    start: float,
    stop: float,
    opts: IntegrationOptions,
) -> tuple[FloatArray, NDArray[np.float64], list[PeakEvent]]:
    grid = _sample_grid(start, stop, opts.sample_step)
    if y0[1] == 0.0:
        # no infected: every rate vanishes
        return grid, np.repeat(y0[:, None], grid.size, axis=1), []
    sol = _solve(
        y0, r, (start, stop), opts, t_eval=grid, events=_ThresholdCrossing(r)
    )
    peaks = [
        PeakEvent(tau=float(t), i=float(y[1]), s=float(y[0]))
        for t, y in zip(sol.t_events[0], sol.y_events[0], strict=True)
        if y[1] > 0.0
    ]
    logger.debug(
        "segment [%.4g, %.4g] r=%.6g: %d rhs evaluations, %d peak(s)",
        start,
        stop,
        r,
        sol.nfev,
        len(peaks),
    )
    return sol.t, sol.y, peaks


def _is_breakpoint_peak(r_before: float, r_after: float, y: FloatArray) -> bool:
    # di/dtau jumps from positive to negative at the switch
    return y[1] > 0.0 and r_before * y[0] > 1.0 > r_after * y[0]


def _is_release(r_before: float, r_after: float, y: FloatArray) -> bool:
    # a declining i turns to growth at the switch
    return y[1] > 0.0 and r_before * y[0] <= 1.0 < r_after * y[0]


def _first_qss(
    tau: FloatArray, i: FloatArray, threshold: float
) -> QssEvent | None:
    below = np.flatnonzero(i < threshold)
    if below.size == 0:
        return None
    return QssEvent(tau=float(tau[below[0]]))


def integrate(
    x0: EpiState,
    schedule: ReproductionSchedule,
    tau_end: float,
    opts: IntegrationOptions | None = None,
    *,
    tau0: float = 0.0,
) -> Trajectory:
    """
    Integrate from x0 at tau0 to tau_end under the schedule.

    Samples are taken every opts.sample_step plus every breakpoint and both
    ends; components are clipped to [0, 1] on output.
    """
    opts = opts or IntegrationOptions()
    if tau_end <= tau0:
        msg = f"tau_end must be after the start time {tau0} (got {tau_end})"
        raise InvalidHorizonError(msg)

    y = x0.as_array()
    tau_parts: list[FloatArray] = []
    y_parts: list[NDArray[np.float64]] = []
    r_parts: list[FloatArray] = []
    peaks: list[PeakEvent] = []
    releases: list[float] = []
    r_before: float | None = None
    for start, stop, r in schedule.pieces(tau0, tau_end):
        if r_before is not None and _is_breakpoint_peak(r_before, r, y):
            peaks.append(
                PeakEvent(tau=start, i=float(y[1]), s=float(y[0]), at_breakpoint=True)
            )
        if r_before is not None and _is_release(r_before, r, y):
            releases.append(start)
        t_seg, y_seg, seg_peaks = _integrate_segment(y, r, start, stop, opts)
        if tau_parts:
            # the first sample repeats the previous segment's last one
            t_seg, y_seg = t_seg[1:], y_seg[:, 1:]
        tau_parts.append(t_seg)
        y_parts.append(y_seg)
        r_parts.append(np.full(t_seg.size, r))
        peaks.extend(seg_peaks)
        y = y_seg[:, -1] if t_seg.size else y
        r_before = r

    tau = np.concatenate(tau_parts)
    ys = np.clip(np.concatenate(y_parts, axis=1), 0.0, 1.0)
    return Trajectory(
        tau=tau,
        s=ys[0],
        i=ys[1],
        c=ys[2],
        r=np.concatenate(r_parts),
        peaks=tuple(peaks),
        qss=_first_qss(tau, ys[1], opts.i_qss_threshold),
        releases=tuple(releases),
    )


def peak_of_infected(traj: Trajectory) -> tuple[float, float] | None:
    """
    First local maximum of i, refined by the parabola through the three
    samples around it. None when i never rises.
    """
    i = traj.i
    if i.size < 3:  # noqa: PLR2004
        return None
    inner = i[1:-1]
    rising = (inner > i[:-2]) & (inner >= i[2:])
    candidates = np.flatnonzero(rising & (inner > _PEAK_FLOOR))
    if candidates.size == 0:
        return None
    k = int(candidates[0]) + 1
    x = traj.tau[k - 1 : k + 2] - traj.tau[k]
    a, b, c = np.polyfit(x, i[k - 1 : k + 2], 2)
    if a >= 0.0:
        return float(traj.tau[k]), float(i[k])
    vertex = float(np.clip(-b / (2.0 * a), x[0], x[2]))
    return float(traj.tau[k]) + vertex, float(np.polyval([a, b, c], vertex))


def peak_time(
    r: float,
    x0: EpiState,
    opts: IntegrationOptions | None = None,
    *,
    tau0: float = 0.0,
) -> float | None:
    """
    Time of the infected peak under constant r from x0 at tau0, on the same
    clock as tau0. None when r * s0 <= 1 (i only declines).
    """
    opts = opts or IntegrationOptions()
    if x0.i <= 0.0 or r * x0.s <= 1.0:
        return None
    sol = _solve(
        x0.as_array(),
        r,
        (tau0, tau0 + opts.qss_horizon),
        opts,
        events=_ThresholdCrossing(r, terminal=True),
    )
    if sol.t_events[0].size == 0:
        msg = f"no infected peak within {opts.qss_horizon} time units for r={r}"
        raise NoQssError(msg)
    return float(sol.t_events[0][0])


def qss_time(
    r: float,
    x0: EpiState,
    opts: IntegrationOptions | None = None,
    *,
    tau0: float = 0.0,
) -> float:
    """
    Time at which the quasi steady state is reached under constant r.

    With a peak this is qss_multiplier * peak time; without one it is the
    first time i drops below i_qss_threshold. Both are on the clock of tau0.
    """
    opts = opts or IntegrationOptions()
    if x0.i == 0.0:
        return tau0
    tau_hat = peak_time(r, x0, opts, tau0=tau0)
    if tau_hat is not None:
        return opts.qss_multiplier * tau_hat
    return settling_time(r, x0, opts, tau0=tau0)


def settling_time(
    r: float,
    x0: EpiState,
    opts: IntegrationOptions | None = None,
    *,
    tau0: float = 0.0,
) -> float:
    """
    First time i falls below i_qss_threshold under constant r, after its
    peak if it still has one to come. tau0 when x0 has already settled.
    """
    opts = opts or IntegrationOptions()
    if x0.i == 0.0 or (x0.i < opts.i_qss_threshold and r * x0.s <= 1.0):
        return tau0
    sol = _solve(
        x0.as_array(),
        r,
        (tau0, tau0 + opts.qss_horizon),
        opts,
        events=_InfectedBelow(opts.i_qss_threshold),
    )
    if sol.t_events[0].size == 0:
        msg = (
            f"i stayed above {opts.i_qss_threshold} for {opts.qss_horizon} "
            f"time units with r={r}"
        )
        raise NoQssError(msg)
    return float(sol.t_events[0][0])


def nondimensionalize(p: DimensionalParams, t: float) -> tuple[float, float]:
    """(r, tau) = (beta / gamma, t * gamma)."""
    if t < 0.0:
        msg = f"time must be non-negative (got {t})"
        raise InvalidStateError(msg)
    return p.beta / p.gamma, t * p.gamma


def dimensionalize(p: DimensionalParams, tau: float) -> float:
    return tau / p.gamma


def to_counts(state: EpiState, population: int) -> tuple[float, float, float]:
    return state.s * population, state.i * population, state.c * population
