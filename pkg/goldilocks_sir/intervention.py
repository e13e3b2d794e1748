"""
Single-interval social distancing policies.

A policy lowers r from r0 to r_s on [tau_s, tau_f] and restores r0
afterwards. This module finds the goldilocks r_s whose final size from the
switch state lands exactly on the herd immunity threshold, synthesizes the
quasi-optimal policy around it and classifies arbitrary policies into the
four possible outcomes.

Peak times of a switched schedule are read on the global clock (tau = 0 at
the outbreak). When i already declines at tau_s the switched maximum sits
at tau_s itself.
"""

import enum
import logging
from typing import Literal, NamedTuple, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import bisect

from goldilocks_sir.dynamics import (
    EpiState,
    IntegrationOptions,
    ReproductionSchedule,
    Trajectory,
    integrate,
    peak_time,
    settling_time,
)
from goldilocks_sir.errors import (
    NoSolutionError,
    PreconditionViolation,
)
from goldilocks_sir.final_size import (
    final_size_array,
    herd_immunity_threshold,
    s_infinity,
)

logger = logging.getLogger(__name__)

DEFAULT_R_MIN = 0.1
DEFAULT_QSS_BAND = 0.01
DEFAULT_RELEASE_HORIZON = 200.0
GOLDILOCKS_TOL = 1e-6
SCAN_STEP = 1e-4
MIN_QSS_MULTIPLIER = 5.0
AGREEMENT_TOL = 1e-3
_BOUND_SLACK = 1e-12

Anchor = Literal["switch", "origin"]


class SingleIntervalPolicy(BaseModel):
    """r0 on [0, tau_s), r_s on [tau_s, tau_f), r0 from tau_f on."""

    model_config = ConfigDict(frozen=True)

    tau_s: float = Field(gt=0.0)
    tau_f: float = Field(gt=0.0, allow_inf_nan=False)
    r_s: float = Field(gt=0.0)
    r0: float = Field(gt=0.0)
    r_min: float = Field(default=DEFAULT_R_MIN, gt=0.0)

    @model_validator(mode="after")
    def _check_window(self) -> Self:
        if self.tau_f <= self.tau_s:
            msg = f"tau_f ({self.tau_f}) must be after tau_s ({self.tau_s})"
            raise ValueError(msg)
        if not self.r_min <= self.r_s <= self.r0:
            msg = (
                f"r_s ({self.r_s}) must lie in "
                f"[r_min, r0] = [{self.r_min}, {self.r0}]"
            )
            raise ValueError(msg)
        return self

    def schedule(self) -> ReproductionSchedule:
        return ReproductionSchedule.single_interval(
            self.r0, self.r_s, self.tau_s, self.tau_f
        )


class ScenarioClass(enum.StrEnum):
    QUASI_OPTIMAL = "QuasiOptimal"
    SOFT_LONG_TERM = "SoftLongTerm"
    STRONG_LONG_TERM = "StrongLongTerm"
    SHORT_TERM = "ShortTerm"


class SecondWave(BaseModel):
    model_config = ConfigDict(frozen=True)

    tau: float
    peak: float


class ScenarioReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    classification: ScenarioClass
    s_at_tf: float
    i_at_tf: float
    s_infinity: float
    s_infinity_simulated: float
    s_star: float
    tau_hat: float
    tau_qss: float
    second_wave: SecondWave | None = None

    @model_validator(mode="after")
    def _check_outcome(self) -> Self:
        if self.s_infinity > self.s_star + _BOUND_SLACK:
            msg = f"s_infinity {self.s_infinity} exceeds S* = {self.s_star}"
            raise ValueError(msg)
        strong = self.classification is ScenarioClass.STRONG_LONG_TERM
        if strong != (self.second_wave is not None):
            msg = "a second wave is reported exactly for strong long-term policies"
            raise ValueError(msg)
        return self

    @property
    def gap(self) -> float:
        return self.s_star - self.s_infinity


class UpperBound(NamedTuple):
    s_infinity: float
    s_star: float
    gap: float


def switch_state(
    r0: float,
    x0: EpiState,
    tau_s: float,
    opts: IntegrationOptions | None = None,
) -> EpiState:
    """State reached at tau_s under constant r0."""
    traj = integrate(x0, ReproductionSchedule.constant(r0), tau_s, opts)
    return traj.final_state


def switched_peak_time(
    r_s: float,
    x_s: EpiState,
    tau_s: float,
    opts: IntegrationOptions | None = None,
) -> float:
    """Global-clock time of the infected maximum once r drops to r_s at tau_s."""
    tau_hat = peak_time(r_s, x_s, opts, tau0=tau_s)
    return tau_s if tau_hat is None else tau_hat


def _require_before_peak(
    r0: float, x0: EpiState, tau_s: float, opts: IntegrationOptions | None
) -> None:
    if tau_s <= 0.0:
        msg = f"tau_s must be positive (got {tau_s})"
        raise PreconditionViolation(msg)
    tau_hat0 = peak_time(r0, x0, opts)
    if tau_hat0 is None or tau_s >= tau_hat0:
        msg = (
            f"distancing must start before the uncontrolled peak "
            f"(tau_s={tau_s}, peak at {tau_hat0})"
        )
        raise PreconditionViolation(msg)


def _require_goldilocks_domain(
    r0: float, x0: EpiState, tau_s: float, opts: IntegrationOptions | None
) -> None:
    if r0 <= 1.0:
        msg = f"the goldilocks number needs an epidemic, r0 > 1 (got {r0})"
        raise PreconditionViolation(msg)
    _require_before_peak(r0, x0, tau_s, opts)


def goldilocks_from_state(
    r0: float,
    x_s: EpiState,
    tol: float = GOLDILOCKS_TOL,
    *,
    r_min: float = DEFAULT_R_MIN,
) -> float:
    """Root of S_inf(r, s(tau_s), i(tau_s)) = S*(r0) on [r_min, r0]."""
    target = herd_immunity_threshold(r0)

    def excess(r: float) -> float:
        return s_infinity(r, x_s.s, x_s.i) - target

    lo, hi = excess(r_min), excess(r0)
    logger.info(
        "goldilocks bracket [%.6g, %.6g]: excess %.3e / %.3e", r_min, r0, lo, hi
    )
    if lo == 0.0:
        return r_min
    if hi == 0.0:
        return r0
    if lo * hi > 0.0:
        msg = (
            f"no reproduction number in [{r_min}, {r0}] brings S_inf to "
            f"S* = {target:.6g} from s={x_s.s:.6g}, i={x_s.i:.6g}"
        )
        raise NoSolutionError(msg)
    return float(bisect(excess, r_min, r0, xtol=tol))


def goldilocks_r(
    r0: float,
    x0: EpiState,
    tau_s: float,
    tol: float = GOLDILOCKS_TOL,
    opts: IntegrationOptions | None = None,
    *,
    r_min: float = DEFAULT_R_MIN,
) -> float:
    """
    Distancing reproduction number that makes the epidemic settle exactly
    at the herd immunity threshold of r0 when applied from tau_s on.
    """
    _require_goldilocks_domain(r0, x0, tau_s, opts)
    r_g = goldilocks_from_state(
        r0, switch_state(r0, x0, tau_s, opts), tol, r_min=r_min
    )
    logger.info("goldilocks r for tau_s=%.6g: %.6g", tau_s, r_g)
    return r_g


def goldilocks_scan(
    r0: float,
    x0: EpiState,
    tau_s: float,
    step: float = SCAN_STEP,
    opts: IntegrationOptions | None = None,
    *,
    r_min: float = DEFAULT_R_MIN,
) -> float:
    """
    Downward scan from r0 in fixed steps, stopping at the first r whose
    final size reaches S*. Slower and quantized; kept as a cross-check.
    """
    _require_goldilocks_domain(r0, x0, tau_s, opts)
    x_s = switch_state(r0, x0, tau_s, opts)
    grid = r0 - step * np.arange(int(np.floor((r0 - r_min) / step)) + 1)
    reached = np.flatnonzero(
        final_size_array(grid, x_s.s, x_s.i) >= herd_immunity_threshold(r0)
    )
    if reached.size == 0:
        msg = f"scan down to r={grid[-1]:.6g} never reached S*"
        raise NoSolutionError(msg)
    return float(grid[reached[0]])


def quasi_optimal_policy(
    r0: float,
    x0: EpiState,
    tau_s: float,
    qss_multiplier: float = MIN_QSS_MULTIPLIER,
    opts: IntegrationOptions | None = None,
    *,
    anchor: Anchor = "switch",
    r_min: float = DEFAULT_R_MIN,
    tol: float = GOLDILOCKS_TOL,
) -> SingleIntervalPolicy:
    """
    Goldilocks distancing held until the quasi steady state.

    With anchor="switch" the window closes at tau_s + m * tau_hat, with
    anchor="origin" at m * tau_hat, where tau_hat is the global-clock peak
    time under r_s.
    """
    if qss_multiplier < MIN_QSS_MULTIPLIER:
        msg = (
            f"qss_multiplier must be at least {MIN_QSS_MULTIPLIER} "
            f"(got {qss_multiplier})"
        )
        raise PreconditionViolation(msg)
    r_g = goldilocks_r(r0, x0, tau_s, tol, opts, r_min=r_min)
    tau_hat = switched_peak_time(r_g, switch_state(r0, x0, tau_s, opts), tau_s, opts)
    tau_f = qss_multiplier * tau_hat
    if anchor == "switch":
        tau_f += tau_s
    logger.info(
        "quasi-optimal policy: r_s=%.6g on [%.6g, %.6g] (tau_hat=%.4g, %s anchor)",
        r_g,
        tau_s,
        tau_f,
        tau_hat,
        anchor,
    )
    return SingleIntervalPolicy(tau_s=tau_s, tau_f=tau_f, r_s=r_g, r0=r0, r_min=r_min)


def _release_tail(
    policy: SingleIntervalPolicy, traj: Trajectory, opts: IntegrationOptions
) -> Trajectory | None:
    """Continuation under r0 until i has settled below the QSS threshold."""
    tau_end = float(traj.tau[-1])
    x_end = traj.final_state
    settled = settling_time(policy.r0, x_end, opts, tau0=tau_end)
    if settled <= tau_end:
        return None
    logger.info(
        "released epidemic still active at tau=%.6g; extending to %.6g",
        tau_end,
        settled,
    )
    return integrate(
        x_end, ReproductionSchedule.constant(policy.r0), settled, opts, tau0=tau_end
    )


def _find_second_wave(
    policy: SingleIntervalPolicy, traj: Trajectory, tail: Trajectory | None
) -> SecondWave:
    """First peak strictly after tau_f, from the run or its continuation."""
    after = [p for p in traj.second_waves if p.tau > policy.tau_f]
    if tail is not None:
        after.extend(p for p in tail.peaks if not p.at_breakpoint)
    if not after:
        msg = (
            f"no second wave after tau_f={policy.tau_f} although the release "
            f"state lies above S*"
        )
        raise NoSolutionError(msg)
    return SecondWave(tau=after[0].tau, peak=after[0].i)


def classify_scenario(
    policy: SingleIntervalPolicy,
    x0: EpiState,
    opts: IntegrationOptions | None = None,
    *,
    qss_band: float = DEFAULT_QSS_BAND,
    release_horizon: float = DEFAULT_RELEASE_HORIZON,
) -> ScenarioReport:
    """
    Simulate the policy and sort it into one of the four outcomes.

    The window reaches a quasi steady state when tau_f is at least
    qss_multiplier times the peak time under r_s, or when i(tau_f) is below
    the QSS threshold. Without one the policy is short-term. Otherwise it is
    quasi-optimal within qss_band of S*, soft below that band and strong
    above it, in which case the released epidemic peaks a second time.

    The peak time is read on the global clock. When r_s * s(tau_s) <= 1 it is
    tau_s itself, so the window then counts as settled from
    qss_multiplier * tau_s on, however slowly i decays under r_s.

    The simulated tail runs to tau_f + release_horizon and further if the
    released epidemic is still active there, until i falls below the QSS
    threshold.
    """
    opts = opts or IntegrationOptions()
    _require_before_peak(policy.r0, x0, policy.tau_s, opts)
    tau_end = policy.tau_f + release_horizon
    traj = integrate(x0, policy.schedule(), tau_end, opts)
    x_s = traj.state_at(policy.tau_s)
    x_f = traj.state_at(policy.tau_f)

    tau_hat = switched_peak_time(policy.r_s, x_s, policy.tau_s, opts)
    tau_qss = opts.qss_multiplier * tau_hat
    s_star = herd_immunity_threshold(policy.r0)
    reached_qss = policy.tau_f >= tau_qss or x_f.i < opts.i_qss_threshold
    if not reached_qss:
        classification = ScenarioClass.SHORT_TERM
    elif abs(x_f.s - s_star) <= qss_band:
        classification = ScenarioClass.QUASI_OPTIMAL
    elif x_f.s < s_star:
        classification = ScenarioClass.SOFT_LONG_TERM
    else:
        classification = ScenarioClass.STRONG_LONG_TERM

    s_inf = s_infinity(policy.r0, x_f.s, x_f.i)
    tail = _release_tail(policy, traj, opts)
    s_sim = float((traj if tail is None else tail).s[-1])
    second_wave = None
    if classification is ScenarioClass.STRONG_LONG_TERM:
        second_wave = _find_second_wave(policy, traj, tail)
    if abs(s_inf - s_sim) > AGREEMENT_TOL:
        logger.warning(
            "closed-form S_inf %.6g and simulated tail %.6g differ by %.3e",
            s_inf,
            s_sim,
            abs(s_inf - s_sim),
        )
    logger.info(
        "policy r_s=%.6g on [%.6g, %.6g]: %s, S_inf=%.6g (S*=%.6g)",
        policy.r_s,
        policy.tau_s,
        policy.tau_f,
        classification,
        s_inf,
        s_star,
    )
    return ScenarioReport(
        classification=classification,
        s_at_tf=x_f.s,
        i_at_tf=x_f.i,
        s_infinity=s_inf,
        s_infinity_simulated=s_sim,
        s_star=s_star,
        tau_hat=tau_hat,
        tau_qss=tau_qss,
        second_wave=second_wave,
    )


def upper_bound_check(
    policy: SingleIntervalPolicy,
    x0: EpiState,
    opts: IntegrationOptions | None = None,
) -> UpperBound:
    """How far below S* the policy leaves the susceptible fraction."""
    report = classify_scenario(policy, x0, opts)
    return UpperBound(report.s_infinity, report.s_star, report.gap)
