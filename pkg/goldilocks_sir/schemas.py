from typing import Annotated, Literal, Self, cast

from pydantic import (
    BaseModel,
    ConfigDict,
    Discriminator,
    Field,
    Tag,
    ValidationInfo,
    computed_field,
    field_validator,
    model_validator,
)

from goldilocks_sir.dynamics import (
    DEFAULT_EPSILON,
    EpiState,
    IntegrationOptions,
    PeakEvent,
    Trajectory,
)
from goldilocks_sir.intervention import (
    DEFAULT_QSS_BAND,
    DEFAULT_R_MIN,
    DEFAULT_RELEASE_HORIZON,
    MIN_QSS_MULTIPLIER,
    Anchor,
    ScenarioReport,
    SingleIntervalPolicy,
)

DEFAULT_TAU_END = 100.0


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class IntegrationSettings(_Strict):
    rel_tol: float = Field(default=1e-9, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    sample_step: float = Field(default=0.05, gt=0.0)
    release_horizon: float = Field(default=DEFAULT_RELEASE_HORIZON, gt=0.0)


class ThresholdSettings(_Strict):
    i_qss_threshold: float = Field(default=1e-6, gt=0.0)
    qss_band: float = Field(default=DEFAULT_QSS_BAND, ge=0.0)
    qss_multiplier: float = Field(default=MIN_QSS_MULTIPLIER, ge=1.0)
    r_min: float = Field(default=DEFAULT_R_MIN, gt=0.0)


class PolicySettings(_Strict):
    """An explicit distancing window."""

    kind: Literal["explicit"] = "explicit"
    tau_s: float = Field(gt=0.0)
    tau_f: float = Field(gt=0.0, allow_inf_nan=False)
    r_s: float = Field(gt=0.0)

    @field_validator("tau_f")
    @classmethod
    def _after_start(cls, tau_f: float, info: ValidationInfo) -> float:
        tau_s = info.data.get("tau_s")
        if tau_s is not None and tau_f <= tau_s:
            msg = f"tau_f ({tau_f}) must be after tau_s ({tau_s})"
            raise ValueError(msg)
        return tau_f


class GoldilocksDirective(_Strict):
    """Synthesize the quasi-optimal policy starting at tau_s."""

    kind: Literal["goldilocks"] = "goldilocks"
    tau_s: float = Field(gt=0.0)
    qss_multiplier: float = Field(default=MIN_QSS_MULTIPLIER, ge=MIN_QSS_MULTIPLIER)
    anchor: Anchor = "switch"


class OutputSettings(_Strict):
    directory: str | None = Field(
        default=None, description="overrides GOLDILOCKS_OUTPUT_DIR"
    )
    write_trajectory: bool = True
    write_json: bool = False


def _policy_kind(value: object) -> str:
    # a policy object without "kind" is an explicit window
    if isinstance(value, dict):
        kind = cast("dict[str, object]", value).get("kind", "explicit")
    else:
        kind = getattr(value, "kind", "explicit")
    return str(kind)


PolicyChoice = Annotated[
    Annotated[PolicySettings, Tag("explicit")]
    | Annotated[GoldilocksDirective, Tag("goldilocks")],
    Discriminator(_policy_kind),
]


class ScenarioConfig(_Strict):
    scenario_id: str = Field(default="scenario", min_length=1, pattern=r"^[\w.-]+$")
    r0: float = Field(gt=0.0)
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    policy: PolicyChoice | None = None
    tau_end: float | None = Field(default=None, gt=0.0)
    integration: IntegrationSettings = IntegrationSettings()
    thresholds: ThresholdSettings = ThresholdSettings()
    output: OutputSettings = OutputSettings()

    @model_validator(mode="after")
    def _check_policy(self) -> Self:
        policy = self.policy
        if isinstance(policy, PolicySettings) and not (
            self.thresholds.r_min <= policy.r_s <= self.r0
        ):
            msg = (
                f"policy.r_s ({policy.r_s}) must lie in [thresholds.r_min, r0] = "
                f"[{self.thresholds.r_min}, {self.r0}]"
            )
            raise ValueError(msg)
        if policy is not None and self.tau_end is not None:
            end = policy.tau_f if isinstance(policy, PolicySettings) else policy.tau_s
            if self.tau_end <= end:
                msg = f"tau_end ({self.tau_end}) must lie after the policy window"
                raise ValueError(msg)
        return self

    def initial_state(self) -> EpiState:
        return EpiState.outbreak(self.epsilon)

    def integration_options(self) -> IntegrationOptions:
        return IntegrationOptions(
            rel_tol=self.integration.rel_tol,
            abs_tol=self.integration.abs_tol,
            sample_step=self.integration.sample_step,
            i_qss_threshold=self.thresholds.i_qss_threshold,
            qss_multiplier=self.thresholds.qss_multiplier,
        )


class PeakDocument(BaseModel):
    tau: float
    i: float
    s: float
    at_breakpoint: bool

    @classmethod
    def from_event(cls, peak: PeakEvent) -> Self:
        return cls(tau=peak.tau, i=peak.i, s=peak.s, at_breakpoint=peak.at_breakpoint)


class TrajectoryDocument(BaseModel):
    """Column-wise JSON form of a Trajectory."""

    tau: list[float]
    s: list[float]
    i: list[float]
    c: list[float]
    r: list[float]
    peaks: list[PeakDocument]
    qss_tau: float | None
    second_waves: list[PeakDocument]

    @classmethod
    def from_trajectory(cls, traj: Trajectory) -> Self:
        return cls(
            tau=traj.tau.tolist(),
            s=traj.s.tolist(),
            i=traj.i.tolist(),
            c=traj.c.tolist(),
            r=traj.r.tolist(),
            peaks=[PeakDocument.from_event(p) for p in traj.peaks],
            qss_tau=traj.qss.tau if traj.qss is not None else None,
            second_waves=[PeakDocument.from_event(p) for p in traj.second_waves],
        )


class RunArtifact(BaseModel):
    scenario_id: str
    digest: str
    toolkit_version: str
    config: ScenarioConfig
    policy: SingleIntervalPolicy | None
    report: ScenarioReport | None
    s_infinity: float
    s_star: float
    trajectory_ref: str | None = None
    trajectory_json_ref: str | None = None


class ComparisonRow(BaseModel):
    """One published number next to its reproduction."""

    scenario_id: str
    quantity: str
    published: float
    reproduced: float
    tolerance: float
    expected_class: str | None = None
    reproduced_class: str | None = None
    note: str = ""

    @computed_field
    @property
    def passed(self) -> bool:
        if abs(self.reproduced - self.published) > self.tolerance:
            return False
        return self.expected_class in (None, self.reproduced_class)
