"""
Closed-form final size of the SIR epidemic.

Started from (s0, i0) under constant r, the susceptible fraction settles at

    s_inf = -W0(-r s0 exp(-r (s0 + i0))) / r

which solves s0 exp(-r (s0 + i0)) = s_inf exp(-r s_inf). The (s0, i0) form
holds for any restart state, including states with c > 0 reached at the end
of a distancing window; the shortcut that assumes c = 0 is never used.

For i0 = 0 and s0 > 1/r the formula returns the post-outbreak root below the
threshold even though the ODE stays put at (s0, 0); callers that need the
dynamical answer must treat that equilibrium themselves.
"""

from typing import NamedTuple, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from goldilocks_sir.errors import NonPositiveRError, PreconditionViolation
from goldilocks_sir.lambert_w import lambert_w0

_SIMPLEX_TOL = 1e-9


class FinalSizeQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0.0)
    s0: float = Field(ge=0.0, le=1.0)
    i0: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_simplex(self) -> Self:
        if self.s0 + self.i0 > 1.0 + _SIMPLEX_TOL:
            msg = f"s0 + i0 must not exceed 1 (got {self.s0 + self.i0!r})"
            raise ValueError(msg)
        return self


class FinalSizeOptimum(NamedTuple):
    s_op: float
    i_op: float
    s_inf_op: float


def _require_positive(r: float) -> None:
    if not r > 0.0:
        msg = f"reproduction number must be positive (got {r!r})"
        raise NonPositiveRError(msg)


def herd_immunity_threshold(r: float) -> float:
    """S* = min(1, 1/r)."""
    _require_positive(r)
    return min(1.0, 1.0 / r)


def final_size_array(
    r: ArrayLike, s0: ArrayLike, i0: ArrayLike
) -> NDArray[np.float64]:
    """Broadcasting final size over arrays of (r, s0, i0)."""
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(r_arr <= 0.0):
        msg = "reproduction numbers must be positive"
        raise NonPositiveRError(msg)
    s_arr = np.asarray(s0, dtype=np.float64)
    i_arr = np.asarray(i0, dtype=np.float64)
    z = -r_arr * s_arr * np.exp(-r_arr * (s_arr + i_arr))
    # + 0.0 turns the -0.0 of s0 = 0 into 0.0
    return -lambert_w0(z) / r_arr + 0.0


def s_infinity(r: float, s0: float, i0: float) -> float:
    _require_positive(r)
    return float(final_size_array(r, s0, i0))


def final_size(q: FinalSizeQuery) -> float:
    return s_infinity(q.r, q.s0, q.i0)


def final_size_residual(q: FinalSizeQuery, s_inf: float) -> float:
    """Residual of s0 exp(-r (s0 + i0)) = s_inf exp(-r s_inf)."""
    lhs = q.s0 * np.exp(-q.r * (q.s0 + q.i0))
    rhs = s_inf * np.exp(-q.r * s_inf)
    return float(lhs - rhs)


def final_size_optimum(r: float, delta: float) -> FinalSizeOptimum:
    """
    Maximum of s_inf(r, s, i) over s in [0, 1], i in [delta, 1].

    The maximizer is (S*, delta); at delta = 0 the maximum is S* itself.
    """
    _require_positive(r)
    if not 0.0 <= delta <= 1.0:
        msg = f"delta must lie in [0, 1] (got {delta!r})"
        raise PreconditionViolation(msg)
    s_star = herd_immunity_threshold(r)
    if delta == 0.0:
        return FinalSizeOptimum(s_star, 0.0, s_star)
    return FinalSizeOptimum(s_star, delta, s_infinity(r, s_star, delta))
