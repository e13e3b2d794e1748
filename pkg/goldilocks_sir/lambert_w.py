"""
Principal branch W0 of the Lambert W function on [-1/e, inf).

W0(z) is the solution w >= -1 of w * exp(w) = z. Evaluation uses Halley's
method, seeded by the series expansion about the branch point -1/e in the
variable p = sqrt(2 * (e * z + 1)) for negative z, by log1p for moderate z
and by the asymptotic expansion log(z) - log(log(z)) for large z. Within
1e-3 of the branch point (in p) the series alone is used; it is exact to
rounding there and Halley's derivative vanishes at w = -1.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from goldilocks_sir.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

TOL_DOMAIN = 1e-12
BRANCH_POINT = -0.36787944117144233

# 1/e split into a double and its rounding remainder, so that z + 1/e is
# accurate for z close to the branch point
_INV_E_HI = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17

_MAX_ITER = 50
_STEP_TOL = 1e-14
_RESIDUAL_TOL = 1e-12
_SERIES_CUTOFF = 1e-3
_LOG1P_LIMIT = 3.0

# W0 = sum c_k p^k around z = -1/e
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
)


def _branch_series(p: NDArray[np.float64], terms: int) -> NDArray[np.float64]:
    out = np.zeros_like(p)
    for coeff in reversed(_BRANCH_SERIES[:terms]):
        out = out * p + coeff
    return out


def _initial_guess(
    z: NDArray[np.float64], p: NDArray[np.float64]
) -> NDArray[np.float64]:
    w = np.empty_like(z)
    neg = z < 0.0
    w[neg] = _branch_series(p[neg], 4)
    mid = (z >= 0.0) & (z <= _LOG1P_LIMIT)
    w[mid] = np.log1p(z[mid])
    big = z > _LOG1P_LIMIT
    l1 = np.log(z[big])
    l2 = np.log(l1)
    w[big] = l1 - l2 + l2 / l1
    return w


def _halley(z: NDArray[np.float64], p: NDArray[np.float64]) -> NDArray[np.float64]:
    w = _initial_guess(z, p)
    active = np.flatnonzero(np.ones_like(w, dtype=bool))
    for iteration in range(_MAX_ITER):
        wa = w[active]
        ew = np.exp(wa)
        f = wa * ew - z[active]
        wp1 = wa + 1.0
        step = f / (ew * wp1 - (wa + 2.0) * f / (2.0 * wp1))
        wa = wa - step
        w[active] = wa
        active = active[np.abs(step) > _STEP_TOL * np.maximum(1.0, np.abs(wa))]
        if active.size == 0:
            logger.debug("Halley converged after %d iterations", iteration + 1)
            break
    residual = np.abs(w * np.exp(w) - z)
    bad = residual > _RESIDUAL_TOL * np.maximum(1.0, np.abs(z))
    if np.any(bad):
        worst = int(np.argmax(np.where(bad, residual, -np.inf)))
        msg = (
            f"Lambert W0 did not converge at z={z[worst]!r} "
            f"(residual {residual[worst]:.3e})"
        )
        raise ConvergenceError(msg)
    return w


def lambert_w0(z: ArrayLike) -> NDArray[np.float64]:
    """
    Vectorized W0 over an array of real arguments.

    Arguments below -1/e by at most TOL_DOMAIN are clamped to the branch
    point; anything further below (or NaN) raises DomainError.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    shape = z_arr.shape
    flat = np.atleast_1d(z_arr).ravel()
    if np.any(np.isnan(flat)):
        msg = "Lambert W0 is undefined for NaN arguments"
        raise DomainError(msg)
    offset = (flat + _INV_E_HI) + _INV_E_LO
    if np.any(offset < -TOL_DOMAIN):
        msg = (
            f"Lambert W0 argument {float(flat.min())!r} lies below the branch "
            f"point -1/e"
        )
        raise DomainError(msg)
    p = np.sqrt(2.0 * np.e * np.maximum(offset, 0.0))
    w = np.empty_like(flat)
    near = p < _SERIES_CUTOFF
    w[near] = _branch_series(p[near], len(_BRANCH_SERIES))
    far = ~near
    if np.any(far):
        w[far] = _halley(flat[far], p[far])
    return w.reshape(shape)


def w0(z: float) -> float:
    """Scalar W0: the w >= -1 with w * exp(w) == z."""
    return float(lambert_w0(z))
