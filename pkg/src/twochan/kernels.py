"""Built-in coupling-kernel families sampled on channel index sets.

Every family is multiplied by a polynomial envelope that vanishes at the
continuum-band endpoints (power ``boundary_power`` per index), so sampled
couplings satisfy the boundary-vanishing assumption by construction and keep
the trapezoid rule at its superconvergent best.  Discrete indices get a unit
envelope.
"""

from __future__ import annotations

import numpy as np

from .errors import ProblemFileError
from .model import SpectralOperator

__all__ = ["FAMILIES", "boundary_envelope", "sample_coupling"]


def boundary_envelope(op: SpectralOperator, power: float) -> np.ndarray:
    """Per-point factor 4 (l-a)(b-l) / (b-a)^2 raised to ``power``."""
    env = np.ones(op.n)
    offset = op.n_discrete
    for band in op.continuum_bands:
        lam = band.grid
        bump = 4.0 * (lam - band.a) * (band.b - lam) / (band.b - band.a) ** 2
        env[offset: offset + band.n_points] = np.clip(bump, 0.0, None) ** power
        offset += band.n_points
    return env


def _span_center(op: SpectralOperator) -> tuple[float, float]:
    lo = min(lo for lo, _ in op.intervals())
    hi = max(hi for _, hi in op.intervals())
    return 0.5 * (lo + hi), max(hi - lo, 1.0)


def _gaussian(row_op, col_op, params):
    cr_default, sr = _span_center(row_op)
    cc_default, sc = _span_center(col_op)
    amp = params.pop("amplitude", 1.0)
    cr = params.pop("center_row", cr_default)
    cc = params.pop("center_col", cc_default)
    width = params.pop("width", 0.25 * max(sr, sc))
    lam = row_op.points[:, None]
    mu = col_op.points[None, :]
    return amp * np.exp(-((lam - cr) ** 2 + (mu - cc) ** 2) / (2.0 * width**2))


def _separable_bump(row_op, col_op, params):
    amp = params.pop("amplitude", 1.0)
    return amp * np.ones((row_op.n, col_op.n))


FAMILIES = {
    "gaussian": _gaussian,
    "separable_bump": _separable_bump,
}


def sample_coupling(family: str, params: dict, row_op: SpectralOperator,
                    col_op: SpectralOperator) -> np.ndarray:
    """Sample a named kernel family on the (row, col) index sets.

    Common parameters: ``amplitude`` (overall scale) and ``boundary_power``
    (envelope exponent at band endpoints, default 2).
    """
    if family not in FAMILIES:
        raise ProblemFileError(
            f"unknown kernel family {family!r}; available: {sorted(FAMILIES)}"
        )
    params = dict(params)
    power = params.pop("boundary_power", 2.0)
    entries = FAMILIES[family](row_op, col_op, params)
    if params:
        raise ProblemFileError(
            f"unknown kernel parameter(s) {sorted(params)} for family {family!r}"
        )
    env_r = boundary_envelope(row_op, power)
    env_c = boundary_envelope(col_op, power)
    return env_r[:, None] * entries * env_c[None, :]
