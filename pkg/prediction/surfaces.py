"""
Progression-free probabilities from a fitted model.

The joint survival is C(S1(t1 | z1), S2(t2 | z2)) with the fitted copula and
margins. Time points must lie in [0, t_hi] of the fitted sieve; the
polynomial means nothing outside it, so such requests are refused.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from copulas.families import copula_cdf
from core.exceptions import DegenerateDataError, RangeError
from sieve.margins import marginal_survival

DENOMINATOR_FLOOR = 1e-12


def _times(fit, t, axis):
    t = np.asarray(t, dtype=float)
    inside = (t >= 0.0) & (t <= fit.layout.t_hi)
    if not np.all(inside):
        raise RangeError(f'time {t[~inside].ravel()[0]!r} on axis {axis} is outside [0, {fit.layout.t_hi:.6g}]')
    return t


def _survival(fit, j, t, z):
    margin = fit.margins[j - 1]
    z = np.asarray(z, dtype=float)
    return np.clip(marginal_survival(margin, _times(fit, t, j), z), 0.0, 1.0)


def joint_survival(fit, t1, t2, z1, z2):
    """P(T1 > t1, T2 > t2 | z1, z2); arrays broadcast together."""
    s1 = _survival(fit, 1, t1, z1)
    s2 = _survival(fit, 2, t2, z2)
    return copula_cdf(s1, s2, fit.copula)


def conditional_survival_given_fellow_progressed(fit, s, t_cond, z1, z2):
    """
    P(T2 > t_cond + s | T2 > t_cond, T1 <= t_cond): the chance margin 2 stays
    event-free for `s` more time units given margin 1 has already had its event.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise RangeError('the additional time must be >= 0')
    later = t_cond + s
    s1 = _survival(fit, 1, t_cond, z1)
    s2_now = _survival(fit, 2, t_cond, z2)
    s2_later = _survival(fit, 2, later, z2)
    numerator = s2_later - copula_cdf(s1, s2_later, fit.copula)
    denominator = s2_now - copula_cdf(s1, s2_now, fit.copula)
    if np.any(denominator < DENOMINATOR_FLOOR):
        raise DegenerateDataError(
            f'P(T2 > {t_cond}, T1 <= {t_cond}) is below {DENOMINATOR_FLOOR}; cannot condition on it')
    out = np.clip(numerator / denominator, 0.0, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class PredictionGrid:
    times1: np.ndarray
    times2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    values: np.ndarray

    def to_frame(self):
        """Long format, one row per (t1, t2), for contour tools."""
        t1, t2 = np.meshgrid(self.times1, self.times2, indexing='ij')
        return pd.DataFrame({'t1': t1.ravel(), 't2': t2.ravel(), 'value': self.values.ravel()})


def survival_grid(fit, times1, times2, z1, z2):
    times1 = np.sort(np.asarray(times1, dtype=float).reshape(-1))
    times2 = np.sort(np.asarray(times2, dtype=float).reshape(-1))
    t1, t2 = np.meshgrid(times1, times2, indexing='ij')
    values = np.asarray(joint_survival(fit, t1, t2, z1, z2))
    return PredictionGrid(times1, times2, np.asarray(z1, dtype=float), np.asarray(z2, dtype=float), values)
