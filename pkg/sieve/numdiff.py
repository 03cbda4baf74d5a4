"""
Central differences refined by Richardson extrapolation.

At level k the step is h / shrink^k; the table

    D[k, m] = D[k, m-1] + (D[k, m-1] - D[k-1, m-1]) / (shrink^(2m) - 1)

removes the even-order error terms of the central scheme one at a time.
Evaluation order is fixed, so results are reproducible bit for bit.
"""

from dataclasses import dataclass, replace

import numpy as np

from core.conf import bicopula_settings
from core.exceptions import DomainError, NonFiniteError


@dataclass(frozen=True)
class DiffConfig:
    step: float = 1e-4
    hessian_step: float = 1e-2
    levels: int = 4
    shrink: float = 2.0

    def __post_init__(self):
        if not (self.step > 0 and self.hessian_step > 0):
            raise DomainError('difference steps must be positive')
        if self.levels < 2:
            raise DomainError('Richardson extrapolation needs at least two levels')
        if not self.shrink > 1:
            raise DomainError('shrink factor must exceed 1')

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'step': bicopula_settings.DIFF_STEP,
            'hessian_step': bicopula_settings.DIFF_HESSIAN_STEP,
            'levels': bicopula_settings.DIFF_LEVELS,
            'shrink': bicopula_settings.DIFF_SHRINK,
        }
        values.update(overrides)
        return cls(**values)

    def with_levels(self, levels):
        return replace(self, levels=levels)


def richardson(estimates, shrink):
    table = list(estimates)
    for m in range(1, len(table)):
        factor = shrink ** (2 * m) - 1.0
        table = [table[k] + (table[k] - table[k - 1]) / factor for k in range(1, len(table))]
    return table[-1]


def _values(x):
    return np.array(getattr(x, 'values', x), dtype=float).reshape(-1)


def _evaluate(f, x, coordinate):
    value = f(x)
    if not np.isfinite(value):
        raise NonFiniteError(f'objective is not finite near coordinate {coordinate}', coordinate=coordinate)
    return value


def gradient(f, x, cfg=None, coords=None):
    """
    Gradient of scalar f at x. With `coords` only those partial derivatives are
    computed and returned, in the order given.
    """
    cfg = cfg or DiffConfig()
    x = _values(x)
    coords = range(x.size) if coords is None else list(coords)
    out = []
    for i in coords:
        h0 = cfg.step * max(1.0, abs(x[i]))
        estimates = []
        for k in range(cfg.levels):
            h = h0 / cfg.shrink ** k
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            estimates.append((_evaluate(f, up, i) - _evaluate(f, down, i)) / (2.0 * h))
        out.append(richardson(estimates, cfg.shrink))
    return np.array(out)


def _second_diagonal(f, x, f0, i, h0, cfg):
    estimates = []
    for k in range(cfg.levels):
        h = h0 / cfg.shrink ** k
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        estimates.append((_evaluate(f, up, i) - 2.0 * f0 + _evaluate(f, down, i)) / (h * h))
    return richardson(estimates, cfg.shrink)


def _second_cross(f, x, i, j, hi0, hj0, cfg):
    estimates = []
    for k in range(cfg.levels):
        hi = hi0 / cfg.shrink ** k
        hj = hj0 / cfg.shrink ** k
        corners = []
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            point = x.copy()
            point[i] += si * hi
            point[j] += sj * hj
            corners.append(_evaluate(f, point, i))
        estimates.append((corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * hi * hj))
    return richardson(estimates, cfg.shrink)


def hessian(f, x, cfg=None, rows=None):
    """
    Hessian of scalar f at x, symmetric by construction.

    With `rows` only those rows are computed and an array of shape
    (len(rows), n) is returned; entries among the requested rows are mirrored
    rather than recomputed.
    """
    cfg = cfg or DiffConfig()
    x = _values(x)
    n = x.size
    f0 = _evaluate(f, x, None)
    steps = [cfg.hessian_step * max(1.0, abs(value)) for value in x]
    rows = list(range(n)) if rows is None else list(rows)
    position = {r: a for a, r in enumerate(rows)}
    out = np.empty((len(rows), n))
    for a, i in enumerate(rows):
        for j in range(n):
            if j in position and position[j] < a:
                out[a, j] = out[position[j], i]
            elif j == i:
                out[a, j] = _second_diagonal(f, x, f0, i, steps[i], cfg)
            else:
                out[a, j] = _second_cross(f, x, i, j, steps[i], steps[j], cfg)
    return out
