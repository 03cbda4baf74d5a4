"""
Marginal survival under semiparametric transformation models,

    S(t | z) = exp[-G{exp(z'beta) Lambda(t)}],

with Lambda approximated by a Bernstein polynomial whose coefficients are kept
nondecreasing by writing phi_k = sum_{j <= k} exp(xi_j).
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import special

from core.exceptions import DomainError

ETA_BOUND = 700.0


class TransformKind(str, Enum):
    PH = 'PH'
    PO = 'PO'
    BOXCOX = 'boxcox'
    LOG = 'log'


@dataclass(frozen=True)
class TransformSpec:
    """
    The transformation G.

    PH: G(x) = x; PO: G(x) = log(1 + x); boxcox: ((1 + x)^r - 1) / r;
    log: log(1 + r x) / r. `r_free` marks r as estimated alongside the other parameters.
    """

    kind: TransformKind
    r: float = 1.0
    r_free: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'kind', TransformKind(self.kind))
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f'transformation parameter r must be positive, got {self.r!r}')
        if self.r_free and self.kind in (TransformKind.PH, TransformKind.PO):
            raise DomainError(f'{self.kind.value} has no free parameter')

    @classmethod
    def parse(cls, text):
        """Read 'PH', 'PO', 'boxcox:0.5', 'log:2', 'boxcox:free' or 'log:free'."""
        head, _, tail = text.strip().partition(':')
        key = head.lower()
        if key in ('ph', 'po'):
            if tail:
                raise DomainError(f'{head} takes no parameter: {text!r}')
            return cls(TransformKind(key.upper()))
        if key not in ('boxcox', 'log'):
            raise DomainError(f'unknown transformation {text!r}')
        if not tail:
            raise DomainError(f'{key} needs a parameter, e.g. {key}:1 or {key}:free')
        if tail.lower() == 'free':
            return cls(TransformKind(key), r=1.0, r_free=True)
        try:
            r = float(tail)
        except ValueError:
            raise DomainError(f'bad transformation parameter in {text!r}') from None
        return cls(TransformKind(key), r=r)

    @property
    def label(self):
        if self.kind in (TransformKind.PH, TransformKind.PO):
            return self.kind.value
        return f"{self.kind.value}:{'free' if self.r_free else repr(self.r)}"

    def with_r(self, r):
        return replace(self, r=float(r))

    def G(self, x):
        return transform_G(self, x)

    def G_inverse(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind is TransformKind.PH:
            out = y
        elif self.kind is TransformKind.PO:
            out = np.expm1(y)
        elif self.kind is TransformKind.BOXCOX:
            out = np.expm1(np.log1p(self.r * y) / self.r)
        else:
            out = np.expm1(self.r * y) / self.r
        return out if out.ndim else float(out)


def _apply_G(kind, r, x):
    if kind is TransformKind.PH:
        return x
    if kind is TransformKind.PO:
        return np.log1p(x)
    if kind is TransformKind.BOXCOX:
        with np.errstate(over='ignore'):
            return np.expm1(r * np.log1p(x)) / r
    return np.log1p(r * x) / r


def transform_G(spec, x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError('G is defined for x >= 0 only')
    out = _apply_G(spec.kind, spec.r, x)
    return out if out.ndim else float(out)


def _check_range(t, t_lo, t_hi):
    if np.any(~((t >= t_lo) & (t <= t_hi))):
        raise DomainError(f'time outside the sieve range [{t_lo}, {t_hi}]')


def basis_matrix(t, m, t_lo, t_hi):
    s = (np.asarray(t, dtype=float) - t_lo) / (t_hi - t_lo)
    k = np.arange(m + 1)
    s = s[..., None]
    return special.comb(m, k) * s ** k * (1.0 - s) ** (m - k)


def bernstein_basis(k, m, t, t_lo, t_hi):
    if not (0 <= k <= m):
        raise DomainError(f'basis index {k} outside 0..{m}')
    if not t_lo < t_hi:
        raise DomainError('t_lo must be below t_hi')
    t = np.asarray(t, dtype=float)
    _check_range(t, t_lo, t_hi)
    out = basis_matrix(t, m, t_lo, t_hi)[..., k]
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class BernsteinSieve:
    degree: int
    t_lo: float
    t_hi: float
    raw: np.ndarray

    def __post_init__(self):
        raw = np.array(self.raw, dtype=float).reshape(-1)
        if self.degree < 1:
            raise DomainError('sieve degree must be at least 1')
        if raw.size != self.degree + 1:
            raise DomainError(f'expected {self.degree + 1} sieve coefficients, got {raw.size}')
        if not self.t_lo < self.t_hi:
            raise DomainError('t_lo must be below t_hi')
        raw.setflags(write=False)
        object.__setattr__(self, 'raw', raw)

    @classmethod
    def from_phi(cls, degree, t_lo, t_hi, phi):
        phi = np.asarray(phi, dtype=float)
        steps = np.diff(phi, prepend=0.0)
        if np.any(steps <= 0):
            raise DomainError('phi must be positive and strictly increasing to be represented')
        return cls(degree, t_lo, t_hi, np.log(steps))

    @property
    def phi(self):
        return np.cumsum(np.exp(self.raw))

    def basis(self, t):
        return basis_matrix(t, self.degree, self.t_lo, self.t_hi)

    def cumulative_hazard(self, t):
        t = np.asarray(t, dtype=float)
        _check_range(t, self.t_lo, self.t_hi)
        out = np.sum(self.basis(t) * self.phi, axis=-1)
        return out if out.ndim else float(out)


def cumulative_hazard(sieve, t):
    return sieve.cumulative_hazard(t)


@dataclass(frozen=True, eq=False)
class MarginModel:
    beta: np.ndarray
    transform: TransformSpec
    sieve: BernsteinSieve

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        beta.setflags(write=False)
        object.__setattr__(self, 'beta', beta)

    def linear_predictor(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.beta.size:
            raise DomainError(f'expected {self.beta.size} covariates, got {z.shape[-1]}')
        return z @ self.beta


def survival_from_hazard(hazard, eta, transform):
    """exp(-G(exp(eta) * hazard)) for precomputed Lambda values."""
    scaled = np.exp(np.clip(eta, -ETA_BOUND, ETA_BOUND)) * hazard
    return np.exp(-_apply_G(transform.kind, transform.r, scaled))


def marginal_survival(model, t, z, offset=0.0):
    """
    S(t | z). t = 0 returns exactly 1 and t = inf exactly 0; any other t must
    lie inside the sieve range.
    """
    t = np.asarray(t, dtype=float)
    eta = np.asarray(model.linear_predictor(z) + offset, dtype=float)
    t, eta = np.broadcast_arrays(t, eta)
    out = np.empty(t.shape)
    start = t == 0.0
    end = np.isposinf(t)
    inner = ~(start | end)
    _check_range(t[inner], model.sieve.t_lo, model.sieve.t_hi)
    hazard = np.sum(model.sieve.basis(t[inner]) * model.sieve.phi, axis=-1)
    out[inner] = survival_from_hazard(hazard, eta[inner], model.transform)
    out[start] = 1.0
    out[end] = 0.0
    return out if out.ndim else float(out)
