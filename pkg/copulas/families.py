"""
Archimedean copulas used by the likelihood and the simulator.

The estimator always works with the two-parameter family

    C(u, v) = [1 + {(u^(-1/kappa) - 1)^(1/alpha) + (v^(-1/kappa) - 1)^(1/alpha)}^alpha]^(-kappa)

with alpha in (0, 1] and kappa > 0. alpha = 1 is Clayton with theta = 1/kappa and
kappa -> infinity tends to Gumbel with theta = 1/alpha. The one-parameter families
(Clayton, Gumbel, Frank, Joe, AMH) exist so data can be generated from copulas
outside the fitted family.

Every function accepts scalars or numpy arrays (broadcast together) and returns a
float for scalar input.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, optimize

from core.exceptions import ConvergenceError, DomainError, InfeasibleError

logger = logging.getLogger(__name__)

BISECTION_EPS = 1e-12
BISECTION_TOL = 1e-10
BISECTION_MAX_STEPS = 200
MASS_ROUNDING = -1e-12
_EXPM1_SWITCH = 30.0
_JOE_SERIES_TERMS = 200_000


class FamilyTag(str, Enum):
    TWO_PARAMETER = 'two-param'
    CLAYTON = 'clayton'
    GUMBEL = 'gumbel'
    FRANK = 'frank'
    JOE = 'joe'
    AMH = 'amh'


@dataclass(frozen=True)
class CopulaParams:
    """Dependence parameters of the two-parameter family."""

    alpha: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and 0.0 < self.alpha <= 1.0):
            raise DomainError(f'alpha must lie in (0, 1], got {self.alpha!r}')
        if not (math.isfinite(self.kappa) and self.kappa > 0.0):
            raise DomainError(f'kappa must be positive and finite, got {self.kappa!r}')

    @property
    def tau(self):
        return kendall_tau(self)


@dataclass(frozen=True)
class CopulaFamily:
    """
    A copula the simulator can draw from.

    One-parameter families carry `theta`; the two-parameter family carries `params`.
    """

    tag: FamilyTag
    theta: float = None
    params: CopulaParams = None

    def __post_init__(self):
        object.__setattr__(self, 'tag', FamilyTag(self.tag))
        if self.tag is FamilyTag.TWO_PARAMETER:
            if not isinstance(self.params, CopulaParams):
                raise DomainError('the two-parameter family needs CopulaParams')
            return
        theta = self.theta
        if theta is None or not math.isfinite(theta):
            raise DomainError(f'{self.tag.value} needs a finite theta')
        valid = {
            FamilyTag.CLAYTON: theta > 0,
            FamilyTag.GUMBEL: theta >= 1,
            FamilyTag.FRANK: theta != 0,
            FamilyTag.JOE: theta >= 1,
            FamilyTag.AMH: -1 <= theta < 1,
        }[self.tag]
        if not valid:
            raise DomainError(f'theta={theta!r} is outside the {self.tag.value} parameter space')

    @classmethod
    def two_parameter(cls, alpha, kappa):
        return cls(FamilyTag.TWO_PARAMETER, params=CopulaParams(alpha, kappa))

    @classmethod
    def from_tau(cls, tag, tau, alpha=1.0):
        """Family member whose Kendall's tau equals `tau`."""
        tag = FamilyTag(tag)
        if tag is FamilyTag.TWO_PARAMETER:
            return cls.two_parameter(alpha, solve_kappa_for_tau(alpha, tau))
        if tag is FamilyTag.CLAYTON:
            if not 0 < tau < 1:
                raise InfeasibleError(f'Clayton needs tau in (0, 1), got {tau}')
            return cls(tag, theta=2 * tau / (1 - tau))
        if tag is FamilyTag.GUMBEL:
            if not 0 <= tau < 1:
                raise InfeasibleError(f'Gumbel needs tau in [0, 1), got {tau}')
            return cls(tag, theta=1 / (1 - tau))
        brackets = {
            FamilyTag.FRANK: (1e-6, 500.0) if tau > 0 else (-500.0, -1e-6),
            FamilyTag.JOE: (1.0, 500.0),
            FamilyTag.AMH: (-1.0, 1.0 - 1e-12),
        }
        lo, hi = brackets[tag]
        tau_lo, tau_hi = _family_tau(tag, lo), _family_tau(tag, hi)
        if not min(tau_lo, tau_hi) <= tau <= max(tau_lo, tau_hi):
            raise InfeasibleError(
                f'tau={tau} is not attainable by {tag.value} (range {tau_lo:.4f}..{tau_hi:.4f})')
        theta = optimize.brentq(lambda t: _family_tau(tag, t) - tau, lo, hi, xtol=1e-12)
        return cls(tag, theta=theta)

    def cdf(self, u, v):
        return _scalarize(self._cdf(*_unit_pair(u, v)), u, v)

    def conditional_cdf(self, u, v):
        return conditional_cdf_given_u(u, v, self)

    def kendall_tau(self):
        if self.tag is FamilyTag.TWO_PARAMETER:
            return kendall_tau(self.params)
        return _family_tau(self.tag, self.theta)

    def _cdf(self, u, v):
        if self.tag is FamilyTag.TWO_PARAMETER:
            return _two_parameter_cdf(u, v, self.params.alpha, self.params.kappa)
        return _BOUNDARY_SAFE[self.tag](u, v, self.theta)


def _resolve_family(family):
    if isinstance(family, CopulaFamily):
        return family
    if isinstance(family, CopulaParams):
        return CopulaFamily(FamilyTag.TWO_PARAMETER, params=family)
    raise DomainError(f'expected CopulaParams or CopulaFamily, got {type(family).__name__}')


def _unit_pair(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for name, x in (('u', u), ('v', v)):
        if not np.all((x >= 0.0) & (x <= 1.0)):
            raise DomainError(f'{name} must lie in [0, 1]')
    return np.broadcast_arrays(u, v)


def _scalarize(out, *inputs):
    if all(np.ndim(x) == 0 for x in inputs):
        return float(out)
    return out


def _log_expm1(x):
    """log(exp(x) - 1) for x > 0 without overflow."""
    safe = np.minimum(x, _EXPM1_SWITCH)
    return np.where(x > _EXPM1_SWITCH, x + np.log1p(-np.exp(-x)), np.log(np.expm1(safe)))


def _with_boundaries(u, v, interior):
    """
    Evaluate `interior` off the edges of the unit square and apply
    C(u, 0) = C(0, v) = 0, C(u, 1) = u, C(1, v) = v exactly.
    """
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    out = np.empty(u.shape)
    zero = (u == 0.0) | (v == 0.0)
    u_one = u == 1.0
    v_one = v == 1.0
    inner = ~(zero | u_one | v_one)
    if np.any(inner):
        with np.errstate(divide='ignore', over='ignore', invalid='ignore', under='ignore'):
            out[inner] = interior(u[inner], v[inner])
    out[u_one] = v[u_one]
    out[v_one] = u[v_one]
    out[zero] = 0.0
    return np.clip(out, np.maximum(0.0, u + v - 1.0), np.minimum(u, v))


def _two_parameter_cdf(u, v, alpha, kappa):
    def interior(u, v):
        lu = _log_expm1(-np.log(u) / kappa)
        lv = _log_expm1(-np.log(v) / kappa)
        inner = alpha * np.logaddexp(lu / alpha, lv / alpha)
        return np.exp(-kappa * np.logaddexp(0.0, inner))

    return _with_boundaries(u, v, interior)


def _clayton_log_sum(u, v, theta):
    """log(u^-theta + v^-theta - 1)."""
    a = -theta * np.log(u)
    b = -theta * np.log(v)
    big = np.maximum(a, b) > 700.0
    small_a = np.minimum(a, 700.0)
    small_b = np.minimum(b, 700.0)
    return np.where(big, np.logaddexp(a, b), np.log1p(np.expm1(small_a) + np.expm1(small_b)))


def _clayton_cdf(u, v, theta):
    return _with_boundaries(u, v, lambda u, v: np.exp(-_clayton_log_sum(u, v, theta) / theta))


def _gumbel_cdf(u, v, theta):
    def interior(u, v):
        s = (-np.log(u)) ** theta + (-np.log(v)) ** theta
        return np.exp(-s ** (1.0 / theta))

    return _with_boundaries(u, v, interior)


def _frank_cdf(u, v, theta):
    def interior(u, v):
        ratio = np.expm1(-theta * u) * np.expm1(-theta * v) / np.expm1(-theta)
        return -np.log1p(ratio) / theta

    return _with_boundaries(u, v, interior)


def _joe_cdf(u, v, theta):
    def interior(u, v):
        a = (1.0 - u) ** theta
        b = (1.0 - v) ** theta
        return 1.0 - (a + b - a * b) ** (1.0 / theta)

    return _with_boundaries(u, v, interior)


def _amh_cdf(u, v, theta):
    return _with_boundaries(u, v, lambda u, v: u * v / (1.0 - theta * (1.0 - u) * (1.0 - v)))


_BOUNDARY_SAFE = {
    FamilyTag.CLAYTON: _clayton_cdf,
    FamilyTag.GUMBEL: _gumbel_cdf,
    FamilyTag.FRANK: _frank_cdf,
    FamilyTag.JOE: _joe_cdf,
    FamilyTag.AMH: _amh_cdf,
}


def _debye1(theta):
    value, _ = integrate.quad(lambda t: t / math.expm1(t) if t != 0 else 1.0, 0.0, theta)
    return value / theta


def _family_tau(tag, theta):
    if tag is FamilyTag.CLAYTON:
        return theta / (theta + 2.0)
    if tag is FamilyTag.GUMBEL:
        return 1.0 - 1.0 / theta
    if tag is FamilyTag.FRANK:
        return 1.0 - 4.0 / theta * (1.0 - _debye1(theta))
    if tag is FamilyTag.JOE:
        k = np.arange(1, _JOE_SERIES_TERMS + 1, dtype=float)
        terms = 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0))
        return 1.0 - 4.0 * math.fsum(terms)
    if tag is FamilyTag.AMH:
        if theta == 0:
            return 0.0
        return 1.0 - 2.0 * (theta + (1.0 - theta) ** 2 * math.log1p(-theta)) / (3.0 * theta ** 2)
    raise DomainError(f'no closed-form tau for {tag!r}')


def copula_cdf(u, v, p):
    """C_{alpha,kappa}(u, v), evaluated in log space away from the edges."""
    if not isinstance(p, CopulaParams):
        raise DomainError('copula_cdf expects CopulaParams')
    u_arr, v_arr = _unit_pair(u, v)
    return _scalarize(_two_parameter_cdf(u_arr, v_arr, p.alpha, p.kappa), u, v)


def clayton_cdf(u, v, theta):
    if not (math.isfinite(theta) and theta > 0):
        raise DomainError(f'Clayton theta must be positive, got {theta!r}')
    u_arr, v_arr = _unit_pair(u, v)
    return _scalarize(_clayton_cdf(u_arr, v_arr, theta), u, v)


def kendall_tau(p):
    return 1.0 - 2.0 * p.alpha * p.kappa / (2.0 * p.kappa + 1.0)


def solve_kappa_for_tau(alpha, tau):
    """kappa such that the two-parameter family with this alpha has Kendall's tau `tau`."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f'alpha must lie in (0, 1], got {alpha!r}')
    gap = 1.0 - tau
    if not tau < 1.0 or gap >= alpha:
        raise InfeasibleError(
            f'tau={tau} is not attainable with alpha={alpha}: need 1 - tau < alpha')
    return gap / (2.0 * (alpha - gap))


def _finite_difference_conditional(family, u, v):
    h = np.maximum(1e-6, 1e-6 * u)
    lo = np.maximum(u - h, 0.5 * u)
    hi = np.minimum(u + h, 0.5 * (1.0 + u))
    return (family._cdf(hi, v) - family._cdf(lo, v)) / (hi - lo)


def _analytic_conditional(family, u, v):
    theta = family.theta
    with np.errstate(divide='ignore', over='ignore', invalid='ignore', under='ignore'):
        if family.tag is FamilyTag.CLAYTON:
            log_sum = _clayton_log_sum(u, v, theta)
            out = np.exp((-theta - 1.0) * np.log(u) + (-1.0 / theta - 1.0) * log_sum)
        elif family.tag is FamilyTag.FRANK:
            ev = np.expm1(-theta * v)
            out = np.exp(-theta * u) * ev / (np.expm1(-theta) + np.expm1(-theta * u) * ev)
        else:
            d = 1.0 - theta * (1.0 - u) * (1.0 - v)
            out = v * (1.0 - theta * (1.0 - v)) / d ** 2
    return out


def conditional_cdf_given_u(u, v, family):
    """
    dC(u, v)/du, the distribution function of V given U = u.

    Closed forms for Clayton, Frank and AMH; a central difference with step
    max(1e-6, 1e-6 u) kept inside (0, 1) for the other families.
    """
    family = _resolve_family(family)
    u_arr, v_arr = _unit_pair(u, v)
    if np.any((u_arr <= 0.0) | (u_arr >= 1.0)):
        raise DomainError('u must lie strictly inside (0, 1)')
    out = np.empty(u_arr.shape)
    zero = v_arr == 0.0
    one = v_arr == 1.0
    inner = ~(zero | one)
    if np.any(inner):
        ui, vi = u_arr[inner], v_arr[inner]
        if family.tag in (FamilyTag.CLAYTON, FamilyTag.FRANK, FamilyTag.AMH):
            out[inner] = _analytic_conditional(family, ui, vi)
        else:
            out[inner] = _finite_difference_conditional(family, ui, vi)
    out[zero] = 0.0
    out[one] = 1.0
    return _scalarize(np.clip(out, 0.0, 1.0), u, v)


def invert_conditional(u, w, family):
    """v with conditional_cdf_given_u(u, v) = w, by bisection on [eps, 1 - eps]."""
    family = _resolve_family(family)
    u_arr, w_arr = _unit_pair(u, w)
    if np.any((u_arr <= 0.0) | (u_arr >= 1.0)) or np.any((w_arr <= 0.0) | (w_arr >= 1.0)):
        raise DomainError('u and w must lie strictly inside (0, 1)')
    lo = np.full(u_arr.shape, BISECTION_EPS)
    hi = np.full(u_arr.shape, 1.0 - BISECTION_EPS)
    for _ in range(BISECTION_MAX_STEPS):
        if np.all(hi - lo <= BISECTION_TOL):
            break
        mid = 0.5 * (lo + hi)
        below = conditional_cdf_given_u(u_arr, mid, family) < w_arr
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    else:
        raise ConvergenceError(f'bisection did not reach {BISECTION_TOL} in {BISECTION_MAX_STEPS} steps')
    return _scalarize(0.5 * (lo + hi), u, w)


def rectangle_mass(u1, u2, v1, v2, p):
    """
    C(u1, v1) - C(u1, v2) - C(u2, v1) + C(u2, v2) on the survival scale
    (u1 >= u2, v1 >= v2).
    """
    family = _resolve_family(p)
    u1a, u2a = _unit_pair(u1, u2)
    v1a, v2a = _unit_pair(v1, v2)
    if np.any(u1a < u2a) or np.any(v1a < v2a):
        raise DomainError('rectangle corners must satisfy u1 >= u2 and v1 >= v2')
    mass = ((family._cdf(u1a, v1a) - family._cdf(u2a, v1a))
            - (family._cdf(u1a, v2a) - family._cdf(u2a, v2a)))
    if np.any(mass < MASS_ROUNDING):
        raise DomainError(f'negative rectangle mass {np.min(mass):.3e}')
    return _scalarize(np.maximum(mass, 0.0), u1, u2, v1, v2)
