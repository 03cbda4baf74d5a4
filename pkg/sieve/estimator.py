"""
Two-step sieve maximum likelihood.

Step 1 fits each margin on its own, then the copula parameters with the
margins held fixed. Step 2 maximizes the joint likelihood over everything,
starting from step 1, and finishes with a few damped Newton steps when the
quasi-Newton run stops short of the gradient tolerance. Standard errors come
from the inverse of the numerically differentiated observed information.
"""

import logging
import math
import time
from dataclasses import dataclass, field, replace
from functools import cached_property, partial
from itertools import product

import numpy as np
from scipy import linalg, optimize, special

from copulas.families import CopulaParams
from core.conf import bicopula_settings
from core.exceptions import DegenerateDataError, LayoutError, SingularInformationError
from core.parallel import map_ordered

from .likelihood import JointLikelihood, MarginalLikelihood
from .margins import BernsteinSieve, MarginModel, TransformKind, TransformSpec
from .numdiff import DiffConfig, gradient, hessian
from .params import (
    ALPHA_LOGIT_CAP,
    ParamLayout,
    ParamVector,
    TieMode,
    decode_params,
    encode_params,
)
from .signals import fit_completed

logger = logging.getLogger(__name__)

RIDGE_FACTOR = 1e-8
CONDITION_LIMIT = 1e15
START_ALPHAS = (0.5, 0.8, 0.95)
START_KAPPAS = (0.3, 1.0, 3.0)
# alpha above 1 - 1e-6 is reported as the Clayton boundary alpha = 1.
BOUNDARY_LOGIT = float(special.logit(1.0 - 1e-6))


@dataclass(frozen=True)
class FitConfig:
    degree: int = 3
    transforms: tuple = (TransformSpec(TransformKind.PO), TransformSpec(TransformKind.PO))
    tie: TieMode = TieMode.NONE
    gtol: float = 1e-6
    ftol: float = 1e-9
    max_iter: int = 500
    diff: DiffConfig = field(default_factory=DiffConfig)
    search_levels: int = 2
    polish_steps: int = 6
    two_step: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'tie', TieMode(self.tie))
        object.__setattr__(self, 'transforms', tuple(self.transforms))

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'degree': bicopula_settings.DEGREE,
            'gtol': bicopula_settings.GTOL,
            'ftol': bicopula_settings.FTOL,
            'max_iter': bicopula_settings.MAX_ITER,
            'diff': DiffConfig.from_settings(),
            'search_levels': bicopula_settings.SEARCH_DIFF_LEVELS,
            'polish_steps': bicopula_settings.POLISH_STEPS,
        }
        values.update(overrides)
        return cls(**values)

    @property
    def search_diff(self):
        return self.diff.with_levels(self.search_levels)


@dataclass(frozen=True, eq=False)
class Maximum:
    x: np.ndarray
    loglik: float
    gradient: np.ndarray
    converged: bool
    iterations: int
    hessian: np.ndarray = None


@dataclass(frozen=True, eq=False)
class MarginFit:
    margin: MarginModel
    loglik: float
    converged: bool
    iterations: int


@dataclass(frozen=True, eq=False)
class FitResult:
    params: ParamVector
    loglik: float
    aic: float
    observed_information: np.ndarray
    vcov_finite: np.ndarray
    converged: bool
    iterations: int
    step1_params: ParamVector
    alpha_at_boundary: bool = False
    ridge_applied: bool = False
    condition_number: float = math.nan
    data_fingerprint: str = ''
    elapsed: float = 0.0
    message: str = ''

    @property
    def layout(self):
        return self.params.layout

    @cached_property
    def decoded(self):
        return decode_params(self.params)

    @property
    def copula(self):
        return self.decoded.copula

    @property
    def margins(self):
        return self.decoded.margins

    @property
    def tau(self):
        return self.copula.tau

    @cached_property
    def finite_labels(self):
        labels = self.layout.labels
        natural = {'alpha': 'alpha', 'kappa': 'kappa', 'log_r': 'r', 'log_r1': 'r1', 'log_r2': 'r2'}
        return tuple(natural.get(labels[i], labels[i]) for i in self.layout.finite_indices)

    @cached_property
    def estimates(self):
        values = _natural_values(self.params)
        return dict(zip(self.finite_labels, values))

    @cached_property
    def standard_errors(self):
        return dict(zip(self.finite_labels, np.sqrt(np.clip(np.diag(self.vcov_finite), 0.0, None))))

    @cached_property
    def tau_se(self):
        """Delta-method standard error of Kendall's tau."""
        alpha, kappa = self.copula.alpha, self.copula.kappa
        grad = np.array([-2.0 * kappa / (2.0 * kappa + 1.0), -2.0 * alpha / (2.0 * kappa + 1.0) ** 2])
        position = {label: a for a, label in enumerate(self.finite_labels)}
        block = [position['alpha'], position['kappa']]
        cov = self.vcov_finite[np.ix_(block, block)]
        return float(np.sqrt(max(grad @ cov @ grad, 0.0)))


def aic(fit):
    """2k - 2 loglik with k the number of free coordinates."""
    return 2.0 * fit.layout.size - 2.0 * fit.loglik


def build_layout(data, cfg, n_g=0, g_shared=True):
    return ParamLayout(
        covariates=data.covariate_names,
        degree=cfg.degree,
        t_lo=0.0,
        t_hi=data.t_hi,
        transforms=cfg.transforms,
        tie=cfg.tie,
        n_g=n_g,
        g_shared=g_shared,
    )


def _natural_values(params):
    layout = params.layout
    values = params.values.copy()
    values[layout.alpha_index] = decode_params(params).copula.alpha
    values[layout.blocks['kappa'].start] = decode_params(params).copula.kappa
    for name in ('log_r1', 'log_r2'):
        if name in layout.blocks:
            values[layout.blocks[name]] = np.exp(values[layout.blocks[name]])
    return values[layout.finite_indices]


def _natural_jacobian(params):
    """Diagonal d(natural)/d(unconstrained) over the finite coordinates."""
    layout = params.layout
    scale = np.ones(layout.size)
    alpha = params.values[layout.alpha_index]
    scale[layout.alpha_index] = 0.0 if alpha >= ALPHA_LOGIT_CAP else special.expit(alpha) * special.expit(-alpha)
    scale[layout.blocks['kappa'].start] = decode_params(params).copula.kappa
    for name in ('log_r1', 'log_r2'):
        if name in layout.blocks:
            scale[layout.blocks[name]] = np.exp(params.values[layout.blocks[name]])
    return scale[layout.finite_indices]


def _meets_tolerances(grad, change, loglik, cfg):
    """Absolute gradient test plus relative change of the log-likelihood over the last step."""
    return bool(np.max(np.abs(grad), initial=0.0) <= cfg.gtol
                and abs(change) <= cfg.ftol * max(1.0, abs(loglik)))


def maximize(objective, x0, cfg):
    """
    BFGS on -objective with numerical gradients, then up to `polish_steps`
    damped Newton steps while either tolerance test fails.

    Converged means max |gradient| <= gtol and the log-likelihood moved by at
    most ftol * max(1, |loglik|) over the last accepted step.
    """
    x0 = np.asarray(x0, dtype=float)
    start = objective(x0)
    search = cfg.search_diff
    trail = [x0.copy()]
    result = optimize.minimize(
        lambda x: -objective(x),
        x0,
        jac=lambda x: -gradient(objective, x, search),
        method='BFGS',
        callback=lambda xk: trail.append(np.array(xk, copy=True)),
        options={'gtol': cfg.gtol, 'maxiter': cfg.max_iter},
    )
    x = result.x
    loglik = objective(x)
    if loglik < start:
        x, loglik, change = x0, start, math.inf
    else:
        previous = trail[-2] if len(trail) > 1 and np.array_equal(trail[-1], x) else trail[-1]
        change = loglik - objective(previous)
    grad = gradient(objective, x, cfg.diff)
    iterations = int(result.nit)
    hess = None
    for _ in range(cfg.polish_steps):
        if _meets_tolerances(grad, change, loglik, cfg):
            break
        hess = hessian(objective, x, cfg.diff)
        try:
            factor = linalg.cho_factor(-hess)
        except (linalg.LinAlgError, ValueError):
            logger.debug('Newton polish stopped: information not positive definite')
            break
        step = linalg.cho_solve(factor, grad)
        shrink = 1.0
        while shrink >= 1.0 / 64:
            candidate = x + shrink * step
            value = objective(candidate)
            if value >= loglik:
                break
            shrink /= 2.0
        else:
            break
        x, loglik, change = candidate, value, value - loglik
        iterations += 1
        grad = gradient(objective, x, cfg.diff)
        hess = None
    converged = _meets_tolerances(grad, change, loglik, cfg)
    if not converged:
        logger.debug('not converged: max|g|=%.3e, last change=%.3e', np.max(np.abs(grad), initial=0.0), change)
    return Maximum(x, loglik, grad, converged, iterations, hess)


def _default_xi(degree):
    return np.concatenate([[math.log(0.05)], np.full(degree, math.log(1.5 / degree))])


def fit_margin(data, j, cfg, layout=None):
    """Maximum sieve likelihood for margin j alone."""
    layout = layout or build_layout(data, cfg)
    if not np.any(data.observed(j)):
        raise DegenerateDataError(f'no records observed in margin {j}')
    if np.all(np.isposinf(data.right[data.observed(j), j - 1])):
        raise DegenerateDataError(f'margin {j} has no events: every record is right-censored')
    objective = MarginalLikelihood(data, j, layout)
    x0 = np.concatenate([np.zeros(objective.p), _default_xi(layout.degree),
                         [0.0] if objective.transform.r_free else []])
    best = maximize(objective, x0, cfg)
    logger.debug('margin %d: loglik=%.6f converged=%s', j, best.loglik, best.converged)
    return MarginFit(objective.margin(best.x), best.loglik, best.converged, best.iterations)


def tie_margins(margins, layout):
    """Average the step-1 margins over whatever the layout ties."""
    first, second = margins
    if layout.tie is TieMode.NONE:
        return first, second
    beta = (first.beta + second.beta) / 2.0
    if layout.tie is TieMode.BETA:
        return replace(first, beta=beta), replace(second, beta=beta)
    raw = (first.sieve.raw + second.sieve.raw) / 2.0
    sieve = BernsteinSieve(layout.degree, layout.t_lo, layout.t_hi, raw)
    transform = first.transform
    if transform.r_free:
        transform = transform.with_r(math.sqrt(first.transform.r * second.transform.r))
    margin = MarginModel(beta, transform, sieve)
    return margin, margin


def fit_dependence(data, margins, cfg, layout=None):
    """Copula parameters maximizing the joint likelihood with the margins fixed."""
    layout = layout or build_layout(data, cfg)
    likelihood = JointLikelihood(data, layout)
    template = encode_params(margins, CopulaParams(0.5, 1.0), layout).values
    a, k = layout.alpha_index, layout.blocks['kappa'].start

    def objective(theta):
        x = template.copy()
        x[a], x[k] = theta
        return likelihood(x)

    starts = [np.array([special.logit(alpha), math.log(kappa)]) for alpha, kappa in product(START_ALPHAS, START_KAPPAS)]
    start = max(starts, key=objective)
    best = maximize(objective, start, cfg)
    x = template.copy()
    x[a], x[k] = best.x
    copula = decode_params(ParamVector(x, layout)).copula
    if best.x[0] >= BOUNDARY_LOGIT:
        logger.warning('dependence: alpha at its upper bound (%.10f), kappa=%.4f', copula.alpha, copula.kappa)
    logger.debug('dependence: alpha=%.4f kappa=%.4f loglik=%.6f', copula.alpha, copula.kappa, best.loglik)
    return copula


def invert_information(information, drop=()):
    """
    Inverse of a symmetric information matrix by an LDL' solve.

    Coordinates in `drop` are left out of the inversion and get zero variance.
    If the plain solve fails a ridge of 1e-8 * mean diagonal is added once.
    Returns (inverse, condition number, ridge applied).
    """
    n = information.shape[0]
    keep = [i for i in range(n) if i not in set(drop)]
    sub = information[np.ix_(keep, keep)]
    condition = float(np.linalg.cond(sub)) if sub.size else 1.0
    inverse, ridge = _solve_symmetric(sub), False
    if inverse is None:
        bump = RIDGE_FACTOR * abs(np.trace(sub)) / max(len(keep), 1)
        inverse, ridge = _solve_symmetric(sub + bump * np.eye(len(keep))), True
        if inverse is None:
            raise SingularInformationError(
                f'observed information is singular (condition number {condition:.3e})',
                condition_number=condition)
        logger.warning('observed information needed a ridge (condition number %.3e)', condition)
    out = np.zeros((n, n))
    out[np.ix_(keep, keep)] = (inverse + inverse.T) / 2.0
    return out, condition, ridge


def _solve_symmetric(matrix):
    if not matrix.size:
        return matrix.copy()
    if not np.all(np.isfinite(matrix)) or np.linalg.cond(matrix) > CONDITION_LIMIT:
        return None
    try:
        inverse = linalg.solve(matrix, np.eye(matrix.shape[0]), assume_a='sym')
    except (linalg.LinAlgError, ValueError):
        return None
    return inverse if np.all(np.isfinite(inverse)) else None


def step_one(data, cfg, layout):
    margins = tie_margins(tuple(fit_margin(data, j, cfg, layout).margin for j in (1, 2)), layout)
    copula = fit_dependence(data, margins, cfg, layout)
    return encode_params(margins, copula, layout)


def default_start(layout):
    """Starting point for a one-step fit: no covariate effects, alpha = 0.8, kappa = 1."""
    values = np.zeros(layout.size)
    for name in ('xi1', 'xi2'):
        values[layout.blocks[name]] = _default_xi(layout.degree)
    values[layout.alpha_index] = special.logit(0.8)
    return ParamVector(values, layout)


def fit_joint(data, cfg=None):
    cfg = cfg or FitConfig.from_settings()
    started = time.perf_counter()
    layout = build_layout(data, cfg)
    likelihood = JointLikelihood(data, layout)
    start = step_one(data, cfg, layout) if cfg.two_step else default_start(layout)
    best = maximize(likelihood, start.values, cfg)
    if best.x[layout.alpha_index] >= BOUNDARY_LOGIT and best.x[layout.alpha_index] != ALPHA_LOGIT_CAP:
        x = best.x.copy()
        x[layout.alpha_index] = ALPHA_LOGIT_CAP
        best = replace(best, x=x, loglik=likelihood(x), hessian=None)
    params = ParamVector(best.x, layout)

    at_boundary = decode_params(params).copula.alpha == 1.0
    information = -(best.hessian if best.hessian is not None else hessian(likelihood, best.x, cfg.diff))
    message = ''
    try:
        inverse, condition, ridge = invert_information(information, drop=[layout.alpha_index] if at_boundary else ())
        jac = _natural_jacobian(params)
        finite = layout.finite_indices
        vcov = jac[:, None] * inverse[np.ix_(finite, finite)] * jac[None, :]
    except SingularInformationError as exc:
        if best.converged:
            raise
        message = str(exc)
        condition, ridge = exc.condition_number, False
        vcov = np.full((len(layout.finite_indices),) * 2, np.nan)
    if not best.converged:
        message = message or 'optimizer stopped before meeting the convergence criteria'

    result = FitResult(
        params=params,
        loglik=best.loglik,
        aic=2.0 * layout.size - 2.0 * best.loglik,
        observed_information=information,
        vcov_finite=vcov,
        converged=best.converged,
        iterations=best.iterations,
        step1_params=start,
        alpha_at_boundary=at_boundary,
        ridge_applied=ridge,
        condition_number=condition,
        data_fingerprint=data.fingerprint(),
        elapsed=time.perf_counter() - started,
        message=message,
    )
    fit_completed.send(sender=FitResult, result=result)
    return result


def _fit_candidate(candidate, data, cfg):
    degree, transforms = candidate
    return fit_joint(data, replace(cfg, degree=degree, transforms=transforms))


def aic_scan(data, degrees, transform_pairs, cfg=None, workers=None):
    """Fit every (degree, transforms) combination; results sorted by AIC."""
    cfg = cfg or FitConfig.from_settings()
    candidates = list(product(degrees, [tuple(pair) for pair in transform_pairs]))
    if not candidates:
        raise LayoutError('nothing to scan')
    fits = map_ordered(partial(_fit_candidate, data=data, cfg=cfg), candidates, workers)
    return sorted(fits, key=lambda fit: fit.aic)
