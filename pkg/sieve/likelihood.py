"""
Sieve log-likelihood for interval-censored pairs.

A bivariate record contributes the copula mass of the rectangle
(L1, R1] x (L2, R2] on the survival scale,

    C(S1(L1), S2(L2)) - C(S1(L1), S2(R2)) - C(S1(R1), S2(L2)) + C(S1(R1), S2(R2)),

and a record observed in one margin contributes S(L) - S(R). Probabilities
are floored at PROBABILITY_FLOOR before taking logs.
"""

import math

import numpy as np

from copulas.families import copula_cdf
from core.exceptions import DomainError, LayoutError, NonFiniteError

from .margins import BernsteinSieve, MarginModel, basis_matrix, survival_from_hazard
from .params import ParamVector, decode_params
from .records import Dataset

PROBABILITY_FLOOR = 1e-300


class MarginDesign:
    """Cached basis rows and covariates for the records observed in one margin."""

    def __init__(self, data, j, degree, t_lo, t_hi):
        self.j = j
        self.rows = np.flatnonzero(data.observed(j))
        self.left = data.left[self.rows, j - 1]
        self.right = data.right[self.rows, j - 1]
        self.z = data.covariates[j - 1][self.rows]
        finite = np.concatenate([self.left, self.right[np.isfinite(self.right)]])
        outside = (finite < t_lo) | (finite > t_hi)
        if np.any(outside):
            raise DomainError(f'margin {j}: interval endpoint {finite[outside][0]} outside the sieve range '
                              f'[{t_lo}, {t_hi}]')
        self.left_inner = self.left > t_lo
        self.right_inner = np.isfinite(self.right)
        # L = t_lo gives S = 1 exactly.
        self.left_basis = basis_matrix(self.left[self.left_inner], degree, t_lo, t_hi)
        self.right_basis = basis_matrix(self.right[self.right_inner], degree, t_lo, t_hi)

    def __len__(self):
        return self.rows.size

    def survival(self, margin, offset=0.0):
        """(S(L), S(R)) for every record observed in this margin."""
        phi = margin.sieve.phi
        eta = self.z @ margin.beta + offset
        s_left = np.ones(len(self))
        s_right = np.zeros(len(self))
        s_left[self.left_inner] = survival_from_hazard(
            self.left_basis @ phi, eta[self.left_inner], margin.transform)
        s_right[self.right_inner] = survival_from_hazard(
            self.right_basis @ phi, eta[self.right_inner], margin.transform)
        return s_left, s_right


def _log_probability(p):
    return np.log(np.maximum(p, PROBABILITY_FLOOR))


class JointLikelihood:
    """
    Callable x -> log-likelihood for a fixed dataset and layout.

    Basis matrices are built once here, so repeated evaluation during
    optimization and numerical differentiation only redoes the cheap parts.
    `genotype` is an (n, n_g) matrix of extra covariates whose effects live in
    the layout's g blocks.
    """

    def __init__(self, data, layout, genotype=None):
        if tuple(data.covariate_names) != tuple(layout.covariates):
            raise LayoutError(f'dataset covariates {data.covariate_names} do not match the layout '
                              f'{layout.covariates}')
        self.data = data
        self.layout = layout
        if layout.n_g:
            if genotype is None:
                raise LayoutError('the layout has genetic effects but no genotype matrix was given')
            genotype = np.asarray(genotype, dtype=float).reshape(data.n, -1)
            if genotype.shape[1] != layout.n_g:
                raise LayoutError(f'genotype has {genotype.shape[1]} columns, layout expects {layout.n_g}')
            if not np.all(np.isfinite(genotype)):
                raise NonFiniteError('genotype matrix has missing or non-finite values')
        self.genotype = genotype
        self.designs = tuple(MarginDesign(data, j, layout.degree, layout.t_lo, layout.t_hi) for j in (1, 2))
        self.bivariate = np.flatnonzero(data.groups == 0)

    def _offset(self, design, g_effect):
        if self.genotype is None or not g_effect.size:
            return 0.0
        return self.genotype[design.rows] @ g_effect

    def contributions(self, x):
        """Per-record log-likelihood, in dataset order."""
        vec = x if isinstance(x, ParamVector) else ParamVector(x, self.layout)
        decoded = decode_params(vec)
        n = self.data.n
        s_left = np.full((n, 2), np.nan)
        s_right = np.full((n, 2), np.nan)
        for design, margin, g_effect in zip(self.designs, decoded.margins, decoded.g_effects):
            sl, sr = design.survival(margin, self._offset(design, g_effect))
            s_left[design.rows, design.j - 1] = sl
            s_right[design.rows, design.j - 1] = sr

        out = np.empty(n)
        for j in (1, 2):
            mask = self.data.groups == j
            out[mask] = _log_probability(s_left[mask, j - 1] - s_right[mask, j - 1])
        if self.bivariate.size:
            b = self.bivariate
            copula = decoded.copula
            # equal margin-1 corners give exactly zero
            mass = ((copula_cdf(s_left[b, 0], s_left[b, 1], copula) - copula_cdf(s_right[b, 0], s_left[b, 1], copula))
                    - (copula_cdf(s_left[b, 0], s_right[b, 1], copula)
                       - copula_cdf(s_right[b, 0], s_right[b, 1], copula)))
            out[b] = _log_probability(mass)
        bad = np.isnan(out)
        if np.any(bad):
            record_id = self.data.ids[int(np.argmax(bad))]
            raise NonFiniteError(f'record {record_id}: log-likelihood is not a number')
        return out

    def __call__(self, x):
        return math.fsum(self.contributions(x))


class MarginalLikelihood:
    """Log-likelihood of one margin alone, x = (beta, xi[, log_r])."""

    def __init__(self, data, j, layout):
        self.layout = layout
        self.j = j
        self.design = MarginDesign(data, j, layout.degree, layout.t_lo, layout.t_hi)
        self.p = len(layout.covariates[j - 1])
        self.transform = layout.transforms[j - 1]

    @property
    def size(self):
        return self.p + self.layout.degree + 1 + int(self.transform.r_free)

    def margin(self, x):
        x = np.asarray(x, dtype=float)
        m = self.layout.degree + 1
        transform = self.transform
        if transform.r_free:
            transform = transform.with_r(np.exp(x[self.p + m]))
        sieve = BernsteinSieve(self.layout.degree, self.layout.t_lo, self.layout.t_hi, x[self.p:self.p + m])
        return MarginModel(x[:self.p], transform, sieve)

    def __call__(self, x):
        s_left, s_right = self.design.survival(self.margin(x))
        values = _log_probability(s_left - s_right)
        if np.any(np.isnan(values)):
            raise NonFiniteError(f'margin {self.j}: log-likelihood is not a number')
        return math.fsum(values)


def subject_loglik(record, params):
    """Log-likelihood contribution of a single SubjectRecord."""
    layout = params.layout
    data = Dataset.from_records([record], layout.covariates)
    return float(JointLikelihood(data, layout).contributions(params)[0])


def total_loglik(data, params, genotype=None):
    return JointLikelihood(data, params.layout, genotype)(params)
