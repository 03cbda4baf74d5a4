"""
Generalized score test for a block of genetic effects.

The model without the block is fitted once (the null fit). For each SNP the
parameter vector is augmented with zero genetic effects, the score of the new
block U_g and the rows of the observed information that involve it are
computed numerically, and

    T = U_g' [J^-1]_gg U_g

is referred to a chi-square with dim(g) degrees of freedom. The null block of
J is taken from the null fit, since it does not change when g = 0.
"""

import logging
import math
import time
from dataclasses import dataclass
from functools import partial

import numpy as np

from core.exceptions import (
    BicopulaError,
    ConvergenceError,
    DomainError,
    FingerprintMismatchError,
    NonFiniteError,
    SingularInformationError,
)
from core.parallel import map_ordered
from sieve.estimator import FitConfig, fit_joint, invert_information
from sieve.likelihood import JointLikelihood
from sieve.numdiff import DiffConfig, gradient, hessian

from .stats import chisq_sf

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NullFit:
    fit: object
    fingerprint: str

    @classmethod
    def create(cls, data, cfg=None):
        fit = fit_joint(data, cfg or FitConfig.from_settings())
        return cls(fit, data.fingerprint())

    @classmethod
    def from_fit(cls, fit):
        return cls(fit, fit.data_fingerprint)

    def check(self, data):
        if data.fingerprint() != self.fingerprint:
            raise FingerprintMismatchError('the null fit was computed on a different dataset')
        if not self.fit.converged:
            raise ConvergenceError('the null fit did not converge; refusing to test against it')


@dataclass(frozen=True)
class ScoreTestResult:
    snp: str
    statistic: float
    df: int
    p_value: float
    error: str = ''

    @property
    def ok(self):
        return not self.error


def _genotype_matrix(g_columns, n):
    g = np.asarray(g_columns, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    if g.ndim != 2 or g.shape[0] != n or g.shape[1] < 1:
        raise DomainError(f'genotype block must have {n} rows and at least one column, got {g.shape}')
    if not np.all(np.isfinite(g)):
        raise NonFiniteError('genotype block has missing or non-finite values')
    return g


def score_test(data, null, g_columns, snp='g', margin_specific=False, diff=None):
    null.check(data)
    g = _genotype_matrix(g_columns, data.n)
    diff = diff or DiffConfig.from_settings()
    base = null.fit.layout
    layout = base.with_g(g.shape[1], shared=not margin_specific)
    df = len(layout.g_indices)
    x = layout.embed(null.fit.params.values, base)
    likelihood = JointLikelihood(data, layout, genotype=g)

    g_idx = layout.g_indices
    score = gradient(likelihood, x, diff, coords=g_idx)
    if not np.any(score):
        return ScoreTestResult(str(snp), 0.0, df, 1.0)

    rest = [i for i in range(layout.size) if i not in g_idx]
    information = np.empty((layout.size, layout.size))
    information[np.ix_(rest, rest)] = null.fit.observed_information
    cross = -hessian(likelihood, x, diff, rows=g_idx)
    information[g_idx, :] = cross
    information[:, g_idx] = cross.T

    drop = [layout.alpha_index] if null.fit.alpha_at_boundary else ()
    inverse, condition, _ = invert_information(information, drop=drop)
    block = inverse[np.ix_(g_idx, g_idx)]
    statistic = max(float(score @ block @ score), 0.0)
    if not math.isfinite(statistic):
        raise SingularInformationError('score statistic is not finite', condition_number=condition)
    return ScoreTestResult(str(snp), statistic, df, chisq_sf(statistic, df))


def _score_one(item, data, null, margin_specific, diff):
    snp, column = item
    df = np.asarray(column).reshape(data.n, -1).shape[1] * (2 if margin_specific else 1)
    try:
        return score_test(data, null, column, snp=snp, margin_specific=margin_specific, diff=diff)
    except SingularInformationError:
        reason = 'singular-information'
    except NonFiniteError:
        reason = 'non-finite'
    except (BicopulaError, ArithmeticError, ValueError) as exc:
        reason = type(exc).__name__
    logger.warning('score test for %s failed: %s', snp, reason)
    return ScoreTestResult(str(snp), math.nan, df, math.nan, error=reason)


def batch_score_test(data, null, genotypes, margin_specific=False, workers=None, diff=None):
    """
    One ScoreTestResult per SNP, in input order. `genotypes` is a DataFrame (or
    mapping) of SNP name -> column aligned to the dataset's records. A failing
    SNP yields a result with `error` set; the batch carries on.
    """
    null.check(data)
    items = [(snp, np.asarray(genotypes[snp], dtype=float)) for snp in genotypes]
    started = time.perf_counter()
    worker = partial(_score_one, data=data, null=null, margin_specific=margin_specific,
                     diff=diff or DiffConfig.from_settings())
    results = map_ordered(worker, items, workers)
    elapsed = time.perf_counter() - started
    failed = sum(not r.ok for r in results)
    logger.info('scored %d SNPs in %.2fs (%.3fs each), %d failed', len(results), elapsed,
                elapsed / max(len(results), 1), failed)
    return results
