"""
Synthetic interval-censored pairs.

Event times come from a copula (sampled by conditional inversion) with Weibull
proportional-hazards or log-logistic proportional-odds margins. Each subject
is assessed at K visits with exponential gaps, shared by both margins, so an
event time t becomes the interval (last visit before t, first visit at or
after t], or (last visit, inf) when t falls after the final visit.

Every replicate draws from its own counter-based stream keyed by
(seed, replicate), so a replicate is reproducible regardless of how many others
run or in which order.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from copulas.families import CopulaFamily, invert_conditional
from core.conf import bicopula_settings
from core.exceptions import DomainError
from sieve.margins import TransformKind, TransformSpec
from sieve.records import Dataset, Group, SubjectRecord

logger = logging.getLogger(__name__)

COVARIATE_NAMES = ('x1', 'x2', 'snp')
SHARED_COVARIATES = frozenset({'x2', 'snp'})
CALIBRATION_STREAM = 2 ** 32 - 1
CALIBRATION_SIZE = 20_000
CALIBRATION_STEPS = 60
UNIT_CLIP = 1e-15


class Baseline(str, Enum):
    LOGLOGISTIC_PO = 'loglogistic-po'
    WEIBULL_PH = 'weibull-ph'


@dataclass(frozen=True)
class MarginBaseline:
    """
    Weibull PH: S(t | z) = exp(-e^eta (lambda t)^k).
    Log-logistic PO: S(t | z) = 1 / (1 + e^eta (lambda t)^k).
    """

    kind: Baseline = Baseline.LOGLOGISTIC_PO
    scale: float = 1.0
    shape: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', Baseline(self.kind))
        if not (self.scale > 0 and self.shape > 0):
            raise DomainError('baseline scale and shape must be positive')

    @property
    def transform(self):
        if self.kind is Baseline.WEIBULL_PH:
            return TransformSpec(TransformKind.PH)
        return TransformSpec(TransformKind.PO)

    def cumulative(self, t):
        return (self.scale * np.asarray(t, dtype=float)) ** self.shape

    def survival(self, t, eta):
        odds = np.exp(eta) * self.cumulative(t)
        if self.kind is Baseline.WEIBULL_PH:
            return np.exp(-odds)
        return 1.0 / (1.0 + odds)

    def quantile(self, s, eta):
        """t with S(t | eta) = s."""
        s = np.asarray(s, dtype=float)
        if self.kind is Baseline.WEIBULL_PH:
            cumulative = -np.log(s) * np.exp(-eta)
        else:
            cumulative = (1.0 / s - 1.0) * np.exp(-eta)
        return cumulative ** (1.0 / self.shape) / self.scale


@dataclass(frozen=True)
class SimConfig:
    family: CopulaFamily
    baseline: MarginBaseline = field(default_factory=MarginBaseline)
    beta_ng1: float = 0.1
    beta_ng2: float = 0.1
    beta_g: float = 0.0
    maf: float = 0.4
    n: int = 500
    assessments: int = None
    mean_gap: float = None
    censoring_target: float = None
    seed: int = 0

    def __post_init__(self):
        if self.assessments is None:
            object.__setattr__(self, 'assessments', int(bicopula_settings.ASSESSMENTS))
        if self.censoring_target is None:
            object.__setattr__(self, 'censoring_target', float(bicopula_settings.RIGHT_CENSORING_TARGET))
        if self.n < 1:
            raise DomainError('n must be at least 1')
        if not 0 < self.maf <= 0.5:
            raise DomainError('minor allele frequency must lie in (0, 0.5]')
        if self.assessments < 1:
            raise DomainError('at least one assessment is needed')
        if not 0 < self.censoring_target < 1:
            raise DomainError('censoring target must lie in (0, 1)')
        if self.mean_gap is not None and not self.mean_gap > 0:
            raise DomainError('mean gap must be positive')

    @property
    def beta(self):
        return np.array([self.beta_ng1, self.beta_ng2, self.beta_g])

    @property
    def tau(self):
        return self.family.kendall_tau()


@dataclass(frozen=True, eq=False)
class SimTruth:
    config: SimConfig
    mean_gap: float
    event_times: np.ndarray
    right_censoring_rate: float

    def marginal_survival(self, t, z):
        return self.config.baseline.survival(t, np.asarray(z, dtype=float) @ self.config.beta)

    def joint_survival(self, t1, t2, z1, z2):
        """P(T1 > t1, T2 > t2 | z1, z2) under the generating model."""
        s1 = np.clip(self.marginal_survival(t1, z1), 0.0, 1.0)
        s2 = np.clip(self.marginal_survival(t2, z2), 0.0, 1.0)
        return self.config.family.cdf(s1, s2)

    def to_dict(self):
        family = self.config.family
        baseline = self.config.baseline
        return {
            'family': family.tag.value,
            'theta': family.theta,
            'alpha': family.params.alpha if family.params else None,
            'kappa': family.params.kappa if family.params else None,
            'tau': self.config.tau,
            'baseline': baseline.kind.value,
            'scale': baseline.scale,
            'shape': baseline.shape,
            'beta': dict(zip(COVARIATE_NAMES, map(float, self.config.beta))),
            'maf': self.config.maf,
            'n': self.config.n,
            'assessments': self.config.assessments,
            'mean_gap': self.mean_gap,
            'censoring_target': self.config.censoring_target,
            'right_censoring_rate': self.right_censoring_rate,
            'seed': self.config.seed,
        }


def stream(seed, replicate=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(replicate)])))


def generate_snp(maf, n, rng):
    """Allele counts 0/1/2 under Hardy-Weinberg proportions."""
    if not 0 < maf <= 0.5:
        raise DomainError('minor allele frequency must lie in (0, 0.5]')
    probabilities = [(1 - maf) ** 2, 2 * maf * (1 - maf), maf ** 2]
    return rng.choice(3, size=n, p=probabilities).astype(float)


def generate_covariates(cfg, rng, n=None):
    """(z1, z2), each (n, 3): x1 ~ N(6, 2^2) per margin, x2 ~ Bernoulli(0.5) and the SNP shared."""
    n = cfg.n if n is None else n
    x1 = rng.normal(6.0, 2.0, size=(n, 2))
    x2 = rng.binomial(1, 0.5, size=n).astype(float)
    snp = generate_snp(cfg.maf, n, rng)
    return (np.column_stack([x1[:, 0], x2, snp]), np.column_stack([x1[:, 1], x2, snp]))


def sample_event_pair(cfg, z1, z2, rng):
    """Event times for covariate rows z1, z2 (one pair per row)."""
    z1 = np.atleast_2d(np.asarray(z1, dtype=float))
    z2 = np.atleast_2d(np.asarray(z2, dtype=float))
    size = z1.shape[0]
    u = np.clip(rng.uniform(size=size), UNIT_CLIP, 1.0 - UNIT_CLIP)
    w = np.clip(rng.uniform(size=size), UNIT_CLIP, 1.0 - UNIT_CLIP)
    v = np.clip(np.atleast_1d(invert_conditional(u, w, cfg.family)), UNIT_CLIP, 1.0 - UNIT_CLIP)
    t1 = cfg.baseline.quantile(u, z1 @ cfg.beta)
    t2 = cfg.baseline.quantile(v, z2 @ cfg.beta)
    return t1, t2


def assessment_times(n, assessments, mean_gap, rng):
    return np.cumsum(rng.exponential(mean_gap, size=(n, assessments)), axis=1)


def bracket(times, visits):
    """(L, R] around each event time from that subject's visit schedule."""
    times = np.asarray(times, dtype=float)
    before = np.sum(visits < times[:, None], axis=1)
    rows = np.arange(times.size)
    k = visits.shape[1]
    left = np.where(before > 0, visits[rows, np.maximum(before - 1, 0)], 0.0)
    right = np.where(before < k, visits[rows, np.minimum(before, k - 1)], np.inf)
    return left, right


def censor_pair(t1, t2, cfg, rng, subject_id='1', z1=None, z2=None, mean_gap=None):
    """Interval-censor one subject's event times into a SubjectRecord."""
    gap = mean_gap or cfg.mean_gap or calibrate_gap(cfg)
    visits = assessment_times(1, cfg.assessments, gap, rng)
    l1, r1 = bracket([t1], visits)
    l2, r2 = bracket([t2], visits)
    z1 = np.zeros(len(COVARIATE_NAMES)) if z1 is None else z1
    z2 = np.zeros(len(COVARIATE_NAMES)) if z2 is None else z2
    return SubjectRecord(str(subject_id), (float(l1[0]), float(l2[0])), (float(r1[0]), float(r2[0])),
                         (np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)), Group.BIVARIATE)


def _censoring_rate(times, visit_scale, log_gap):
    last_visit = np.exp(log_gap) * visit_scale
    return float(np.mean(times > last_visit[:, None]))


@lru_cache(maxsize=64)
def calibrate_gap(cfg):
    """
    Mean gap giving the target share of right-censored margins, by bisection
    on log(gap) over a fixed pilot sample (the same draws at every step).
    """
    rng = stream(cfg.seed, CALIBRATION_STREAM)
    z1, z2 = generate_covariates(cfg, rng, CALIBRATION_SIZE)
    t1, t2 = sample_event_pair(cfg, z1, z2, rng)
    times = np.column_stack([t1, t2])
    # the last visit is gap * (sum of K unit exponentials)
    visit_scale = rng.standard_exponential(size=(CALIBRATION_SIZE, cfg.assessments)).sum(axis=1)
    lo, hi = -20.0, 20.0
    for _ in range(CALIBRATION_STEPS):
        mid = 0.5 * (lo + hi)
        if _censoring_rate(times, visit_scale, mid) > cfg.censoring_target:
            lo = mid
        else:
            hi = mid
    gap = math.exp(0.5 * (lo + hi))
    logger.debug('calibrated mean gap %.6g for %.0f%% right-censoring', gap, 100 * cfg.censoring_target)
    return gap


def generate_dataset(cfg, rng=None, replicate=0):
    rng = rng or stream(cfg.seed, replicate)
    z1, z2 = generate_covariates(cfg, rng)
    t1, t2 = sample_event_pair(cfg, z1, z2, rng)
    gap = cfg.mean_gap or calibrate_gap(cfg)
    visits = assessment_times(cfg.n, cfg.assessments, gap, rng)
    l1, r1 = bracket(t1, visits)
    l2, r2 = bracket(t2, visits)
    data = Dataset(
        ids=tuple(str(i + 1) for i in range(cfg.n)),
        left=np.column_stack([l1, l2]),
        right=np.column_stack([r1, r2]),
        covariates=(z1, z2),
        covariate_names=(COVARIATE_NAMES, COVARIATE_NAMES),
        shared=SHARED_COVARIATES,
    )
    truth = SimTruth(cfg, gap, np.column_stack([t1, t2]), data.right_censoring_rate())
    return data, truth
