"""
Monte Carlo experiment suites.

Each suite runs independent replicates (in parallel when workers > 1), keeps a
per-replicate record including failures, and returns a machine-readable
report: {'suite', 'settings', 'summary': [rows], 'replicates': [records]}.
`summary_table` turns the summary rows into a DataFrame for printing.
"""

import logging
import math
import time
from dataclasses import replace
from functools import partial

import numpy as np
import pandas as pd
from scipy import stats

from association.scoretest import NullFit, score_test
from copulas.families import CopulaFamily, FamilyTag
from core.exceptions import BicopulaError
from core.parallel import map_ordered
from prediction.surfaces import joint_survival
from sieve.estimator import FitConfig, fit_joint
from sieve.params import TieMode

from .generate import Baseline, MarginBaseline, SimConfig, generate_dataset

logger = logging.getLogger(__name__)

Z_CRITICAL = stats.norm.ppf(0.975)
LEVELS = (0.05, 0.01)
TRUTH_LABELS = {'beta[x1]': 'beta_ng1', 'beta[x2]': 'beta_ng2', 'beta[snp]': 'beta_g'}
SURVIVAL_LEVELS = np.linspace(0.9, 0.2, 8)
PROFILE = np.array([6.0, 0.0, 0.0])


def default_config(suite, n=500, seed=0, tau=0.6, family=FamilyTag.CLAYTON, maf=0.4, beta_g=0.0):
    if suite == 'jointsurv':
        baseline = MarginBaseline(Baseline.WEIBULL_PH, scale=0.1, shape=2.0)
    else:
        baseline = MarginBaseline(Baseline.LOGLOGISTIC_PO, scale=1.0, shape=2.0)
    return SimConfig(family=CopulaFamily.from_tau(family, tau), baseline=baseline, beta_g=beta_g, maf=maf,
                     n=n, seed=seed)


def fit_config_for(sim, **overrides):
    transform = sim.baseline.transform
    values = {'transforms': (transform, transform), 'tie': TieMode.ALL}
    values.update(overrides)
    return FitConfig.from_settings(**values)


def _rate(p_values, level):
    return float(np.mean(p_values <= level)) if p_values.size else math.nan


def _failure(replicate, exc):
    logger.warning('replicate %d failed: %s', replicate, exc)
    return {'replicate': replicate, 'converged': False, 'error': f'{type(exc).__name__}: {exc}'}


def _estimation_replicate(replicate, sim, fit_cfg):
    data, truth = generate_dataset(sim, replicate=replicate)
    try:
        fit = fit_joint(data, fit_cfg)
    except BicopulaError as exc:
        return _failure(replicate, exc)
    estimates = {label: float(fit.estimates[label]) for label in TRUTH_LABELS if label in fit.estimates}
    errors = {label: float(fit.standard_errors[label]) for label in estimates}
    estimates['tau'], errors['tau'] = float(fit.tau), float(fit.tau_se)
    return {'replicate': replicate, 'converged': fit.converged, 'error': '', 'estimates': estimates,
            'standard_errors': errors, 'right_censoring_rate': truth.right_censoring_rate}


def estimation_suite(sim, fit_cfg=None, replicates=200, workers=None):
    """Bias, empirical SE, mean estimated SE and 95% coverage per parameter."""
    fit_cfg = fit_cfg or fit_config_for(sim)
    records = map_ordered(partial(_estimation_replicate, sim=sim, fit_cfg=fit_cfg), range(replicates), workers)
    truths = {label: getattr(sim, name) for label, name in TRUTH_LABELS.items()}
    truths['tau'] = sim.tau
    usable = [r for r in records if r['converged']]
    summary = []
    for label, truth in truths.items():
        values = np.array([r['estimates'][label] for r in usable if label in r['estimates']])
        errors = np.array([r['standard_errors'][label] for r in usable if label in r['estimates']])
        if not values.size:
            continue
        summary.append({
            'parameter': label,
            'truth': truth,
            'bias': float(values.mean() - truth),
            'se': float(values.std(ddof=1)) if values.size > 1 else math.nan,
            'see': float(errors.mean()),
            'coverage': float(np.mean(np.abs(values - truth) <= Z_CRITICAL * errors)),
            'replicates': int(values.size),
        })
    return _report('estimation', sim, fit_cfg, records, summary)


def _score_replicate(replicate, sim, fit_cfg):
    data, _ = generate_dataset(sim, replicate=replicate)
    null_data = data.drop_covariate('snp')
    try:
        null = NullFit.create(null_data, fit_cfg)
        result = score_test(null_data, null, data.covariate_column('snp'), snp='snp', diff=fit_cfg.diff)
    except BicopulaError as exc:
        return _failure(replicate, exc)
    return {'replicate': replicate, 'converged': True, 'error': '', 'statistic': result.statistic,
            'p_value': result.p_value}


def _p_values(sim, fit_cfg, replicates, workers):
    records = map_ordered(partial(_score_replicate, sim=sim, fit_cfg=fit_cfg), range(replicates), workers)
    return records, np.array([r['p_value'] for r in records if r['converged']])


def type1_suite(sim, fit_cfg=None, replicates=1000, workers=None):
    """Rejection rates at each level under beta_g = 0, plus a KS test of p-value uniformity."""
    sim = replace(sim, beta_g=0.0)
    fit_cfg = fit_cfg or fit_config_for(sim)
    records, p_values = _p_values(sim, fit_cfg, replicates, workers)
    return _report('type1', sim, fit_cfg, records, type1_summary(p_values))


def type1_summary(p_values):
    p_values = np.asarray(p_values, dtype=float)
    summary = [{'level': level, 'rejection_rate': _rate(p_values, level),
                'replicates': int(p_values.size)} for level in LEVELS]
    # uniformity of the null p-values, not a rejection rate
    if p_values.size:
        summary.append({'level': 'ks-uniform', 'ks_p_value': float(stats.kstest(p_values, 'uniform')[1]),
                        'replicates': int(p_values.size)})
    return summary


def power_suite(sim, effects=(0.1, 0.2, 0.3), fit_cfg=None, replicates=500, workers=None, level=0.05):
    fit_cfg = fit_cfg or fit_config_for(sim)
    records, summary = [], []
    for effect in effects:
        effect_sim = replace(sim, beta_g=float(effect))
        effect_records, p_values = _p_values(effect_sim, fit_cfg, replicates, workers)
        for record in effect_records:
            record['beta_g'] = float(effect)
        records.extend(effect_records)
        summary.append({'beta_g': float(effect), 'power': _rate(p_values, level),
                        'replicates': int(p_values.size)})
    return _report('power', sim, fit_cfg, records, summary)


def _jointsurv_replicate(replicate, sim, fit_cfg):
    data, truth = generate_dataset(sim, replicate=replicate)
    try:
        fit = fit_joint(data, fit_cfg)
    except BicopulaError as exc:
        return _failure(replicate, exc)
    times = sim.baseline.quantile(SURVIVAL_LEVELS, PROFILE @ sim.beta)
    times = np.minimum(times, fit.layout.t_hi)
    t1, t2 = np.meshgrid(times, times, indexing='ij')
    estimated = joint_survival(fit, t1, t2, PROFILE, PROFILE)
    expected = truth.joint_survival(t1, t2, PROFILE, PROFILE)
    return {'replicate': replicate, 'converged': fit.converged, 'error': '',
            'mse': float(np.mean((estimated - expected) ** 2))}


def jointsurv_suite(sim, fit_cfg=None, replicates=100, workers=None):
    """Mean squared error of the fitted joint survival surface against the truth on a fixed grid."""
    fit_cfg = fit_cfg or fit_config_for(sim)
    records = map_ordered(partial(_jointsurv_replicate, sim=sim, fit_cfg=fit_cfg), range(replicates), workers)
    mse = np.array([r['mse'] for r in records if r['converged']])
    summary = [{'mean_mse': float(mse.mean()) if mse.size else math.nan,
                'sd_mse': float(mse.std(ddof=1)) if mse.size > 1 else math.nan,
                'replicates': int(mse.size)}]
    return _report('jointsurv', sim, fit_cfg, records, summary)


def _speed_replicate(replicate, sim, fit_cfg):
    data, _ = generate_dataset(sim, replicate=replicate)
    record = {'replicate': replicate, 'error': ''}
    for name, two_step in (('two_step', True), ('one_step', False)):
        started = time.perf_counter()
        try:
            converged = fit_joint(data, replace(fit_cfg, two_step=two_step)).converged
        except BicopulaError as exc:
            converged = False
            record['error'] = f'{name}: {type(exc).__name__}: {exc}'
        record[f'{name}_seconds'] = time.perf_counter() - started
        record[f'{name}_converged'] = converged
    record['converged'] = record['two_step_converged']
    return record


def speed_suite(sim, fit_cfg=None, replicates=100, workers=None):
    """Convergence failure rate and wall time of the two-step and one-step procedures."""
    fit_cfg = fit_cfg or fit_config_for(sim)
    records = map_ordered(partial(_speed_replicate, sim=sim, fit_cfg=fit_cfg), range(replicates), workers)
    summary = []
    for name in ('two_step', 'one_step'):
        summary.append({
            'procedure': name,
            'failure_rate': float(np.mean([not r[f'{name}_converged'] for r in records])),
            'total_seconds': float(sum(r[f'{name}_seconds'] for r in records)),
            'replicates': len(records),
        })
    return _report('speed', sim, fit_cfg, records, summary)


SUITES = {
    'estimation': estimation_suite,
    'type1': type1_suite,
    'power': power_suite,
    'jointsurv': jointsurv_suite,
    'speed': speed_suite,
}


def _report(suite, sim, fit_cfg, records, summary):
    failures = [r['replicate'] for r in records if not r.get('converged')]
    logger.info('%s suite: %d replicates, %d failed or not converged', suite, len(records), len(failures))
    return {
        'suite': suite,
        'settings': {
            'family': sim.family.tag.value,
            'tau': sim.tau,
            'baseline': sim.baseline.kind.value,
            'n': sim.n,
            'maf': sim.maf,
            'beta_g': sim.beta_g,
            'seed': sim.seed,
            'degree': fit_cfg.degree,
            'tie': fit_cfg.tie.value,
            'transforms': [t.label for t in fit_cfg.transforms],
        },
        'summary': summary,
        'failures': failures,
        'replicates': records,
    }


def summary_table(report):
    return pd.DataFrame(report['summary'])
