"""Small datasets and hand-built fits for tests that should not run the optimizer."""

import numpy as np

from copulas.families import CopulaFamily, CopulaParams, FamilyTag
from sieve.estimator import FitConfig, FitResult, build_layout, default_start
from sieve.margins import BernsteinSieve, MarginModel, TransformKind, TransformSpec
from sieve.params import ParamVector, encode_params
from sieve.records import Dataset
from simulation.generate import SimConfig, generate_dataset

PO = TransformSpec(TransformKind.PO)
PH = TransformSpec(TransformKind.PH)


def simulated_dataset(n=200, tau=0.6, seed=1, replicate=0, **overrides):
    cfg = SimConfig(family=CopulaFamily.from_tau(FamilyTag.CLAYTON, tau), n=n, seed=seed, **overrides)
    data, _ = generate_dataset(cfg, replicate=replicate)
    return data


def mixed_dataset():
    """Six records: four bivariate, one seen in margin 1 only, one in margin 2 only."""
    left = [[0.0, 0.5], [1.0, 0.0], [0.2, 1.5], [2.0, 2.5], [0.4, np.nan], [np.nan, 0.0]]
    right = [[0.8, 1.2], [np.inf, 0.6], [1.1, np.inf], [3.0, 4.0], [1.9, np.nan], [np.nan, 0.9]]
    z = np.array([[1.0, 0.0], [0.5, 1.0], [-0.3, 1.0], [0.2, 0.0], [1.4, 1.0], [0.0, 0.0]])
    return Dataset(
        ids=('a', 'b', 'c', 'd', 'e', 'f'),
        left=left,
        right=right,
        covariates=(z, z.copy()),
        covariate_names=(('x1', 'x2'), ('x1', 'x2')),
        groups=[0, 0, 0, 0, 1, 2],
        shared=frozenset({'x2'}),
    )


def fit_config(**overrides):
    values = {'degree': 3, 'transforms': (PO, PO)}
    values.update(overrides)
    return FitConfig(**values)


def margin_for(layout, j, beta=None, phi=(0.05, 0.6, 1.4, 3.0)):
    transform = layout.transforms[j - 1]
    beta = np.zeros(len(layout.covariates[j - 1])) if beta is None else beta
    sieve = BernsteinSieve.from_phi(layout.degree, layout.t_lo, layout.t_hi, np.asarray(phi, dtype=float))
    return MarginModel(beta, transform, sieve)


def params_for(layout, alpha=0.7, kappa=1.5, beta1=None, beta2=None, phi1=(0.05, 0.6, 1.4, 3.0), phi2=None):
    margins = (margin_for(layout, 1, beta1, phi1), margin_for(layout, 2, beta2, phi2 or phi1))
    return encode_params(margins, CopulaParams(alpha, kappa), layout)


def hand_fit(data, params=None, cfg=None, converged=True, **fields):
    """A FitResult at `params` (default start if omitted) with unit information."""
    cfg = cfg or fit_config()
    layout = params.layout if params is not None else build_layout(data, cfg)
    params = params if params is not None else default_start(layout)
    values = {
        'params': ParamVector(params.values, layout),
        'loglik': -100.0,
        'aic': 200.0 + 2 * layout.size,
        'observed_information': np.eye(layout.size),
        'vcov_finite': np.eye(len(layout.finite_indices)),
        'converged': converged,
        'iterations': 0,
        'step1_params': ParamVector(params.values, layout),
        'condition_number': 1.0,
        'data_fingerprint': data.fingerprint(),
    }
    values.update(fields)
    return FitResult(**values)
