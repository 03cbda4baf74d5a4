"""
Unconstrained parameter vectors and the layout that names their blocks.

Block order: beta1, beta2, g1, g2, alpha, kappa, xi1, xi2, log_r1, log_r2.
Tied blocks (beta2 under tie 'beta' or 'all', xi2 and log_r2 under 'all', g2
when genetic effects are shared) are aliases of the margin-1 block and take no
coordinates of their own.
"""

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import special

from copulas.families import CopulaParams
from core.exceptions import LayoutError

from .margins import BernsteinSieve, MarginModel

ALPHA_CEILING = 1.0 - 1e-10
ALPHA_LOGIT_CAP = float(special.logit(ALPHA_CEILING))
# Box for the optimizer: alpha >= expit(-30), kappa in [e^-30, e^30].
ALPHA_LOGIT_FLOOR = -30.0
LOG_KAPPA_BOUND = 30.0


class TieMode(str, Enum):
    NONE = 'none'
    BETA = 'beta'
    ALL = 'all'


@dataclass(frozen=True)
class ParamLayout:
    covariates: tuple
    degree: int
    t_lo: float
    t_hi: float
    transforms: tuple
    tie: TieMode = TieMode.NONE
    n_g: int = 0
    g_shared: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'tie', TieMode(self.tie))
        object.__setattr__(self, 'covariates', tuple(tuple(block) for block in self.covariates))
        object.__setattr__(self, 'transforms', tuple(self.transforms))
        if self.tie is not TieMode.NONE and self.covariates[0] != self.covariates[1]:
            raise LayoutError('tied margins need the same covariates in both margins')
        if self.tie is TieMode.ALL and self.transforms[0] != self.transforms[1]:
            raise LayoutError("tie 'all' needs the same transformation in both margins")
        if self.degree < 1 or not self.t_lo < self.t_hi or self.n_g < 0:
            raise LayoutError('invalid degree, sieve range or genetic block size')

    @cached_property
    def blocks(self):
        """Block name -> slice into the vector. Aliased blocks share a slice."""
        sizes = [
            ('beta1', len(self.covariates[0]), None),
            ('beta2', len(self.covariates[1]), 'beta1' if self.tie is not TieMode.NONE else None),
            ('g1', self.n_g, None),
            ('g2', self.n_g, 'g1' if self.g_shared else None),
            ('alpha', 1, None),
            ('kappa', 1, None),
            ('xi1', self.degree + 1, None),
            ('xi2', self.degree + 1, 'xi1' if self.tie is TieMode.ALL else None),
        ]
        if self.transforms[0].r_free:
            sizes.append(('log_r1', 1, None))
        if self.transforms[1].r_free:
            sizes.append(('log_r2', 1, 'log_r1' if self.tie is TieMode.ALL else None))
        blocks, position = {}, 0
        for name, size, alias in sizes:
            if alias is not None:
                blocks[name] = blocks[alias]
                continue
            blocks[name] = slice(position, position + size)
            position += size
        return blocks

    @cached_property
    def size(self):
        return max(s.stop for s in self.blocks.values())

    @cached_property
    def labels(self):
        names = [''] * self.size
        tied_beta = self.tie is not TieMode.NONE
        for name, block in self.blocks.items():
            start = block.start
            if name.startswith('beta'):
                margin = int(name[-1]) - 1
                prefix = 'beta' if tied_beta else name
                items = [f'{prefix}[{c}]' for c in self.covariates[margin]]
            elif name.startswith('g'):
                prefix = 'g' if self.g_shared else name
                items = [f'{prefix}[{k}]' for k in range(self.n_g)]
            elif name.startswith('xi'):
                prefix = 'xi' if self.tie is TieMode.ALL else name
                items = [f'{prefix}[{k}]' for k in range(self.degree + 1)]
            elif name.startswith('log_r'):
                items = ['log_r' if self.tie is TieMode.ALL else name]
            else:
                items = [name]
            names[start:start + len(items)] = items
        return tuple(names)

    def indices(self, *names):
        out = []
        for name in names:
            block = self.blocks[name]
            out.extend(i for i in range(block.start, block.stop) if i not in out)
        return out

    @cached_property
    def g_indices(self):
        return self.indices('g1', 'g2')

    @cached_property
    def alpha_index(self):
        return self.blocks['alpha'].start

    @cached_property
    def finite_indices(self):
        """Coordinates of the finite-dimensional parameters: beta, g, alpha, kappa, r."""
        names = ['beta1', 'beta2', 'g1', 'g2', 'alpha', 'kappa']
        names += [name for name in ('log_r1', 'log_r2') if name in self.blocks]
        return sorted(self.indices(*names))

    def with_g(self, n_g, shared=True):
        return replace(self, n_g=n_g, g_shared=shared)

    def embed(self, values, source):
        """Copy `values` laid out by `source` into a zero vector laid out by self."""
        values = np.asarray(values, dtype=float)
        if values.shape != (source.size,):
            raise LayoutError(f'expected {source.size} values, got {values.shape}')
        out = np.zeros(self.size)
        for name, block in source.blocks.items():
            if block.stop == block.start:
                continue
            target = self.blocks.get(name)
            if target is None or target.stop - target.start != block.stop - block.start:
                raise LayoutError(f'block {name} does not fit the target layout')
            out[self.blocks[name]] = values[block]
        return out


@dataclass(frozen=True, eq=False)
class ParamVector:
    values: np.ndarray
    layout: ParamLayout

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != self.layout.size:
            raise LayoutError(f'layout expects {self.layout.size} values, got {values.size}')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return self.values.size

    def block(self, name):
        return self.values[self.layout.blocks[name]]

    def decode(self):
        return decode_params(self)


class DecodedParams(NamedTuple):
    margins: tuple
    copula: CopulaParams
    g_effects: tuple


def decode_alpha(a):
    if a >= ALPHA_LOGIT_CAP:
        return 1.0
    return float(special.expit(max(a, ALPHA_LOGIT_FLOOR)))


def encode_alpha(alpha):
    if alpha >= ALPHA_CEILING:
        return ALPHA_LOGIT_CAP
    return float(special.logit(alpha))


def decode_kappa(log_kappa):
    return float(np.exp(np.clip(log_kappa, -LOG_KAPPA_BOUND, LOG_KAPPA_BOUND)))


def decode_params(vec):
    layout = vec.layout
    margins = []
    for j in (1, 2):
        transform = layout.transforms[j - 1]
        if transform.r_free:
            transform = transform.with_r(np.exp(vec.block(f'log_r{j}')[0]))
        sieve = BernsteinSieve(layout.degree, layout.t_lo, layout.t_hi, vec.block(f'xi{j}'))
        margins.append(MarginModel(vec.block(f'beta{j}'), transform, sieve))
    copula = CopulaParams(decode_alpha(vec.block('alpha')[0]), decode_kappa(vec.block('kappa')[0]))
    return DecodedParams(tuple(margins), copula, (vec.block('g1').copy(), vec.block('g2').copy()))


def encode_params(margins, copula, layout, g_effects=None):
    """
    Inverse of decode_params. Values written to a tied block must agree between
    the two margins.
    """
    values = np.full(layout.size, np.nan)

    def put(name, block_values):
        block = layout.blocks[name]
        block_values = np.asarray(block_values, dtype=float).reshape(-1)
        if block_values.size != block.stop - block.start:
            raise LayoutError(f'block {name} expects {block.stop - block.start} values')
        current = values[block]
        if not np.all(np.isnan(current)) and not np.allclose(current, block_values, rtol=1e-12, atol=0):
            raise LayoutError(f'tied block {name} received different values for the two margins')
        values[block] = block_values

    for j, margin in enumerate(margins, start=1):
        put(f'beta{j}', margin.beta)
        put(f'xi{j}', margin.sieve.raw)
        if layout.transforms[j - 1].r_free:
            put(f'log_r{j}', np.log(margin.transform.r))
    g_effects = g_effects or (np.zeros(layout.n_g), np.zeros(layout.n_g))
    put('g1', g_effects[0])
    put('g2', g_effects[1])
    put('alpha', encode_alpha(copula.alpha))
    put('kappa', np.log(copula.kappa))
    return ParamVector(values, layout)
