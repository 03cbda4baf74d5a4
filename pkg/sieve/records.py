"""
Interval-censored bivariate observations.

Each subject contributes a time interval (L, R] per observed margin; L = 0 means
left-censored and R = inf right-censored. Subjects seen in only one margin carry
NaN in the other margin's slots.
"""

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from core.conf import bicopula_settings
from core.exceptions import DegenerateDataError, DomainError, InvalidRecordError


class Group(str, Enum):
    BIVARIATE = 'biv'
    MARGIN1 = 'm1'
    MARGIN2 = 'm2'

    @property
    def margins(self):
        return {Group.BIVARIATE: (1, 2), Group.MARGIN1: (1,), Group.MARGIN2: (2,)}[self]


_GROUP_CODES = (Group.BIVARIATE, Group.MARGIN1, Group.MARGIN2)


@dataclass(frozen=True, eq=False)
class SubjectRecord:
    id: str
    left: tuple
    right: tuple
    covariates: tuple
    group: Group = Group.BIVARIATE

    def __post_init__(self):
        object.__setattr__(self, 'group', Group(self.group))
        self.validate()

    def validate(self):
        for j in (1, 2):
            lo, hi, z = self.left[j - 1], self.right[j - 1], self.covariates[j - 1]
            if j not in self.group.margins:
                continue
            if lo is None or hi is None or z is None:
                raise InvalidRecordError(f'record {self.id}: margin {j} is incomplete', record_id=self.id)
            if not (math.isfinite(lo) and lo >= 0):
                raise InvalidRecordError(f'record {self.id}: L{j} must be finite and >= 0', record_id=self.id)
            if math.isnan(hi) or not lo < hi:
                raise InvalidRecordError(f'record {self.id}: need L{j} < R{j}', record_id=self.id)
            if not np.all(np.isfinite(z)):
                raise InvalidRecordError(f'record {self.id}: non-finite covariate in margin {j}',
                                         record_id=self.id)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Column-oriented store of subject records.

    `left` and `right` are (n, 2) arrays, `covariates` a pair of (n, p_j) matrices
    named by `covariate_names`. Names listed in `shared` take the same value in
    both margins (written once as zs_<name>).
    """

    ids: tuple
    left: np.ndarray
    right: np.ndarray
    covariates: tuple
    covariate_names: tuple
    groups: np.ndarray = None
    shared: frozenset = field(default_factory=frozenset)
    sieve_margin: float = None

    def __post_init__(self):
        n = len(self.ids)
        if n == 0:
            raise DegenerateDataError('dataset has no records')
        left = np.array(self.left, dtype=float).reshape(n, 2)
        right = np.array(self.right, dtype=float).reshape(n, 2)
        groups = np.zeros(n, dtype=int) if self.groups is None else np.array(self.groups, dtype=int)
        names = tuple(tuple(str(name) for name in block) for block in self.covariate_names)
        matrices = []
        for j in (0, 1):
            z = np.array(self.covariates[j], dtype=float).reshape(n, len(names[j]))
            matrices.append(z)
        if len(set(self.ids)) != n:
            raise DomainError('record ids must be unique')
        if groups.shape != (n,) or np.any((groups < 0) | (groups > 2)):
            raise DomainError('group codes must be 0 (biv), 1 (m1) or 2 (m2)')
        unknown = set(self.shared) - (set(names[0]) & set(names[1]))
        if unknown:
            raise DomainError(f'shared covariates missing from a margin: {sorted(unknown)}')
        for j in (0, 1):
            observed = groups != 2 - j
            z = matrices[j]
            z[~observed] = 0.0
            lo, hi = left[observed, j], right[observed, j]
            valid = np.isfinite(lo) & (lo >= 0) & ~np.isnan(hi) & (lo < hi)
            bad = ~valid | ~np.all(np.isfinite(z[observed]), axis=1)
            if np.any(bad):
                record_id = np.asarray(self.ids, dtype=object)[observed][np.argmax(bad)]
                raise InvalidRecordError(f'record {record_id}: invalid interval or covariates in margin {j + 1}',
                                         record_id=record_id)
            left[~observed, j] = np.nan
            right[~observed, j] = np.nan
            z.setflags(write=False)
        for array in (left, right, groups):
            array.setflags(write=False)
        object.__setattr__(self, 'ids', tuple(str(i) for i in self.ids))
        object.__setattr__(self, 'left', left)
        object.__setattr__(self, 'right', right)
        object.__setattr__(self, 'groups', groups)
        object.__setattr__(self, 'covariates', tuple(matrices))
        object.__setattr__(self, 'covariate_names', names)
        object.__setattr__(self, 'shared', frozenset(self.shared))
        if self.sieve_margin is None:
            object.__setattr__(self, 'sieve_margin', float(bicopula_settings.SIEVE_MARGIN))

    def __len__(self):
        return len(self.ids)

    @property
    def n(self):
        return len(self.ids)

    def observed(self, j):
        """Boolean mask of records observed in margin j (1 or 2)."""
        return self.groups != 3 - j

    @cached_property
    def t_hi(self):
        endpoints = np.concatenate([self.left.ravel(), self.right.ravel()])
        endpoints = endpoints[np.isfinite(endpoints)]
        if endpoints.size == 0 or endpoints.max() <= 0:
            raise DegenerateDataError('no positive finite interval endpoint to anchor the sieve range')
        return float(endpoints.max() * (1.0 + self.sieve_margin))

    def right_censoring_rate(self):
        rates = [np.mean(np.isposinf(self.right[self.observed(j), j - 1])) for j in (1, 2)
                 if np.any(self.observed(j))]
        return float(np.mean(rates))

    def records(self):
        for i, record_id in enumerate(self.ids):
            group = _GROUP_CODES[self.groups[i]]
            left, right, z = [], [], []
            for j in (1, 2):
                if j in group.margins:
                    left.append(float(self.left[i, j - 1]))
                    right.append(float(self.right[i, j - 1]))
                    z.append(self.covariates[j - 1][i].copy())
                else:
                    left.append(None)
                    right.append(None)
                    z.append(None)
            yield SubjectRecord(record_id, tuple(left), tuple(right), tuple(z), group)

    @classmethod
    def from_records(cls, records, covariate_names, shared=(), sieve_margin=None):
        records = list(records)
        n = len(records)
        left = np.full((n, 2), np.nan)
        right = np.full((n, 2), np.nan)
        z = [np.zeros((n, len(covariate_names[0]))), np.zeros((n, len(covariate_names[1])))]
        groups = np.zeros(n, dtype=int)
        for i, record in enumerate(records):
            groups[i] = _GROUP_CODES.index(record.group)
            for j in record.group.margins:
                left[i, j - 1] = record.left[j - 1]
                right[i, j - 1] = record.right[j - 1]
                z[j - 1][i] = record.covariates[j - 1]
        return cls(tuple(r.id for r in records), left, right, tuple(z), covariate_names,
                   groups=groups, shared=frozenset(shared), sieve_margin=sieve_margin)

    def covariate_column(self, name):
        """Values of covariate `name`, taken from whichever margin each record has."""
        values = np.full(self.n, np.nan)
        for j in (2, 1):
            if name in self.covariate_names[j - 1]:
                k = self.covariate_names[j - 1].index(name)
                mask = self.observed(j)
                values[mask] = self.covariates[j - 1][mask, k]
        if np.all(np.isnan(values)):
            raise DomainError(f'no covariate named {name!r}')
        return values

    def drop_covariate(self, name):
        names, matrices = [], []
        for j in (0, 1):
            keep = [k for k, other in enumerate(self.covariate_names[j]) if other != name]
            names.append(tuple(self.covariate_names[j][k] for k in keep))
            matrices.append(self.covariates[j][:, keep])
        if names == list(self.covariate_names):
            raise DomainError(f'no covariate named {name!r}')
        return Dataset(self.ids, self.left, self.right, tuple(matrices), tuple(names),
                       groups=self.groups, shared=self.shared - {name}, sieve_margin=self.sieve_margin)

    def subset(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return Dataset(tuple(np.asarray(self.ids, dtype=object)[mask]), self.left[mask], self.right[mask],
                       tuple(z[mask] for z in self.covariates), self.covariate_names,
                       groups=self.groups[mask], shared=self.shared, sieve_margin=self.sieve_margin)

    def fingerprint(self):
        """SHA-256 over everything that enters the likelihood."""
        digest = hashlib.sha256()
        digest.update('\x1f'.join(self.ids).encode())
        for block in self.covariate_names:
            digest.update(('\x1e' + '\x1f'.join(block)).encode())
        digest.update(('\x1e' + '\x1f'.join(sorted(self.shared))).encode())
        for array in (self.left, self.right, self.groups.astype('<i8'), *self.covariates):
            digest.update(np.ascontiguousarray(array, dtype=array.dtype.newbyteorder('<')).tobytes())
        return digest.hexdigest()
