"""
CSV readers and writers.

Dataset files have the columns id, L1, R1, L2, R2, an optional group column
(biv, m1 or m2) and covariate columns named z1_<name>, z2_<name> (a covariate
with margin-specific values) or zs_<name> (one value used in both margins).
Right-censoring is written as inf. A margin a record does not have is left
empty. Error messages carry the 1-based line number of the offending row.
"""

import logging

import numpy as np
import pandas as pd

from core.exceptions import DataFormatError, InvalidRecordError
from sieve.records import Dataset, Group

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
INTERVAL_COLUMNS = ['L1', 'R1', 'L2', 'R2']
PREFIXES = {'z1_': (0,), 'z2_': (1,), 'zs_': (0, 1)}
_GROUP_CODES = {group.value: code for code, group in enumerate((Group.BIVARIATE, Group.MARGIN1, Group.MARGIN2))}


def _line(row):
    # header is line 1
    return int(row) + 2


def _read_frame(path):
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataFormatError(f'cannot parse {path}: {exc}') from exc


def _parse_float(cell):
    try:
        return float(cell)
    except ValueError:
        return None


def _numeric(frame, column):
    """Column as floats; empty cells become NaN, anything unparsable is an error."""
    text = frame[column].str.strip()
    # float() rounds correctly, so '%.17g' output reads back bit for bit
    parsed = text.map(_parse_float)
    bad = parsed.isna() & (text != '')
    if bad.any():
        row = int(np.argmax(bad.to_numpy()))
        raise DataFormatError(f'{column}: cannot read {text.iloc[row]!r} as a number', line=_line(row))
    return parsed.to_numpy(dtype=float, na_value=np.nan)


def _covariate_columns(columns):
    names = ([], [])
    sources = ({}, {})
    shared = set()
    for column in columns:
        prefix = column[:3]
        if prefix not in PREFIXES or len(column) == 3:
            raise DataFormatError(f'unknown column {column!r}', line=1)
        name = column[3:]
        for j in PREFIXES[prefix]:
            if name in sources[j]:
                raise DataFormatError(f'covariate {name!r} appears twice for margin {j + 1}', line=1)
            names[j].append(name)
            sources[j][name] = column
        if prefix == 'zs_':
            shared.add(name)
    return names, sources, shared


def read_dataset(path, sieve_margin=None):
    frame = _read_frame(path)
    missing = [column for column in ['id', *INTERVAL_COLUMNS] if column not in frame.columns]
    if missing:
        raise DataFormatError(f'missing required columns {missing}', line=1)
    if frame.empty:
        raise DataFormatError('no records', line=2)
    rest = [c for c in frame.columns if c not in ('id', 'group', *INTERVAL_COLUMNS)]
    names, sources, shared = _covariate_columns(rest)

    ids = frame['id'].str.strip()
    if (ids == '').any():
        raise DataFormatError('empty id', line=_line(np.argmax((ids == '').to_numpy())))
    duplicated = ids.duplicated()
    if duplicated.any():
        row = int(np.argmax(duplicated.to_numpy()))
        raise DataFormatError(f'duplicate id {ids.iloc[row]!r}', line=_line(row))

    if 'group' in frame.columns:
        labels = frame['group'].str.strip().replace('', Group.BIVARIATE.value)
        unknown = ~labels.isin(list(_GROUP_CODES))
        if unknown.any():
            row = int(np.argmax(unknown.to_numpy()))
            raise DataFormatError(f'group must be biv, m1 or m2, got {labels.iloc[row]!r}', line=_line(row))
        groups = labels.map(_GROUP_CODES).to_numpy(dtype=int)
    else:
        groups = np.zeros(len(frame), dtype=int)

    bounds = {column: _numeric(frame, column) for column in INTERVAL_COLUMNS}
    left = np.column_stack([bounds['L1'], bounds['L2']])
    right = np.column_stack([bounds['R1'], bounds['R2']])
    covariates = []
    for j in (0, 1):
        columns = [_numeric(frame, sources[j][name]) for name in names[j]]
        covariates.append(np.column_stack(columns) if columns else np.zeros((len(frame), 0)))

    for row in range(len(frame)):
        group = groups[row]
        for j in (0, 1):
            if group == 2 - j:
                continue
            lo, hi = left[row, j], right[row, j]
            if not (np.isfinite(lo) and lo >= 0):
                raise DataFormatError(f'record {ids.iloc[row]}: L{j + 1} must be a finite number >= 0',
                                      line=_line(row))
            if np.isnan(hi) or not lo < hi:
                raise DataFormatError(f'record {ids.iloc[row]}: need L{j + 1} < R{j + 1}', line=_line(row))
            if not np.all(np.isfinite(covariates[j][row])):
                raise DataFormatError(f'record {ids.iloc[row]}: missing covariate for margin {j + 1}',
                                      line=_line(row))
    try:
        data = Dataset(tuple(ids), left, right, tuple(covariates), (tuple(names[0]), tuple(names[1])),
                       groups=groups, shared=frozenset(shared), sieve_margin=sieve_margin)
    except InvalidRecordError as exc:
        raise DataFormatError(str(exc), line=_line(ids.tolist().index(exc.record_id))) from exc
    logger.debug('read %d records from %s', data.n, path)
    return data


def dataset_frame(data):
    columns = {'id': list(data.ids)}
    for j in (1, 2):
        columns[f'L{j}'] = data.left[:, j - 1]
        columns[f'R{j}'] = data.right[:, j - 1]
    columns = {key: columns[key] for key in ['id', *INTERVAL_COLUMNS]}
    if np.any(data.groups != 0):
        labels = [Group.BIVARIATE.value, Group.MARGIN1.value, Group.MARGIN2.value]
        columns['group'] = [labels[code] for code in data.groups]
    first, second = data.covariate_names
    for name in [*first, *(name for name in second if name not in first)]:
        if name in data.shared:
            columns[f'zs_{name}'] = data.covariate_column(name)
            continue
        for j, names in ((1, first), (2, second)):
            if name in names:
                values = data.covariates[j - 1][:, names.index(name)]
                columns[f'z{j}_{name}'] = np.where(data.observed(j), values, np.nan)
    return pd.DataFrame(columns)


def write_dataset(data, path):
    dataset_frame(data).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_genotypes(path, ids):
    """
    SNP matrix aligned to `ids`: a CSV with an id column and one column per SNP
    holding allele counts 0, 1 or 2; blanks are rejected. Every id must be
    present; extra rows are ignored.
    """
    frame = _read_frame(path)
    if 'id' not in frame.columns:
        raise DataFormatError('genotype file needs an id column', line=1)
    snps = [c for c in frame.columns if c != 'id']
    if not snps:
        raise DataFormatError('genotype file has no SNP columns', line=1)
    frame['id'] = frame['id'].str.strip()
    duplicated = frame['id'].duplicated()
    if duplicated.any():
        row = int(np.argmax(duplicated.to_numpy()))
        raise DataFormatError(f'duplicate id {frame["id"].iloc[row]!r}', line=_line(row))
    values = pd.DataFrame({snp: _numeric(frame, snp) for snp in snps}, index=frame['id'])
    dosage = values.to_numpy()
    invalid = ~np.isin(dosage, (0.0, 1.0, 2.0))
    if invalid.any():
        row, col = (int(k[0]) for k in np.nonzero(invalid))
        value = 'missing' if np.isnan(dosage[row, col]) else f'{float(dosage[row, col]):g}'
        raise DataFormatError(f'{snps[col]}: allele count {value} is not 0, 1 or 2', line=_line(row))
    absent = [i for i in ids if i not in values.index]
    if absent:
        raise DataFormatError(f'no genotypes for {len(absent)} record(s), first {absent[0]!r}')
    return values.loc[list(ids)]


def write_table(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
