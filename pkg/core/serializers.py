import io
from pathlib import Path

import numpy as np
from rest_framework import serializers
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer


# Fields shared by the fit, config and report documents. Documents are plain JSON
# files, read and written with DRF's JSONParser/JSONRenderer rather than over HTTP.


class NumberField(serializers.Field):
    """A float that may be NaN or +-inf (FloatField refuses those)."""

    default_error_messages = {'invalid': 'A number is required.'}

    def to_representation(self, value):
        return float(value)

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid')
        try:
            return float(data)
        except (TypeError, ValueError):
            self.fail('invalid')


class VectorField(serializers.Field):
    default_error_messages = {'invalid': 'Expected a list of numbers.'}

    def to_representation(self, value):
        return [float(v) for v in np.asarray(value, dtype=float).reshape(-1)]

    def to_internal_value(self, data):
        if not isinstance(data, (list, tuple)):
            self.fail('invalid')
        try:
            return np.array([float(v) for v in data], dtype=float)
        except (TypeError, ValueError):
            self.fail('invalid')


class MatrixField(serializers.Field):
    """Row-major matrix stored as {"rows": r, "cols": c, "data": [...]}."""

    default_error_messages = {
        'invalid': 'Expected an object with rows, cols and data.',
        'shape': 'data holds {size} values, rows x cols is {expected}.',
    }

    def to_representation(self, value):
        matrix = np.atleast_2d(np.asarray(value, dtype=float))
        rows, cols = matrix.shape
        return {'rows': rows, 'cols': cols, 'data': [float(v) for v in matrix.ravel()]}

    def to_internal_value(self, data):
        if not isinstance(data, dict) or not {'rows', 'cols', 'data'} <= set(data):
            self.fail('invalid')
        try:
            rows, cols = int(data['rows']), int(data['cols'])
            values = np.array([float(v) for v in data['data']], dtype=float)
        except (TypeError, ValueError):
            self.fail('invalid')
        if values.size != rows * cols:
            self.fail('shape', size=values.size, expected=rows * cols)
        return values.reshape(rows, cols)


def render_document(data, path=None):
    """JSON bytes for `data`, also written to `path` when given."""
    content = JSONRenderer().render(data, renderer_context={'indent': 2})
    if path is not None:
        Path(path).write_bytes(content)
    return content


def parse_document(path):
    return JSONParser().parse(io.BytesIO(Path(path).read_bytes()))