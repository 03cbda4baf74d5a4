"""Argument helpers shared by the management commands."""

from django.core.management.base import CommandError

from core.conf import bicopula_settings
from core.exceptions import DataFormatError, DomainError
from core.io import read_dataset

from .estimator import FitConfig
from .margins import TransformSpec
from .params import TieMode

EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3


def transform_argument(text):
    try:
        return TransformSpec.parse(text)
    except DomainError as exc:
        raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)


def add_model_arguments(parser):
    parser.add_argument('--copula', choices=['two-param'], default='two-param')
    parser.add_argument('--margin1', default='PO', help='PH, PO, boxcox:<r>, log:<r>, boxcox:free or log:free')
    parser.add_argument('--margin2', default='PO')
    parser.add_argument('--degree', type=int, default=None, help='Bernstein degree (default from settings)')
    parser.add_argument('--tie-margins', choices=[mode.value for mode in TieMode], default=TieMode.NONE.value)
    parser.add_argument('--one-step', action='store_true', help='skip the per-margin warm start')


def fit_config_from_options(options):
    if options['degree'] is not None and options['degree'] < 1:
        raise CommandError('--degree must be at least 1', returncode=EXIT_BAD_INPUT)
    return FitConfig.from_settings(
        degree=options['degree'] or bicopula_settings.DEGREE,
        transforms=(transform_argument(options['margin1']), transform_argument(options['margin2'])),
        tie=TieMode(options['tie_margins']),
        two_step=not options['one_step'],
    )


def load_dataset(path):
    try:
        return read_dataset(path)
    except (DataFormatError, OSError) as exc:
        raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)
