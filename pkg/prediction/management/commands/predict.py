import numpy as np
import pandas as pd
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ParseError, ValidationError

from core.exceptions import DegenerateDataError, DomainError
from core.io import write_table
from prediction.surfaces import conditional_survival_given_fellow_progressed, survival_grid
from sieve.cli import EXIT_BAD_INPUT
from sieve.serializers import load_fit


def parse_times(text):
    """'0:10:0.5' (start:stop:step, stop included) or '1,2,5'."""
    try:
        if ':' in text:
            start, stop, step = (float(part) for part in text.split(':'))
            if step <= 0:
                raise ValueError
            # tolerance keeps the stop value when the step does not divide exactly
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(count)
        return np.array([float(part) for part in text.split(',') if part.strip()])
    except ValueError:
        raise CommandError(f'cannot read times from {text!r}', returncode=EXIT_BAD_INPUT)


def parse_profile(text, names):
    """'x1=6,x2=1' -> covariate vector in `names` order; unnamed covariates are 0."""
    values = dict.fromkeys(names, 0.0)
    for item in filter(None, (part.strip() for part in text.split(','))):
        name, _, value = item.partition('=')
        if name not in values:
            raise CommandError(f'unknown covariate {name!r}; expected one of {list(names)}', returncode=EXIT_BAD_INPUT)
        try:
            values[name] = float(value)
        except ValueError:
            raise CommandError(f'bad value for {name!r}', returncode=EXIT_BAD_INPUT)
    return np.array([values[name] for name in names])


class Command(BaseCommand):
    help = 'Joint (or conditional) progression-free probabilities from a saved fit.'

    def add_arguments(self, parser):
        parser.add_argument('--fit', required=True)
        parser.add_argument('--out', required=True, help='CSV in long format')
        parser.add_argument('--times1', default=None, help="'start:stop:step' or comma list")
        parser.add_argument('--times2', default=None)
        parser.add_argument('--z1', default='', help="covariate profile for margin 1, e.g. 'x1=6,snp=2'")
        parser.add_argument('--z2', default='')
        parser.add_argument('--given-progressed-at', type=float, default=None,
                            help='condition on margin 1 having had its event by this time (margin 2 event-free)')
        parser.add_argument('--horizon', default='0:5:0.5', help='additional times for the conditional curve')

    def handle(self, *args, **options):
        try:
            fit = load_fit(options['fit'])
        except (ParseError, ValidationError, OSError) as exc:
            raise CommandError(f'cannot read fit: {exc}', returncode=EXIT_BAD_INPUT)
        z1 = parse_profile(options['z1'], fit.layout.covariates[0])
        z2 = parse_profile(options['z2'], fit.layout.covariates[1])
        try:
            if options['given_progressed_at'] is not None:
                horizon = parse_times(options['horizon'])
                values = conditional_survival_given_fellow_progressed(
                    fit, horizon, options['given_progressed_at'], z1, z2)
                # long format: one row per horizon time
                table = pd.DataFrame({'s': horizon, 'value': np.atleast_1d(values)})
            else:
                if not options['times1'] or not options['times2']:
                    raise CommandError('--times1 and --times2 are required for a joint grid',
                                       returncode=EXIT_BAD_INPUT)
                grid = survival_grid(fit, parse_times(options['times1']), parse_times(options['times2']), z1, z2)
                table = grid.to_frame()
        except (DomainError, DegenerateDataError) as exc:
            raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)
        write_table(table, options['out'])
        self.stdout.write(self.style.SUCCESS(f'{len(table)} rows written to {options["out"]}'))
