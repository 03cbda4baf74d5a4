from django.core.management.base import BaseCommand, CommandError

from core.exceptions import BicopulaError, SingularInformationError
from sieve.cli import (
    EXIT_BAD_INPUT,
    EXIT_NOT_CONVERGED,
    add_model_arguments,
    fit_config_from_options,
    load_dataset,
)
from sieve.estimator import aic_scan, fit_joint
from sieve.serializers import dump_fit


class Command(BaseCommand):
    help = 'Fit the two-parameter copula model with Bernstein sieve margins to an interval-censored CSV.'

    def add_arguments(self, parser):
        parser.add_argument('--data', required=True)
        parser.add_argument('--out', required=True, help='fit document (JSON)')
        add_model_arguments(parser)
        parser.add_argument('--scan-degrees', default='',
                            help='comma-separated degrees; fit each and keep the lowest AIC')
        parser.add_argument('--workers', type=int, default=None)

    def handle(self, *args, **options):
        data = load_dataset(options['data'])
        cfg = fit_config_from_options(options)
        try:
            if options['scan_degrees']:
                degrees = [int(d) for d in options['scan_degrees'].split(',') if d.strip()]
                fits = aic_scan(data, degrees, [cfg.transforms], cfg, workers=options['workers'])
                for fit in fits:
                    self.stdout.write(f'degree={fit.layout.degree} aic={fit.aic:.3f} loglik={fit.loglik:.6f}')
                fit = fits[0]
            else:
                fit = fit_joint(data, cfg)
        # singular information at the optimum counts as a failed fit
        except SingularInformationError as exc:
            raise CommandError(str(exc), returncode=EXIT_NOT_CONVERGED)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)
        except BicopulaError as exc:
            raise CommandError(str(exc), returncode=EXIT_NOT_CONVERGED)

        # written before the convergence check so a failed fit can still be inspected
        dump_fit(fit, options['out'])
        for label, estimate in fit.estimates.items():
            self.stdout.write(f'{label:>16} {estimate: .6f} ({fit.standard_errors[label]:.6f})')
        self.stdout.write(f'{"tau":>16} {fit.tau: .6f} ({fit.tau_se:.6f})')
        if not fit.converged:
            raise CommandError(f'fit did not converge; result written to {options["out"]}',
                               returncode=EXIT_NOT_CONVERGED)
        self.stdout.write(self.style.SUCCESS(f'fit written to {options["out"]}'))
