from dataclasses import replace

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ParseError, ValidationError

from copulas.families import FamilyTag
from core.exceptions import DomainError, InfeasibleError
from core.serializers import parse_document, render_document
from sieve.cli import EXIT_BAD_INPUT
from simulation.experiments import SUITES, default_config, fit_config_for, summary_table
from simulation.serializers import sim_config_from_document

DEFAULT_SEED = 0


def simulation_config(suite, options):
    """SimConfig from --config when given, else the suite defaults; --seed overrides only when passed."""
    seed = options.get('seed')
    if options.get('config'):
        overrides = {} if seed is None else {'seed': seed}
        return sim_config_from_document(parse_document(options['config']), **overrides)
    return default_config(suite, n=options['n'], seed=DEFAULT_SEED if seed is None else seed, tau=options['tau'],
                          family=FamilyTag(options['family']), maf=options['maf'])


class Command(BaseCommand):
    help = 'Run a Monte Carlo experiment suite and write a JSON report.'

    def add_arguments(self, parser):
        parser.add_argument('--suite', required=True, choices=sorted(SUITES))
        parser.add_argument('--out', required=True, help='JSON report')
        parser.add_argument('--config', default=None, help='JSON simulation config; suite defaults otherwise')
        parser.add_argument('--replicates', type=int, default=None)
        # --n, --tau, --family and --maf only shape the suite defaults
        parser.add_argument('--n', type=int, default=500)
        parser.add_argument('--seed', type=int, default=None, help='overrides the seed in the config')
        parser.add_argument('--tau', type=float, default=0.6)
        parser.add_argument('--family', choices=[tag.value for tag in FamilyTag if tag is not FamilyTag.TWO_PARAMETER],
                            default=FamilyTag.CLAYTON.value, help='copula that generates the data')
        parser.add_argument('--maf', type=float, default=0.4)
        parser.add_argument('--effects', default='0.1,0.2,0.3', help='power suite effect sizes')
        parser.add_argument('--degree', type=int, default=None)
        parser.add_argument('--workers', type=int, default=None)

    def handle(self, *args, **options):
        suite = options['suite']
        try:
            sim = simulation_config(suite, options)
        except ValidationError as exc:
            raise CommandError(f'invalid config: {exc.detail}', returncode=EXIT_BAD_INPUT)
        except (ParseError, OSError, DomainError, InfeasibleError) as exc:
            raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)

        fit_cfg = fit_config_for(sim)
        if options['degree']:
            fit_cfg = replace(fit_cfg, degree=options['degree'])
        # each suite keeps its own replicate count unless one is given
        kwargs = {'fit_cfg': fit_cfg, 'workers': options['workers']}
        if options['replicates']:
            kwargs['replicates'] = options['replicates']
        if suite == 'power':
            try:
                kwargs['effects'] = [float(e) for e in options['effects'].split(',') if e.strip()]
            except ValueError:
                raise CommandError('--effects must be comma-separated numbers', returncode=EXIT_BAD_INPUT)

        report = SUITES[suite](sim, **kwargs)
        render_document(report, options['out'])
        self.stdout.write(summary_table(report).to_string(index=False))
        # failed replicates stay in the report
        if report['failures']:
            self.stdout.write(self.style.WARNING(f'{len(report["failures"])} replicate(s) failed or did not converge'))
        self.stdout.write(self.style.SUCCESS(f'report written to {options["out"]}'))
