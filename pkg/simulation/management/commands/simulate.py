from functools import partial
from pathlib import Path

import numpy as np
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ParseError, ValidationError

from core.io import write_dataset
from core.parallel import map_ordered
from core.serializers import parse_document, render_document
from sieve.cli import EXIT_BAD_INPUT
from simulation.generate import generate_dataset
from simulation.serializers import sim_config_from_document


def write_replicate(replicate, cfg, out_dir):
    data, truth = generate_dataset(cfg, replicate=replicate)
    write_dataset(data, out_dir / f'data_{replicate}.csv')
    render_document({'replicate': replicate, **truth.to_dict()}, out_dir / f'truth_{replicate}.json')
    return truth.right_censoring_rate


class Command(BaseCommand):
    help = 'Generate interval-censored replicate datasets from a simulation config.'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='JSON simulation config')
        parser.add_argument('--seed', type=int, default=None, help='overrides the seed in the config')
        parser.add_argument('--replicates', type=int, default=1)
        parser.add_argument('--out-dir', required=True)
        parser.add_argument('--workers', type=int, default=None)

    def handle(self, *args, **options):
        overrides = {} if options['seed'] is None else {'seed': options['seed']}
        try:
            cfg = sim_config_from_document(parse_document(options['config']), **overrides)
        except ValidationError as exc:
            raise CommandError(f'invalid config: {exc.detail}', returncode=EXIT_BAD_INPUT)
        except (ParseError, OSError) as exc:
            raise CommandError(f'cannot read config: {exc}', returncode=EXIT_BAD_INPUT)
        if options['replicates'] < 1:
            raise CommandError('--replicates must be at least 1', returncode=EXIT_BAD_INPUT)

        out_dir = Path(options['out_dir'])
        out_dir.mkdir(parents=True, exist_ok=True)
        rates = map_ordered(partial(write_replicate, cfg=cfg, out_dir=out_dir), range(options['replicates']),
                            options['workers'])
        self.stdout.write(
            f'right-censoring {100 * np.mean(rates):.1f}% on average over {len(rates)} replicate(s) '
            f'(target {100 * cfg.censoring_target:.0f}%)')
        self.stdout.write(self.style.SUCCESS(f'wrote {len(rates)} replicate(s) to {out_dir}'))
