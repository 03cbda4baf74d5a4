import logging

import pandas as pd
from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ParseError, ValidationError

from association.scoretest import NullFit, batch_score_test
from core.exceptions import BicopulaError, DataFormatError, FingerprintMismatchError
from core.io import read_genotypes, write_table
from sieve.cli import (
    EXIT_BAD_INPUT,
    EXIT_NOT_CONVERGED,
    add_model_arguments,
    fit_config_from_options,
    load_dataset,
)
from sieve.serializers import dump_fit, load_fit

logger = logging.getLogger('association')


class Command(BaseCommand):
    help = 'Score-test every SNP in a genotype file against a null model fitted once.'

    def add_arguments(self, parser):
        parser.add_argument('--data', required=True, help='phenotype CSV without the SNPs')
        parser.add_argument('--geno', required=True, help='CSV with an id column and one column per SNP')
        parser.add_argument('--null-fit', default=None, help='saved null fit; fitted here when omitted')
        parser.add_argument('--save-null', default=None, help='write the null fit here when it is fitted')
        parser.add_argument('--out', required=True)
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--margin-specific-g', action='store_true',
                            help='separate SNP effects per margin (df = 2) instead of one shared effect')
        add_model_arguments(parser)

    def handle(self, *args, **options):
        data = load_dataset(options['data'])
        try:
            genotypes = read_genotypes(options['geno'], data.ids)
        except (DataFormatError, OSError) as exc:
            raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)

        if options['null_fit']:
            try:
                # the saved information matrix is reused as is
                null = NullFit.from_fit(load_fit(options['null_fit']))
            except (ParseError, ValidationError, OSError) as exc:
                raise CommandError(f'cannot read null fit: {exc}', returncode=EXIT_BAD_INPUT)
        else:
            try:
                null = NullFit.create(data, fit_config_from_options(options))
            except BicopulaError as exc:
                raise CommandError(f'null fit failed: {exc}', returncode=EXIT_NOT_CONVERGED)
            if options['save_null']:
                dump_fit(null.fit, options['save_null'])

        try:
            results = batch_score_test(data, null, genotypes, margin_specific=options['margin_specific_g'],
                                       workers=options['workers'])
        except FingerprintMismatchError as exc:
            raise CommandError(str(exc), returncode=EXIT_BAD_INPUT)
        except BicopulaError as exc:
            raise CommandError(str(exc), returncode=EXIT_NOT_CONVERGED)

        # one row per SNP in file order; failed SNPs keep their error text
        table = pd.DataFrame(
            [{'snp': r.snp, 'statistic': r.statistic, 'df': r.df, 'p': r.p_value, 'error': r.error}
             for r in results],
            columns=['snp', 'statistic', 'df', 'p', 'error'],
        )
        write_table(table, options['out'])
        failed = sum(not r.ok for r in results)
        message = f'{len(results)} SNPs scored, {failed} failed; results written to {options["out"]}'
        self.stdout.write(self.style.WARNING(message) if failed else self.style.SUCCESS(message))
