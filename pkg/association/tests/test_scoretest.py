import math

import numpy as np
import pandas as pd
from django.dispatch import receiver
from django.test import SimpleTestCase, tag

from association.scoretest import NullFit, ScoreTestResult, batch_score_test, score_test
from core.exceptions import ConvergenceError, DomainError, FingerprintMismatchError
from sieve.params import TieMode
from sieve.signals import fit_completed
from sieve.tests.factories import fit_config, hand_fit, mixed_dataset, simulated_dataset


class ScoreTestShortcutTests(SimpleTestCase):
    def setUp(self):
        self.data = mixed_dataset()
        self.null = NullFit.from_fit(hand_fit(self.data))

    def test_zero_genotype_column(self):
        result = score_test(self.data, self.null, np.zeros(6), snp='rs0')
        self.assertEqual(result, ScoreTestResult('rs0', 0.0, 1, 1.0))
        self.assertTrue(result.ok)

    def test_margin_specific_has_two_degrees_of_freedom(self):
        result = score_test(self.data, self.null, np.zeros(6), margin_specific=True)
        self.assertEqual(result.df, 2)
        self.assertEqual(result.p_value, 1.0)

    def test_fingerprint_mismatch(self):
        other = self.data.subset(self.data.groups == 0)
        with self.assertRaises(FingerprintMismatchError):
            score_test(other, self.null, np.zeros(4))

    def test_unconverged_null(self):
        null = NullFit.from_fit(hand_fit(self.data, converged=False))
        with self.assertRaises(ConvergenceError):
            score_test(self.data, null, np.zeros(6))

    def test_genotype_length(self):
        with self.assertRaises(DomainError):
            score_test(self.data, self.null, np.zeros(5))


class BatchScoreTestTests(SimpleTestCase):
    def setUp(self):
        self.data = mixed_dataset()
        self.null = NullFit.from_fit(hand_fit(self.data))
        self.fits = []

        @receiver(fit_completed, weak=False)
        def count(sender, result, **kwargs):
            self.fits.append(result)

        self.addCleanup(fit_completed.disconnect, count)

    def test_failures_are_isolated_and_order_is_kept(self):
        missing = np.zeros(6)
        missing[3] = np.nan
        genotypes = pd.DataFrame({'rs2': np.zeros(6), 'rs1': missing, 'rs3': np.zeros(6)})
        results = batch_score_test(self.data, self.null, genotypes)
        self.assertEqual([r.snp for r in results], ['rs2', 'rs1', 'rs3'])
        self.assertEqual(results[1].error, 'non-finite')
        self.assertTrue(math.isnan(results[1].p_value))
        self.assertTrue(results[0].ok and results[2].ok)

    def test_null_is_not_refitted(self):
        batch_score_test(self.data, self.null, {'rs1': np.zeros(6), 'rs2': np.zeros(6)})
        self.assertEqual(self.fits, [])


@tag('slow')
class ScoreStatisticTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        full = simulated_dataset(n=200, tau=0.6, seed=5, beta_g=0.3)
        cls.snp = full.covariate_column('snp')
        cls.data = full.drop_covariate('snp')
        cls.null = NullFit.create(cls.data, fit_config(tie=TieMode.ALL))

    def test_statistic_is_a_valid_chi_square(self):
        result = score_test(self.data, self.null, self.snp, snp='snp')
        self.assertTrue(result.ok)
        self.assertGreaterEqual(result.statistic, 0.0)
        self.assertTrue(0.0 <= result.p_value <= 1.0)

    def test_duplicated_snp_gives_identical_results(self):
        results = batch_score_test(self.data, self.null, {'a': self.snp, 'b': self.snp.copy()})
        self.assertEqual(results[0].statistic, results[1].statistic)
        self.assertEqual(results[0].p_value, results[1].p_value)

    def test_rescaled_snp_gives_the_same_statistic(self):
        base = score_test(self.data, self.null, self.snp)
        scaled = score_test(self.data, self.null, 2.5 * self.snp)
        self.assertAlmostEqual(scaled.statistic, base.statistic, delta=1e-4 * max(1.0, base.statistic))

    def test_workers_do_not_change_results(self):
        genotypes = {'a': self.snp, 'b': np.roll(self.snp, 7)}
        serial = batch_score_test(self.data, self.null, genotypes, workers=1)
        parallel = batch_score_test(self.data, self.null, genotypes, workers=2)
        self.assertEqual(serial, parallel)
