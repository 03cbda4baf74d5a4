import numpy as np
from django.test import SimpleTestCase, tag
from scipy import stats

from copulas.families import CopulaFamily, FamilyTag
from core.exceptions import DomainError
from sieve.records import Group
from simulation.generate import (
    Baseline,
    MarginBaseline,
    SimConfig,
    bracket,
    calibrate_gap,
    censor_pair,
    generate_covariates,
    generate_dataset,
    generate_snp,
    sample_event_pair,
    stream,
)

CLAYTON = CopulaFamily.from_tau(FamilyTag.CLAYTON, 0.6)


def _config(**overrides):
    values = {'family': CLAYTON, 'n': 300, 'seed': 11}
    values.update(overrides)
    return SimConfig(**values)


class BaselineTests(SimpleTestCase):
    def test_quantile_inverts_survival(self):
        for kind in Baseline:
            baseline = MarginBaseline(kind, scale=0.7, shape=1.5)
            t = baseline.quantile(np.array([0.9, 0.5, 0.1]), 0.4)
            np.testing.assert_allclose(baseline.survival(t, 0.4), [0.9, 0.5, 0.1], rtol=1e-12)

    def test_loglogistic_median(self):
        self.assertAlmostEqual(float(MarginBaseline().quantile(0.5, 0.0)), 1.0, places=14)

    def test_validation(self):
        with self.assertRaises(DomainError):
            MarginBaseline(scale=0.0)

    def test_transform_matches_kind(self):
        self.assertEqual(MarginBaseline(Baseline.WEIBULL_PH).transform.kind.value, 'PH')
        self.assertEqual(MarginBaseline().transform.kind.value, 'PO')


class CovariateTests(SimpleTestCase):
    def test_snp_mean_dosage(self):
        snp = generate_snp(0.5, 10_000, stream(1))
        self.assertAlmostEqual(snp.mean(), 1.0, delta=0.02)

    def test_rare_homozygote_frequency(self):
        snp = generate_snp(0.05, 10_000, stream(2))
        self.assertAlmostEqual(np.mean(snp == 2), 0.0025, delta=0.002)

    def test_hardy_weinberg_frequencies(self):
        maf = 0.4
        snp = generate_snp(maf, 10_000, stream(3))
        observed = np.bincount(snp.astype(int), minlength=3)
        expected = 10_000 * np.array([(1 - maf) ** 2, 2 * maf * (1 - maf), maf ** 2])
        self.assertGreater(stats.chisquare(observed, expected)[1], 0.001)

    def test_maf_domain(self):
        with self.assertRaises(DomainError):
            generate_snp(0.0, 10, stream(0))
        with self.assertRaises(DomainError):
            generate_snp(0.6, 10, stream(0))

    def test_covariate_design(self):
        z1, z2 = generate_covariates(_config(), stream(4), n=10_000)
        self.assertEqual(z1.shape, (10_000, 3))
        self.assertAlmostEqual(z1[:, 0].mean(), 6.0, delta=0.1)
        self.assertAlmostEqual(z1[:, 1].mean(), 0.5, delta=0.02)
        np.testing.assert_array_equal(z1[:, 1:], z2[:, 1:])
        self.assertFalse(np.array_equal(z1[:, 0], z2[:, 0]))


class EventTimeTests(SimpleTestCase):
    def test_marginal_median(self):
        cfg = _config(beta_ng1=0.0, beta_ng2=0.0)
        z = np.zeros((100_000, 3))
        t1, t2 = sample_event_pair(cfg, z, z, stream(5))
        self.assertAlmostEqual(np.mean(t1 > 1.0), 0.5, delta=0.01)
        self.assertAlmostEqual(np.mean(t2 > 1.0), 0.5, delta=0.01)

    def test_kendall_tau_of_event_times(self):
        cfg = _config(beta_ng1=0.0, beta_ng2=0.0)
        z = np.zeros((100_000, 3))
        t1, t2 = sample_event_pair(cfg, z, z, stream(6))
        self.assertAlmostEqual(stats.kendalltau(t1, t2)[0], 0.6, delta=0.01)

    def test_covariates_leave_the_copula_alone(self):
        cfg = _config(beta_ng1=1.0, beta_ng2=-0.5, beta_g=0.8)
        z1, z2 = generate_covariates(cfg, stream(7), n=50_000)
        t1, t2 = sample_event_pair(cfg, z1, z2, stream(8))
        u = cfg.baseline.survival(t1, z1 @ cfg.beta)
        v = cfg.baseline.survival(t2, z2 @ cfg.beta)
        self.assertAlmostEqual(stats.kendalltau(u, v)[0], 0.6, delta=0.015)


class CensoringTests(SimpleTestCase):
    def test_bracket(self):
        visits = np.tile([1.0, 2.0, 3.0], (4, 1))
        left, right = bracket([0.5, 2.0, 2.5, 4.0], visits)
        np.testing.assert_array_equal(left, [0.0, 1.0, 2.0, 3.0])
        np.testing.assert_array_equal(right, [1.0, 2.0, 3.0, np.inf])

    def test_intervals_contain_the_event(self):
        data, truth = generate_dataset(_config(), replicate=2)
        t = truth.event_times
        self.assertTrue(np.all(data.left < t))
        self.assertTrue(np.all(t <= data.right))

    def test_replicates_are_reproducible_and_distinct(self):
        cfg = _config()
        first, _ = generate_dataset(cfg, replicate=3)
        again, _ = generate_dataset(cfg, replicate=3)
        other, _ = generate_dataset(cfg, replicate=4)
        self.assertEqual(first.fingerprint(), again.fingerprint())
        self.assertNotEqual(first.fingerprint(), other.fingerprint())

    def test_fixed_gap_skips_calibration(self):
        data, truth = generate_dataset(_config(mean_gap=0.02), replicate=0)
        self.assertEqual(truth.mean_gap, 0.02)
        self.assertGreater(data.right_censoring_rate(), 0.5)

    @tag('slow')
    def test_calibrated_censoring_rate(self):
        cfg = _config(n=10_000)
        data, truth = generate_dataset(cfg, replicate=0)
        self.assertEqual(truth.mean_gap, calibrate_gap(cfg))
        self.assertAlmostEqual(truth.right_censoring_rate, 0.25, delta=0.02)

    def test_truth_document(self):
        _, truth = generate_dataset(_config(n=50, mean_gap=0.3))
        document = truth.to_dict()
        self.assertEqual(document['family'], 'clayton')
        self.assertAlmostEqual(document['tau'], 0.6)
        self.assertEqual(document['beta'], {'x1': 0.1, 'x2': 0.1, 'snp': 0.0})

    def test_joint_survival_truth(self):
        _, truth = generate_dataset(_config(n=50, mean_gap=0.3))
        z = np.array([6.0, 0.0, 0.0])
        self.assertAlmostEqual(float(truth.joint_survival(0.0, 0.0, z, z)), 1.0)
        self.assertAlmostEqual(float(truth.joint_survival(1.0, 0.0, z, z)), float(truth.marginal_survival(1.0, z)))

    def test_censor_single_pair(self):
        cfg = _config(mean_gap=0.3)
        record = censor_pair(0.7, 5.0, cfg, stream(9), subject_id=17)
        self.assertEqual(record.id, '17')
        self.assertLess(record.left[0], 0.7)
        self.assertLessEqual(0.7, record.right[0])
        self.assertLess(record.left[1], 5.0)
        self.assertLessEqual(5.0, record.right[1])
        self.assertEqual(record.group, Group.BIVARIATE)
