from django.test import SimpleTestCase
from rest_framework.exceptions import ValidationError

from copulas.families import FamilyTag
from simulation.generate import Baseline
from simulation.serializers import SimConfigSerializer, sim_config_from_document


class SimConfigSerializerTests(SimpleTestCase):
    def test_valid_document(self):
        cfg = sim_config_from_document({
            'family': 'gumbel', 'tau': 0.4, 'baseline': 'weibull-ph', 'shape': 1.5,
            'beta_g': 0.25, 'maf': 0.2, 'n': 120, 'mean_gap': 0.4,
        }, seed=9)
        self.assertEqual(cfg.family.tag, FamilyTag.GUMBEL)
        self.assertAlmostEqual(cfg.tau, 0.4)
        self.assertEqual(cfg.baseline.kind, Baseline.WEIBULL_PH)
        self.assertEqual(cfg.seed, 9)
        self.assertEqual(cfg.mean_gap, 0.4)
        self.assertEqual(cfg.assessments, 12)

    def test_two_parameter_by_alpha_and_kappa(self):
        cfg = sim_config_from_document({'family': 'two-param', 'alpha': 0.5, 'kappa': 2.0})
        self.assertAlmostEqual(cfg.tau, 1 - 2 * 0.5 * 2.0 / 5.0)

    def test_infeasible_tau(self):
        serializer = SimConfigSerializer(data={'family': 'amh', 'tau': 0.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn('tau', serializer.errors)

    def test_needs_a_strength(self):
        serializer = SimConfigSerializer(data={'family': 'frank'})
        self.assertFalse(serializer.is_valid())
        self.assertIn('theta', serializer.errors)

    def test_zero_maf(self):
        with self.assertRaises(ValidationError):
            sim_config_from_document({'family': 'clayton', 'tau': 0.3, 'maf': 0.0})
