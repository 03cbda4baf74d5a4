import numpy as np
from django.test import SimpleTestCase

from core.exceptions import DegenerateDataError, RangeError
from prediction.surfaces import conditional_survival_given_fellow_progressed, joint_survival, survival_grid
from sieve.estimator import build_layout
from sieve.margins import marginal_survival
from sieve.tests.factories import fit_config, hand_fit, mixed_dataset, params_for

Z1 = np.array([0.5, 1.0])
Z2 = np.array([-0.2, 1.0])


def _fit(alpha=0.7, kappa=1.5):
    data = mixed_dataset()
    layout = build_layout(data, fit_config())
    params = params_for(layout, alpha=alpha, kappa=kappa, beta1=[0.4, -0.2], beta2=[0.1, 0.3],
                        phi2=(0.1, 0.3, 0.9, 2.0))
    return hand_fit(data, params)


class JointSurvivalTests(SimpleTestCase):
    def setUp(self):
        self.fit = _fit()

    def test_origin(self):
        self.assertEqual(joint_survival(self.fit, 0.0, 0.0, Z1, Z2), 1.0)

    def test_reduces_to_a_margin(self):
        s1 = marginal_survival(self.fit.margins[0], 1.3, Z1)
        self.assertAlmostEqual(joint_survival(self.fit, 1.3, 0.0, Z1, Z2), s1, places=14)

    def test_frechet_bounds(self):
        t = np.linspace(0.0, 4.0, 9)
        t1, t2 = np.meshgrid(t, t, indexing='ij')
        s1 = marginal_survival(self.fit.margins[0], t1, Z1)
        s2 = marginal_survival(self.fit.margins[1], t2, Z2)
        joint = joint_survival(self.fit, t1, t2, Z1, Z2)
        self.assertTrue(np.all(joint >= np.maximum(0.0, s1 + s2 - 1.0) - 1e-12))
        self.assertTrue(np.all(joint <= np.minimum(s1, s2) + 1e-12))

    def test_outside_the_sieve_range(self):
        with self.assertRaises(RangeError):
            joint_survival(self.fit, 5.0, 1.0, Z1, Z2)
        with self.assertRaises(RangeError):
            joint_survival(self.fit, 1.0, -0.1, Z1, Z2)


class ConditionalSurvivalTests(SimpleTestCase):
    def setUp(self):
        self.fit = _fit()

    def test_starts_at_one_and_decreases(self):
        s = np.linspace(0.0, 2.5, 11)
        curve = conditional_survival_given_fellow_progressed(self.fit, s, 1.5, Z1, Z2)
        self.assertAlmostEqual(curve[0], 1.0, places=12)
        self.assertTrue(np.all(np.diff(curve) <= 1e-12))

    def test_near_independence(self):
        fit = _fit(alpha=1.0, kappa=1e6)
        value = conditional_survival_given_fellow_progressed(fit, 1.0, 1.5, Z1, Z2)
        s2 = marginal_survival(fit.margins[1], np.array([1.5, 2.5]), Z2)
        self.assertAlmostEqual(value, s2[1] / s2[0], delta=1e-4)

    def test_nothing_to_condition_on_at_time_zero(self):
        with self.assertRaises(DegenerateDataError):
            conditional_survival_given_fellow_progressed(self.fit, 1.0, 0.0, Z1, Z2)

    def test_negative_horizon(self):
        with self.assertRaises(RangeError):
            conditional_survival_given_fellow_progressed(self.fit, -1.0, 1.0, Z1, Z2)


class SurvivalGridTests(SimpleTestCase):
    def setUp(self):
        self.fit = _fit()

    def test_grid_matches_pointwise_values(self):
        grid = survival_grid(self.fit, [2.0, 0.5, 1.0], [3.0, 1.0], Z1, Z2)
        np.testing.assert_array_equal(grid.times1, [0.5, 1.0, 2.0])
        single = survival_grid(self.fit, [1.0], [3.0], Z1, Z2)
        self.assertAlmostEqual(single.values[0, 0], grid.values[1, 1], delta=1e-15)

    def test_long_frame(self):
        frame = survival_grid(self.fit, [0.0, 1.0], [0.0, 2.0, 3.0], Z1, Z2).to_frame()
        self.assertEqual(list(frame.columns), ['t1', 't2', 'value'])
        self.assertEqual(len(frame), 6)
        self.assertEqual(frame['value'].iloc[0], 1.0)
        self.assertEqual(frame[['t1', 't2']].iloc[2].tolist(), [0.0, 3.0])
