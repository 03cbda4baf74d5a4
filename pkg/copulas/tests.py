import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from core.exceptions import DomainError, InfeasibleError
from copulas.families import (
    CopulaFamily,
    CopulaParams,
    FamilyTag,
    clayton_cdf,
    conditional_cdf_given_u,
    copula_cdf,
    invert_conditional,
    kendall_tau,
    rectangle_mass,
    solve_kappa_for_tau,
)


def _direct_two_parameter(u, v, alpha, kappa):
    a = (u ** (-1 / kappa) - 1) ** (1 / alpha)
    b = (v ** (-1 / kappa) - 1) ** (1 / alpha)
    return (1 + (a + b) ** alpha) ** (-kappa)


def _sample_pairs(family, n, seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=n)
    w = rng.uniform(size=n)
    return u, invert_conditional(u, w, family)


class CopulaParamsTests(SimpleTestCase):
    def test_rejects_alpha_outside_unit_interval(self):
        with self.assertRaises(DomainError):
            CopulaParams(alpha=1.2, kappa=1.0)
        with self.assertRaises(DomainError):
            CopulaParams(alpha=0.0, kappa=1.0)

    def test_rejects_nonpositive_kappa(self):
        with self.assertRaises(DomainError):
            CopulaParams(alpha=0.5, kappa=0.0)

    def test_family_theta_domains(self):
        with self.assertRaises(DomainError):
            CopulaFamily(FamilyTag.GUMBEL, theta=0.5)
        with self.assertRaises(DomainError):
            CopulaFamily(FamilyTag.FRANK, theta=0.0)
        with self.assertRaises(DomainError):
            CopulaFamily(FamilyTag.AMH, theta=1.0)
        CopulaFamily(FamilyTag.AMH, theta=-1.0)


class CopulaCdfTests(SimpleTestCase):
    def test_clayton_special_case_value(self):
        self.assertAlmostEqual(copula_cdf(0.5, 0.5, CopulaParams(1.0, 1.0)), 1 / 3, places=14)

    def test_exact_boundaries(self):
        p = CopulaParams(0.3, 0.2)
        self.assertEqual(copula_cdf(0.7, 0.0, p), 0.0)
        self.assertEqual(copula_cdf(0.0, 0.4, p), 0.0)
        self.assertEqual(copula_cdf(0.7, 1.0, p), 0.7)
        self.assertEqual(copula_cdf(1.0, 0.25, p), 0.25)

    def test_matches_direct_formula(self):
        expected = _direct_two_parameter(0.3, 0.8, 0.5, 2.0)
        self.assertAlmostEqual(copula_cdf(0.3, 0.8, CopulaParams(0.5, 2.0)), expected, places=13)
        self.assertAlmostEqual(expected, 0.297265, places=5)

    def test_no_overflow_near_zero(self):
        value = copula_cdf(1e-300, 0.5, CopulaParams(0.2, 0.01))
        self.assertTrue(np.isfinite(value))
        self.assertGreaterEqual(value, 0.0)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            copula_cdf(1.1, 0.5, CopulaParams(0.5, 1.0))
        with self.assertRaises(DomainError):
            copula_cdf(np.nan, 0.5, CopulaParams(0.5, 1.0))

    def test_frechet_bounds_on_grid(self):
        rng = np.random.default_rng(7)
        grid = np.linspace(0.0, 1.0, 50)
        u, v = np.meshgrid(grid, grid)
        lower = np.maximum(0.0, u + v - 1.0)
        upper = np.minimum(u, v)
        for _ in range(100):
            p = CopulaParams(rng.uniform(0.05, 1.0), rng.uniform(0.05, 20.0))
            c = copula_cdf(u, v, p)
            self.assertTrue(np.all(c >= lower - 1e-15))
            self.assertTrue(np.all(c <= upper + 1e-15))

    def test_clayton_reduction(self):
        grid = np.linspace(0.01, 0.99, 40)
        u, v = np.meshgrid(grid, grid)
        for kappa in (0.1, 0.5, 1.0, 4.0):
            gap = np.abs(copula_cdf(u, v, CopulaParams(1.0, kappa)) - clayton_cdf(u, v, 1 / kappa))
            self.assertLess(gap.max(), 1e-12)

    def test_gumbel_limit(self):
        alpha = 0.6
        grid = np.linspace(0.02, 0.98, 25)
        u, v = np.meshgrid(grid, grid)
        gumbel = np.exp(-((-np.log(u)) ** (1 / alpha) + (-np.log(v)) ** (1 / alpha)) ** alpha)
        gaps = [np.abs(copula_cdf(u, v, CopulaParams(alpha, kappa)) - gumbel).max()
                for kappa in (1e3, 1e4, 1e5)]
        self.assertGreater(gaps[0], gaps[1])
        self.assertGreater(gaps[1], gaps[2])
        self.assertLess(gaps[2], 1e-3)


class ClaytonCdfTests(SimpleTestCase):
    def test_values(self):
        self.assertAlmostEqual(clayton_cdf(0.5, 0.5, 1.0), 1 / 3, places=14)
        self.assertEqual(clayton_cdf(0.42, 1.0, 3.0), 0.42)
        expected = (0.3 ** -2 + 0.8 ** -2 - 1) ** -0.5
        self.assertAlmostEqual(clayton_cdf(0.3, 0.8, 2.0), expected, places=14)
        self.assertAlmostEqual(expected, 0.29268, places=5)

    def test_invalid_theta(self):
        with self.assertRaises(DomainError):
            clayton_cdf(0.3, 0.3, -1.0)


class KendallTauTests(SimpleTestCase):
    def test_plug_in_values(self):
        self.assertAlmostEqual(kendall_tau(CopulaParams(1.0, 1.0)), 1 / 3)
        self.assertAlmostEqual(kendall_tau(CopulaParams(0.5, 0.5)), 0.75)
        self.assertAlmostEqual(kendall_tau(CopulaParams(0.9, 1.0)), 0.40)

    def test_solve_kappa_for_tau(self):
        self.assertAlmostEqual(solve_kappa_for_tau(1.0, 1 / 3), 1.0)
        self.assertAlmostEqual(solve_kappa_for_tau(1.0, 0.6), 1 / 3)
        kappa = solve_kappa_for_tau(0.5, 0.8)
        self.assertAlmostEqual(kappa, 1 / 3)
        self.assertAlmostEqual(kendall_tau(CopulaParams(0.5, kappa)), 0.8)

    def test_solve_kappa_infeasible(self):
        with self.assertRaises(InfeasibleError):
            solve_kappa_for_tau(0.5, 0.3)

    def test_family_from_tau_round_trip(self):
        for tag, tau in ((FamilyTag.CLAYTON, 0.6), (FamilyTag.GUMBEL, 0.6), (FamilyTag.FRANK, 0.6),
                         (FamilyTag.JOE, 0.6), (FamilyTag.AMH, 0.2), (FamilyTag.FRANK, -0.3)):
            with self.subTest(tag=tag, tau=tau):
                family = CopulaFamily.from_tau(tag, tau)
                self.assertAlmostEqual(family.kendall_tau(), tau, places=8)

    def test_amh_tau_ceiling(self):
        with self.assertRaises(InfeasibleError):
            CopulaFamily.from_tau(FamilyTag.AMH, 0.5)

    def test_tau_matches_empirical_concordance(self):
        family = CopulaFamily.two_parameter(0.7, 2.0)
        u, v = _sample_pairs(family, 100_000, seed=11)
        empirical = stats.kendalltau(u, v)[0]
        self.assertLess(abs(empirical - family.kendall_tau()), 0.01)


class ConditionalTests(SimpleTestCase):
    def test_boundaries(self):
        clayton = CopulaFamily(FamilyTag.CLAYTON, theta=1.0)
        self.assertEqual(conditional_cdf_given_u(0.5, 1.0, clayton), 1.0)
        self.assertEqual(conditional_cdf_given_u(0.5, 0.0, CopulaParams(0.4, 2.0)), 0.0)

    def test_clayton_closed_form(self):
        clayton = CopulaFamily(FamilyTag.CLAYTON, theta=2.0)
        self.assertAlmostEqual(conditional_cdf_given_u(0.5, 0.5, clayton), 8 * 7 ** -1.5, places=12)

    def test_finite_difference_matches_closed_form(self):
        v = np.linspace(0.05, 0.95, 19)
        analytic = conditional_cdf_given_u(0.35, v, CopulaFamily(FamilyTag.CLAYTON, theta=2.0))
        numeric = conditional_cdf_given_u(0.35, v, CopulaParams(1.0, 0.5))
        np.testing.assert_allclose(numeric, analytic, atol=1e-6)

    def test_nondecreasing_in_v(self):
        v = np.linspace(0.0, 1.0, 401)
        for family in (CopulaFamily(FamilyTag.JOE, theta=3.0), CopulaFamily(FamilyTag.FRANK, theta=5.0),
                       CopulaFamily(FamilyTag.AMH, theta=0.7), CopulaFamily.two_parameter(0.5, 1.5)):
            with self.subTest(tag=family.tag):
                self.assertTrue(np.all(np.diff(conditional_cdf_given_u(0.4, v, family)) >= -1e-9))

    def test_rejects_edge_u(self):
        with self.assertRaises(DomainError):
            conditional_cdf_given_u(0.0, 0.5, CopulaParams(0.5, 1.0))

    def test_invert_round_trip(self):
        for family in (CopulaParams(0.6, 1.2), CopulaFamily(FamilyTag.JOE, theta=2.5),
                       CopulaFamily(FamilyTag.GUMBEL, theta=2.0)):
            w = conditional_cdf_given_u(0.5, 0.7, family)
            self.assertAlmostEqual(invert_conditional(0.5, w, family), 0.7, delta=1e-9)

    def test_invert_clayton_residual(self):
        clayton = CopulaFamily(FamilyTag.CLAYTON, theta=1.0)
        v = invert_conditional(0.3, 0.5, clayton)
        self.assertLess(abs(conditional_cdf_given_u(0.3, v, clayton) - 0.5), 1e-9)

    def test_invert_small_w(self):
        v = invert_conditional(0.5, 1e-14, CopulaParams(0.8, 1.0))
        self.assertLess(v, 1e-6)


class RectangleMassTests(SimpleTestCase):
    def test_total_and_degenerate_mass(self):
        p = CopulaParams(0.4, 3.0)
        self.assertAlmostEqual(rectangle_mass(1.0, 0.0, 1.0, 0.0, p), 1.0, places=14)
        self.assertEqual(rectangle_mass(0.6, 0.6, 0.9, 0.2, p), 0.0)

    def test_ordering_violation(self):
        with self.assertRaises(DomainError):
            rectangle_mass(0.2, 0.6, 0.9, 0.2, CopulaParams(0.4, 3.0))

    def test_two_increasing(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            p = CopulaParams(rng.uniform(0.01, 1.0), rng.uniform(0.01, 50.0))
            u = np.sort(rng.uniform(size=2))[::-1]
            v = np.sort(rng.uniform(size=2))[::-1]
            self.assertGreaterEqual(rectangle_mass(u[0], u[1], v[0], v[1], p), 0.0)

    def test_matches_sampled_frequency(self):
        p = CopulaParams(0.7, 2.0)
        n = 200_000
        u, v = _sample_pairs(p, n, seed=5)
        for (u1, u2, v1, v2) in ((0.8, 0.3, 0.9, 0.4), (0.5, 0.1, 0.6, 0.2), (0.95, 0.6, 0.4, 0.05)):
            mass = rectangle_mass(u1, u2, v1, v2, p)
            freq = np.mean((u <= u1) & (u > u2) & (v <= v1) & (v > v2))
            se = np.sqrt(mass * (1 - mass) / n)
            self.assertLess(abs(freq - mass), 4 * se + 1e-4)
