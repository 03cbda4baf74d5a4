import numpy as np
from django.test import SimpleTestCase

from copulas.families import CopulaParams
from core.exceptions import LayoutError
from sieve.margins import MarginModel, TransformKind, TransformSpec
from sieve.params import (
    ALPHA_LOGIT_CAP,
    ParamLayout,
    ParamVector,
    TieMode,
    decode_alpha,
    decode_params,
    encode_alpha,
    encode_params,
)

from .factories import PO, margin_for, params_for

COVARIATES = (('x1', 'x2'), ('x1', 'x2'))


def _layout(tie=TieMode.NONE, transforms=(PO, PO), **kwargs):
    return ParamLayout(COVARIATES, 3, 0.0, 5.0, transforms, tie, **kwargs)


class ParamLayoutTests(SimpleTestCase):
    def test_sizes(self):
        self.assertEqual(_layout().size, 2 + 2 + 1 + 1 + 4 + 4)
        self.assertEqual(_layout(TieMode.BETA).size, 2 + 1 + 1 + 4 + 4)
        self.assertEqual(_layout(TieMode.ALL).size, 2 + 1 + 1 + 4)

    def test_tied_labels(self):
        self.assertEqual(_layout(TieMode.ALL).labels,
                         ('beta[x1]', 'beta[x2]', 'alpha', 'kappa', 'xi[0]', 'xi[1]', 'xi[2]', 'xi[3]'))
        self.assertEqual(_layout().labels[:4], ('beta1[x1]', 'beta1[x2]', 'beta2[x1]', 'beta2[x2]'))

    def test_free_r_blocks(self):
        free = TransformSpec(TransformKind.BOXCOX, r_free=True)
        layout = _layout(transforms=(free, free))
        self.assertEqual(layout.labels[-2:], ('log_r1', 'log_r2'))
        self.assertEqual(_layout(TieMode.ALL, transforms=(free, free)).labels[-1], 'log_r')
        self.assertIn(layout.blocks['log_r1'].start, layout.finite_indices)

    def test_finite_indices_skip_the_sieve(self):
        layout = _layout()
        self.assertEqual(layout.finite_indices, [0, 1, 2, 3, 4, 5])

    def test_genetic_blocks(self):
        shared = _layout().with_g(1)
        self.assertEqual(shared.size, _layout().size + 1)
        self.assertEqual(shared.g_indices, [4])
        separate = _layout().with_g(1, shared=False)
        self.assertEqual(separate.g_indices, [4, 5])
        self.assertEqual(separate.labels[4:6], ('g1[0]', 'g2[0]'))

    def test_tie_needs_matching_margins(self):
        with self.assertRaises(LayoutError):
            ParamLayout((('x1',), ('x2',)), 3, 0.0, 5.0, (PO, PO), TieMode.BETA)
        with self.assertRaises(LayoutError):
            _layout(TieMode.ALL, transforms=(PO, TransformSpec(TransformKind.PH)))

    def test_embed_into_augmented_layout(self):
        base = _layout()
        values = np.arange(base.size, dtype=float)
        augmented = base.with_g(2)
        embedded = augmented.embed(values, base)
        self.assertEqual(embedded[augmented.g_indices].tolist(), [0.0, 0.0])
        rest = [i for i in range(augmented.size) if i not in augmented.g_indices]
        np.testing.assert_array_equal(embedded[rest], values)

    def test_embed_shape_mismatch(self):
        with self.assertRaises(LayoutError):
            _layout().embed(np.zeros(3), _layout())


class EncodingTests(SimpleTestCase):
    def test_alpha_boundary(self):
        self.assertEqual(encode_alpha(1.0), ALPHA_LOGIT_CAP)
        self.assertEqual(decode_alpha(encode_alpha(1.0)), 1.0)
        self.assertEqual(decode_alpha(ALPHA_LOGIT_CAP + 5.0), 1.0)
        self.assertAlmostEqual(decode_alpha(encode_alpha(0.3)), 0.3, places=14)

    def test_alpha_floor(self):
        self.assertGreater(decode_alpha(-1e4), 0.0)

    def test_round_trip(self):
        layout = _layout()
        params = params_for(layout, alpha=0.65, kappa=2.5, beta1=[0.3, -0.2], beta2=[1.0, 0.1],
                            phi2=(0.1, 0.2, 0.9, 4.0))
        decoded = decode_params(params)
        self.assertAlmostEqual(decoded.copula.alpha, 0.65, places=13)
        self.assertAlmostEqual(decoded.copula.kappa, 2.5, places=13)
        np.testing.assert_allclose(decoded.margins[1].beta, [1.0, 0.1])
        np.testing.assert_allclose(decoded.margins[1].sieve.phi, [0.1, 0.2, 0.9, 4.0], rtol=1e-13)
        again = encode_params(decoded.margins, decoded.copula, layout)
        np.testing.assert_allclose(again.values, params.values, rtol=1e-13, atol=1e-13)

    def test_tied_blocks_must_agree(self):
        layout = _layout(TieMode.BETA)
        margins = (margin_for(layout, 1, beta=[0.1, 0.2]), margin_for(layout, 2, beta=[0.1, 0.3]))
        with self.assertRaises(LayoutError):
            encode_params(margins, CopulaParams(0.5, 1.0), layout)

    def test_free_r_round_trip(self):
        free = TransformSpec(TransformKind.LOG, r=1.0, r_free=True)
        layout = _layout(transforms=(free, free))
        margins = (MarginModel(np.zeros(2), free.with_r(2.5), margin_for(layout, 1).sieve), margin_for(layout, 2))
        decoded = decode_params(encode_params(margins, CopulaParams(0.5, 1.0), layout))
        self.assertAlmostEqual(decoded.margins[0].transform.r, 2.5, places=13)
        self.assertAlmostEqual(decoded.margins[1].transform.r, 1.0, places=13)

    def test_vector_size_check(self):
        with self.assertRaises(LayoutError):
            ParamVector(np.zeros(3), _layout())

    def test_vector_is_read_only(self):
        vec = params_for(_layout())
        with self.assertRaises(ValueError):
            vec.values[0] = 1.0
