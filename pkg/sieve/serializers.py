from rest_framework import serializers

from core.exceptions import DomainError, LayoutError
from core.serializers import MatrixField, NumberField, VectorField, parse_document, render_document

from .estimator import FitResult
from .margins import TransformKind, TransformSpec
from .params import ParamLayout, ParamVector, TieMode


class TransformSpecField(serializers.Field):
    def to_representation(self, value):
        return {'kind': value.kind.value, 'r': value.r, 'r_free': value.r_free}

    def to_internal_value(self, data):
        if isinstance(data, str):  # accept the command-line spelling too, e.g. "boxcox:0.5"
            try:
                return TransformSpec.parse(data)
            except DomainError as exc:
                raise serializers.ValidationError(str(exc))
        if not isinstance(data, dict) or 'kind' not in data:
            raise serializers.ValidationError('Expected {"kind", "r", "r_free"} or a string like "PO".')
        try:
            return TransformSpec(TransformKind(data['kind']), float(data.get('r', 1.0)),
                                 bool(data.get('r_free', False)))
        except (DomainError, ValueError, TypeError) as exc:
            raise serializers.ValidationError(str(exc))


class ParamLayoutSerializer(serializers.Serializer):
    covariates1 = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    covariates2 = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    degree = serializers.IntegerField(min_value=1)
    t_lo = serializers.FloatField()
    t_hi = serializers.FloatField()
    transform1 = TransformSpecField()
    transform2 = TransformSpecField()
    tie = serializers.ChoiceField(choices=[mode.value for mode in TieMode])
    n_g = serializers.IntegerField(min_value=0, default=0)
    g_shared = serializers.BooleanField(default=True)

    def to_representation(self, layout: ParamLayout):
        # A layout keeps per-margin values in pairs; the document spells them out.
        return {
            'covariates1': list(layout.covariates[0]),
            'covariates2': list(layout.covariates[1]),
            'degree': layout.degree,
            't_lo': layout.t_lo,
            't_hi': layout.t_hi,
            'transform1': self.fields['transform1'].to_representation(layout.transforms[0]),
            'transform2': self.fields['transform2'].to_representation(layout.transforms[1]),
            'tie': layout.tie.value,
            'n_g': layout.n_g,
            'g_shared': layout.g_shared,
        }

    def validate(self, attrs):
        if not attrs['t_lo'] < attrs['t_hi']:
            raise serializers.ValidationError({'t_hi': 't_hi must exceed t_lo.'})
        return attrs

    def create(self, validated_data):
        try:
            return ParamLayout(
                covariates=(tuple(validated_data['covariates1']), tuple(validated_data['covariates2'])),
                degree=validated_data['degree'],
                t_lo=validated_data['t_lo'],
                t_hi=validated_data['t_hi'],
                transforms=(validated_data['transform1'], validated_data['transform2']),
                tie=validated_data['tie'],
                n_g=validated_data.get('n_g', 0),
                g_shared=validated_data.get('g_shared', True),
            )
        except LayoutError as exc:
            raise serializers.ValidationError(str(exc))


class FitResultSerializer(serializers.Serializer):
    layout = ParamLayoutSerializer()
    params = VectorField()
    step1_params = VectorField()
    loglik = NumberField()
    aic = NumberField()
    observed_information = MatrixField()
    vcov_finite = MatrixField()
    converged = serializers.BooleanField()
    iterations = serializers.IntegerField(min_value=0)
    alpha_at_boundary = serializers.BooleanField(default=False)
    ridge_applied = serializers.BooleanField(default=False)
    condition_number = NumberField(required=False)
    data_fingerprint = serializers.CharField(allow_blank=True, default='')
    elapsed = NumberField(default=0.0)
    message = serializers.CharField(allow_blank=True, default='')
    # Read-only summaries for people reading the file; ignored on load.
    labels = serializers.ListField(child=serializers.CharField(), read_only=True)
    estimates = serializers.DictField(child=NumberField(), read_only=True)
    standard_errors = serializers.DictField(child=NumberField(), read_only=True)
    tau = NumberField(read_only=True)
    tau_se = NumberField(read_only=True)

    def to_representation(self, fit: FitResult):
        return {
            'layout': ParamLayoutSerializer(fit.layout).data,
            'params': self.fields['params'].to_representation(fit.params.values),
            'step1_params': self.fields['step1_params'].to_representation(fit.step1_params.values),
            'loglik': fit.loglik,
            'aic': fit.aic,
            'observed_information': self.fields['observed_information'].to_representation(fit.observed_information),
            'vcov_finite': self.fields['vcov_finite'].to_representation(fit.vcov_finite),
            'converged': fit.converged,
            'iterations': fit.iterations,
            'alpha_at_boundary': fit.alpha_at_boundary,
            'ridge_applied': fit.ridge_applied,
            'condition_number': float(fit.condition_number),
            'data_fingerprint': fit.data_fingerprint,
            'elapsed': fit.elapsed,
            'message': fit.message,
            'labels': list(fit.layout.labels),
            'estimates': {k: float(v) for k, v in fit.estimates.items()},
            'standard_errors': {k: float(v) for k, v in fit.standard_errors.items()},
            'tau': fit.tau,
            'tau_se': fit.tau_se,
        }

    def create(self, validated_data):
        layout = ParamLayoutSerializer().create(validated_data.pop('layout'))
        try:
            params = ParamVector(validated_data.pop('params'), layout)
            step1 = ParamVector(validated_data.pop('step1_params'), layout)
        except LayoutError as exc:
            raise serializers.ValidationError({'params': str(exc)})
        information = validated_data.pop('observed_information')
        if information.shape != (layout.size, layout.size):
            raise serializers.ValidationError({'observed_information': 'shape does not match the layout.'})
        # older documents may lack a condition number
        validated_data.setdefault('condition_number', float('nan'))
        return FitResult(params=params, step1_params=step1, observed_information=information, **validated_data)


def dump_fit(fit, path=None):
    return render_document(FitResultSerializer(fit).data, path)


def load_fit(path):
    serializer = FitResultSerializer(data=parse_document(path))
    serializer.is_valid(raise_exception=True)
    return serializer.save()
