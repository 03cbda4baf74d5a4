from rest_framework import serializers

from copulas.families import CopulaFamily, FamilyTag
from core.exceptions import DomainError, InfeasibleError

from .generate import Baseline, MarginBaseline, SimConfig

# Simulation config documents, e.g.
# {"family": "clayton", "tau": 0.6, "baseline": "loglogistic-po", "scale": 1, "shape": 2,
#  "beta_ng1": 0.1, "beta_ng2": 0.1, "beta_g": 0, "maf": 0.4, "n": 500}


class SimConfigSerializer(serializers.Serializer):
    family = serializers.ChoiceField(choices=[tag.value for tag in FamilyTag])
    tau = serializers.FloatField(required=False)  # either tau, or theta / (alpha, kappa)
    theta = serializers.FloatField(required=False)
    alpha = serializers.FloatField(required=False, min_value=0.0, max_value=1.0)
    kappa = serializers.FloatField(required=False, min_value=0.0)
    baseline = serializers.ChoiceField(choices=[kind.value for kind in Baseline], default=Baseline.LOGLOGISTIC_PO.value)
    scale = serializers.FloatField(min_value=0.0, default=1.0)
    shape = serializers.FloatField(min_value=0.0, default=2.0)
    beta_ng1 = serializers.FloatField(default=0.1)
    beta_ng2 = serializers.FloatField(default=0.1)
    beta_g = serializers.FloatField(default=0.0)
    maf = serializers.FloatField(min_value=0.0, max_value=0.5, default=0.4)
    n = serializers.IntegerField(min_value=1, default=500)
    assessments = serializers.IntegerField(min_value=1, required=False)
    mean_gap = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    censoring_target = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    seed = serializers.IntegerField(min_value=0, default=0)

    def validate_maf(self, value):
        if value <= 0:
            raise serializers.ValidationError('MAF must be positive.')
        return value

    def validate(self, attrs):
        tag = FamilyTag(attrs['family'])
        try:
            if 'tau' in attrs:
                family = CopulaFamily.from_tau(tag, attrs['tau'], alpha=attrs.get('alpha', 1.0))
            elif tag is FamilyTag.TWO_PARAMETER:
                if 'alpha' not in attrs or 'kappa' not in attrs:
                    raise serializers.ValidationError({'kappa': 'Give tau, or both alpha and kappa.'})
                family = CopulaFamily.two_parameter(attrs['alpha'], attrs['kappa'])
            else:
                if 'theta' not in attrs:
                    raise serializers.ValidationError({'theta': 'Give tau or theta.'})
                family = CopulaFamily(tag, theta=attrs['theta'])
        except InfeasibleError as exc:
            raise serializers.ValidationError({'tau': str(exc)})
        except DomainError as exc:
            raise serializers.ValidationError({'family': str(exc)})
        # resolved objects ride along in attrs for create()
        attrs['copula'] = family
        try:
            attrs['margin_baseline'] = MarginBaseline(attrs['baseline'], attrs['scale'], attrs['shape'])
        except DomainError as exc:
            raise serializers.ValidationError({'scale': str(exc)})
        return attrs

    def create(self, validated_data):
        # unset optional fields fall back to the SimConfig defaults
        optional = {key: validated_data[key] for key in ('assessments', 'mean_gap', 'censoring_target')
                    if validated_data.get(key) is not None}
        try:
            return SimConfig(
                family=validated_data['copula'],
                baseline=validated_data['margin_baseline'],
                beta_ng1=validated_data['beta_ng1'],
                beta_ng2=validated_data['beta_ng2'],
                beta_g=validated_data['beta_g'],
                maf=validated_data['maf'],
                n=validated_data['n'],
                seed=validated_data['seed'],
                **optional,
            )
        except DomainError as exc:
            raise serializers.ValidationError(str(exc))


def sim_config_from_document(document, **overrides):
    serializer = SimConfigSerializer(data={**document, **overrides})
    serializer.is_valid(raise_exception=True)
    return serializer.save()
