"""
Serializers for experiment settings read from config files and CLI flags.
"""

from rest_framework import serializers

from apps.core.exceptions import ConfigError, get_error_message
from apps.datamodel.types import EYE_CHANNEL_GROUPS, MODALITIES
from apps.emert.config import PROTOCOLS
from apps.emert.serializers import CsvListField, ModelConfigSerializer
from .specs import MODULES, SPEC_CONTROLLED, ExperimentSpec

# Keys the command layer consumes before a spec is built
GLOBAL_KEYS = frozenset({'threads', 'executor'})


class ExperimentSpecSerializer(serializers.Serializer):
    """
    Validates experiment-level settings; missing ones keep the
    ExperimentSpec default.
    """
    protocol = serializers.ChoiceField(choices=sorted(PROTOCOLS), required=False)
    modality_mask = CsvListField(required=False)
    module_mask = CsvListField(required=False)
    noise_variance = serializers.FloatField(min_value=0.0, required=False)
    alpha_adv = serializers.FloatField(min_value=0.0, required=False)
    beta_task = serializers.FloatField(min_value=0.0, required=False)
    folds = serializers.IntegerField(min_value=2, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    multitask = serializers.BooleanField(required=False)
    eye_groups = CsvListField(required=False, allow_null=True)

    def validate_modality_mask(self, value):
        unknown = [item for item in value if item not in MODALITIES]
        if unknown:
            raise serializers.ValidationError(f"Unknown modalities {unknown}; use F, E and G.")
        if not value:
            raise serializers.ValidationError('Keep at least one modality.')
        return value

    def validate_module_mask(self, value):
        unknown = [item for item in value if item not in MODULES]
        if unknown:
            raise serializers.ValidationError(f"Unknown modules {unknown}; use MAFD and EMT.")
        return value

    def validate_eye_groups(self, value):
        if value is None:
            return value
        unknown = [item for item in value if item not in EYE_CHANNEL_GROUPS]
        if unknown:
            raise serializers.ValidationError(f"Unknown eye groups {unknown}.")
        return value or None


def build_spec(values: dict, **cli) -> ExperimentSpec:
    """
    Merge config-file values with CLI values (CLI wins, None means unset)
    and validate both layers.

    Keys matching ExperimentSpec fields configure the experiment; the
    remaining keys are model overrides.

    Raises:
        ConfigError: on any invalid or unknown setting
    """
    merged = {key: value for key, value in values.items() if key not in GLOBAL_KEYS}
    merged.update({key: value for key, value in cli.items() if value is not None})

    spec_fields = set(ExperimentSpecSerializer().fields)
    spec_values = {key: value for key, value in merged.items() if key in spec_fields}
    model_values = {key: value for key, value in merged.items() if key not in spec_fields}

    clashing = sorted(set(model_values) & SPEC_CONTROLLED)
    if clashing:
        raise ConfigError(f"{[key.upper() for key in clashing]} are fixed by PROTOCOL and cannot be set directly")

    spec_serializer = ExperimentSpecSerializer(data=spec_values)
    if not spec_serializer.is_valid():
        raise ConfigError(get_error_message(spec_serializer.errors), details=spec_serializer.errors)

    unknown = sorted(set(model_values) - set(ModelConfigSerializer().fields))
    if unknown:
        raise ConfigError(f"unknown settings: {[key.upper() for key in unknown]}")
    model_serializer = ModelConfigSerializer(data=model_values)
    if not model_serializer.is_valid():
        raise ConfigError(get_error_message(model_serializer.errors), details=model_serializer.errors)

    return ExperimentSpec(model_overrides=dict(model_serializer.validated_data), **spec_serializer.validated_data)
