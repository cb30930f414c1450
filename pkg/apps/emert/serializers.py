"""
Serializers for model settings read from config files.
"""

from rest_framework import serializers

from apps.datamodel.types import MODALITIES
from .config import ADVERSARIAL_TARGETS, TASK_MODES, ModelConfig


class CsvListField(serializers.Field):
    """Accepts 'F,E' or ['F', 'E'] and yields a tuple of stripped strings."""

    def to_internal_value(self, data):
        if isinstance(data, str):
            items = [item.strip() for item in data.split(',') if item.strip()]
        elif isinstance(data, (list, tuple)):
            items = [str(item).strip() for item in data]
        else:
            raise serializers.ValidationError('Expected a comma-separated string or a list.')
        return tuple(items)

    def to_representation(self, value):
        return ','.join(str(item) for item in value)


class ModelConfigSerializer(serializers.Serializer):
    """
    Validates model overrides; every field is optional and missing ones keep
    the ModelConfig default.
    """
    shared_width = serializers.IntegerField(min_value=1, required=False)
    face_hidden = serializers.IntegerField(min_value=1, required=False)
    eye_hidden = serializers.IntegerField(min_value=1, required=False)
    fixation_hidden = serializers.IntegerField(min_value=1, required=False)
    face_kernel = serializers.IntegerField(min_value=1, required=False)
    layers = serializers.IntegerField(min_value=1, required=False)
    heads = serializers.IntegerField(min_value=1, required=False)
    ff_width = serializers.IntegerField(min_value=1, required=False)
    grl_lambda = serializers.FloatField(min_value=0.0, required=False)
    alpha_adv = serializers.FloatField(min_value=0.0, required=False)
    beta_task = serializers.FloatField(min_value=0.0, required=False)
    huber_delta = serializers.FloatField(required=False)
    batch_size = serializers.IntegerField(min_value=1, required=False)
    learning_rate = serializers.FloatField(min_value=0.0, required=False)
    momentum = serializers.FloatField(min_value=0.0, required=False)
    epochs = serializers.IntegerField(min_value=1, required=False)
    weight_decay = serializers.FloatField(min_value=0.0, required=False)
    grad_clip = serializers.FloatField(required=False, allow_null=True)
    er_task = serializers.ChoiceField(choices=TASK_MODES, required=False)
    fer_task = serializers.ChoiceField(choices=TASK_MODES, required=False)
    use_mafd = serializers.BooleanField(required=False)
    use_emt = serializers.BooleanField(required=False)
    use_er_head = serializers.BooleanField(required=False)
    use_fer_head = serializers.BooleanField(required=False)
    adversarial_target = serializers.ChoiceField(choices=ADVERSARIAL_TARGETS, required=False)
    train_noise_variance = serializers.FloatField(min_value=0.0, required=False)
    modality_mask = CsvListField(required=False)

    def validate_huber_delta(self, value):
        if value <= 0:
            raise serializers.ValidationError('Must be greater than 0.')
        return value

    def validate_modality_mask(self, value):
        unknown = [item for item in value if item not in MODALITIES]
        if unknown:
            raise serializers.ValidationError(f"Unknown modalities {unknown}; use F, E and G.")
        if not value:
            raise serializers.ValidationError('Keep at least one modality.')
        return value

    def validate(self, attrs):
        shared = attrs.get('shared_width', ModelConfig.shared_width)
        heads = attrs.get('heads', ModelConfig.heads)
        if shared % heads:
            raise serializers.ValidationError({'heads': f"shared_width {shared} is not divisible by {heads} heads."})
        return attrs
