"""
Serializers for persisted dataset records.
"""

import numpy as np
from rest_framework import serializers

from .types import COARSE_CLASSES, FINE_CLASSES, coarse_map

ARRAY_FIELDS = {'face': 'face_seq', 'eyemove': 'eyemove_seq', 'fixation': 'fixation_seq'}


class LabelSetSerializer(serializers.Serializer):
    """
    Validates the dual label set of one sample.
    """
    er_coarse = serializers.ChoiceField(choices=COARSE_CLASSES)
    er_fine = serializers.ChoiceField(choices=FINE_CLASSES)
    fer_coarse = serializers.ChoiceField(choices=COARSE_CLASSES)
    fer_fine = serializers.ChoiceField(choices=FINE_CLASSES)
    er_valence = serializers.FloatField(min_value=-1.0, max_value=1.0)
    er_arousal = serializers.FloatField(min_value=-1.0, max_value=1.0)
    fer_valence = serializers.FloatField(min_value=-1.0, max_value=1.0)
    fer_arousal = serializers.FloatField(min_value=-1.0, max_value=1.0)
    fer_intensity = serializers.FloatField(min_value=0.0, max_value=3.0)

    def validate(self, attrs):
        mapping = coarse_map()
        for view in ('er', 'fer'):
            fine = attrs[f'{view}_fine']
            if mapping[fine] != attrs[f'{view}_coarse']:
                raise serializers.ValidationError({
                    f'{view}_coarse': f"Expected '{mapping[fine]}' for {view}_fine '{fine}'."
                })
        return attrs


class SampleRecordSerializer(serializers.Serializer):
    """
    Validates one JSONL dataset record and converts its arrays.

    Feature arrays are flat row-major lists; `shapes` gives each
    array's (frames, channels).
    """
    sample_id = serializers.CharField(max_length=128)
    shapes = serializers.DictField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=2, max_length=2)
    )
    face = serializers.JSONField()
    eyemove = serializers.JSONField()
    fixation = serializers.JSONField()
    labels = LabelSetSerializer()

    def validate(self, attrs):
        shapes = attrs['shapes']
        for key, target in ARRAY_FIELDS.items():
            if key not in shapes:
                raise serializers.ValidationError({'shapes': f"Missing shape for '{key}'."})
            values = attrs.pop(key)
            if not isinstance(values, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
            ):
                raise serializers.ValidationError({key: 'Expected a flat list of numbers.'})
            array = np.asarray(values, dtype=np.float64)
            frames, channels = shapes[key]
            if array.size != frames * channels:
                raise serializers.ValidationError({
                    key: f"Expected {frames * channels} values for shape {shapes[key]}, got {array.size}."
                })
            if not np.all(np.isfinite(array)):
                raise serializers.ValidationError({key: 'Values must be finite.'})
            attrs[target] = array.reshape(frames, channels)
        return attrs
