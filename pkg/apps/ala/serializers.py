"""
Serializers for annotation bundle records.
"""

from rest_framework import serializers


class ExpertLabelField(serializers.ListField):
    child = serializers.JSONField()

    def to_internal_value(self, data):
        data = super().to_internal_value(data)
        if len(data) != 2 or not isinstance(data[0], str) or isinstance(data[1], bool) or not isinstance(data[1], int):
            raise serializers.ValidationError('Expected [annotator_id, class_index].')
        return data[0], data[1]


class RatingField(serializers.ListField):
    child = serializers.FloatField(min_value=-1.0, max_value=1.0)

    def to_internal_value(self, data):
        data = super().to_internal_value(data)
        if len(data) != 2:
            raise serializers.ValidationError('Expected [valence, arousal].')
        return data[0], data[1]


class AnnotationBundleSerializer(serializers.Serializer):
    """
    One JSONL bundle: machine label, expert labels, optional ratings and ER label.
    """
    item_id = serializers.CharField(max_length=128)
    class_count = serializers.IntegerField(min_value=2)
    machine_label = serializers.IntegerField(min_value=0, allow_null=True, required=False, default=None)
    expert_labels = serializers.ListField(child=ExpertLabelField(), required=False, default=list)
    ratings = serializers.DictField(child=RatingField(), required=False, default=dict)
    er_label = serializers.IntegerField(min_value=0, required=False)

    def validate(self, attrs):
        classes = attrs['class_count']
        if attrs.get('machine_label') is not None and attrs['machine_label'] >= classes:
            raise serializers.ValidationError({'machine_label': f"Must be below class_count ({classes})."})
        for annotator, label in attrs.get('expert_labels', []):
            if not 0 <= label < classes:
                raise serializers.ValidationError({'expert_labels': f"Label from '{annotator}' is out of range."})
        if attrs.get('machine_label') is None and not attrs.get('expert_labels'):
            raise serializers.ValidationError({'expert_labels': 'A bundle needs at least one label.'})
        if 'er_label' in attrs and attrs['er_label'] >= classes:
            raise serializers.ValidationError({'er_label': f"Must be below class_count ({classes})."})
        return attrs
