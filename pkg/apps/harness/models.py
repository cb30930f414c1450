"""
Persisted record of every lab experiment run from the command line.
"""

from django.db import models

from apps.core.models import TimeStampedModel


class ExperimentRun(TimeStampedModel):
    """
    One CLI experiment: what was asked for and what came out.
    """

    class Kind(models.TextChoices):
        CROSS_VALIDATION = 'cv', 'Cross-validation'
        TRAIN = 'train', 'Training'
        EVAL = 'eval', 'Evaluation'
        MODALITY_ABLATION = 'ablate_modalities', 'Modality Ablation'
        MODULE_ABLATION = 'ablate_modules', 'Module Ablation'
        NOISE = 'noise', 'Noise Robustness'
        SWEEP = 'sweep', 'Hyperparameter Sweep'
        CORRELATION = 'correlate', 'Correlation Report'
        MULTITASK = 'multitask', 'Multi-task Comparison'
        EYE_FEATURES = 'eye_features', 'Eye Feature Ablation'
        ANNOTATION = 'annotate', 'Annotation Fusion'

    class Status(models.TextChoices):
        COMPLETED = 'completed', 'Completed'
        FAILED = 'failed', 'Failed'

    kind = models.CharField(
        max_length=32,
        choices=Kind.choices,
        help_text='Experiment type'
    )
    protocol = models.CharField(
        max_length=32,
        blank=True,
        help_text='Benchmark protocol, e.g. er3 or fer_va'
    )
    seed = models.IntegerField(
        default=0,
        help_text='Base random seed'
    )
    spec = models.JSONField(
        default=dict,
        help_text='Echo of the experiment spec'
    )
    report = models.JSONField(
        default=dict,
        help_text='Report rows or summary'
    )
    output_path = models.CharField(
        max_length=512,
        blank=True,
        help_text='CSV report written for this run'
    )
    status = models.CharField(
        max_length=20,
        choices=Status.choices,
        default=Status.COMPLETED,
        help_text='Run outcome'
    )

    class Meta:
        verbose_name = 'Experiment Run'
        verbose_name_plural = 'Experiment Runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['kind', 'created_at'], name='harness_exp_kind_3f1c2a_idx'),
            models.Index(fields=['protocol', 'seed'], name='harness_exp_protoco_8d0e4b_idx'),
        ]

    def __str__(self):
        return f"{self.get_kind_display()} ({self.protocol or 'n/a'}, seed {self.seed})"
