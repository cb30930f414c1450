# Generated by Django 4.2.27 on 2026-10-18 09:12

from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                (
                    "id",
                    models.UUIDField(
                        default=uuid.uuid4,
                        editable=False,
                        primary_key=True,
                        serialize=False,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("updated_at", models.DateTimeField(auto_now=True)),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("cv", "Cross-validation"),
                            ("train", "Training"),
                            ("eval", "Evaluation"),
                            ("ablate_modalities", "Modality Ablation"),
                            ("ablate_modules", "Module Ablation"),
                            ("noise", "Noise Robustness"),
                            ("sweep", "Hyperparameter Sweep"),
                            ("correlate", "Correlation Report"),
                            ("multitask", "Multi-task Comparison"),
                            ("eye_features", "Eye Feature Ablation"),
                            ("annotate", "Annotation Fusion"),
                        ],
                        help_text="Experiment type",
                        max_length=32,
                    ),
                ),
                (
                    "protocol",
                    models.CharField(
                        blank=True,
                        help_text="Benchmark protocol, e.g. er3 or fer_va",
                        max_length=32,
                    ),
                ),
                (
                    "seed",
                    models.IntegerField(default=0, help_text="Base random seed"),
                ),
                (
                    "spec",
                    models.JSONField(
                        default=dict, help_text="Echo of the experiment spec"
                    ),
                ),
                (
                    "report",
                    models.JSONField(default=dict, help_text="Report rows or summary"),
                ),
                (
                    "output_path",
                    models.CharField(
                        blank=True,
                        help_text="CSV report written for this run",
                        max_length=512,
                    ),
                ),
                (
                    "status",
                    models.CharField(
                        choices=[("completed", "Completed"), ("failed", "Failed")],
                        default="completed",
                        help_text="Run outcome",
                        max_length=20,
                    ),
                ),
            ],
            options={
                "verbose_name": "Experiment Run",
                "verbose_name_plural": "Experiment Runs",
                "ordering": ["-created_at"],
                "indexes": [
                    models.Index(
                        fields=["kind", "created_at"],
                        name="harness_exp_kind_3f1c2a_idx",
                    ),
                    models.Index(
                        fields=["protocol", "seed"],
                        name="harness_exp_protoco_8d0e4b_idx",
                    ),
                ],
            },
        ),
    ]
