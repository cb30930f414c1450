"""
Celery configuration for emert_lab project.
Runs cross-validation folds on workers when LAB_EXECUTOR=celery.
"""

import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'emert_lab.settings')

app = Celery('emert_lab')

app.config_from_object('django.conf:settings', namespace='CELERY')

# Auto-discover tasks from all registered Django apps
app.autodiscover_tasks()
