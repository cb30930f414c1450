"""
Django settings for emert_lab project.

Desk-scale laboratory for eye-behavior-aided multimodal emotion recognition.
"""

from pathlib import Path

from decouple import config, Csv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-emert-lab-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())

# Application definition
DJANGO_APPS = [
    'django.contrib.contenttypes',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'apps.core',
    'apps.diffkernel',
    'apps.datamodel',
    'apps.eyeprep',
    'apps.ala',
    'apps.emert',
    'apps.metrics',
    'apps.harness',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# Database Configuration
# Use SQLite for development, PostgreSQL for shared lab machines
if config('DEBUG', default=True, cast=bool):
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': config('DB_NAME', default='emert_lab_db'),
            'USER': config('DB_USER', default='postgres'),
            'PASSWORD': config('DB_PASSWORD', default=''),
            'HOST': config('DB_HOST', default='localhost'),
            'PORT': config('DB_PORT', default='5432'),
        }
    }

USE_I18N = False
USE_TZ = True
TIME_ZONE = config('TIME_ZONE', default='UTC')

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Celery Configuration
# Folds can be dispatched to workers; eager mode keeps everything in-process.
CELERY_BROKER_URL = config('CELERY_BROKER_URL', default='redis://localhost:6379/0')
CELERY_RESULT_BACKEND = config('CELERY_RESULT_BACKEND', default='redis://localhost:6379/0')
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=True, cast=bool)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = TIME_ZONE

# Lab Configuration
LAB_SEED = config('LAB_SEED', default=0, cast=int)
LAB_THREADS = config('LAB_THREADS', default=1, cast=int)
LAB_FOLDS = config('LAB_FOLDS', default=5, cast=int)
LAB_OUTPUT_DIR = config('LAB_OUTPUT_DIR', default='out')
LAB_EXECUTOR = config('LAB_EXECUTOR', default='serial')  # serial, threads or celery
LAB_RECORD_RUNS = config('LAB_RECORD_RUNS', default=True, cast=bool)

# Data Model
DATAMODEL_SURPRISE_COARSE = config('DATAMODEL_SURPRISE_COARSE', default='positive')  # positive or negative

# Eye Preprocessing
EYEPREP_BLINK_MIN_MS = config('EYEPREP_BLINK_MIN_MS', default=75.0, cast=float)
EYEPREP_BLINK_MAX_MS = config('EYEPREP_BLINK_MAX_MS', default=425.0, cast=float)
EYEPREP_BLINK_DETECTOR = config('EYEPREP_BLINK_DETECTOR', default='union')  # events, dropout or union

# Annotation Aggregation
ALA_EM_MAX_ITER = config('ALA_EM_MAX_ITER', default=500, cast=int)
ALA_EM_TOLERANCE = config('ALA_EM_TOLERANCE', default=1e-8, cast=float)
ALA_EM_CHECK_MONOTONIC = config('ALA_EM_CHECK_MONOTONIC', default=DEBUG, cast=bool)
ALA_EXPERT_INIT_ALPHA = config('ALA_EXPERT_INIT_ALPHA', default=0.7, cast=float)
ALA_MACHINE_INIT_ALPHA = config('ALA_MACHINE_INIT_ALPHA', default=0.6, cast=float)
ALA_MACHINE_LABELER = config('ALA_MACHINE_LABELER', default='simulated')  # simulated or file
ALA_MACHINE_LABEL_FILE = config('ALA_MACHINE_LABEL_FILE', default='')
ALA_MACHINE_ACCURACY = config('ALA_MACHINE_ACCURACY', default=0.6, cast=float)

# Logging Configuration
LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(exist_ok=True)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file': {
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOG_DIR / 'emert_lab.log',
            'maxBytes': 10485760,  # 10MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': config('LOG_LEVEL', default='INFO'),
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'INFO',
            'propagate': False,
        },
        'apps': {
            'handlers': ['console', 'file'],
            'level': config('APPS_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}
