"""
Django settings for the spinreg project.

The project has no web surface; Django provides settings, logging, the
management-command front end and the test runner.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SPINREG_SECRET_KEY', 'spinreg-local-only')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    # Third party apps
    'rest_framework',

    # Local apps
    'linalg',
    'spinmodel',
    'pulses',
    'sequences',
    'measurement',
    'estimation',
    'seqlang',
    'runner',
]

# Nothing is stored; the database only keeps Django's checks quiet.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# REST Framework (serializers and the JSON renderer only)
REST_FRAMEWORK = {
    'COERCE_DECIMAL_TO_STRING': False,
    'UNICODE_JSON': False,
    'COMPACT_JSON': False,
}


# Simulator defaults
SPINREG = {
    'TOLERANCES': {
        'algebraic': 1e-12,
        'hermitian': 1e-12,
        'unitarity': 1e-9,
        'trace': 1e-10,
        'density_hermitian': 1e-10,
        'positivity': -1e-9,
    },
    'MAX_QUBITS': 7,
    'MAX_NESTING': 16,
    'MAX_GRID_POINTS': 20000,
    'MAX_DT': None,
    'STEPS_PER_PULSE': 200,
    'STEPS_PER_PERIOD': 20,
    'PI_AREA_FRACTION': 0.9,
    'JOBS': int(os.environ.get('SPINREG_JOBS', '1')),
    'SWEEP_BACKEND': os.environ.get('SPINREG_BACKEND', 'local'),
    'OUTPUT_DIR': os.environ.get('SPINREG_OUTPUT_DIR', 'out'),
    'FIT_MAX_ITERATIONS': 2000,
}


# Celery Configuration
CELERY_BROKER_URL = os.environ.get('SPINREG_BROKER_URL', 'memory://')
CELERY_RESULT_BACKEND = os.environ.get('SPINREG_RESULT_BACKEND', 'cache+memory://')
CELERY_TASK_ALWAYS_EAGER = 'SPINREG_BROKER_URL' not in os.environ
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'


# Logging
LOG_LEVEL = os.environ.get('SPINREG_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in (
            'linalg', 'spinmodel', 'pulses', 'sequences',
            'measurement', 'estimation', 'seqlang', 'runner',
        )
    },
}
