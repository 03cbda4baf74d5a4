"""
Django settings for the bicopula project.

The project has no web surface: it is driven through management commands
(`python manage.py fit|scoretest|simulate|experiment|predict`) and the
settings below configure the estimator, the simulator and logging.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/3.2/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('BICOPULA_SECRET_KEY', 'bicopula-local-only-key')

DEBUG = os.environ.get('BICOPULA_DEBUG', '0') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',

    'rest_framework',
    'core',
    'copulas',
    'sieve',
    'association',
    'simulation',
    'prediction',
]


# Database
# Nothing is persisted in a database; the test runner only needs a valid alias.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# DRF settings. Serializers and the JSON renderer/parser are used for
# config files and fit documents, not for HTTP.
REST_FRAMEWORK = {
    'COERCE_DECIMAL_TO_STRING': False,
    # Fit documents may carry NaN or Infinity (e.g. an unbounded condition number).
    'STRICT_JSON': False,
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
}


# Estimator, simulator and worker defaults. Read through core.conf.bicopula_settings,
# which fills in anything missing here from core.conf.DEFAULTS.
BICOPULA = {
    'DEGREE': 3,
    'GTOL': 1e-6,
    'FTOL': 1e-9,
    'MAX_ITER': 500,
    'DIFF_STEP': 1e-4,
    'DIFF_HESSIAN_STEP': 1e-2,
    'DIFF_LEVELS': 4,
    'DIFF_SHRINK': 2.0,
    'SEARCH_DIFF_LEVELS': 2,
    'POLISH_STEPS': 6,
    'WORKERS': int(os.environ.get('BICOPULA_WORKERS', '1')),
    'SIEVE_MARGIN': 0.05,
    'ASSESSMENTS': 12,
    'RIGHT_CENSORING_TARGET': 0.25,
}


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
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
        app: {
            'handlers': ['console'],
            'level': os.environ.get('BICOPULA_LOG_LEVEL', 'INFO'),
            'propagate': False,
        }
        for app in ('core', 'copulas', 'sieve', 'association', 'simulation', 'prediction')
    },
}
