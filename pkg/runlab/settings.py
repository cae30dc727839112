"""
Django settings for the runlab project.

The project has no web surface: Django hosts the configuration layer and
the ``runlab`` management command. Budgets live in the ``RUNLAB`` dict and
can be overridden with ``RUNLAB_<KEY>`` environment variables or a ``.env``
file next to ``manage.py``.
"""

from pathlib import Path
import os

from dotenv import load_dotenv

from lab import constants

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'runlab-insecure-local-key')

DEBUG = os.environ.get('DEBUG', 'False').lower() == 'true'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    # Third-party apps
    'rest_framework',
    # Local apps
    'lab',
]

# No models are stored; every result is computed on demand
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_TZ = True
TIME_ZONE = 'UTC'


# Logging goes to stderr so that stdout stays machine-readable
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'lab': {
            'handlers': ['console'],
            'level': os.environ.get('RUNLAB_LOG_LEVEL', 'WARNING').upper(),
            'propagate': False,
        },
    },
}


def _env_number(key, default):
    """Read RUNLAB_<key> from the environment, keeping the default's type."""
    raw = os.environ.get(f'RUNLAB_{key}')
    if raw is None or raw == '':
        return default
    return type(default)(float(raw)) if isinstance(default, int) else float(raw)


# RunLab Configuration
RUNLAB = {
    key: _env_number(key, getattr(constants, key))
    for key in (
        'VERTEX_BUDGET',
        'MATERIALIZE_LIMIT',
        'CHROMATIC_VERTEX_BUDGET',
        'EXHAUSTIVE_COLORING_LIMIT',
        'EXHAUSTIVE_FUNCTION_LIMIT',
        'EXHAUSTIVE_TUPLE_LIMIT',
        'EXACT_STATE_BUDGET',
        'NAIVE_ENUMERATION_LIMIT',
        'TOWER_MAX_BITS',
        'TOWER_PRECISION_BITS',
        'BRIDGE_PERMUTATION_LIMIT',
        'DEFAULT_THREADS',
        'MC_CHUNK_SIZE',
        'FUNCTION_BATCH_SIZE',
        'SEARCH_TIME_BUDGET',
    )
}
