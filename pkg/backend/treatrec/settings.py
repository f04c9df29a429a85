"""
Django settings for the treatrec project.

The project has no web surface and no database: Django provides the
management-command CLI, settings and app registry for the training,
simulation, preprocessing and evaluation apps.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("SECRET_KEY", "treatrec-local-only-key")

DEBUG = os.environ.get("DEBUG", "False") == "True"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "core",
    "networks",
    "training",
    "cohort",
    "data_pipeline",
    "evaluation",
]

# No ORM models; commands run without a configured database.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Run outputs
# Every command writes into a timestamped run directory under this root
OUTPUT_ROOT = Path(os.environ.get("TREATREC_OUTPUT_ROOT", BASE_DIR / "runs"))

# Worker threads for per-trajectory gradient accumulation (1 = exact serial order)
DEFAULT_WORKERS = int(os.environ.get("TREATREC_WORKERS", "1"))


# Project-wide defaults that are not part of a single run's hyperparameters
TREATREC_DEFAULTS = {
    # Probability threshold turning actor outputs into prescriptions
    'selection_threshold': 0.5,

    # Equal-width Q-value bins for estimated mortality
    'mortality_bins': 50,

    # Train / validation / test proportions (must sum to 1.0)
    'split': {
        'train': 0.8,
        'validation': 0.1,
        'test': 0.1,
    },

    # Terminal rewards
    'reward_survived': 15.0,
    'reward_died': -15.0,
}


# Logging configuration
LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
LOG_FORMAT = os.environ.get("LOG_FORMAT", "verbose")

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'json': {
            '()': 'pythonjsonlogger.jsonlogger.JsonFormatter',
            'format': '%(asctime)s %(name)s %(levelname)s %(message)s',
        },
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'json' if LOG_FORMAT == 'json' else 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'training': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'cohort': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'data_pipeline': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'evaluation': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
