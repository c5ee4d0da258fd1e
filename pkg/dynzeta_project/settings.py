"""
Django settings for dynzeta_project project.

Generated by 'django-admin startproject' using Django 5.2.5.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

from pathlib import Path
from decouple import config
import dj_database_url
import ssl

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-3v$k0q!dynzeta-local-only-7x#p9m2w@e1r')

DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='*').split(',')


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'interval_maps',
    'induced_map',
    'periodic_orbits',
    'zeta_traces',
    'spectral',
    'continuation',
    'experiments',  # CLI front-end and run history
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'dynzeta_project.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'dynzeta_project.wsgi.application'


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': dj_database_url.config(
        default=config('DATABASE_URL', default=f'sqlite:///{BASE_DIR / "db.sqlite3"}'),
        conn_max_age=600,
        conn_health_checks=True,
    )
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# ============================================
# LOGGING
# ============================================

LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {asctime} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        app: {'handlers': ['console'], 'level': LOG_LEVEL, 'propagate': False}
        for app in (
            'interval_maps', 'induced_map', 'periodic_orbits', 'zeta_traces',
            'spectral', 'continuation', 'experiments',
        )
    },
}


# ============================================
# NUMERICAL DEFAULTS
# ============================================

# Taylor jet order used for branch derivatives
DYNZETA_JET_ORDER = config('DYNZETA_JET_ORDER', default=3, cast=int)

# Root finding (inverse branches, partition point, fixed points)
DYNZETA_ROOT_TOL = config('DYNZETA_ROOT_TOL', default=1e-14, cast=float)
DYNZETA_ROOT_MAXITER = config('DYNZETA_ROOT_MAXITER', default=200, cast=int)

# Word-shell truncation of trace and zeta sums
DYNZETA_MAX_CUTOFF = config('DYNZETA_MAX_CUTOFF', default=10000, cast=int)
DYNZETA_TAIL_REL_TOL = config('DYNZETA_TAIL_REL_TOL', default=1e-8, cast=float)
DYNZETA_TAIL_SHELLS = config('DYNZETA_TAIL_SHELLS', default=10, cast=int)
DYNZETA_MAX_WORDS = config('DYNZETA_MAX_WORDS', default=2_000_000, cast=int)

# Chebyshev collocation of Q_w(z)
DYNZETA_CHEB_NODES = config('DYNZETA_CHEB_NODES', default=30, cast=int)
DYNZETA_BRANCH_CUTOFF = config('DYNZETA_BRANCH_CUTOFF', default=200, cast=int)
DYNZETA_TAIL_QUAD_POINTS = config('DYNZETA_TAIL_QUAD_POINTS', default=24, cast=int)

# Smoothness index k of the determinant holomorphy disc
DYNZETA_DET_SMOOTHNESS = config('DYNZETA_DET_SMOOTHNESS', default=8, cast=int)

# Lindelof continuation
DYNZETA_CONTOUR_T_MAX = config('DYNZETA_CONTOUR_T_MAX', default=40.0, cast=float)
DYNZETA_CONTOUR_POINTS_PER_UNIT = config('DYNZETA_CONTOUR_POINTS_PER_UNIT', default=32, cast=int)
DYNZETA_LINDELOF_EPS = config('DYNZETA_LINDELOF_EPS', default=0.1, cast=float)
DYNZETA_INTERP_CAP = config('DYNZETA_INTERP_CAP', default=2000, cast=int)

# Where the dynzeta command writes CSV/JSON results
DYNZETA_OUTPUT_DIR = config('DYNZETA_OUTPUT_DIR', default=str(BASE_DIR / 'results'))


# ============================================
# CELERY CONFIGURATION
# ============================================

# For local development: redis://localhost:6379/0
REDIS_URL = config('REDIS_URL', default='redis://localhost:6379/0')

CELERY_BROKER_URL = REDIS_URL
CELERY_RESULT_BACKEND = REDIS_URL

if REDIS_URL.startswith('rediss://'):
    CELERY_BROKER_USE_SSL = {
        'ssl_cert_reqs': ssl.CERT_NONE,
    }
    CELERY_REDIS_BACKEND_USE_SSL = {
        'ssl_cert_reqs': ssl.CERT_NONE,
    }

CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'

# Run tasks inline when no broker is available
CELERY_TASK_ALWAYS_EAGER = config('CELERY_TASK_ALWAYS_EAGER', default=False, cast=bool)

# Celery task result expiration (1 day)
CELERY_RESULT_EXPIRES = 24 * 3600

CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 2 * 60 * 60
CELERY_TASK_SOFT_TIME_LIMIT = 110 * 60
