"""
Project settings accessor.

Mirrors the way DRF exposes `REST_FRAMEWORK` through `api_settings`: user values
in `settings.BICOPULA` win, anything missing falls back to DEFAULTS.
"""

from django.conf import settings

DEFAULTS = {
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
    'WORKERS': 1,
    'SIEVE_MARGIN': 0.05,
    'ASSESSMENTS': 12,
    'RIGHT_CENSORING_TARGET': 0.25,
}


class BicopulaSettings:
    def __getattr__(self, name):
        if name not in DEFAULTS:
            raise AttributeError(f"Invalid bicopula setting: '{name}'")
        user_settings = getattr(settings, 'BICOPULA', {}) if settings.configured else {}
        return user_settings.get(name, DEFAULTS[name])


bicopula_settings = BicopulaSettings()
