from django.apps import AppConfig


class ZetaTracesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'zeta_traces'
