from django.apps import AppConfig


class ContinuationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'continuation'
