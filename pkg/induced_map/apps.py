from django.apps import AppConfig


class InducedMapConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'induced_map'
