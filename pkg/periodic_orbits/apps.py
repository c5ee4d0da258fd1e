from django.apps import AppConfig


class PeriodicOrbitsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'periodic_orbits'
