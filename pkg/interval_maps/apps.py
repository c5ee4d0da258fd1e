from django.apps import AppConfig


class IntervalMapsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'interval_maps'
