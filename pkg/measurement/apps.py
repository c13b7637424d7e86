from django.apps import AppConfig


class MeasurementConfig(AppConfig):
    verbose_name = 'Readout and Bell measurement'
    name = 'measurement'
