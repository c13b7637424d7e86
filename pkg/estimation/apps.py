from django.apps import AppConfig


class EstimationConfig(AppConfig):
    verbose_name = 'Estimation and fitting'
    name = 'estimation'
