from django.apps import AppConfig


class SpinmodelConfig(AppConfig):
    verbose_name = 'Spin register model'
    name = 'spinmodel'
