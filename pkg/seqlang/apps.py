from django.apps import AppConfig


class SeqlangConfig(AppConfig):
    verbose_name = 'Sequence language'
    name = 'seqlang'
