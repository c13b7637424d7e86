from django.apps import AppConfig


class SequencesConfig(AppConfig):
    verbose_name = 'Pulse programs and propagation'
    name = 'sequences'
