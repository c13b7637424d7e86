from django.apps import AppConfig


class RunnerConfig(AppConfig):
    verbose_name = 'Command-line runner'
    name = 'runner'
