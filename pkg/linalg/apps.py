from django.apps import AppConfig


class LinalgConfig(AppConfig):
    verbose_name = 'Linear algebra'
    name = 'linalg'
