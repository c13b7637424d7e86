from django.apps import AppConfig


class PulsesConfig(AppConfig):
    verbose_name = 'Pulse envelopes'
    name = 'pulses'
