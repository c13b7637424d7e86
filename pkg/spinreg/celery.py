"""
Celery application for distributed sweeps (``SPINREG_BACKEND=celery``).

Without ``SPINREG_BROKER_URL`` the settings make every task run eagerly in the
calling process.
"""

import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'spinreg.settings')

app = Celery('spinreg')
app.config_from_object('django.conf:settings', namespace='CELERY')
# sweep points are the only tasks
app.autodiscover_tasks(['runner'])
