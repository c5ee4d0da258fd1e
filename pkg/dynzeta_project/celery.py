"""
Celery configuration for asynchronous experiment runs
Long trace/spectrum computations can be queued on a Redis-backed worker
"""
import os
from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'dynzeta_project.settings')

app = Celery('dynzeta_project')

# Load configuration from Django settings with CELERY_ prefix
app.config_from_object('django.conf:settings', namespace='CELERY')

app.autodiscover_tasks()

app.conf.update(
    task_track_started=True,
    task_time_limit=2 * 60 * 60,  # word sums at |z|=1 can run long
    task_soft_time_limit=110 * 60,
    worker_prefetch_multiplier=1,  # one heavy run per worker slot
    worker_max_tasks_per_child=20,
)
