# ============================================
# CELERY APPLICATION SETUP
# ============================================

from celery import Celery
from celery.schedules import crontab

from .config import get_settings

settings = get_settings()

celery_app = Celery(
    "nullcast",
    broker=settings.broker_url,
    backend=settings.result_backend,
    include=["nullcast.tasks"],
)

celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_track_started=True,
    task_time_limit=6 * 60 * 60,  # full 10^4-trial runs
    worker_prefetch_multiplier=1,
    worker_max_tasks_per_child=100,
)

# ============================================
# CELERY BEAT SCHEDULE
# ============================================

celery_app.conf.beat_schedule = {
    "weekly-results-cleanup": {
        "task": "nullcast.tasks.cleanup_old_results",
        "schedule": crontab(hour=3, minute=0, day_of_week=0),
        "args": (30,),
    },
}

celery_app.conf.task_routes = {
    "nullcast.tasks.run_*": {"queue": "experiments"},
    "nullcast.tasks.cleanup_*": {"queue": "maintenance"},
}
