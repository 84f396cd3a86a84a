# ============================================
# CELERY BACKGROUND TASKS
# ============================================

import json
import logging
from datetime import datetime, timedelta
from pathlib import Path

from . import models
from .celery_app import celery_app
from .config import get_settings
from .database import SessionLocal
from .errors import NullcastError
from .harness import run_experiment, validate_config

logger = logging.getLogger(__name__)


def output_path_for(run_id: int, experiment: str) -> str:
    return str(Path(get_settings().output_dir) / f"run_{run_id}_{experiment}.csv")


# ============================================
# EXPERIMENT TASKS
# ============================================

@celery_app.task(name="nullcast.tasks.run_experiment_task")
def run_experiment_task(run_id: int):
    """Execute a registered run and record its outcome on the run row."""
    db = SessionLocal()
    try:
        run = db.query(models.ExperimentRun).filter(models.ExperimentRun.id == run_id).first()
        if not run:
            return {"status": "error", "message": "Run not found"}

        logger.info(f"Run {run_id} ({run.experiment}) started")
        run.status = models.RUNNING
        db.commit()

        try:
            data = json.loads(run.config_json)
            data["output_path"] = output_path_for(run_id, run.experiment)
            result = run_experiment(validate_config(data))
        except NullcastError as e:
            logger.error(f"Run {run_id} failed: {e}")
            run.status = models.FAILED
            run.error = f"{e.code}: {e}"
            run.finished_at = datetime.utcnow()
            db.commit()
            return {"status": "error", "run_id": run_id, "message": str(e)}

        run.status = models.DONE
        run.n_rows = result.n_rows
        run.output_path = result.output_path
        run.finished_at = datetime.utcnow()
        db.commit()
        logger.info(f"Run {run_id} done: {result.n_rows} rows in {result.elapsed:.2f}s")

        return {
            "status": "success",
            "run_id": run_id,
            "n_rows": result.n_rows,
            "output_path": result.output_path,
        }
    finally:
        db.close()


# ============================================
# MAINTENANCE
# ============================================

@celery_app.task(name="nullcast.tasks.cleanup_old_results")
def cleanup_old_results(days: int = 30):
    """Delete CSV files of finished runs older than `days`."""
    logger.info(f"Removing results older than {days} days")

    db = SessionLocal()
    try:
        cutoff = datetime.utcnow() - timedelta(days=days)
        runs = db.query(models.ExperimentRun).filter(
            models.ExperimentRun.finished_at < cutoff,
            models.ExperimentRun.output_path.isnot(None),
        ).all()

        removed = 0
        for run in runs:
            path = Path(run.output_path)
            if path.exists():
                path.unlink()
                removed += 1
            run.output_path = None
        db.commit()

        logger.info(f"Removed {removed} result files")
        return {
            "status": "success",
            "files_removed": removed,
            "timestamp": str(datetime.utcnow()),
        }
    finally:
        db.close()
