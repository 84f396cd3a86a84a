# ============================================
# EXPERIMENT RUN ENDPOINTS
# ============================================

import io
from pathlib import Path
from typing import List

from fastapi import APIRouter, Depends, HTTPException
from fastapi.responses import StreamingResponse
from sqlalchemy.orm import Session

from .. import models, schemas
from ..celery_app import celery_app
from ..database import get_db
from ..experiments import CATALOGUE
from ..harness import run_experiment, table_to_csv
from ..schemas import DETERMINISTIC_EXPERIMENTS, ExperimentConfig
from ..tasks import run_experiment_task

router = APIRouter(
    prefix="/api/experiments",
    tags=["experiments"]
)

DEFAULT_TRIALS = ExperimentConfig.model_fields["trials"].default


def csv_response(text: str, filename: str) -> StreamingResponse:
    return StreamingResponse(
        io.BytesIO(text.encode()),
        media_type="text/csv",
        headers={"Content-Disposition": f"attachment; filename={filename}"}
    )


def get_run_or_404(run_id: int, db: Session) -> models.ExperimentRun:
    run = db.query(models.ExperimentRun).filter(models.ExperimentRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run


# ============================================
# CATALOGUE
# ============================================

@router.get("/", response_model=List[schemas.ExperimentInfo])
def list_experiments():
    return [
        schemas.ExperimentInfo(
            name=name.value,
            description=entry.description,
            deterministic=entry.deterministic,
            default_trials=1 if entry.deterministic else DEFAULT_TRIALS,
        )
        for name, entry in CATALOGUE.items()
    ]


# ============================================
# RUNS
# ============================================

@router.post("/runs", response_model=schemas.ExperimentRunSubmitted, status_code=202)
def submit_run(cfg: ExperimentConfig, db: Session = Depends(get_db)):
    """Register a run and hand it to the worker."""
    run = models.ExperimentRun(
        experiment=cfg.experiment.value,
        config_json=cfg.model_dump_json(exclude={"output_path"}),
        status=models.QUEUED,
    )
    db.add(run)
    db.commit()
    db.refresh(run)

    task = run_experiment_task.delay(run.id)

    db.refresh(run)
    run.task_id = task.id
    db.commit()

    return schemas.ExperimentRunSubmitted(run_id=run.id, task_id=task.id, status=run.status)


@router.get("/runs/{run_id}", response_model=schemas.ExperimentRun)
def get_run(run_id: int, db: Session = Depends(get_db)):
    return get_run_or_404(run_id, db)


@router.get("/runs/{run_id}/csv")
def download_run_csv(run_id: int, db: Session = Depends(get_db)):
    run = get_run_or_404(run_id, db)
    if run.status != models.DONE or not run.output_path:
        raise HTTPException(status_code=404, detail=f"Run {run_id} has no results (status: {run.status})")
    path = Path(run.output_path)
    if not path.exists():
        raise HTTPException(status_code=404, detail="Result file no longer available")
    return csv_response(path.read_text(), path.name)


@router.post("/preview")
def preview(cfg: ExperimentConfig):
    """Run a deterministic experiment synchronously and stream its CSV."""
    if cfg.experiment not in DETERMINISTIC_EXPERIMENTS:
        raise HTTPException(
            status_code=422,
            detail=f"{cfg.experiment.value} is a Monte Carlo experiment; submit it as a run"
        )
    result = run_experiment(cfg, write=False)
    return csv_response(table_to_csv(result.table), f"{cfg.experiment.value}.csv")


@router.get("/task-status/{task_id}")
def get_task_status(task_id: str):
    task = celery_app.AsyncResult(task_id)
    return {
        "task_id": task_id,
        "status": task.state,
        "result": task.result if task.ready() else None
    }
