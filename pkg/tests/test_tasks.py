"""
Celery maintenance tasks against the temporary run registry.
"""

import json
from datetime import datetime, timedelta
from pathlib import Path

import pytest

from nullcast import models
from nullcast.celery_app import celery_app
from nullcast.database import Base, SessionLocal, engine
from nullcast.schemas import ExperimentRun
from nullcast.tasks import cleanup_old_results


@pytest.fixture
def registry():
    celery_app.conf.task_always_eager = True
    Base.metadata.create_all(bind=engine)
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def finished_run(db, path: Path, age_days: int) -> models.ExperimentRun:
    path.write_text("experiment,metric,value\n")
    run = models.ExperimentRun(
        experiment="loss_grid",
        config_json=json.dumps({"experiment": "loss_grid"}),
        status=models.DONE,
        n_rows=0,
        output_path=str(path),
        finished_at=datetime.utcnow() - timedelta(days=age_days),
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


# =============================================================================
# Result cleanup
# =============================================================================


class TestCleanupOldResults:
    def test_removes_only_stale_files(self, registry, tmp_path):
        stale = finished_run(registry, tmp_path / "stale.csv", age_days=45)
        fresh = finished_run(registry, tmp_path / "fresh.csv", age_days=1)

        result = cleanup_old_results.delay(30).get()

        assert result["status"] == "success"
        assert result["files_removed"] == 1
        assert not (tmp_path / "stale.csv").exists()
        assert (tmp_path / "fresh.csv").exists()

        registry.expire_all()
        assert registry.get(models.ExperimentRun, stale.id).output_path is None
        assert registry.get(models.ExperimentRun, fresh.id).output_path == str(tmp_path / "fresh.csv")

    def test_missing_file_is_forgotten(self, registry, tmp_path):
        run = finished_run(registry, tmp_path / "gone.csv", age_days=90)
        (tmp_path / "gone.csv").unlink()

        result = cleanup_old_results.delay(30).get()

        assert result["files_removed"] == 0
        registry.expire_all()
        assert registry.get(models.ExperimentRun, run.id).output_path is None


class TestRunSchema:
    def test_reads_orm_rows(self, registry, tmp_path):
        row = finished_run(registry, tmp_path / "row.csv", age_days=0)
        view = ExperimentRun.model_validate(row)
        assert view.id == row.id
        assert view.status == models.DONE
        assert view.output_path == str(tmp_path / "row.csv")
