from datetime import datetime

from sqlalchemy import Column, DateTime, Integer, String, Text

from .database import Base

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


# ============================================
# EXPERIMENT RUN MODEL
# ============================================

class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)
    experiment = Column(String, nullable=False, index=True)
    config_json = Column(Text, nullable=False)
    status = Column(String, nullable=False, default=QUEUED, index=True)
    error = Column(Text, nullable=True)
    n_rows = Column(Integer, nullable=True)
    output_path = Column(String, nullable=True)
    task_id = Column(String, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)
