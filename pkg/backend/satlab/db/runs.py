# backend/satlab/db/runs.py

import json
from datetime import datetime
from typing import Iterable, Optional

from sqlalchemy.orm import Session

from satlab.db import models
from satlab.schemas import RunConfig


def start_run(db: Session, config: RunConfig) -> models.ExperimentRun:
    """Create a run row and mark it RUNNING."""
    run = models.ExperimentRun(
        subcommand=config.subcommand,
        config_json=json.dumps(config.model_dump(mode="json"), sort_keys=True),
        master_seed=str(config.master_seed),
        status=models.RunStatus.RUNNING,
        started_at=datetime.utcnow(),
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def finish_run(db: Session, run: models.ExperimentRun, payloads: Iterable[str]) -> models.ExperimentRun:
    count = 0
    for position, payload in enumerate(payloads):
        db.add(models.ExperimentRecord(run_id=run.id, position=position, payload=payload))
        count += 1
    run.status = models.RunStatus.SUCCESS
    run.record_count = count
    run.ended_at = datetime.utcnow()
    run.error_message = None
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def fail_run(db: Session, run: models.ExperimentRun, error: Exception) -> models.ExperimentRun:
    db.rollback()
    run.status = models.RunStatus.FAILED
    run.error_message = str(error)[:2000]
    run.ended_at = datetime.utcnow()
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def list_runs(
    db: Session, subcommand: Optional[str] = None, limit: int = 50
) -> list[models.ExperimentRun]:
    """Return recent runs, newest first."""
    q = db.query(models.ExperimentRun)
    if subcommand:
        q = q.filter(models.ExperimentRun.subcommand == subcommand)
    q = q.order_by(models.ExperimentRun.started_at.desc(), models.ExperimentRun.id.desc())
    if limit:
        q = q.limit(limit)
    return q.all()
