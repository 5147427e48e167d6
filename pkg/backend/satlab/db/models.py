# backend/satlab/db/models.py

import enum
from datetime import datetime

from sqlalchemy import (
    Column,
    DateTime,
    Enum,
    ForeignKey,
    Integer,
    String,
    Text,
)
from sqlalchemy.orm import relationship

from .base import Base


class RunStatus(str, enum.Enum):
    PENDING = "pending"
    RUNNING = "running"
    SUCCESS = "success"
    FAILED = "failed"


class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True, index=True)

    # CLI subcommand that produced the run, e.g. "scaling"
    subcommand = Column(String(100), nullable=False, index=True)

    # Full RunConfig echo as JSON
    config_json = Column(Text, nullable=False)

    # u64 does not fit a signed BIGINT; kept as its decimal string.
    master_seed = Column(String(20), nullable=False)

    status = Column(
        Enum(RunStatus),
        nullable=False,
        default=RunStatus.PENDING,
    )

    started_at = Column(DateTime, default=datetime.utcnow, nullable=False)
    ended_at = Column(DateTime, nullable=True)

    record_count = Column(Integer, nullable=True)
    error_message = Column(String(2000), nullable=True)

    records = relationship(
        "ExperimentRecord",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="ExperimentRecord.position",
    )

    def __repr__(self) -> str:
        return (
            f"<ExperimentRun(id={self.id}, subcommand={self.subcommand!r}, "
            f"status={self.status.value!r}, record_count={self.record_count})>"
        )


class ExperimentRecord(Base):
    __tablename__ = "experiment_records"

    id = Column(Integer, primary_key=True, index=True)

    run_id = Column(
        Integer,
        ForeignKey("experiment_runs.id", ondelete="CASCADE"),
        nullable=False,
        index=True,
    )
    position = Column(Integer, nullable=False)

    # One output record (JSON), exactly as written to the results file
    payload = Column(Text, nullable=False)

    run = relationship("ExperimentRun", back_populates="records")

    def __repr__(self) -> str:
        return f"<ExperimentRecord(run_id={self.run_id}, position={self.position})>"
