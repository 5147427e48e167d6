# backend/satlab/db/base.py

from functools import lru_cache

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

Base = declarative_base()


@lru_cache
def get_engine(database_url: str) -> Engine:
    connect_args = {}
    if database_url.startswith("sqlite"):
        # required for SQLite + multithreaded use
        connect_args["check_same_thread"] = False
    return create_engine(database_url, connect_args=connect_args)


def get_session_factory(database_url: str) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=get_engine(database_url))


def init_db(database_url: str) -> None:
    """
    Initialize the run registry.

    Creates tables for all models that inherit from Base
    (experiment_runs, experiment_records).
    """
    # Import models so they are registered with SQLAlchemy's metadata
    from . import models  # noqa: F401

    Base.metadata.create_all(bind=get_engine(database_url))
