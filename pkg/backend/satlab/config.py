# backend/satlab/config.py

import os
from functools import lru_cache

from pydantic import BaseModel, Field

# Exhaustive truth tables stop at 2**24 bits (16 Mi entries).
MAX_TRUTH_TABLE_VARS = 24
# Buckets are built from exact truth tables.
MAX_BUCKET_VARS = 20
MAX_PIPELINE_VARS = 12

DEFAULT_GUARD = 8
FORMAT_VERSION = 1


class Settings(BaseModel):
    # Run registry, overridable per env.
    database_url: str = "sqlite:///./satlab.db"
    log_level: str = "WARNING"
    workers: int = Field(1, ge=1)


@lru_cache
def get_settings() -> Settings:
    """
    Build settings from SATLAB_* environment variables.
    Cached; call `get_settings.cache_clear()` after changing the env.
    """
    values: dict[str, str] = {}
    for field in Settings.model_fields:
        raw = os.environ.get(f"SATLAB_{field.upper()}")
        if raw is not None:
            values[field] = raw
    return Settings(**values)
