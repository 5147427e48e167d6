# backend/tests/conftest.py

import sys
from pathlib import Path

import pytest

BACKEND = Path(__file__).resolve().parents[1]
if str(BACKEND) not in sys.path:
    sys.path.insert(0, str(BACKEND))

from satlab.config import get_settings  # noqa: E402


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    """Keep every test away from the developer's SATLAB_* env and ./satlab.db."""
    for name in ("SATLAB_DATABASE_URL", "SATLAB_LOG_LEVEL", "SATLAB_WORKERS"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("SATLAB_DATABASE_URL", f"sqlite:///{tmp_path / 'registry.db'}")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
