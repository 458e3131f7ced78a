"""Tests for environment settings."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from app.config import Settings, get_settings


class TestSettings:
    """Tests for Settings."""

    def test_defaults(self):
        """Should default to serial runs under ./runs."""
        settings = get_settings()
        assert settings.jobs == 1
        assert settings.debug is False
        assert settings.runs_dir == Path("./runs")

    def test_environment_prefix(self, monkeypatch):
        """Should read TUNE_* variables."""
        monkeypatch.setenv("TUNE_JOBS", "4")
        monkeypatch.setenv("TUNE_DEBUG", "true")
        settings = Settings()
        assert settings.jobs == 4
        assert settings.debug is True

    def test_rejects_zero_jobs(self, monkeypatch):
        """Should refuse non-positive parallelism."""
        monkeypatch.setenv("TUNE_JOBS", "0")
        with pytest.raises(ValidationError):
            Settings()

    def test_cached(self):
        """Should return one shared instance."""
        assert get_settings() is get_settings()
