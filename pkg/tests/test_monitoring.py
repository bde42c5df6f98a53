"""
Tests for logging setup and run metrics
Run with: pytest tests/
"""

import logging

import pytest
from prometheus_client import CollectorRegistry

from core.config import LogLevel
from core.errors import ConfigError
from core.monitoring import RunMetrics, configure_logging


class TestRunMetrics:
    def test_track_records_stage(self):
        metrics = RunMetrics()
        with metrics.track("place"):
            metrics.count("cases", 3)
        assert "place" in metrics.durations
        assert metrics.durations["place"] >= 0
        assert metrics.summary()["counters"] == {"cases": 3}
        assert metrics.failures == 0

    def test_counts_accumulate(self):
        metrics = RunMetrics()
        metrics.count("decodability_cases", 64)
        metrics.count("decodability_cases")
        assert metrics.counters == {"decodability_cases": 65}

    def test_failures_counted_and_raised(self):
        metrics = RunMetrics()
        with pytest.raises(ConfigError):
            with metrics.track("load"):
                raise ConfigError("bad")
        assert metrics.failures == 1
        assert "load" in metrics.durations

    def test_runs_keep_separate_registries(self):
        first, second = RunMetrics(), RunMetrics()
        first.count("cases", 2)
        assert second.counters == {}
        assert first.registry is not second.registry

    def test_metrics_live_on_the_given_registry(self):
        registry = CollectorRegistry()
        metrics = RunMetrics(registry)
        metrics.count("cases", 5)
        assert registry.get_sample_value("veilcache_cases_total", {"kind": "cases"}) == 5


class TestConfigureLogging:
    def test_accepts_names_and_levels(self):
        configure_logging("debug")
        assert logging.getLogger().level == logging.DEBUG
        configure_logging(LogLevel.WARNING)
        assert logging.getLogger().level == logging.WARNING
