"""
Run Monitoring

Logging setup and per-stage metrics for command-line runs. Metrics are
prometheus_client collectors on a registry owned by the run; they reach the
log only, so output files stay byte-identical across runs.
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Optional, Union

from prometheus_client import CollectorRegistry, Counter, Histogram

from core.config import LogLevel

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Union[LogLevel, str] = LogLevel.INFO) -> None:
    """Set the root level; install one stderr handler unless one exists."""
    value = level.value if isinstance(level, LogLevel) else str(level).upper()
    root = logging.getLogger()
    root.setLevel(getattr(logging, value, logging.INFO))
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)


class RunMetrics:
    """Stage durations, case counters and failures for one run."""

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()
        self.logger = logging.getLogger(__name__)

        self.stage_duration = Histogram(
            "veilcache_stage_duration_seconds", "Wall time per run stage", ["stage"],
            registry=self.registry,
        )
        self.cases = Counter("veilcache_cases", "Cases processed", ["kind"], registry=self.registry)
        self.stage_failures = Counter(
            "veilcache_stage_failures", "Stages that raised", ["stage"], registry=self.registry,
        )

    @contextmanager
    def track(self, stage: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        except Exception:
            self.stage_failures.labels(stage=stage).inc()
            raise
        finally:
            elapsed = time.perf_counter() - start
            self.stage_duration.labels(stage=stage).observe(elapsed)
            self.logger.info(f"{stage} finished in {elapsed:.3f}s")

    def count(self, name: str, amount: int = 1) -> None:
        self.cases.labels(kind=name).inc(amount)

    def _samples(self, sample_name: str, label: str) -> Dict[str, float]:
        return {
            sample.labels[label]: sample.value
            for metric in self.registry.collect()
            for sample in metric.samples
            if sample.name == sample_name
        }

    @property
    def durations(self) -> Dict[str, float]:
        return self._samples("veilcache_stage_duration_seconds_sum", "stage")

    @property
    def counters(self) -> Dict[str, int]:
        return {k: int(v) for k, v in self._samples("veilcache_cases_total", "kind").items()}

    @property
    def failures(self) -> int:
        return int(sum(self._samples("veilcache_stage_failures_total", "stage").values()))

    def summary(self) -> Dict[str, object]:
        return {
            "durations": {k: round(v, 6) for k, v in self.durations.items()},
            "counters": self.counters,
            "failures": self.failures,
        }
