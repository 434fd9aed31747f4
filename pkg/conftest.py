"""Shared pytest configuration."""

import logging

import pytest
import structlog

structlog.configure(
    processors=[
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_log_level,
        structlog.dev.ConsoleRenderer(colors=False),
    ],
    wrapper_class=structlog.stdlib.BoundLogger,
    context_class=dict,
    logger_factory=structlog.stdlib.LoggerFactory(),
    cache_logger_on_first_use=False,
)
logging.basicConfig(level=logging.WARNING)


@pytest.fixture
def no_env(monkeypatch):
    """Clear PAIRLAB_* variables so Config defaults apply."""
    for name in ("PAIRLAB_LOG_LEVEL", "PAIRLAB_OUTPUT_DIR", "PAIRLAB_CHUNK_PAIRS"):
        monkeypatch.delenv(name, raising=False)
