"""
Unit tests for the logging decorators.
"""

import sys
from pathlib import Path

# Add parent directory to sys.path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import asyncio

import numpy as np
import pytest

from decorators.logging_decorators import (
    log_async_calls,
    log_calls,
    performance_log,
    performance_log_async,
    set_log_file,
)
from models import ModelFactory


@pytest.fixture
def log_file(tmp_path):
    """Redirect decorator output into a temporary file for one test."""
    path = tmp_path / "log.txt"
    previous = set_log_file(path)
    yield path
    set_log_file(previous)


def entries(path):
    return [line.split("] ", 1)[1] for line in path.read_text(encoding="utf-8").splitlines()]


class TestSyncDecorators:
    """Tests for log_calls and performance_log."""

    def test_call_and_return(self, log_file):
        @log_calls
        def scale(x, factor=2.0):
            return x * factor

        assert scale(np.ones(3), factor=3.0)[0] == 3.0
        lines = entries(log_file)
        assert lines[0].endswith("scale(ndarray(3,), factor=3.0)")
        assert lines[1].endswith("scale -> ndarray")

    def test_error_is_logged_and_raised(self, log_file):
        @log_calls
        def fail():
            raise ValueError("bad step")

        with pytest.raises(ValueError):
            fail()
        assert "ValueError: bad step" in entries(log_file)[-1]

    def test_long_arguments_are_truncated(self, log_file):
        @log_calls
        def ignore(*args):
            return None

        ignore("x" * 200, 1, 2, 3)
        call = entries(log_file)[0]
        assert "..." in call
        assert len(call) < 200

    def test_performance(self, log_file):
        @performance_log
        def work():
            return sum(range(100))

        assert work() == 4950
        assert "work executed in" in entries(log_file)[0]

    def test_factory_is_logged(self, log_file):
        ModelFactory.create("smib")
        text = log_file.read_text(encoding="utf-8")
        assert "CALL: ModelFactory.create('smib')" in text
        assert "RETURN: ModelFactory.create -> SmibModel" in text


class TestAsyncDecorators:
    """Tests for log_async_calls and performance_log_async."""

    def test_async_call(self, log_file):
        @performance_log_async
        @log_async_calls
        async def pause(seconds):
            await asyncio.sleep(seconds)
            return seconds

        assert asyncio.run(pause(0.01)) == 0.01
        lines = entries(log_file)
        assert lines[0].startswith("ASYNC CALL:") and lines[0].endswith("pause(0.01)")
        assert lines[1].startswith("ASYNC RETURN:")
        assert "pause executed in" in lines[2]

    def test_async_error(self, log_file):
        @performance_log_async
        @log_async_calls
        async def broken():
            raise RuntimeError("cell failed")

        with pytest.raises(RuntimeError):
            asyncio.run(broken())
        lines = entries(log_file)
        assert "ASYNC ERROR" in lines[1]
        assert "failed after" in lines[2]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
