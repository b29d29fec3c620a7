"""Thread-count resolution and ordered fan-out."""

from __future__ import annotations

import threading
import time

import pytest

from rydberg_mtp.errors import ConfigError
from rydberg_mtp.parallel import THREADS_ENV, ordered_map, resolve_threads


def test_explicit_setting_wins(monkeypatch: pytest.MonkeyPatch) -> None:
    """A configured count overrides the environment."""
    monkeypatch.setenv(THREADS_ENV, "5")
    assert resolve_threads(2) == 2
    assert resolve_threads() == 5


def test_cpu_count_fallback(monkeypatch: pytest.MonkeyPatch) -> None:
    """Without settings the CPU count is used."""
    monkeypatch.delenv(THREADS_ENV, raising=False)
    monkeypatch.setattr("os.cpu_count", lambda: None)
    assert resolve_threads() == 1


@pytest.mark.parametrize("raw", ["zero", "0", "-2"])
def test_invalid_environment(monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
    """Non-integer or non-positive counts are rejected."""
    monkeypatch.setenv(THREADS_ENV, raw)
    with pytest.raises(ConfigError):
        resolve_threads()


def test_ordered_map_keeps_input_order() -> None:
    """Results come back in item order even when later items finish first."""
    seen: set[str] = set()

    def slow_square(value: int) -> int:
        seen.add(threading.current_thread().name)
        time.sleep(0.01 * (5 - value))
        return value * value

    assert ordered_map(slow_square, range(5), threads=3) == [0, 1, 4, 9, 16]
    assert ordered_map(slow_square, range(5), threads=1) == [0, 1, 4, 9, 16]
    assert ordered_map(slow_square, [], threads=4) == []
    assert len(seen) >= 2


def test_ordered_map_propagates_errors() -> None:
    """An exception in a worker reaches the caller."""

    def fail(value: int) -> int:
        if value == 2:
            raise ValueError("boom")
        return value

    with pytest.raises(ValueError, match="boom"):
        ordered_map(fail, range(4), threads=2)
