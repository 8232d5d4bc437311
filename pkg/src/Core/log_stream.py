"""
Log Stream Module
=================

Tagged log messages for every solver stage. Library code calls
log_from_thread(); the message reaches every registered sink, or the console
(stderr) when nothing is listening.

Message Format:
--------------
    {
        "msg_type": "log" | "warning" | "error",
        "message": "[NYSTROM] round 3: r=8 err=2.1e-03",
        "timestamp": "2026-10-19T10:30:00Z"
    }

Usage Example:
-------------
    from src.Core.log_stream import log_from_thread

    log_from_thread("[PIPELINE] eta=0.5 outside [1, n]", "warning")

Thread Safety:
-------------
Safe from any thread; delivery is delegated to the SinkManager lock.
"""

import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict

from src.Core.config import settings
from src.Core.sink_base import SinkManager

_LEVELS = {"log": 0, "warning": 1, "error": 2}


class LogManager(SinkManager):
    """Sink manager specialised for log records."""

    def file_sink(self, path: str | Path) -> Callable[[Dict[str, Any]], None]:
        """
        Build a sink that appends one JSON object per record to `path`.

        The returned callable must be registered by the caller.
        """
        target = Path(path)

        def _write(record: Dict[str, Any]) -> None:
            with target.open("a", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

        return _write


def log_from_thread(message: str, msg_type: str = "log") -> None:
    """
    Thread-safe entry point for solver log messages.

    Args:
        message: Tagged message, e.g. "[SINKHORN] 412 iterations"
        msg_type: "log", "warning" or "error"

    Behavior:
        - Sinks registered: record is broadcast to all of them
        - No sinks: printed to stderr if msg_type ≥ settings.LOG_LEVEL
    """
    if log_manager.has_sinks:
        payload: Dict[str, Any] = {"msg_type": msg_type, "message": str(message)}
        log_manager.broadcast(payload)
        return

    if _LEVELS.get(msg_type, 0) >= _LEVELS[settings.LOG_LEVEL]:
        print(message, file=sys.stderr)


# ============================================================
# GLOBAL LOG MANAGER INSTANCE
# ============================================================
log_manager = LogManager()
