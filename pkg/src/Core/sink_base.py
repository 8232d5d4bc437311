"""
Sink Base Manager Module
========================

Thread-safe foundation for delivering records to any number of registered
sinks (callables taking one dict). Used by the log stream; the CLI registers a
JSON-lines file sink and tests register capture sinks.

Key Features:
-------------
1. **Thread Safety**: Lock-protected sink list; the list is copied before
   delivery so the lock is never held while a sink runs
2. **Graceful Degradation**: A sink that raises is unregistered and the
   remaining sinks still receive the record
3. **Idempotent Lifecycle**: register/unregister may be called repeatedly

Usage Example:
-------------
    manager = SinkManager()
    manager.register(records.append)
    manager.broadcast({"msg_type": "log", "message": "[SINKHORN] converged"})
    manager.unregister(records.append)
"""

import threading
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List

Sink = Callable[[Dict[str, Any]], None]


class SinkManager:
    """
    Base manager for concurrent record delivery.

    Attributes:
        sinks (List[Sink]): Currently registered sinks
        _lock (threading.Lock): Guards self.sinks
    """

    def __init__(self):
        self.sinks: List[Sink] = []
        self._lock = threading.Lock()

    def register(self, sink: Sink) -> None:
        """Add a sink; registering the same sink twice is a no-op."""
        with self._lock:
            if sink not in self.sinks:
                self.sinks.append(sink)

    def unregister(self, sink: Sink) -> None:
        """Remove a sink if present (idempotent)."""
        with self._lock:
            if sink in self.sinks:
                self.sinks.remove(sink)

    @property
    def has_sinks(self) -> bool:
        with self._lock:
            return len(self.sinks) > 0

    def broadcast(self, record: Dict[str, Any]) -> None:
        """
        Deliver a record to every sink.

        A timestamp (UTC ISO-8601 with 'Z') is added when missing. Sinks that
        raise are collected and unregistered after the delivery pass.
        """
        record.setdefault(
            "timestamp",
            datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        )

        with self._lock:
            current = list(self.sinks)

        failed = []
        for sink in current:
            try:
                sink(record)
            except Exception:
                failed.append(sink)

        for sink in failed:
            self.unregister(sink)
