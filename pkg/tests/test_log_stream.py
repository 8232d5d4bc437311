import json

from src.Core.config import settings
from src.Core.log_stream import LogManager, log_from_thread, log_manager
from src.Core.sink_base import SinkManager


class TestSinkManager:
    def test_broadcast_adds_timestamp(self):
        manager = SinkManager()
        seen = []
        manager.register(seen.append)
        manager.register(seen.append)
        manager.broadcast({"message": "hello"})
        assert len(seen) == 1
        assert seen[0]["timestamp"].endswith("Z")

    def test_failing_sink_is_dropped(self):
        manager = SinkManager()
        seen = []

        def broken(record):
            raise RuntimeError("sink down")

        manager.register(broken)
        manager.register(seen.append)
        manager.broadcast({"message": "one"})
        manager.broadcast({"message": "two"})
        assert [r["message"] for r in seen] == ["one", "two"]
        assert broken not in manager.sinks

    def test_unregister_is_idempotent(self):
        manager = SinkManager()
        manager.unregister(print)
        manager.register(print)
        manager.unregister(print)
        manager.unregister(print)
        assert not manager.has_sinks


class TestLogStream:
    def test_records_reach_sinks(self, captured_logs):
        log_from_thread("[SINKHORN] 3 iterations")
        log_from_thread("[PIPELINE] careful", "warning")
        assert [(r["msg_type"], r["message"]) for r in captured_logs] == [
            ("log", "[SINKHORN] 3 iterations"),
            ("warning", "[PIPELINE] careful"),
        ]

    def test_console_fallback(self, capsys):
        assert not log_manager.has_sinks
        log_from_thread("[IO] visible")
        assert "[IO] visible" in capsys.readouterr().err

    def test_console_level_filter(self, capsys, monkeypatch):
        monkeypatch.setattr(settings, "LOG_LEVEL", "error")
        log_from_thread("[IO] quiet")
        log_from_thread("[IO] loud", "error")
        err = capsys.readouterr().err
        assert "quiet" not in err and "loud" in err

    def test_file_sink(self, tmp_path):
        manager = LogManager()
        path = tmp_path / "log.jsonl"
        sink = manager.file_sink(path)
        manager.register(sink)
        manager.broadcast({"msg_type": "log", "message": "[NYSTROM] round 1"})
        manager.broadcast({"msg_type": "error", "message": "[CLI] boom"})
        lines = path.read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["message"] for line in lines] == ["[NYSTROM] round 1", "[CLI] boom"]
