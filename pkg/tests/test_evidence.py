"""Tests for evidence logging."""

import json
import os
import tempfile

from src.evidence import append_event, create_event, read_events


class TestCreateEvent:
    def test_basic_event(self):
        event = create_event("ssf", {"h0": "a.mtx", "h1": "b.mtx"})
        assert event.command == "ssf"
        assert event.inputs == {"h0": "a.mtx", "h1": "b.mtx"}
        assert event.outcome == "computed"
        assert event.exit_code == 0
        assert event.ts.endswith("Z")
        assert "T" in event.ts  # ISO 8601

    def test_failed_verification(self):
        event = create_event("verify", {"seed": "7"}, outcome="checks-failed", exit_code=1)
        assert event.outcome == "checks-failed"
        assert event.exit_code == 1

    def test_inputs_are_copied(self):
        inputs = {"h0": "a.mtx"}
        event = create_event("flow", inputs)
        inputs["h0"] = "changed.mtx"
        assert event.inputs["h0"] == "a.mtx"


class TestAppendAndRead:
    def test_append_creates_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "evidence.jsonl")
            assert not os.path.exists(log_path)

            append_event(create_event("ssf", {"h0": "a.mtx"}), log_path)

            with open(log_path, "r") as f:
                lines = f.readlines()
            assert len(lines) == 1
            parsed = json.loads(lines[0])
            assert parsed["command"] == "ssf"
            assert list(parsed) == sorted(parsed)

    def test_append_does_not_overwrite(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "evidence.jsonl")
            append_event(create_event("ssf", {}), log_path)
            append_event(create_event("flow", {}, outcome="input-error", exit_code=2), log_path)

            with open(log_path, "r") as f:
                lines = f.readlines()
            assert len(lines) == 2
            assert json.loads(lines[0])["command"] == "ssf"
            assert json.loads(lines[1])["exit_code"] == 2

    def test_read_events(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "evidence.jsonl")
            for seed in range(3):
                append_event(create_event("verify", {"seed": str(seed)}, "checks-passed"), log_path)

            events = read_events(log_path)
            assert len(events) == 3
            assert events[0].inputs == {"seed": "0"}
            assert events[2].outcome == "checks-passed"

    def test_read_nonexistent_returns_empty(self):
        assert read_events("/tmp/nonexistent_specshift_evidence.jsonl") == []

    def test_creates_parent_directories(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "nested", "dir", "evidence.jsonl")
            append_event(create_event("decompose", {}), log_path)
            assert os.path.isfile(log_path)

    def test_malformed_lines_skipped(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            log_path = os.path.join(tmpdir, "evidence.jsonl")
            with open(log_path, "w") as f:
                f.write('{"command":"ssf","exit_code":0,"inputs":{},"outcome":"computed","ts":"2026-01-01T00:00:00Z"}\n')
                f.write("this is not json\n")
                f.write('{"command":"flow","exit_code":2,"inputs":{},"outcome":"input-error","ts":"2026-01-02T00:00:00Z"}\n')

            events = read_events(log_path)
            assert [e.command for e in events] == ["ssf", "flow"]
            assert events[1].exit_code == 2
