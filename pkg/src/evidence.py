"""Append-only run log in JSONL format."""

import json
import os
from datetime import datetime, timezone
from typing import Dict, List

from src.models import EvidenceEvent


def create_event(
    command: str,
    inputs: Dict[str, str],
    outcome: str = "computed",
    exit_code: int = 0,
) -> EvidenceEvent:
    """Build an EvidenceEvent with the current UTC timestamp.

    Args:
        command: CLI subcommand that ran.
        inputs: Input names mapped to file paths or option values.
        outcome: One of ``computed``, ``checks-passed``, ``checks-failed``,
            ``input-error``.
        exit_code: Process exit code of the run.
    """
    ts = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return EvidenceEvent(ts=ts, command=command, inputs=dict(inputs), outcome=outcome, exit_code=exit_code)


def append_event(event: EvidenceEvent, log_path: str) -> None:
    """Append a single event as a JSONL line, creating the file if needed.

    Never overwrites existing entries.
    """
    parent = os.path.dirname(log_path)
    if parent and not os.path.isdir(parent):
        os.makedirs(parent, exist_ok=True)

    line = json.dumps({
        "ts": event.ts,
        "command": event.command,
        "inputs": event.inputs,
        "outcome": event.outcome,
        "exit_code": event.exit_code,
    }, sort_keys=True)

    with open(log_path, "a") as f:
        f.write(line + "\n")


def read_events(log_path: str) -> List[EvidenceEvent]:
    """Read all events from a JSONL log. Malformed lines are skipped."""
    if not os.path.isfile(log_path):
        return []

    events = []
    with open(log_path, "r") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError:
                continue
            events.append(EvidenceEvent(
                ts=raw.get("ts", ""),
                command=raw.get("command", ""),
                inputs=raw.get("inputs", {}),
                outcome=raw.get("outcome", ""),
                exit_code=raw.get("exit_code", 0),
            ))
    return events
