"""Reference channel adapter: follow a JSONL file, post each record.

Channel monitors (chat exports, commit hooks, meeting notes) often end
up as a growing file of JSON lines.  This adapter tails such a file and
delivers every complete line as one event payload, surviving restarts
by starting at the current file end unless told otherwise.  The
delivery callable is injected so tests run without a network.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Callable, Optional


def follow_file(
    path: str | Path,
    deliver: Callable[[dict], None],
    *,
    should_stop: Callable[[], bool],
    poll_seconds: float = 0.2,
    from_start: bool = False,
) -> int:
    """Deliver each appended JSON line until should_stop(); returns the
    number of delivered records.  Broken lines raise ValueError with
    the line number, because silently dropping events would defeat the
    point of the log."""
    path = Path(path)
    delivered = 0
    lineno = 0
    position = 0 if from_start or not path.exists() else path.stat().st_size
    buffer = ""
    while True:
        if path.exists():
            with path.open(encoding="utf-8") as fh:
                fh.seek(position)
                chunk = fh.read()
                position = fh.tell()
            buffer += chunk
            while "\n" in buffer:
                line, buffer = buffer.split("\n", 1)
                lineno += 1
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: broken record: {exc}")
                deliver(record)
                delivered += 1
        if should_stop():
            return delivered
        time.sleep(poll_seconds)


def http_deliverer(
    url: str, token: Optional[str] = None
) -> Callable[[dict], None]:
    """POSTs records to the ingestion endpoint; raises on any non-2xx
    answer except 409, which is reported with the record id."""
    import httpx

    headers = {}
    if token is not None:
        headers["Authorization"] = f"Bearer {token}"

    def deliver(record: dict) -> None:
        answer = httpx.post(url, json=record, headers=headers, timeout=10.0)
        if answer.status_code == 409:
            raise ValueError(
                f"record {record.get('id')!r} clashes with stored content: "
                f"{answer.text}"
            )
        answer.raise_for_status()

    return deliver
