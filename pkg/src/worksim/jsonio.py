"""Canonical JSON encoding used for every persisted or compared document.

Same value in, same bytes out, on any host: keys sorted, separators fixed,
UTF-8, no trailing newline games. All determinism tests compare these bytes
directly.
"""

from __future__ import annotations

import json
from datetime import datetime

CLOCK_FORMAT = "%Y-%m-%d %H:%M"


def format_clock(t: datetime) -> str:
    return t.strftime(CLOCK_FORMAT)


def parse_clock(text: str) -> datetime:
    """Accepts 'YYYY-MM-DD HH:MM'; seconds, if present, are dropped."""
    text = text.strip()
    for fmt in (CLOCK_FORMAT, "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S"):
        try:
            parsed = datetime.strptime(text, fmt)
            return parsed.replace(second=0, microsecond=0)
        except ValueError:
            continue
    raise ValueError(f"unrecognized clock value: {text!r}")


def canonical_dumps(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(value) -> bytes:
    return (canonical_dumps(value) + "\n").encode("utf-8")


def canonical_loads(data: bytes | str):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return json.loads(data)
