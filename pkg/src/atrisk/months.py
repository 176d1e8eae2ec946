"""Month-stamp helpers. Stamps are ``"YYYY-MM"`` strings."""

from __future__ import annotations

import re

_ISO = re.compile(r"^(\d{4})-(\d{1,2})(?:-(\d{1,2}))?$")
_US = re.compile(r"^(\d{1,2})/(\d{1,2})/(\d{4})$")


def parse_month(text: str) -> str:
    """Normalise ``M/D/YYYY``, ``YYYY-MM`` or ``YYYY-MM-DD`` to ``YYYY-MM``.

    Raises ``ValueError`` on anything else.
    """
    text = text.strip()
    m = _ISO.match(text)
    if m:
        year, month = int(m.group(1)), int(m.group(2))
    else:
        m = _US.match(text)
        if not m:
            raise ValueError(f"unrecognised date {text!r}")
        year, month = int(m.group(3)), int(m.group(1))
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range in {text!r}")
    return f"{year:04d}-{month:02d}"


def month_index(stamp: str) -> int:
    year, month = stamp.split("-")
    return int(year) * 12 + int(month) - 1


def from_index(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def add_months(stamp: str, n: int) -> str:
    return from_index(month_index(stamp) + n)


def month_range(start: str, end: str) -> list[str]:
    return [from_index(i) for i in range(month_index(start), month_index(end) + 1)]
