"""Key normalization, confirmation prompts, table formatting and per-object memos."""

from __future__ import annotations

import re
import sys
from typing import Any, Callable, Hashable, TypeVar

T = TypeVar("T")


def normalize_key(name: str) -> str:
    """Normalize a settings key: lowercase, hyphens and dots become underscores."""
    return re.sub(r"[-_.]+", "_", name).lower()


def confirm(message: str, default_yes: bool = True) -> bool:
    """Simple y/n confirmation. Returns True/False. 'c' or 'cancel' returns False."""
    suffix = "[Y/n]" if default_yes else "[y/N]"
    raw = input(f"{message} {suffix} ").strip().lower()
    if raw in ("c", "cancel"):
        return False
    if raw == "":
        return default_yes
    return raw in ("y", "yes")


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    """Render a table as aligned columns; trailing spaces are stripped from each line."""
    if not rows:
        return "  (none)"

    col_widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            col_widths[i] = max(col_widths[i], len(cell))

    lines = ["  ".join(h.ljust(col_widths[i]) for i, h in enumerate(headers)),
             "  ".join("-" * col_widths[i] for i in range(len(headers)))]
    for row in rows:
        lines.append("  ".join(cell.ljust(col_widths[i]) for i, cell in enumerate(row)))
    return "\n".join(line.rstrip() for line in lines)


def print_table(headers: list[str], rows: list[list[str]]) -> None:
    """Print a simple formatted table to stdout."""
    print(format_table(headers, rows))


def error(message: str) -> None:
    """Print an error message to stderr."""
    print(f"Error: {message}", file=sys.stderr)


def info(message: str) -> None:
    """Print an info message."""
    print(message)


def memo_on(owner: Any, name: Hashable, build: Callable[[], T], *keys: Any) -> T:
    """A value cached in ``owner.__dict__``, released together with its owner.

    ``keys`` are further objects the value depends on; they are held alongside
    the value and compared by identity.
    """
    store = owner.__dict__.setdefault("_memo", {})
    slot = (name,) + tuple(id(k) for k in keys)
    hit = store.get(slot)
    if hit is None or any(a is not b for a, b in zip(hit[0], keys)):
        hit = (keys, build())
        store[slot] = hit
    return hit[1]
