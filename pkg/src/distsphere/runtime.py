"""Worker-count control.

DISTSPHERE_THREADS caps the number of worker threads (default: all cores).
Work is partitioned into disjoint output slices, so results are bit-identical
for every worker count.
"""

from __future__ import annotations

import os

from .errors import UsageError


def worker_cap() -> int:
    raw = os.environ.get("DISTSPHERE_THREADS")
    ncpu = os.cpu_count() or 1
    if raw is None:
        return ncpu
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"DISTSPHERE_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError("DISTSPHERE_THREADS must be >= 1")
    return min(n, ncpu)
