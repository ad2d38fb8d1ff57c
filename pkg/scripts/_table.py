"""Shared output for the experiment scripts."""

from __future__ import annotations

import csv
import sys


def emit(rows: list[dict[str, str]], columns: tuple[str, ...], as_csv: bool) -> None:
    if as_csv:
        w = csv.DictWriter(sys.stdout, columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    widths = {c: max(len(c), *(len(r[c]) for r in rows)) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns).rstrip())
    for r in rows:
        print("  ".join(r[c].ljust(widths[c]) for c in columns).rstrip())
