"""Atomic file output and fixed-precision tables."""
from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Callable, Iterable, Sequence

FLOAT_FMT = "{:.11e}"  # 12 significant digits


def atomic_write(path: str | Path, write: Callable) -> None:
    """Call ``write(fh)`` on a temporary sibling file, then rename it over ``path``.

    A failure part-way leaves any existing file untouched.
    """
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            write(fh)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _umask() -> int:
    # mkstemp creates files as 0600; give outputs the usual permissions
    mask = os.umask(0)
    os.umask(mask)
    return mask


def _fmt(v) -> str:
    if isinstance(v, (int, str)) and not isinstance(v, bool):
        return str(v)
    return FLOAT_FMT.format(float(v))


def format_csv(fh, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a header line and rows; floats get 12 significant digits."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    atomic_write(path, lambda fh: format_csv(fh, header, rows))


def write_json(path: str | Path, obj) -> None:
    def _w(fh):
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")

    atomic_write(path, _w)
