"""File plumbing shared by the harness and the CLI: atomic writes, CSV with a
config comment line, flat config files and rule schedules."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .games import Rules


class FileError(OSError):
    pass


def atomic_write(path, text: str):
    """Write ``text`` to ``path`` through a temp file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc


def config_comment(config: dict) -> str:
    return "# config " + json.dumps(config, sort_keys=True, default=str) + "\n"


def csv_text(header, rows, config: dict | None = None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write(config_comment(config))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, Rules):
        return v.value
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".6f")
    return v


def read_csv(path):
    """``(header, rows)`` of a CSV file, skipping ``#`` comment lines."""
    lines = [ln for ln in read_text(path).splitlines() if not ln.startswith("#")]
    if not lines:
        raise FileError(f"{path} is empty")
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


# -- label grids --------------------------------------------------------------

def grid_csv(cold: np.ndarray, rules, config: dict | None = None) -> str:
    """Row-major 0 (cold) / 1 (hot) grid under a ``rows,cols,game`` header."""
    rows, cols = cold.shape
    body = [[rows, cols, Rules.parse(rules).value]]
    body += (~cold).astype(int).tolist()
    return csv_text(["rows", "cols", "game"], body, config)


def read_grid_csv(path):
    """``(rules, hot array)`` from a file written by ``grid_csv``."""
    header, rows = read_csv(path)
    if header != ["rows", "cols", "game"]:
        raise FileError(f"{path}: not a label grid")
    (r, c, game), body = rows[0], rows[1:]
    hot = np.array(body, dtype=int).astype(bool)
    if hot.shape != (int(r), int(c)):
        raise FileError(f"{path}: grid shape {hot.shape} does not match header")
    return Rules.parse(game), hot


# -- configs and schedules ----------------------------------------------------

def load_config(path) -> dict:
    """Flat JSON object of scalar values; keys may use dashes or underscores."""
    try:
        doc = json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    out = {}
    for k, v in doc.items():
        if isinstance(v, (dict, list)):
            raise ValueError(f"{path}: key {k!r} must be a scalar")
        out[k.replace("-", "_")] = v
    return out


def read_schedule(path) -> dict:
    """Rule schedule: ``period_index,game_name`` per line; ``#`` comments allowed."""
    out = {}
    for n, line in enumerate(read_text(path).splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            idx, game = (t.strip() for t in line.split(","))
            out[int(idx)] = Rules.parse(game)
        except ValueError as exc:
            raise ValueError(f"{path}:{n}: expected 'period_index,game_name'") from exc
    if not out:
        raise ValueError(f"{path}: empty schedule")
    return out
