"""CSV files with ``#`` comment headers, atomic writes and key-value reports."""

from __future__ import annotations

import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import RNG_ALGORITHM, JumpTrace

TRACE_KEYS = ("initial_branch", "total_duration", "kick_count", "seed", "stream", "initial_sign")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ",".join(fmt(v) for v in value)
    return str(value)


def header_lines(tool: str, meta) -> list[str]:
    lines = [f"# {tool} (mrfm_jumps {__version__})", f"# rng = {RNG_ALGORITHM}"]
    for key, value in meta:
        if key == "rng":
            continue
        lines.append(f"# {key} = {fmt(value)}")
    return lines


def parse_header(lines) -> dict:
    meta = {}
    for line in lines:
        if not line.startswith("#") or "=" not in line:
            continue
        key, _, value = line[1:].partition("=")
        value = value.strip()
        if value.endswith("]") and "  [" in value:
            value = value[: value.rindex("  [")]
        meta[key.strip()] = value
    return meta


def csv_text(header: list[str], columns, rows) -> str:
    out = list(header)
    out.append(",".join(columns))
    out.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename; ``-`` means stdout."""
    if str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent if str(path.parent) else ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def jumps_csv(trace: JumpTrace, meta) -> str:
    trace_meta = [(f"trace.{k}", getattr(trace, k)) for k in TRACE_KEYS]
    rows = ((i, t) for i, t in enumerate(trace.jump_times))
    return csv_text(header_lines("simulate", list(meta) + trace_meta), ("jump_index", "jump_time"), rows)


def kicks_csv(trace: JumpTrace, meta) -> str:
    rows = ((i, k.time, k.sign_after) for i, k in enumerate(trace.kicks))
    return csv_text(header_lines("simulate kicks", meta), ("index", "time", "sign_after"), rows)


def read_jumps(source) -> tuple[JumpTrace, dict]:
    """Load a jumps CSV (path or ``-`` for stdin) back into a :class:`JumpTrace`."""
    if str(source) == "-":
        text = sys.stdin.read()
    else:
        text = Path(source).read_text()
    lines = text.splitlines()
    meta = parse_header(lines)
    missing = [k for k in ("trace.initial_branch", "trace.total_duration") if k not in meta]
    if missing:
        raise ValueError(f"{source}: not a jumps file, header lacks {missing}")
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    if not data or data[0].split(",") != ["jump_index", "jump_time"]:
        raise ValueError(f"{source}: expected columns jump_index,jump_time")
    times = np.array([float(ln.split(",")[1]) for ln in data[1:]])
    stream = meta.get("trace.stream", "")
    trace = JumpTrace(
        jump_times=times,
        jump_kicks=np.zeros(len(times), dtype=np.int64),
        initial_branch=int(meta["trace.initial_branch"]),
        total_duration=float(meta["trace.total_duration"]),
        kick_count=int(meta.get("trace.kick_count", 0)),
        seed=int(meta.get("trace.seed", 0)),
        stream=tuple(int(s) for s in stream.split(",") if s),
        initial_sign=int(meta.get("trace.initial_sign", 1)),
    )
    return trace, meta


def report_text(report: dict) -> str:
    return "".join(f"{k} = {fmt(v)}\n" for k, v in report.items())


def report_json(report: dict) -> str:
    def clean(v):
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            return None if not math.isfinite(v) else float(v)
        if isinstance(v, tuple):
            return list(v)
        return v

    return json.dumps({k: clean(v) for k, v in report.items()}, indent=2) + "\n"
