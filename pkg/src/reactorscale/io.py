"""Atomic CSV/JSON writers and structured diagnostics."""

import json
import math
import os
import sys
import tempfile

import numpy as np


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_text(header, rows, units=None):
    """Comma-separated text with a header row; ``units`` go in brackets after names."""
    if units is not None:
        if len(units) != len(header):
            raise ValueError("units must match header length")
        names = [f"{h} [{u}]" if u else h for h, u in zip(header, units)]
    else:
        names = list(header)
    lines = [",".join(names)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, units=None):
    return _atomic_write(path, csv_text(header, rows, units))


def read_csv(path):
    """(header, float array) from a file written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        body = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    data = np.array([[float(x) for x in r] for r in body]) if body else np.empty((0, len(header)))
    return header, data


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _finite(o):
    # JSON has no inf/nan; write them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    return o


def json_text(obj):
    return json.dumps(_finite(json.loads(json.dumps(obj, default=_json_default))), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    return _atomic_write(path, json_text(obj))


def emit_diagnostic(level, code, message, stream=None, **context):
    """One JSON object per line on the error stream."""
    record = {"level": level, "code": code, "message": message}
    if context:
        record["context"] = _finite(json.loads(json.dumps(context, default=_json_default)))
    stream = sys.stderr if stream is None else stream
    stream.write(json.dumps(record, sort_keys=True) + "\n")
    stream.flush()
    return record
