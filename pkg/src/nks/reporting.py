"""Deterministic, atomically written CSV and JSON outputs.

Every file starts with provenance: the sha256 of the resolved configuration
and the sign conventions in force.  CSV files carry them as leading ``#``
lines followed by a single header row; JSON files carry them as top-level
keys.  Nothing time- or host-dependent is written.
"""
import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path


def config_hash(config):
    """sha256 of the canonical JSON encoding (sorted keys, no whitespace)."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def format_value(v):
    """Shortest round-trip text for floats; non-finite values spelled out."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(float(v))
    if v is None:
        return ""
    if hasattr(v, "item"):
        return format_value(v.item())
    return str(v)


def json_safe(obj):
    """Replace numpy scalars and non-finite floats so the document is strict JSON."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return format_value(obj)
    return obj


def atomic_write(path, text):
    """Write text to path via a temporary file in the same directory and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def provenance(cfg_hash, conventions):
    return {"config_sha256": cfg_hash, "sign_conventions": dict(sorted(conventions.items()))}


def render_csv(columns, rows, cfg_hash, conventions):
    buf = io.StringIO()
    buf.write(f"# config_sha256={cfg_hash}\n")
    conv = ",".join(f"{k}={conventions[k]:+d}" for k in sorted(conventions))
    buf.write(f"# sign_conventions={conv}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def render_json(document, cfg_hash, conventions):
    doc = dict(provenance(cfg_hash, conventions))
    doc.update(document)
    return json.dumps(json_safe(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_csv(path, columns, rows, cfg_hash, conventions):
    return atomic_write(path, render_csv(columns, rows, cfg_hash, conventions))


def write_json(path, document, cfg_hash, conventions):
    return atomic_write(path, render_json(document, cfg_hash, conventions))


def read_csv(path):
    """(comment lines, header, rows as lists of strings)."""
    comments, body = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        (comments if line.startswith("#") else body).append(line)
    reader = list(csv.reader(body))
    return comments, reader[0], reader[1:]
