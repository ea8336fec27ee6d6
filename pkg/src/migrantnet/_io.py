import contextlib
import csv
import gzip
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

from .errors import MissingInputError

SCHEMA_VERSION = 1


def open_text(path, mode="rt"):
    """Open ``path`` as UTF-8 text, transparently handling ``.gz``."""
    path = Path(path)
    if "r" in mode and not path.is_file():
        raise MissingInputError(f"input not found or unreadable: {path}")
    if path.suffix == ".gz":
        return gzip.open(path, mode, encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def iter_jsonl(path):
    """Yield ``(line_number, record_or_None)``; ``None`` marks a malformed line."""
    with open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                yield lineno, None
                continue
            yield lineno, rec if isinstance(rec, dict) else None


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


@contextlib.contextmanager
def atomic_writer(path):
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        if path.suffix == ".gz":
            raw = os.fdopen(fd, "wb")
            # mtime=0 keeps gzip output byte-stable
            gz = gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="")
            fh = io.TextIOWrapper(gz, encoding="utf-8", newline="")
            with raw, gz, fh:
                yield fh
        else:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    with atomic_writer(path) as fh:
        fh.write(dumps(obj))


def write_jsonl(path, records):
    with atomic_writer(path) as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False, allow_nan=False))
            fh.write("\n")


def write_csv(path, header, rows):
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else fmt(v) for v in row])


def fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_json(path):
    with open_text(path) as fh:
        return json.load(fh)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
