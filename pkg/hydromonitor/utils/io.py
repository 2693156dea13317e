import csv
import hashlib
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence, Union

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Serialize a float with 9 significant digits."""
    return f"{float(value):.9g}"


def format_row(row: Sequence) -> list:
    return [format_float(v) if isinstance(v, float) else v for v in row]


def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """
    Write bytes so that readers never observe a partially written file.

    Args:
        path: Destination file
        payload: Complete file content
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    finally:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """
    Write a CSV file atomically.

    Returns:
        Number of data rows written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(format_row(row))
                count += 1
        os.replace(tmp_name, path)
    finally:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
    return count


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
