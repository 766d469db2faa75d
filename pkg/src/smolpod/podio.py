"""Persistence formats and run configuration.

Matrices travel in PODMAT1, a deliberately dumb binary layout:
8-byte magic "PODMAT1\\0", rows and cols as little-endian uint64, then
the row-major float64 payload.  Round-trips are bit-exact.

Run configuration is flat UTF-8 ``key=value`` text with dotted keys
('#' starts a comment); CLI overrides use the same syntax.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .validation import ValidationError

MAGIC = b"PODMAT1\x00"


def write_matrix(path, A) -> None:
    A = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype="<f8")))
    if A.ndim != 2:
        raise ValidationError(f"PODMAT1 stores 2-D matrices, got shape {A.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", A.shape[0], A.shape[1]))
        fh.write(A.tobytes())


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not a PODMAT1 file (magic {magic!r})")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        payload = fh.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise ValidationError(f"{path}: truncated PODMAT1 payload")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()


def write_vector(path, v) -> None:
    v = np.asarray(v, dtype=np.float64)
    write_matrix(path, v.reshape(-1, 1))


def read_vector(path) -> np.ndarray:
    A = read_matrix(path)
    if 1 not in A.shape and A.size != 0:
        raise ValidationError(f"{path}: expected a vector, got shape {A.shape}")
    return A.reshape(-1)


def parse_config_text(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config(path, overrides=()) -> dict[str, str]:
    """Read a key=value config file and apply override strings in order."""
    values = parse_config_text(Path(path).read_text(encoding="utf-8"))
    for item in overrides:
        if "=" not in item:
            raise ValidationError(f"override must be key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def dump_config(values: dict[str, str]) -> str:
    return "".join(f"{k}={values[k]}\n" for k in sorted(values))
