"""File containers: complex-sample arrays, grayscale images, sidecar metadata.

Array container: a 64-byte self-describing little-endian header followed by a
row-major complex64 payload.

    offset  size  field
    0       8     magic  b"JRCSAR\\0\\0"
    8       4     version (u32, currently 1)
    12      4     kind (u32: 1 pulse train, 2 echo raster, 3 focused image)
    16      8     rows (u64)
    24      8     cols (u64)
    32      8     sample_rate [Hz] (f64)
    40      8     aux (f64; PRF for rasters/images, 0 otherwise)
    48      16    reserved (zero)
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"JRCSAR\x00\x00"
VERSION = 1
_HEADER = struct.Struct("<8sIIQQdd16x")
assert _HEADER.size == 64

KIND_PULSE = 1
KIND_RASTER = 2
KIND_IMAGE = 3


class ContainerError(IOError):
    """Malformed or mismatched container file."""


def write_array(path, data, *, kind: int, sample_rate: float, aux: float = 0.0) -> None:
    data = np.atleast_2d(np.asarray(data, dtype=np.complex64))
    header = _HEADER.pack(MAGIC, VERSION, kind, data.shape[0], data.shape[1], sample_rate, aux)
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(data).tobytes())


def read_array(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ContainerError(f"{path}: truncated header")
        magic, version, kind, rows, cols, sample_rate, aux = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ContainerError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise ContainerError(f"{path}: unsupported version {version}")
        payload = f.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise ContainerError(f"{path}: truncated payload")
    data = np.frombuffer(payload, dtype=np.complex64).reshape(rows, cols)
    meta = {"kind": kind, "sample_rate": sample_rate, "aux": aux}
    return data, meta


def write_pgm(path, image, *, floor_db: float = -60.0) -> None:
    """8-bit grayscale magnitude image, log-scaled over [floor_db, 0] dB of peak."""
    mag = np.abs(np.asarray(image))
    peak = mag.max()
    if peak <= 0:
        scaled = np.zeros_like(mag)
    else:
        db = 20.0 * np.log10(np.maximum(mag, peak * 10 ** (floor_db / 20.0)) / peak)
        scaled = (db - floor_db) / (-floor_db)
    pix = np.round(255.0 * np.clip(scaled, 0.0, 1.0)).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{pix.shape[1]} {pix.shape[0]}\n255\n".encode())
        f.write(pix.tobytes())


def write_json(path, payload: dict) -> None:
    """Deterministic structured-text sidecar (sorted keys, fixed separators)."""
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
