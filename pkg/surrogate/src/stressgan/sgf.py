"""Reader/writer for SGF1 record files and the dataset manifest.

Implements the published interchange format: little-endian header
(magic ``SGF1``, u32 version, u32 case_count, u32 m, u32 channels), then per
record a u64 case id, ``channels`` planes of m x m float32, and a u32 CRC32
of the record body. Datasets carry 4 channels (geom_bc, load_x, load_y,
von_mises); prediction files carry 1 channel (von_mises).
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"SGF1"
VERSION = 1
HEADER = struct.Struct("<4sIIII")
CASE_ID = struct.Struct("<Q")
CRC = struct.Struct("<I")

RECORDS_FILENAME = "records.sgf1"
MANIFEST_FILENAME = "manifest.json"


class FormatError(ValueError):
    """Record file or manifest violates the interchange format."""


def read_records(path):
    """Return (m, channels, ids, planes): ids is int64 (n,), planes is
    float32 (n, channels, m, m). Validates magic, version, and checksums."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, count, m, channels = HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    plane_bytes = channels * m * m * 4
    record_bytes = CASE_ID.size + plane_bytes + CRC.size
    if len(raw) != HEADER.size + count * record_bytes:
        raise FormatError(f"{path}: size mismatch for {count} records")
    ids = np.empty(count, dtype=np.int64)
    planes = np.empty((count, channels, m, m), dtype=np.float32)
    offset = HEADER.size
    for k in range(count):
        body = raw[offset:offset + CASE_ID.size + plane_bytes]
        (stored,) = CRC.unpack_from(raw, offset + CASE_ID.size + plane_bytes)
        if zlib.crc32(body) & 0xFFFFFFFF != stored:
            raise FormatError(f"{path}: checksum mismatch at record {k}")
        (ids[k],) = CASE_ID.unpack_from(body, 0)
        planes[k] = np.frombuffer(body, dtype="<f4", offset=CASE_ID.size).reshape(
            channels, m, m)
        offset += record_bytes
    return m, channels, ids, planes


def write_predictions(path, m, ids, fields):
    """Write a 1-channel prediction file aligned by case id."""
    fields = np.ascontiguousarray(fields, dtype=np.float32)
    if fields.shape != (len(ids), m, m):
        raise FormatError(f"prediction fields must be shaped {(len(ids), m, m)}")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, len(ids), m, 1))
        for case_id, field in zip(ids, fields):
            body = CASE_ID.pack(int(case_id)) + field.tobytes()
            fh.write(body)
            fh.write(CRC.pack(zlib.crc32(body) & 0xFFFFFFFF))


def read_manifest(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("format_version") != 1:
        raise FormatError(f"{path}: unsupported manifest version")
    return data


def dataset_paths(directory):
    directory = Path(directory)
    return directory / RECORDS_FILENAME, directory / MANIFEST_FILENAME


def load_dataset(directory, split: str | None = None, side: str = "train"):
    """Load a dataset directory as (m, ids, inputs, targets).

    inputs is float32 (n, 3, m, m): geom_bc, load_x, load_y; targets is
    float32 (n, 1, m, m). ``split``/``side`` select a manifest split subset.
    """
    records_path, manifest_path = dataset_paths(directory)
    manifest = read_manifest(manifest_path)
    m, channels, ids, planes = read_records(records_path)
    if channels != 4:
        raise FormatError(f"{records_path}: expected 4-channel dataset records")
    if m != manifest["m"]:
        raise FormatError(f"{records_path}: m={m} but manifest says {manifest['m']}")
    if split is not None:
        if split not in manifest.get("splits", {}):
            raise FormatError(f"manifest has no split named {split!r}")
        wanted = set(manifest["splits"][split][side])
        keep = np.array([k for k, case_id in enumerate(ids) if int(case_id) in wanted])
        if keep.size == 0:
            raise FormatError(f"split {split!r} side {side!r} selects no records")
        ids, planes = ids[keep], planes[keep]
    return m, ids, planes[:, :3], planes[:, 3:]
