"""SGF1 binary record files and the JSON dataset manifest.

Record file layout (little-endian):

* header: magic ``SGF1``, u32 version, u32 case_count, u32 m,
  u32 channels_per_record
* per record: u64 case_id, ``channels_per_record`` planes of m x m float32
  in row-major order, u32 CRC32 of the record bytes (case_id + planes)

Datasets store 4 channels per record (geom_bc as float, load_x, load_y,
von_mises); prediction files store 1 channel (von_mises only). The manifest
is a JSON sidecar carrying generation parameters, per-case provenance, and
named split assignments.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, SplitConflictError, UnsupportedVersionError, ValidationError

MAGIC = b"SGF1"
FORMAT_VERSION = 1
DATASET_CHANNELS = 4
PREDICTION_CHANNELS = 1
CHANNEL_NAMES = ("geom_bc", "load_x", "load_y", "von_mises")

_HEADER = struct.Struct("<4sIIII")
_CASE_ID = struct.Struct("<Q")
_CRC = struct.Struct("<I")

RECORDS_FILENAME = "records.sgf1"
MANIFEST_FILENAME = "manifest.json"


@dataclass(frozen=True)
class RecordHeader:
    version: int
    case_count: int
    m: int
    channels: int


@dataclass(frozen=True)
class Record:
    case_id: int
    channels: np.ndarray  # (n_channels, m, m) float32


class RecordWriter:
    """Streaming writer; the header's case count is patched on close."""

    def __init__(self, path, m: int, channels: int = DATASET_CHANNELS):
        self.path = Path(path)
        self.m = m
        self.channels = channels
        self.count = 0
        self._fh = open(self.path, "wb")
        self._fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, 0, m, channels))

    def write(self, case_id: int, planes: np.ndarray):
        planes = np.ascontiguousarray(planes, dtype=np.float32)
        if planes.shape != (self.channels, self.m, self.m):
            raise ValidationError(
                f"record must be shaped {(self.channels, self.m, self.m)}, got {planes.shape}"
            )
        body = _CASE_ID.pack(case_id) + planes.tobytes()
        self._fh.write(body)
        self._fh.write(_CRC.pack(zlib.crc32(body) & 0xFFFFFFFF))
        self.count += 1

    def close(self):
        if self._fh.closed:
            return
        self._fh.seek(_HEADER.size - 12)
        self._fh.write(struct.pack("<I", self.count))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_header(path) -> RecordHeader:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)", byte_offset=len(raw))
    magic, version, count, m, channels = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", byte_offset=0)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: unsupported format version {version}", byte_offset=4
        )
    return RecordHeader(version, count, m, channels)


def iter_records(path):
    """Yield (header, record) pairs, validating shapes and checksums."""
    header = read_header(path)
    plane_bytes = header.channels * header.m * header.m * 4
    record_bytes = _CASE_ID.size + plane_bytes + _CRC.size
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        for index in range(header.case_count):
            offset = _HEADER.size + index * record_bytes
            body = fh.read(_CASE_ID.size + plane_bytes)
            crc_raw = fh.read(_CRC.size)
            if len(body) < _CASE_ID.size + plane_bytes or len(crc_raw) < _CRC.size:
                raise FormatError(
                    f"{path}: truncated at record {index}",
                    record_index=index, byte_offset=offset,
                )
            (stored_crc,) = _CRC.unpack(crc_raw)
            if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
                raise FormatError(
                    f"{path}: checksum mismatch at record {index}",
                    record_index=index, byte_offset=offset,
                )
            (case_id,) = _CASE_ID.unpack(body[:_CASE_ID.size])
            planes = np.frombuffer(body[_CASE_ID.size:], dtype="<f4").reshape(
                header.channels, header.m, header.m
            )
            yield header, Record(int(case_id), planes.copy())
        if fh.read(1):
            raise FormatError(
                f"{path}: trailing bytes after {header.case_count} records",
                byte_offset=_HEADER.size + header.case_count * record_bytes,
            )


def read_records(path) -> tuple[RecordHeader, list[Record]]:
    header = read_header(path)
    return header, [record for _, record in iter_records(path)]


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

MANIFEST_VERSION = 1


@dataclass
class DatasetManifest:
    """Dataset-level metadata: parameters, provenance, splits."""

    name: str
    family: str
    m: int
    element_size: float
    material: dict
    seed: int
    normalization: str
    counts: dict
    total_enumerated: int
    case_count: int
    categories: list
    provenance: list  # rows [case_id, geometry_id, bc_id, load_id, orientation, magnitude]
    failures: list = field(default_factory=list)
    splits: dict = field(default_factory=dict)
    format_version: int = MANIFEST_VERSION

    def case_ids(self) -> list[int]:
        return [int(row[0]) for row in self.provenance]

    def provenance_by_id(self) -> dict:
        return {int(row[0]): tuple(row[1:]) for row in self.provenance}

    def category_of(self, case_id: int) -> str:
        geometry_id = int(self.provenance_by_id()[case_id][0])
        return self.categories[geometry_id]

    def add_split(self, name: str, train: list[int], test: list[int]):
        if name in self.splits:
            raise SplitConflictError(f"split {name!r} already exists in manifest")
        known = set(self.case_ids())
        assigned = list(train) + list(test)
        if set(assigned) != known or len(assigned) != len(known):
            raise ValidationError(
                f"split {name!r} must assign every case to exactly one side"
            )
        self.splits[name] = {"train": [int(i) for i in train], "test": [int(i) for i in test]}

    def split_ids(self, name: str, side: str) -> list[int]:
        if name not in self.splits:
            raise ValidationError(f"manifest has no split named {name!r}")
        if side not in ("train", "test"):
            raise ValidationError(f"split side must be 'train' or 'test', got {side!r}")
        return list(self.splits[name][side])

    def to_json_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "name": self.name,
            "family": self.family,
            "m": self.m,
            "element_size": self.element_size,
            "material": self.material,
            "seed": self.seed,
            "normalization": self.normalization,
            "counts": self.counts,
            "total_enumerated": self.total_enumerated,
            "case_count": self.case_count,
            "categories": list(self.categories),
            "provenance": [list(row) for row in self.provenance],
            "failures": [list(row) for row in self.failures],
            "splits": self.splits,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DatasetManifest":
        version = data.get("format_version")
        if version != MANIFEST_VERSION:
            raise UnsupportedVersionError(f"unsupported manifest version {version}")
        return cls(
            name=data["name"],
            family=data["family"],
            m=int(data["m"]),
            element_size=float(data["element_size"]),
            material=dict(data["material"]),
            seed=int(data["seed"]),
            normalization=data["normalization"],
            counts=dict(data["counts"]),
            total_enumerated=int(data["total_enumerated"]),
            case_count=int(data["case_count"]),
            categories=list(data["categories"]),
            provenance=[list(row) for row in data["provenance"]],
            failures=[list(row) for row in data.get("failures", [])],
            splits=dict(data.get("splits", {})),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid manifest JSON: {exc}") from exc
        return cls.from_json_dict(data)


def dataset_paths(directory) -> tuple[Path, Path]:
    directory = Path(directory)
    return directory / RECORDS_FILENAME, directory / MANIFEST_FILENAME


def read_dataset(directory) -> tuple[DatasetManifest, list[Record]]:
    """Load a dataset directory: manifest plus all validated records."""
    records_path, manifest_path = dataset_paths(directory)
    manifest = DatasetManifest.load(manifest_path)
    header, records = read_records(records_path)
    if header.m != manifest.m:
        raise FormatError(
            f"{records_path}: record mesh size {header.m} != manifest {manifest.m}"
        )
    if header.case_count != manifest.case_count:
        raise FormatError(
            f"{records_path}: {header.case_count} records but manifest lists {manifest.case_count}"
        )
    return manifest, records
