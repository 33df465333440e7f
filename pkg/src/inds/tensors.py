"""LTNS tensor container and the JSON Lines video manifest.

LTNS layout (little endian throughout):
    bytes 0-3   magic ``LTNS``
    u32         version, currently 1
    u32         dtype code, currently 1 (float32)
    u32         ndim
    ndim * u64  extents
    payload     product(extents) float32 scalars, row-major
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"LTNS"
VERSION = 1
DTYPE_F32 = 1

LABELS = ("real", "generated")


class LtnsFormatError(ValueError):
    """Malformed LTNS file; carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class VideoManifestEntry:
    """One video: where its tensor lives and how it is labeled."""

    id: str
    tensor_path: str
    label: str
    source: str
    # kind disambiguates what the tensor holds: pixel "frames" (T,H,W,C),
    # "latents" (T,C,H,W) still needing inversion, or precomputed "noise"
    # sequences that skip inversion entirely.
    kind: str = "latents"

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.kind not in ("frames", "latents", "noise"):
            raise ValueError(f"unknown tensor kind {self.kind!r}")


def write_tensor(path: str | Path, t: np.ndarray) -> None:
    """Write a tensor as LTNS. Data must be finite; stored as float32."""
    arr = np.ascontiguousarray(t, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite tensor data")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, DTYPE_F32, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.astype("<f4").tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Read an LTNS file back into a float32 array, validating the header."""
    blob = Path(path).read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise LtnsFormatError(f"bad magic {blob[:4]!r}", 0)
    if len(blob) < 16:
        raise LtnsFormatError("truncated header", len(blob))
    version, dtype, ndim = struct.unpack_from("<III", blob, 4)
    if version != VERSION:
        raise LtnsFormatError(f"unsupported version {version}", 4)
    if dtype != DTYPE_F32:
        raise LtnsFormatError(f"unsupported dtype code {dtype}", 8)
    off = 16
    if len(blob) < off + 8 * ndim:
        raise LtnsFormatError("truncated extents", len(blob))
    dims = struct.unpack_from(f"<{ndim}Q", blob, off)
    off += 8 * ndim
    count = 1
    for d in dims:
        count *= d
    need = count * 4
    if len(blob) - off < need:
        raise LtnsFormatError(
            f"payload holds {(len(blob) - off) // 4} scalars, header declares {count}",
            off,
        )
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
    return data.reshape(dims).astype(np.float32, copy=True)


def write_manifest(path: str | Path, entries: list[VideoManifestEntry]) -> None:
    with open(path, "w") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {
                        "id": e.id,
                        "tensor_path": e.tensor_path,
                        "label": e.label,
                        "source": e.source,
                        "kind": e.kind,
                    }
                )
                + "\n"
            )


def read_manifest(path: str | Path) -> list[VideoManifestEntry]:
    entries = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            entries.append(
                VideoManifestEntry(
                    id=obj["id"],
                    tensor_path=obj["tensor_path"],
                    label=obj["label"],
                    source=obj["source"],
                    kind=obj.get("kind", "latents"),
                )
            )
    return entries
