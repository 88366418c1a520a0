"""Self-describing binary model container.

Layout::

    b"FDLSRMDL"             8-byte magic
    uint16 LE               format version
    uint32 LE               header length in bytes
    header                  UTF-8 JSON: metadata plus a list of array sections
    section payloads        raw little-endian array bytes, in header order

Arrays are stored as raw bytes, so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"FDLSRMDL"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


@dataclass
class ModelFile:
    """Trained projection plus everything needed to classify new samples.

    ``arrays`` holds at least ``Q`` (``c x d``), ``gallery`` (projected training
    samples) and ``gallery_labels``; z-scored models add ``zscore_mean`` and
    ``zscore_std``. ``meta`` carries method, config, class names, preprocessing
    and the run manifest.
    """

    arrays: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    @property
    def Q(self) -> np.ndarray:
        return self.arrays["Q"]


def save_model(model: ModelFile, path: str | Path) -> None:
    sections = []
    payloads = []
    for name, arr in model.arrays.items():
        arr = np.ascontiguousarray(arr)
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        sections.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)})
        payloads.append(arr.tobytes(order="C"))
    header = json.dumps({"meta": model.meta, "sections": sections}, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(header)))
        fh.write(header)
        for blob in payloads:
            fh.write(blob)


def load_model(path: str | Path) -> ModelFile:
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    offset = len(MAGIC)
    try:
        version, header_len = struct.unpack_from("<HI", data, offset)
    except struct.error as exc:
        raise ModelFormatError(f"{path}: truncated header") from exc
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    offset += struct.calcsize("<HI")
    header = json.loads(data[offset : offset + header_len].decode("utf-8"))
    offset += header_len
    arrays = {}
    for sec in header["sections"]:
        dtype = np.dtype(sec["dtype"])
        count = int(np.prod(sec["shape"], dtype=np.int64))
        nbytes = count * dtype.itemsize
        if offset + nbytes > len(data):
            raise ModelFormatError(f"{path}: section {sec['name']!r} is truncated")
        arrays[sec["name"]] = np.frombuffer(data, dtype=dtype, count=count, offset=offset).reshape(
            sec["shape"]
        ).copy()
        offset += nbytes
    if offset != len(data):
        raise ModelFormatError(f"{path}: {len(data) - offset} trailing bytes")
    return ModelFile(arrays=arrays, meta=header["meta"])
