"""Model checkpoint file.

Layout (little-endian): 6-byte magic, u32 version, u32 layer count, then per
layer a u8 type tag, its shape fields as u32 and its parameters as f64
(weights then bias), followed by a u32 CRC32 of everything after the magic.

Shape fields per tag: conv (1) kh, kw, in_c, out_c; relu (2) none;
maxpool (3) size; flatten (4) none; dense (5) n_in, n_out.
"""
from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import FormatError
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU
from .model import Sequential

MAGIC = b"UAVNN1"
VERSION = 1
_NSHAPE = {1: 4, 2: 0, 3: 1, 4: 0, 5: 2}


def save_model(model: Sequential, path, magic: bytes = MAGIC) -> None:
    body = bytearray(struct.pack("<II", VERSION, len(model.layers)))
    for layer in model.layers:
        body += struct.pack("<B", layer.tag)
        fields = layer.shape_fields()
        body += struct.pack(f"<{len(fields)}I", *fields)
        for key in ("w", "b"):
            if key in layer.params:
                body += np.ascontiguousarray(layer.params[key], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body)))


def load_model(path, magic: bytes = MAGIC, dtype=np.float64) -> Sequential:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:len(magic)] != magic:
        raise FormatError(f"{path}: bad magic, expected {magic!r}")
    body = blob[len(magic):-4]
    if len(blob) < len(magic) + 12:
        raise FormatError(f"{path}: truncated")
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise FormatError(f"{path}: checksum mismatch")
    version, count = struct.unpack_from("<II", body, 0)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    off = 8
    layers = []

    def take(n):
        nonlocal off
        if off + 8 * n > len(body):
            raise FormatError(f"{path}: truncated parameters")
        arr = np.frombuffer(body, "<f8", n, off).astype(dtype)
        off += 8 * n
        return arr

    try:
        for _ in range(count):
            (tag,) = struct.unpack_from("<B", body, off)
            off += 1
            if tag not in _NSHAPE:
                raise FormatError(f"{path}: unknown layer tag {tag}")
            fields = struct.unpack_from(f"<{_NSHAPE[tag]}I", body, off)
            off += 4 * _NSHAPE[tag]
            if tag == 1:
                kh, kw, ci, co = fields
                layer = Conv2D(ci, co, k=kh, dtype=dtype)
                layer.params["w"] = take(kh * kw * ci * co).reshape(kh, kw, ci, co)
                layer.params["b"] = take(co)
            elif tag == 5:
                ni, no = fields
                layer = Dense(ni, no, dtype=dtype)
                layer.params["w"] = take(ni * no).reshape(ni, no)
                layer.params["b"] = take(no)
            elif tag == 3:
                layer = MaxPool2D(fields[0])
            else:
                layer = ReLU() if tag == 2 else Flatten()
            layers.append(layer)
    except struct.error:
        raise FormatError(f"{path}: truncated layer table") from None
    if off != len(body):
        raise FormatError(f"{path}: trailing bytes after layer table")
    return Sequential(layers)
