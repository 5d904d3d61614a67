"""FPLT: a bit-exact little-endian container for latent tensors.

Layout: 4-byte magic ``FPLT``, u32 version (1), u32 flags (bit 0 marks a
codebook), four u32 dims (T, H, W, C), then T*H*W*C IEEE-754 float32
values in C order (t-major, row-major, channel-last). Total size is
exactly 28 + 4*T*H*W*C bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .codebook import Codebook
from .errors import FpltFormatError
from .packing import LatentVideo

MAGIC = b"FPLT"
VERSION = 1
FLAG_CODEBOOK = 1
_HEADER = struct.Struct("<4sII4I")


def write_tensor(path: str | Path, array: np.ndarray, *, flags: int = 0) -> None:
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim != 4:
        raise FpltFormatError(f"tensor must be 4D (T,H,W,C), got shape {arr.shape}")
    header = _HEADER.pack(MAGIC, VERSION, flags, *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def read_tensor(path: str | Path) -> tuple[np.ndarray, int]:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FpltFormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, flags, t, h, w, c = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FpltFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FpltFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * t * h * w * c
    if len(blob) != expected:
        raise FpltFormatError(f"{path}: expected {expected} bytes, found {len(blob)}")
    payload = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    return payload.reshape(t, h, w, c).copy(), flags


def write_video(path: str | Path, video: LatentVideo) -> None:
    write_tensor(path, video.data)


def read_video(path: str | Path) -> LatentVideo:
    array, flags = read_tensor(path)
    if flags & FLAG_CODEBOOK:
        raise FpltFormatError(f"{path}: holds a codebook, not a latent video")
    return LatentVideo(array)


def write_codebook(path: str | Path, codebook: Codebook) -> None:
    k, c = codebook.centroids.shape
    write_tensor(path, codebook.centroids.reshape(1, 1, k, c), flags=FLAG_CODEBOOK)


def read_codebook(path: str | Path) -> Codebook:
    array, flags = read_tensor(path)
    if not flags & FLAG_CODEBOOK:
        raise FpltFormatError(f"{path}: not flagged as a codebook")
    if array.shape[0] != 1 or array.shape[1] != 1:
        raise FpltFormatError(f"{path}: codebook tensors must be 1x1xKxC, got {array.shape}")
    return Codebook(array.reshape(array.shape[2], array.shape[3]))
