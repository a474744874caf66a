"""Small helpers for the package's binary file formats.

All formats share the same shape: a 4-byte magic, a little-endian u32
version, then fixed-layout sections. These helpers centralize the error
reporting for short reads and bad headers.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

from .errors import DataError


def read_exact(f: BinaryIO, count: int, path: str, what: str) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise DataError(f"{path}: truncated file while reading {what} "
                        f"(wanted {count} bytes, got {len(data)})")
    return data


def expect_magic(f: BinaryIO, magic: bytes, version: int, path: str) -> None:
    got = read_exact(f, 4, path, "magic bytes")
    if got != magic:
        raise DataError(f"{path}: bad magic {got!r}, expected {magic!r}")
    (ver,) = struct.unpack("<I", read_exact(f, 4, path, "format version"))
    if ver != version:
        raise DataError(f"{path}: unsupported format version {ver}, "
                        f"expected {version}")


def write_header(f: BinaryIO, magic: bytes, version: int) -> None:
    f.write(magic)
    f.write(struct.pack("<I", version))
