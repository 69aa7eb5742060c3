# pgm.py
#
# Minimal, bit-exact PGM reader/writer.  Accepts P2 (ASCII) and P5 (binary)
# with maxval <= 255 and '#' comment lines after the magic; always emits P5
# with maxval 255.  Values are stored as read, no rescaling.

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple, Union

from .image import GrayImage


class PgmFormatError(ValueError):
    pass


def _header_tokens(data: bytes, start: int, count: int) -> Tuple[List[int], int]:
    """Read `count` whitespace-separated integers, skipping '#' comments."""
    tokens: List[int] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i >= n:
            raise PgmFormatError("truncated header")
        if data[i : i + 1] == b"#":
            while i < n and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace():
            j += 1
        tok = data[i:j]
        try:
            tokens.append(int(tok))
        except ValueError:
            raise PgmFormatError(f"expected integer, got {tok!r}") from None
        i = j
    return tokens, i


def read_pgm(path: Union[str, Path]) -> GrayImage:
    data = Path(path).read_bytes()
    if len(data) < 2:
        raise PgmFormatError("not a PGM file")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmFormatError(f"unsupported magic {magic!r} (want P2 or P5)")
    (width, height, maxval), pos = _header_tokens(data, 2, 3)
    if width <= 0 or height <= 0:
        raise PgmFormatError("non-positive dimensions")
    if not (0 < maxval <= 255):
        raise PgmFormatError(f"maxval {maxval} out of supported range (1..255)")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte separates maxval from the raster
        raster = data[pos : pos + count]
        if len(raster) < count:
            raise PgmFormatError("raster shorter than width*height")
        pixels = list(raster)
    else:
        vals, _ = _header_tokens(data, pos, count)
        pixels = vals
    for p in pixels:
        if p > maxval:
            raise PgmFormatError(f"pixel {p} exceeds maxval {maxval}")
    return GrayImage(width, height, pixels)


def write_pgm(img: GrayImage, path: Union[str, Path]) -> None:
    """Emit binary P5 with maxval 255; byte-stable for identical images."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + bytes(img.pixels))
