"""Minimal 8-bit grayscale image I/O.

Binary PGM (P5) is handled natively.  PNG goes through Pillow when it is
installed; the loader picks the decoder from the file's magic bytes.
"""
import os

import numpy as np

from .errors import InvalidInput

MIN_SIDE = 8
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def as_gray(img) -> np.ndarray:
    """Validate and return ``img`` as a C-contiguous ``(height, width)`` uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise InvalidInput(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise InvalidInput("pixel values must fit in 8 bits")
        arr = arr.astype(np.uint8)
    h, w = arr.shape
    if h < MIN_SIDE or w < MIN_SIDE:
        raise InvalidInput(f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {w}x{h}")
    return np.ascontiguousarray(arr)


def _header_tokens(data: bytes, count: int):
    """Pull ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the first raster byte.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise InvalidInput("truncated PGM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def decode_pgm(data: bytes) -> np.ndarray:
    if data[:2] != b"P5":
        raise InvalidInput("not a binary PGM (P5) stream")
    tokens, offset = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise InvalidInput(f"bad PGM header: {tokens!r}") from exc
    if not 0 < maxval < 256:
        raise InvalidInput(f"only 8-bit PGM supported (maxval={maxval})")
    raster = data[offset:offset + width * height]
    if len(raster) != width * height:
        raise InvalidInput("PGM raster shorter than header claims")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    if maxval != 255:
        img = (img.astype(np.uint32) * 255 // maxval).astype(np.uint8)
    return as_gray(img)


def encode_pgm(img) -> bytes:
    arr = as_gray(img)
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes()


def decode_png(data: bytes) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover
        raise InvalidInput("PNG input needs Pillow installed") from exc
    import io

    with Image.open(io.BytesIO(data)) as im:
        return as_gray(np.asarray(im.convert("L")))


def decode_image(data: bytes) -> np.ndarray:
    if data.startswith(PNG_MAGIC):
        return decode_png(data)
    return decode_pgm(data)


def read_image(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_image(fh.read())


def write_pgm(path, img):
    data = encode_pgm(img)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
