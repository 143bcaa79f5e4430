"""Image input/output and the generated stand-in glyphs."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DimensionError, UnsupportedShapeError

GLYPH_SIZE = 50
STROKE_WIDTH = 4.0
SUPERSAMPLE = 4

# Stroke skeletons in pixel (row, col) coordinates.  Glyphs 1-3 share a
# frame, as do 4-5 and 6-7; each later member adds one stroke.
_FRAME_A = (((12, 25), (38, 25)), ((18, 15), (18, 35)), ((30, 12), (30, 38)))
_FRAME_B = (((12, 14), (12, 36)), ((12, 36), (38, 36)), ((38, 36), (38, 14)),
            ((38, 14), (12, 14)), ((25, 14), (25, 36)))
_FRAME_C = (((12, 12), (38, 38)), ((12, 38), (38, 12)), ((25, 10), (25, 40)))
GLYPH_STROKES = (
    _FRAME_A,
    _FRAME_A + (((38, 25), (34, 33)),),
    _FRAME_A + (((24, 16), (24, 34)),),
    _FRAME_B,
    _FRAME_B + (((12, 25), (38, 25)),),
    _FRAME_C,
    _FRAME_C + (((14, 25), (22, 25)),),
)
GLYPH_GROUPS = ((1, 2, 3), (4, 5), (6, 7))


def render_strokes(strokes, size: int = GLYPH_SIZE, width: float = STROKE_WIDTH,
                   supersample: int = SUPERSAMPLE) -> np.ndarray:
    """Anti-aliased 8-bit rendering of round-capped line segments, scaled to [0, 1]."""
    k = size * supersample
    r, c = (np.mgrid[0:k, 0:k] + 0.5) / supersample - 0.5
    ink = np.zeros((k, k), dtype=bool)
    for p0, p1 in strokes:
        p0 = np.asarray(p0, dtype=float)
        d = np.asarray(p1, dtype=float) - p0
        t = np.clip(((r - p0[0]) * d[0] + (c - p0[1]) * d[1]) / float(d @ d), 0.0, 1.0)
        ink |= np.hypot(r - p0[0] - t * d[0], c - p0[1] - t * d[1]) <= width / 2
    coverage = ink.reshape(size, supersample, size, supersample).mean(axis=(1, 3))
    return np.round(coverage * 255) / 255


def standin_glyphs() -> list[np.ndarray]:
    """The seven 50x50 stand-in images, labels 1..7 in order."""
    return [render_strokes(s) for s in GLYPH_STROKES]


def read_pgm(path) -> np.ndarray:
    """Binary (P5) 8-bit greymap as floats in [0, 1]."""
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        # skip whitespace and comments between header fields
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pos += 1  # single whitespace byte after maxval
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    if width != height:
        raise UnsupportedShapeError(f"{path}: image is {width}x{height}, not square")
    return raster.reshape(height, width).astype(float) / maxval


def write_pgm(path, pixels) -> None:
    img = np.asarray(pixels, dtype=float)
    if img.ndim != 2:
        raise DimensionError("expected a 2D image")
    raster = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + raster.tobytes())
