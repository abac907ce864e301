"""Bit-exact codecs for the on-disk artifact formats.

- .pgm: binary (P5) grayscale for images and label maps, maxval 255; a
  16-bit variant (maxval 65535, big-endian samples) carries superpixel
  block ids.
- .fmap: little-endian float32 raster with an 18-byte header, carrying
  probability maps (channels = classes) and trust maps (channels = 1).
- .points.json: the point-annotation document.

Readers validate header-declared sizes against the actual payload before
allocating, and every codec round-trips losslessly.
"""

from __future__ import annotations

import json
import struct
from typing import Union

import numpy as np

from .errors import FormatError
from .rasters import GrayImage, LabelMap, PointAnnotationSet, ProbMap, TrustMap

FMAP_MAGIC = b"FMAP"
FMAP_VERSION = 1
_FMAP_HEADER = struct.Struct("<4sHIII")


# ---------------------------------------------------------------------------
# PGM


def _parse_pgm_header(data: bytes) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, payload offset).

    Tolerates '#' comments and arbitrary whitespace between header tokens.
    """
    if len(data) < 2:
        raise FormatError("not a PGM file: shorter than its magic number")
    magic = data[:2]
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise FormatError("truncated PGM header")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            tokens.append(int(data[start:pos]))
        else:
            raise FormatError(f"unexpected byte {ch!r} in PGM header")
    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise FormatError("PGM header not terminated by whitespace")
    pos += 1
    width, height, maxval = tokens
    return magic, width, height, maxval, pos


def read_pgm(data: bytes) -> GrayImage:
    """Decode a binary 8-bit PGM."""
    magic, width, height, maxval, offset = _parse_pgm_header(data)
    if magic == b"P2":
        raise FormatError("ASCII (P2) PGM files are not supported; use binary P5")
    if magic != b"P5":
        raise FormatError(f"unsupported PNM magic {magic!r}; expected P5")
    if maxval != 255:
        raise FormatError(f"PGM maxval must be 255, got {maxval}")
    if width < 1 or height < 1:
        raise FormatError(f"invalid PGM dimensions {width}x{height}")
    expected = width * height
    payload = data[offset:]
    if len(payload) < expected:
        raise FormatError(
            f"truncated PGM payload: expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise FormatError(
            f"trailing bytes after PGM payload: expected {expected} bytes, "
            f"got {len(payload)}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def write_pgm(image: Union[GrayImage, LabelMap]) -> bytes:
    """Encode as binary 8-bit PGM; label maps store class ids as intensities."""
    arr = image.pixels
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + arr.tobytes()


def read_label_pgm(data: bytes, num_classes: int = 4) -> LabelMap:
    """Decode a PGM whose pixel values are class ids."""
    img = read_pgm(data)
    return LabelMap(img.pixels, num_classes)


def read_pgm16(data: bytes) -> np.ndarray:
    """Decode a 16-bit binary PGM (big-endian samples) to a uint16 array."""
    magic, width, height, maxval, offset = _parse_pgm_header(data)
    if magic != b"P5":
        raise FormatError(f"unsupported PNM magic {magic!r}; expected P5")
    if maxval != 65535:
        raise FormatError(f"16-bit PGM maxval must be 65535, got {maxval}")
    expected = width * height * 2
    payload = data[offset:]
    if len(payload) != expected:
        raise FormatError(
            f"16-bit PGM payload size mismatch: expected {expected} bytes, "
            f"got {len(payload)}"
        )
    return np.frombuffer(payload, dtype=">u2").astype(np.uint16).reshape(height, width)


def write_pgm16(values: np.ndarray) -> bytes:
    """Encode a uint16 array (e.g. superpixel block ids) as a 16-bit PGM."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise FormatError("16-bit PGM payload must be 2-D")
    if arr.min() < 0 or arr.max() > 65535:
        raise FormatError("values do not fit a 16-bit PGM (0..65535)")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    return header + arr.astype(">u2").tobytes()


# ---------------------------------------------------------------------------
# FMAP


def write_fmap(value: Union[ProbMap, TrustMap]) -> bytes:
    """Encode a float raster; trust maps serialize with channels = 1."""
    if isinstance(value, TrustMap):
        payload = value.values[np.newaxis, :, :]
    else:
        payload = value.values
    channels, height, width = payload.shape
    header = _FMAP_HEADER.pack(FMAP_MAGIC, FMAP_VERSION, width, height, channels)
    return header + payload.astype("<f4").tobytes()


def read_fmap(data: bytes) -> Union[ProbMap, TrustMap]:
    """Decode an FMAP: channels = 1 yields a TrustMap, else a ProbMap."""
    if len(data) < _FMAP_HEADER.size:
        raise FormatError(
            f"truncated FMAP header: expected {_FMAP_HEADER.size} bytes, "
            f"got {len(data)}"
        )
    magic, version, width, height, channels = _FMAP_HEADER.unpack_from(data)
    if magic != FMAP_MAGIC:
        raise FormatError(f"bad FMAP magic {magic!r}")
    if version != FMAP_VERSION:
        raise FormatError(f"unsupported FMAP version {version}")
    if width < 1 or height < 1 or channels < 1:
        raise FormatError(
            f"invalid FMAP geometry {width}x{height}x{channels}"
        )
    expected = 4 * width * height * channels
    payload = data[_FMAP_HEADER.size :]
    if len(payload) != expected:
        raise FormatError(
            f"FMAP payload size mismatch: header implies {expected} bytes, "
            f"got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(channels, height, width)
    if channels == 1:
        return TrustMap(values[0])
    return ProbMap(values)


# ---------------------------------------------------------------------------
# Point annotations


def write_points(annotations: PointAnnotationSet) -> str:
    """Serialize to the .points.json document, preserving order."""
    doc = {
        "points": [
            {"x": x, "y": y, "class": c} for x, y, c in annotations.points
        ],
        "ped_polylines": [
            [{"x": x, "y": y} for x, y in line]
            for line in annotations.ped_polylines
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def read_points(text: Union[str, bytes]) -> PointAnnotationSet:
    """Parse a .points.json document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed points document: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("points document must be a JSON object")
    raw_points = doc.get("points", [])
    raw_lines = doc.get("ped_polylines", [])
    if not isinstance(raw_points, list) or not isinstance(raw_lines, list):
        raise FormatError('"points" and "ped_polylines" must be arrays')

    points = []
    for idx, entry in enumerate(raw_points):
        points.append(
            (
                _int_field(entry, "x", f"points[{idx}]"),
                _int_field(entry, "y", f"points[{idx}]"),
                _int_field(entry, "class", f"points[{idx}]"),
            )
        )
        if points[-1][2] not in (1, 2, 3):
            raise FormatError(
                f'points[{idx}].class must be 1, 2 or 3, got {points[-1][2]}'
            )
    lines = []
    for li, line in enumerate(raw_lines):
        if not isinstance(line, list) or len(line) < 2:
            raise FormatError(
                f"ped_polylines[{li}] must be an array of at least 2 vertices"
            )
        lines.append(
            tuple(
                (
                    _int_field(v, "x", f"ped_polylines[{li}][{vi}]"),
                    _int_field(v, "y", f"ped_polylines[{li}][{vi}]"),
                )
                for vi, v in enumerate(line)
            )
        )
    for x, y, _ in points:
        if x < 0 or y < 0:
            raise FormatError(f"negative coordinate ({x},{y}) in points")
    for line in lines:
        for x, y in line:
            if x < 0 or y < 0:
                raise FormatError(f"negative coordinate ({x},{y}) in ped_polylines")
    return PointAnnotationSet(tuple(points), tuple(lines))


def _int_field(entry, key: str, where: str) -> int:
    if not isinstance(entry, dict) or key not in entry:
        raise FormatError(f"{where} is missing field {key!r}")
    value = entry[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}.{key} must be an integer, got {value!r}")
    return value
