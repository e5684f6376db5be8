"""PGM images and CSV tables, written through staged temporary files."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import IllPosedError


class FormatError(IllPosedError, ValueError):
    """Malformed input file."""


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping ``#`` comments, with their end offsets."""
    i, n = 0, len(data)
    while i < n:
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 greyscale image to floats in ``[0, 1]`` (value / maxval)."""
    toks = _pgm_tokens(data)
    try:
        magic, _ = next(toks)
        w, _ = next(toks)
        h, _ = next(toks)
        mx, end = next(toks)
        width, height, maxval = int(w), int(h), int(mx)
    except (StopIteration, ValueError):
        raise FormatError("truncated or malformed PGM header") from None
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported PGM magic {magic!r}")
    if width <= 0 or height <= 0 or not 0 < maxval < 256:
        raise FormatError("PGM must be 8-bit with positive dimensions")
    count = width * height
    if magic == b"P5":
        raw = data[end + 1 : end + 1 + count]
        if len(raw) != count:
            raise FormatError("PGM pixel data is truncated")
        vals = np.frombuffer(raw, dtype=np.uint8).astype(float)
    else:
        try:
            vals = np.array([int(t) for t, _ in toks][:count], dtype=float)
        except ValueError:
            raise FormatError("non-integer pixel in P2 data") from None
        if vals.size != count:
            raise FormatError("PGM pixel data is truncated")
    if vals.max(initial=0) > maxval:
        raise FormatError("pixel exceeds maxval")
    return vals.reshape(height, width) / maxval


def read_pgm(path) -> np.ndarray:
    return parse_pgm(Path(path).read_bytes())


def encode_pgm(X) -> bytes:
    """P5 encoding; intensities are clipped to ``[0, 1]`` and mapped to ``round(255 x)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise FormatError("image must be two-dimensional")
    q = np.rint(np.clip(np.nan_to_num(X), 0.0, 1.0) * 255).astype(np.uint8)
    h, w = q.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + q.tobytes()


def format_float(v) -> str:
    """Shortest round-trip representation, so CSVs are byte-stable."""
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def encode_csv(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue().encode("utf-8")


class OutputSet:
    """Stage output files and publish them together.

    Inside ``with OutputSet(dir) as out`` each :meth:`write` goes to a
    temporary file in the target directory. On a clean exit all of them are
    renamed into place; on an exception every temporary file is removed.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._staged: list[tuple[str, Path]] = []

    def __enter__(self) -> "OutputSet":
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def write(self, name: str, data: bytes) -> Path:
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".tmp", dir=self.directory)
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        self._staged.append((tmp, self.directory / name))
        return self.directory / name

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is None:
            try:
                for tmp, final in self._staged:
                    os.replace(tmp, final)
            except OSError:
                self._cleanup()
                raise
        else:
            self._cleanup()
        return False

    def _cleanup(self) -> None:
        for tmp, _ in self._staged:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
