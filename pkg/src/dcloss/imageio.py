"""Plain-text image interchange: ASCII PGM (P2) and flat CSV."""

from __future__ import annotations

from pathlib import Path

import numpy as np

PGM_MAXVAL = 65535


def write_pgm(path, image: np.ndarray, scale: float | None = None) -> float:
    """Write a 2-D image as ASCII PGM (P2) with 16-bit linear scaling.

    Negative values are clamped to zero first.  Returns the scale factor
    (gray value per intensity unit) so callers can record it.
    """
    img = np.maximum(np.asarray(image, dtype=float), 0.0)
    if img.ndim != 2:
        raise ValueError("PGM requires a 2-D image")
    if scale is None:
        peak = img.max()
        scale = PGM_MAXVAL / peak if peak > 0 else 1.0
    gray = np.clip(np.rint(img * scale), 0, PGM_MAXVAL).astype(int)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", f"{PGM_MAXVAL}"]
    lines += [" ".join(str(v) for v in row) for row in gray]
    Path(path).write_text("\n".join(lines) + "\n")
    return scale


def read_pgm(path) -> np.ndarray:
    """Read an ASCII PGM (P2) file into an integer 2-D array."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        body = line.split("#", 1)[0]
        tokens.extend(body.split())
    if not tokens or tokens[0] != "P2":
        raise ValueError("not an ASCII PGM (P2) file")
    width, height, _maxval = (int(t) for t in tokens[1:4])
    data = np.array([int(t) for t in tokens[4:]], dtype=int)
    if data.size != width * height:
        raise ValueError("PGM pixel count does not match header")
    return data.reshape(height, width)


def write_flat_csv(path, image: np.ndarray) -> None:
    """Write an image as one flat CSV column with a width/height header."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("expected a 2-D image")
    with open(path, "w") as fh:
        fh.write(f"# width={img.shape[1]} height={img.shape[0]}\n")
        fh.write("value\n")
        for v in img.ravel():
            fh.write(f"{float(v)!r}\n")


def read_flat_csv(path) -> np.ndarray:
    """Read an image written by write_flat_csv."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# width="):
            raise ValueError("missing flat-CSV header")
        parts = dict(p.split("=") for p in header[2:].split())
        width, height = int(parts["width"]), int(parts["height"])
        fh.readline()  # column name
        values = np.array([float(line) for line in fh if line.strip()])
    if values.size != width * height:
        raise ValueError("flat CSV pixel count does not match header")
    return values.reshape(height, width)
