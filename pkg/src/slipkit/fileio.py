"""On-disk formats: PGM/PNG images, binary/CSV logit grids, LabelMe
annotation JSON, and the CSV sidecars used for traces and ground truth."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .core import as_gray, as_mask, luminance
from .maskgen import PolygonAnnotation, annotation_mask, to_eight_bit

IMAGE_SUFFIXES = (".pgm", ".png", ".ppm")


# ---------------------------------------------------------------------------
# Images
# ---------------------------------------------------------------------------

def write_pgm(path, image) -> None:
    """Binary (P5) PGM, 8-bit."""
    img = as_gray(image)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval, separated by whitespace/comments
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    w, h, maxval = fields
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM not supported")
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=pos)
    return pixels.reshape(h, w).copy()


def read_image_gray(path) -> np.ndarray:
    """Read PNG/PGM/PPM as 8-bit grayscale (RGB collapsed by luminance)."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    img = np.asarray(Image.open(path))
    if img.ndim == 3:
        return luminance(img[:, :, :3])
    return as_gray(img)


def read_mask(path) -> np.ndarray:
    """Read a stored mask image; intensities > 127 count as contact."""
    return (read_image_gray(path) > 127).astype(np.uint8)


def write_mask(path, mask) -> None:
    write_pgm(path, to_eight_bit(as_mask(mask)))


# ---------------------------------------------------------------------------
# Logit grids
# ---------------------------------------------------------------------------

def write_logits_bin(path, logits) -> None:
    """Raw little-endian float32 grid with an 8-byte (width, height)
    uint32 header."""
    a = np.asarray(logits, dtype="<f4")
    if a.ndim != 2:
        raise ValueError("logit grid must be 2-D")
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", w, h))
        fh.write(a.tobytes())


def read_logits_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(8)
        if len(header) != 8:
            raise ValueError(f"{path}: truncated logit header")
        w, h = struct.unpack("<II", header)
        body = fh.read()
    expected = 4 * w * h
    if len(body) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<f4").reshape(h, w).astype(np.float64)


def read_logits(path) -> np.ndarray:
    """Dispatch on extension: .csv as a comma grid, anything else binary."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return read_logits_bin(path)


# ---------------------------------------------------------------------------
# LabelMe annotations
# ---------------------------------------------------------------------------

def read_labelme(path):
    """Parse a LabelMe JSON file.

    Only ``imageWidth``/``imageHeight`` and ``shapes[].points``/``label``
    are consumed; every other field is ignored.
    Returns (width, height, [PolygonAnnotation]).
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    width = int(doc["imageWidth"])
    height = int(doc["imageHeight"])
    anns = [PolygonAnnotation(label=s.get("label", ""),
                              points=np.asarray(s["points"], dtype=np.float64))
            for s in doc.get("shapes", [])]
    return width, height, anns


def read_labelme_mask(path) -> np.ndarray:
    width, height, anns = read_labelme(path)
    return annotation_mask(anns, width, height)


# ---------------------------------------------------------------------------
# CSV sidecars
# ---------------------------------------------------------------------------

def write_gt_csv(path, angles) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("frame,angle_deg\n")
        for i, a in enumerate(angles):
            fh.write(f"{i},{a:.6f}\n")


def read_gt_csv(path) -> list[float]:
    angles = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("frame"):
            raise ValueError(f"{path}: missing gt CSV header")
        for line in fh:
            line = line.strip()
            if line:
                _, value = line.split(",")
                angles.append(float(value))
    return angles


def write_trace_csv(path, trace, with_gt: bool = False) -> None:
    cols = "frame,raw_angle,filtered_angle,reliable"
    if with_gt:
        cols += ",gt,re"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cols + "\n")
        for i, s in enumerate(trace.samples):
            row = (f"{s.frame_index},{s.raw_angle:.6f},"
                   f"{s.filtered_angle:.6f},{int(s.reliable)}")
            if with_gt:
                g = trace.ground_truth[i]
                row += f",{g:.6f},{abs(s.filtered_angle - g):.6f}"
            fh.write(row + "\n")


def list_images(directory) -> list[Path]:
    d = Path(directory)
    return sorted(p for p in d.iterdir()
                  if p.suffix.lower() in IMAGE_SUFFIXES)
