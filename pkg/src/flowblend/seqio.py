"""On-disk formats: PNG frame sequences with a JSON manifest, Middlebury
`.flo` flow fields (bit-exact round trip), and grayscale map dumps."""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .core import Frame, FlowField

FLO_MAGIC = 202021.25
FLO_TAG = struct.pack("<f", FLO_MAGIC)  # b"PIEH"


class FormatError(ValueError):
    """Malformed on-disk data (bad magic, truncated payload, dimension drift)."""


@dataclass(frozen=True)
class SequenceManifest:
    width: int
    height: int
    fps: float
    frames: tuple

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"manifest dimensions must be positive, got {self.width}x{self.height}")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        names = tuple(self.frames)
        if not names:
            raise ValueError("manifest must list at least one frame")
        if len(set(names)) != len(names):
            raise ValueError("manifest frame names must be unique")
        object.__setattr__(self, "frames", names)


def _quantize8(a):
    # round half away from zero, matching round(v*255)
    return np.floor(np.asarray(a, dtype=np.float64) * 255.0 + 0.5).clip(0, 255).astype(np.uint8)


def read_image(path, expect=None, index=None):
    """Decode one PNG into a Frame; 8-bit maps to v/255, 16-bit to v/65535."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image file not found: {path}")
    with Image.open(path) as img:
        if img.mode in ("I;16", "I;16B", "I", "I;16L"):
            a = np.asarray(img, dtype=np.float32) / 65535.0
        else:
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB" if ("A" in img.mode or img.mode == "P" or len(img.getbands()) >= 3) else "L")
            a = np.asarray(img, dtype=np.float32) / 255.0
    if a.ndim == 2:
        a = a[None]
    else:
        a = np.moveaxis(a, 2, 0)
    c, h, w = a.shape
    if expect is not None and (w, h) != expect:
        where = f" (frame index {index})" if index is not None else ""
        raise FormatError(f"image {path} is {w}x{h}, manifest says {expect[0]}x{expect[1]}{where}")
    return Frame(w, h, c, a)


def write_image(frame, path):
    a = _quantize8(frame.samples)
    if frame.channels == 1:
        img = Image.fromarray(a[0], mode="L")
    else:
        img = Image.fromarray(np.moveaxis(a, 0, 2), mode="RGB")
    img.save(Path(path), format="PNG")


def read_manifest(manifest_path):
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"manifest {manifest_path} is not valid JSON: {e}") from e
    try:
        return SequenceManifest(
            width=int(doc["width"]),
            height=int(doc["height"]),
            fps=float(doc["fps"]),
            frames=tuple(doc["frames"]),
        )
    except KeyError as e:
        raise FormatError(f"manifest {manifest_path} is missing field {e}") from e


def read_sequence(manifest_path):
    """Returns (manifest, lazy iterator of Frames in manifest order)."""
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    for name in manifest.frames:
        if not (base / name).exists():
            raise FileNotFoundError(f"sequence frame not found: {base / name}")

    def frames():
        for i, name in enumerate(manifest.frames):
            yield read_image(base / name, expect=(manifest.width, manifest.height), index=i)

    return manifest, frames()


def write_sequence(manifest, frames, out_dir):
    """Write 8-bit PNGs plus the JSON manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = list(manifest.frames)
    n = 0
    for name, frame in zip(names, frames):
        if (frame.width, frame.height) != (manifest.width, manifest.height):
            raise FormatError(
                f"frame {n} is {frame.width}x{frame.height}, manifest says "
                f"{manifest.width}x{manifest.height}"
            )
        write_image(frame, out_dir / name)
        n += 1
    if n != len(names):
        raise FormatError(f"expected {len(names)} frames, got {n}")
    manifest_path = out_dir / "manifest.json"
    doc = {
        "width": manifest.width,
        "height": manifest.height,
        "fps": manifest.fps,
        "frames": names,
    }
    manifest_path.write_text(json.dumps(doc, indent=2) + "\n")
    return manifest_path


def manifest_for(width, height, n_frames, fps=24.0, pattern="{:06d}.png"):
    return SequenceManifest(width, height, fps, tuple(pattern.format(i) for i in range(n_frames)))


def read_flo(path):
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 12:
        raise FormatError(f"{path}: too short for a .flo header ({len(raw)} bytes)")
    if raw[:4] != FLO_TAG:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}, expected {FLO_TAG!r}")
    w, h = struct.unpack("<ii", raw[4:12])
    if w < 1 or h < 1:
        raise FormatError(f"{path}: invalid dimensions {w}x{h}")
    expected = 12 + w * h * 2 * 4
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, got {len(raw)}")
    vec = np.frombuffer(raw, dtype="<f4", offset=12).reshape(h, w, 2)
    return FlowField(w, h, vec.copy())


def write_flo(flow, path):
    path = Path(path)
    with open(path, "wb") as f:
        f.write(FLO_TAG)
        f.write(struct.pack("<ii", flow.width, flow.height))
        f.write(np.ascontiguousarray(flow.vectors, dtype="<f4").tobytes())


def write_map(scalar_map, path):
    """Dump a WeightMap / TextureMap as a grayscale 8-bit PNG."""
    a = _quantize8(scalar_map.values)
    Image.fromarray(a, mode="L").save(Path(path), format="PNG")
