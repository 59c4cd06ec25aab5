"""Image I/O, validation, and rigid/similarity warping.

Images are plain 2-D float64 numpy arrays in [0, 1], indexed ``img[y, x]``.
Points are (x, y) pairs with x = column, y = row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .errors import FormatError, ParameterError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_READ_SUFFIXES = {".png", ".pgm", ".tif", ".tiff", ".jpg", ".jpeg"}


def check_image(img, min_size: int = 1) -> np.ndarray:
    """Validate and normalize an image array: 2-D, finite, float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-D grayscale array, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise ParameterError(f"image {arr.shape} smaller than minimum {min_size}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("image contains NaN or Inf values")
    return arr


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation, mapping points as p' = R @ p + t.

    The rotation must be orthonormal with determinant +1 (tolerance 1e-9).
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(2, 2)
        tra = np.asarray(self.translation, dtype=np.float64).reshape(2)
        if not np.allclose(rot.T @ rot, np.eye(2), atol=1e-9):
            raise ParameterError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ParameterError("rotation matrix determinant is not +1")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tra)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def rotation_about(cls, angle: float, center) -> "RigidTransform":
        """Rotation by `angle` radians about a fixed point (x, y)."""
        c, s = np.cos(angle), np.sin(angle)
        # snap near-exact entries so quarter/half turns are interpolation-free
        c = 0.0 if abs(c) < 1e-15 else (np.copysign(1.0, c) if abs(abs(c) - 1) < 1e-15 else c)
        s = 0.0 if abs(s) < 1e-15 else (np.copysign(1.0, s) if abs(abs(s) - 1) < 1e-15 else s)
        rot = np.array([[c, -s], [s, c]])
        center = np.asarray(center, dtype=np.float64)
        return cls(rot, center - rot @ center)

    def apply(self, points) -> np.ndarray:
        """Transform an (n, 2) array of (x, y) points (or a single point)."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation

    def inverse(self) -> "RigidTransform":
        rot_inv = self.rotation.T
        return RigidTransform(rot_inv, -rot_inv @ self.translation)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self ∘ other: apply `other` first, then `self`."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def to_json_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RigidTransform":
        try:
            return cls(np.array(d["rotation"]), np.array(d["translation"]))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad rigid-transform JSON: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()))

    @classmethod
    def load(cls, path) -> "RigidTransform":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _read_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    try:
        magic = raw[:2].decode("ascii")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not a PGM file") from exc
    if magic not in ("P2", "P5"):
        raise FormatError(f"{path}: unsupported PGM magic {magic!r}")

    # Header tokens (width, height, maxval) may be interleaved with comments.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise FormatError(f"{path}: truncated PGM header")
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: bad PGM header") from exc
    if width <= 0 or height <= 0 or maxval <= 0:
        raise FormatError(f"{path}: bad PGM dimensions")

    if magic == "P2":
        values = raw[pos:].split()
        if len(values) < width * height:
            raise FormatError(f"{path}: truncated PGM data")
        data = np.array(values[: width * height], dtype=np.float64)
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        count = width * height
        if max(len(raw) - pos, 0) // dtype.itemsize < count:
            raise FormatError(f"{path}: truncated PGM data")
        data = np.frombuffer(raw, dtype=dtype, count=count, offset=pos)
        data = data.astype(np.float64)
    return (data / maxval).reshape(height, width)


def load_image(path) -> np.ndarray:
    """Load a PNG/PGM/TIFF/JPEG file as a grayscale image in [0, 1].

    Color inputs are converted with luminance weights 0.299 R + 0.587 G + 0.114 B.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image file: {path}")
    if path.suffix.lower() not in _READ_SUFFIXES:
        raise FormatError(f"unsupported image format: {path.suffix!r}")
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode in ("RGB", "RGBA"):
                arr = np.asarray(im, dtype=np.float64)[..., :3] / 255.0
                return arr @ LUMA_WEIGHTS
            if im.mode == "L":
                return np.asarray(im, dtype=np.float64) / 255.0
            if im.mode in ("I", "I;16"):
                return np.asarray(im, dtype=np.float64) / 65535.0
            if im.mode == "F":
                return np.asarray(im, dtype=np.float64)
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
            return arr @ LUMA_WEIGHTS
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise FormatError(f"{path}: cannot decode image ({exc})") from exc


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and quantize with round-half-up."""
    clamped = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path) -> None:
    """Write an 8-bit grayscale PNG or PGM (P5) file."""
    path = Path(path)
    if not path.parent.exists():
        raise FileNotFoundError(f"parent directory does not exist: {path.parent}")
    data = to_uint8(check_image(img))
    suffix = path.suffix.lower()
    if suffix == ".png":
        PILImage.fromarray(data, mode="L").save(path, format="PNG")
    elif suffix == ".pgm":
        header = f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode("ascii")
        path.write_bytes(header + data.tobytes())
    else:
        raise FormatError(f"unsupported output format: {suffix!r} (use .png or .pgm)")


def warp_rigid(img, transform: RigidTransform, out_size) -> np.ndarray:
    """Resample an image under a rigid transform.

    Output pixel p takes the bilinearly interpolated value at transform⁻¹(p)
    in the source; samples outside the source are 0.  `out_size` is
    (height, width).
    """
    src = check_image(img)
    out_h, out_w = int(out_size[0]), int(out_size[1])
    if out_h <= 0 or out_w <= 0:
        raise ParameterError(f"output size must be positive, got {(out_h, out_w)}")

    inv = transform.inverse()
    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64),
                         np.arange(out_h, dtype=np.float64))
    sx = inv.rotation[0, 0] * xs + inv.rotation[0, 1] * ys + inv.translation[0]
    sy = inv.rotation[1, 0] * xs + inv.rotation[1, 1] * ys + inv.translation[1]

    h, w = src.shape
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    out = np.zeros((out_h, out_w), dtype=np.float64)
    # Pixels whose 4-neighborhood lies fully inside the source.
    valid = (x0 >= 0) & (x0 < w - 1) & (y0 >= 0) & (y0 < h - 1)
    # Exactly-on-grid samples along the far edges are still valid.
    on_grid = (fx == 0) & (fy == 0) & (x0 >= 0) & (x0 < w) & (y0 >= 0) & (y0 < h)

    xv, yv, fxv, fyv = x0[valid], y0[valid], fx[valid], fy[valid]
    out[valid] = (
        src[yv, xv] * (1 - fxv) * (1 - fyv)
        + src[yv, xv + 1] * fxv * (1 - fyv)
        + src[yv + 1, xv] * (1 - fxv) * fyv
        + src[yv + 1, xv + 1] * fxv * fyv
    )
    edge = on_grid & ~valid
    out[edge] = src[y0[edge], x0[edge]]
    return out
