"""PGM image / disparity-map file I/O, config parsing, and the shared raster types.

Supported formats:

* 8-bit grayscale PGM, binary (P5) or ASCII (P2), maxval 255 -- pipeline input.
* 16-bit binary PGM (P5, maxval 65535, big-endian samples) -- disparity maps,
  stored as ``disparity * scale`` with 0 meaning "invalid" (KITTI convention).
* Flat ``key=value`` config files with ``#`` comments.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Sentinel for pixels without a valid disparity. Written as 0 in 16-bit
#: disparity PGMs, which makes a true disparity of 0 indistinguishable from
#: "invalid" on disk (KITTI ground truth never contains 0 either).
INVALID = -1

_WHITESPACE = b" \t\r\n"


class PgmError(ValueError):
    """Malformed PGM data; the message names the byte offset of the defect."""


class ConfigError(ValueError):
    """Invalid configuration; the message lists every violation found."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("intensities must be in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", np.ascontiguousarray(px))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True, eq=False)
class DisparityMap:
    """Per-pixel integer disparity; ``INVALID`` marks rejected pixels."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 2 or d.size == 0:
            raise ValueError(f"disparity map must be a non-empty 2-D array, got shape {d.shape}")
        d = d.astype(np.int32, copy=False)
        if d.min() < INVALID:
            raise ValueError(f"disparities must be >= 0 or INVALID ({INVALID})")
        object.__setattr__(self, "data", np.ascontiguousarray(d))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def valid_mask(self) -> np.ndarray:
        return self.data != INVALID

    def check_range(self, d_max: int) -> None:
        """Raise if any valid disparity is >= d_max."""
        valid = self.data[self.data != INVALID]
        if valid.size and int(valid.max()) >= d_max:
            raise ValueError(f"disparity {int(valid.max())} out of range for d_max={d_max}")

    def __eq__(self, other):
        if not isinstance(other, DisparityMap):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


@dataclass(frozen=True)
class StereoPair:
    """Rectified base/match image pair, optionally with ground-truth disparity."""

    base: GrayImage
    match: GrayImage
    ground_truth: DisparityMap | None = None

    def __post_init__(self):
        if (self.base.width, self.base.height) != (self.match.width, self.match.height):
            raise ValueError(
                f"base and match dimensions differ: "
                f"{self.base.width}x{self.base.height} vs {self.match.width}x{self.match.height}"
            )
        gt = self.ground_truth
        if gt is not None and (gt.width, gt.height) != (self.base.width, self.base.height):
            raise ValueError(
                f"ground truth dimensions {gt.width}x{gt.height} do not match "
                f"images {self.base.width}x{self.base.height}"
            )

    @property
    def width(self) -> int:
        return self.base.width

    @property
    def height(self) -> int:
        return self.base.height


# ---------------------------------------------------------------------------
# PGM parsing
# ---------------------------------------------------------------------------


class _Scanner:
    """Tracks a byte offset through a PGM header/body for precise errors."""

    def __init__(self, data: bytes, name: str):
        self.data = data
        self.name = name
        self.pos = 0

    def fail(self, msg: str, at: int | None = None) -> None:
        offset = self.pos if at is None else at
        raise PgmError(f"{self.name}: {msg} (byte offset {offset})")

    def skip_space_and_comments(self) -> None:
        data = self.data
        while self.pos < len(data):
            b = data[self.pos]
            if b in _WHITESPACE:
                self.pos += 1
            elif b == ord("#"):
                while self.pos < len(data) and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def next_int(self, what: str) -> int:
        self.skip_space_and_comments()
        if self.pos >= len(self.data):
            self.fail(f"unexpected end of file while reading {what}")
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in _WHITESPACE:
            if self.data[self.pos] == ord("#"):
                break
            self.pos += 1
        token = self.data[start : self.pos]
        if not token.isdigit():
            self.fail(f"expected integer {what}, got {token[:16]!r}", at=start)
        return int(token)


def _read_pgm(path) -> tuple[np.ndarray, int]:
    """Parse a P5/P2 PGM file into (array, maxval); array dtype fits maxval."""
    path = Path(path)
    data = path.read_bytes()
    sc = _Scanner(data, str(path))
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        sc.fail(f"not a PGM file (magic {magic!r}, expected P5 or P2)", at=0)
    sc.pos = 2
    width = sc.next_int("width")
    height = sc.next_int("height")
    if width <= 0 or height <= 0:
        sc.fail(f"non-positive dimensions {width}x{height}")
    maxval_at = sc.pos
    maxval = sc.next_int("maxval")
    if maxval not in (255, 65535):
        sc.fail(f"unsupported maxval {maxval} (expected 255 or 65535)", at=maxval_at)

    count = width * height
    if magic == b"P2":
        samples = np.empty(count, dtype=np.uint32)
        for i in range(count):
            v = sc.next_int(f"sample {i}")
            if v > maxval:
                sc.fail(f"sample {i} value {v} exceeds maxval {maxval}")
            samples[i] = v
    else:
        # exactly one whitespace byte separates the maxval from the payload
        if sc.pos >= len(data) or data[sc.pos] not in _WHITESPACE:
            sc.fail("missing whitespace after maxval")
        start = sc.pos + 1
        bytes_per = 2 if maxval == 65535 else 1
        need = count * bytes_per
        payload = data[start : start + need]
        if len(payload) < need:
            raise PgmError(
                f"{path}: truncated payload, expected {need} bytes but found "
                f"{len(payload)} (byte offset {start + len(payload)})"
            )
        dtype = ">u2" if bytes_per == 2 else np.uint8
        samples = np.frombuffer(payload, dtype=dtype).astype(np.uint32)

    arr = samples.reshape(height, width)
    return arr, maxval


def load_pgm(path) -> GrayImage:
    """Load an 8-bit grayscale PGM (binary P5 or ASCII P2, maxval 255)."""
    arr, maxval = _read_pgm(path)
    if maxval != 255:
        raise PgmError(f"{path}: expected an 8-bit image (maxval 255), got maxval {maxval}")
    return GrayImage(arr.astype(np.uint8))


def save_pgm(image: GrayImage, path) -> None:
    """Write a canonical binary P5 PGM (maxval 255)."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())


def save_disparity(disp: DisparityMap, path, scale: int = 256) -> None:
    """Write a 16-bit big-endian P5 PGM with samples ``disparity * scale``.

    ``INVALID`` pixels are stored as 0. Raises ValueError when the scaled
    values would overflow the 16-bit range.
    """
    if scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    data = disp.data
    valid = data != INVALID
    if valid.any():
        top = int(data[valid].max()) * scale
        if top > 65535:
            raise ValueError(
                f"scale {scale} overflows 16-bit storage for disparity "
                f"{int(data[valid].max())} (value {top} > 65535)"
            )
    stored = np.where(valid, data * scale, 0).astype(">u2")
    header = f"P5\n{disp.width} {disp.height}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + stored.tobytes())


def load_disparity(path, scale: int = 256) -> DisparityMap:
    """Read a 16-bit disparity PGM written by :func:`save_disparity`.

    Stored 0 maps to ``INVALID``; other samples are divided by ``scale``
    with round-to-nearest.
    """
    if scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale}")
    arr, maxval = _read_pgm(path)
    if maxval != 65535:
        raise PgmError(f"{path}: expected a 16-bit disparity PGM (maxval 65535), got {maxval}")
    vals = (arr + scale // 2) // scale
    out = np.where(arr == 0, INVALID, vals).astype(np.int32)
    return DisparityMap(out)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

#: Recognized config keys, in canonical write order.
CONFIG_KEYS = (
    "cost",
    "win",
    "dmax",
    "uf",
    "p1",
    "p2",
    "lr_mode",
    "lr_threshold",
    "median",
    "median_win",
    "freq_mhz",
    "il",
)

_BOOL_WORDS = {
    "1": True,
    "true": True,
    "on": True,
    "yes": True,
    "0": False,
    "false": False,
    "off": False,
    "no": False,
}


def _parse_config_text(text: str, name: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    errors: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in CONFIG_KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in pairs:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        pairs[key] = value
    if errors:
        raise ConfigError(f"{name}: " + "; ".join(errors))
    return pairs


def load_config(path):
    """Parse a flat key=value config file into a validated PipelineConfig.

    Unknown keys are rejected; missing keys take the documented defaults.
    Every violation is reported in a single ConfigError.
    """
    from .hwmodel import config_from_strings

    path = Path(path)
    pairs = _parse_config_text(path.read_text(encoding="utf-8"), str(path))
    return config_from_strings(pairs, name=str(path))


def save_config(config, path) -> None:
    """Write a config in canonical key=value form (one key per line)."""
    lines = [
        f"cost={config.cost_fn.kind.value}",
        f"win={config.cost_fn.window}",
        f"dmax={config.d_max}",
        f"uf={config.uf}",
        f"p1={config.params.p1}",
        f"p2={config.params.p2}",
        f"lr_mode={config.refine.lr_mode.value}",
        f"lr_threshold={config.refine.lr_threshold}",
        f"median={'true' if config.refine.median else 'false'}",
        f"median_win={config.refine.median_window}",
        f"freq_mhz={config.freq_mhz:g}",
        f"il={config.il}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
