"""Color media <-> pure quaternion arrays, plus image, video and mask files.

A pixel ``(r, g, b)`` becomes the pure quaternion ``r i + g j + b k``. Images
are ``H x W`` quaternion matrices, videos ``H x W x T`` quaternion tensors
with frames along mode 3. Pixel values stay on the 0..255 scale in double
precision; clamping and round-half-even quantization happen only on write.

Files:

* images: 8-bit RGB PNG or BMP (grayscale and palette images are expanded);
* videos: a directory of ``frame_0001.png``, ``frame_0002.png``, ... with no gaps;
* tensors: ``.qt1`` (see :mod:`lrqtc.tensor`);
* masks: ``QMSK1`` magic, u8 order, u64 shape, bitmap packed LSB-first in
  first-index-fastest order.
"""

from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from .arrays import MAX_ORDER, QuaternionMatrix, QuaternionTensor, as_matrix
from .completion import SamplingMask
from .tensor import FormatError, load_qt1, save_qt1

IMAGE_SUFFIXES = {".png", ".bmp"}
TENSOR_SUFFIXES = {".qt1"}
MASK_MAGIC = b"QMSK1"
_FRAME_RE = re.compile(r"^frame_(\d+)\.png$", re.IGNORECASE)


class MediaError(ValueError):
    """Media could not be decoded or does not satisfy the media contract."""


class UnsupportedMediaError(MediaError):
    pass


def _check_pixels(a: np.ndarray, ndim: int, what: str) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    if a.ndim != ndim or a.shape[2] != 3:
        raise ValueError(f"{what} pixels must have shape "
                         f"{'(H, W, 3)' if ndim == 3 else '(H, W, 3, T)'}, got {a.shape}")
    if a.size and (a.min() < 0 or a.max() > 255):
        raise ValueError(f"{what} pixel values must lie in [0, 255]")
    a.flags.writeable = False
    return a


class _PixelEquality:
    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ColorImage(_PixelEquality):
    """RGB image as an ``(H, W, 3)`` float array on the 0..255 scale."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _check_pixels(self.pixels, 3, "image"))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class ColorVideo(_PixelEquality):
    """RGB video as an ``(H, W, 3, T)`` float array on the 0..255 scale."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _check_pixels(self.pixels, 4, "video"))

    @property
    def n_frames(self) -> int:
        return self.pixels.shape[3]

    def frame(self, t: int) -> ColorImage:
        return ColorImage(self.pixels[:, :, :, t])

    @classmethod
    def from_frames(cls, frames) -> "ColorVideo":
        frames = [f.pixels if isinstance(f, ColorImage) else np.asarray(f) for f in frames]
        if not frames:
            raise ValueError("a video needs at least one frame")
        shape = frames[0].shape
        for i, f in enumerate(frames):
            if f.shape != shape:
                raise MediaError(f"frame {i + 1} has shape {f.shape}, expected {shape}")
        return cls(np.stack(frames, axis=-1))


Media = Union[ColorImage, ColorVideo]


def image_to_qmatrix(img: ColorImage) -> QuaternionMatrix:
    p = img.pixels
    c = np.zeros((4, p.shape[0], p.shape[1]))
    c[1:] = np.moveaxis(p, 2, 0)
    return QuaternionMatrix._wrap(c)


def qmatrix_to_image(Q: QuaternionMatrix) -> ColorImage:
    """Imaginary planes as RGB, clamped to [0, 255]; the real plane is dropped."""
    Q = as_matrix(Q)
    return ColorImage(np.clip(np.moveaxis(Q.components[1:], 0, 2), 0.0, 255.0))


def video_to_qtensor(v: ColorVideo) -> QuaternionTensor:
    p = v.pixels
    c = np.zeros((4, p.shape[0], p.shape[1], p.shape[3]))
    c[1:] = np.moveaxis(p, 2, 0)
    return QuaternionTensor._wrap(c)


def qtensor_to_video(T: QuaternionTensor) -> ColorVideo:
    if T.order != 3:
        raise ValueError(f"a video tensor has order 3, got {T.order}")
    return ColorVideo(np.clip(np.moveaxis(T.components[1:], 0, 2), 0.0, 255.0))


def to_quaternion(media) -> QuaternionTensor:
    """Pure quaternion array for a media object; quaternion arrays pass through."""
    if isinstance(media, QuaternionTensor):
        return media
    if isinstance(media, ColorImage):
        return image_to_qmatrix(media)
    if isinstance(media, ColorVideo):
        return video_to_qtensor(media)
    raise TypeError(f"cannot convert {type(media).__name__} to a quaternion array")


def from_quaternion(T: QuaternionTensor) -> Media:
    """Inverse of :func:`to_quaternion` for order 2 and 3."""
    if T.order == 2:
        return qmatrix_to_image(T)
    if T.order == 3:
        return qtensor_to_video(T)
    raise ValueError(f"no media representation for order {T.order}")


def quantize(pixels: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half to even."""
    return np.rint(np.clip(pixels, 0.0, 255.0)).astype(np.uint8)


def _png_bit_depth(path: Path):
    with open(path, "rb") as fh:
        head = fh.read(29)
    if head[:8] != b"\x89PNG\r\n\x1a\n" or head[12:16] != b"IHDR":
        return None, None
    return head[24], head[25]


def load_image(path) -> ColorImage:
    path = Path(path)
    if path.suffix.lower() not in IMAGE_SUFFIXES:
        raise UnsupportedMediaError(f"unsupported image format {path.suffix!r}")
    if path.suffix.lower() == ".png":
        depth, ctype = _png_bit_depth(path)
        if depth == 16:
            raise UnsupportedMediaError(f"{path}: 16-bit PNG is not supported, need 8-bit RGB")
        if ctype in (4, 6):
            raise UnsupportedMediaError(f"{path}: images with an alpha channel are not supported")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("RGBA", "LA", "PA"):
                raise UnsupportedMediaError(f"{path}: alpha channels are not supported")
            if im.mode in ("I", "I;16", "I;16B", "F"):
                raise UnsupportedMediaError(f"{path}: unsupported pixel depth (mode {im.mode})")
            if im.mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float64)
    except UnsupportedMediaError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise MediaError(f"cannot decode {path}: {exc}") from exc
    return ColorImage(arr)


def save_image(path, img: ColorImage) -> None:
    path = Path(path)
    fmt = {".png": "PNG", ".bmp": "BMP"}.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedMediaError(f"unsupported image format {path.suffix!r}")
    Image.fromarray(quantize(img.pixels), mode="RGB").save(path, format=fmt)


def _frame_files(directory: Path) -> list[Path]:
    numbered = []
    for p in directory.iterdir():
        m = _FRAME_RE.match(p.name)
        if m:
            numbered.append((int(m.group(1)), p))
    if not numbered:
        raise MediaError(f"{directory}: no frame_NNNN.png files found")
    numbered.sort()
    nums = [n for n, _ in numbered]
    if nums != list(range(1, len(nums) + 1)):
        missing = sorted(set(range(1, nums[-1] + 1)) - set(nums))
        raise MediaError(
            f"{directory}: frame numbering must run 1..T without gaps "
            f"(missing {missing[:5]}{'...' if len(missing) > 5 else ''})")
    return [p for _, p in numbered]


def load_video(directory) -> ColorVideo:
    return ColorVideo.from_frames(load_image(p) for p in _frame_files(Path(directory)))


def save_video(directory, video: ColorVideo) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(video.n_frames)))
    for t in range(video.n_frames):
        save_image(directory / f"frame_{t + 1:0{width}d}.png", video.frame(t))


def load_media(path):
    """Load an image file, a frame directory or a ``.qt1`` tensor."""
    path = Path(path)
    if path.is_dir():
        return load_video(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix.lower() in TENSOR_SUFFIXES:
        return load_qt1(path)
    return load_image(path)


def save_media(path, media) -> None:
    path = Path(path)
    if isinstance(media, QuaternionTensor):
        if path.suffix.lower() in TENSOR_SUFFIXES:
            save_qt1(path, media)
            return
        media = from_quaternion(media)
    if isinstance(media, ColorImage):
        save_image(path, media)
    elif isinstance(media, ColorVideo):
        if path.suffix:
            raise MediaError(f"videos are saved as frame directories, got {path}")
        save_video(path, media)
    else:
        raise TypeError(f"cannot save {type(media).__name__}")


def load_quaternion(path) -> QuaternionTensor:
    """Any supported input as a quaternion array (images become matrices)."""
    return to_quaternion(load_media(path))


def encode_mask(mask: SamplingMask) -> bytes:
    shape = mask.shape
    bits = np.packbits(mask.observed.ravel(order="F"), bitorder="little")
    return (MASK_MAGIC + struct.pack("<B", len(shape))
            + struct.pack(f"<{len(shape)}Q", *shape) + bits.tobytes())


def decode_mask(buf: bytes) -> SamplingMask:
    if buf[:5] != MASK_MAGIC:
        raise FormatError("missing QMSK1 magic")
    try:
        (order,) = struct.unpack_from("<B", buf, 5)
        if not 1 <= order <= MAX_ORDER:
            raise FormatError(f"unsupported mask order {order}")
        shape = struct.unpack_from(f"<{order}Q", buf, 6)
    except struct.error as exc:
        raise FormatError(f"truncated mask header: {exc}") from exc
    if any(n == 0 for n in shape):
        raise FormatError(f"zero-length dimension in mask shape {shape}")
    total = int(np.prod(shape))
    payload = np.frombuffer(buf, dtype=np.uint8, offset=6 + 8 * order)
    if payload.size != (total + 7) // 8:
        raise FormatError(
            f"mask bitmap has {payload.size} bytes, expected {(total + 7) // 8}")
    bits = np.unpackbits(payload, bitorder="little")
    if bits[total:].any():
        raise FormatError("mask marks indices outside its shape")
    return SamplingMask(bits[:total].astype(bool).reshape(shape, order="F"))


def save_mask(path, mask: SamplingMask) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_mask(mask))


def load_mask(path, shape=None) -> SamplingMask:
    """Read a mask file; with ``shape`` given, a mismatch raises ``MediaError``."""
    with open(path, "rb") as fh:
        mask = decode_mask(fh.read())
    if shape is not None and tuple(shape) != mask.shape:
        raise MediaError(f"mask shape {mask.shape} does not match media shape {tuple(shape)}")
    return mask


def is_media_path(path) -> bool:
    path = Path(path)
    return path.is_dir() or path.suffix.lower() in IMAGE_SUFFIXES | TENSOR_SUFFIXES


__all__ = [name for name in dir() if not name.startswith("_") and name not in {
    "annotations", "os", "re", "struct", "np", "Image", "Path", "Union", "dataclass"}]
