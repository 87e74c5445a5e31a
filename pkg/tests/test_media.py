import struct
import zlib

import numpy as np
import pytest
from PIL import Image

from lrqtc.arrays import QuaternionMatrix, QuaternionTensor
from lrqtc.completion import SamplingMask, generate_mask
from lrqtc.media import (ColorImage, ColorVideo, MediaError, UnsupportedMediaError,
                         decode_mask, encode_mask, from_quaternion, image_to_qmatrix,
                         load_mask, load_media, load_quaternion, qmatrix_to_image,
                         qtensor_to_video, quantize, save_mask, save_media, to_quaternion,
                         video_to_qtensor)
from lrqtc.tensor import FormatError


def rgb16_png(path, h=2, w=3):
    # minimal 16-bit truecolour PNG written by hand
    def chunk(tag, data):
        return (struct.pack(">I", len(data)) + tag + data
                + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF))
    ihdr = struct.pack(">IIBBBBB", w, h, 16, 2, 0, 0, 0)
    raw = b"".join(b"\0" + bytes(6 * w) for _ in range(h))
    path.write_bytes(b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
                     + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b""))


def random_image(rng, h=5, w=7):
    return ColorImage(rng.integers(0, 256, (h, w, 3)).astype(float))


class TestEncoding:
    def test_red_and_black(self):
        Q = image_to_qmatrix(ColorImage(np.array([[[255.0, 0, 0], [0, 0, 0]]])))
        assert Q[0, 0].to_array().tolist() == [0, 255, 0, 0]
        assert Q[0, 1].to_array().tolist() == [0, 0, 0, 0]

    def test_decode_red(self):
        Q = QuaternionMatrix(np.array([0.0, 255, 0, 0]).reshape(4, 1, 1))
        assert qmatrix_to_image(Q).pixels[0, 0].tolist() == [255, 0, 0]

    @pytest.mark.parametrize("value, expect", [(300.0, 255.0), (-4.0, 0.0)])
    def test_clamp(self, value, expect):
        Q = QuaternionMatrix(np.full((4, 1, 1), value))
        assert np.all(qmatrix_to_image(Q).pixels == expect)

    def test_image_round_trip_and_purity(self, rng):
        img = random_image(rng)
        Q = image_to_qmatrix(img)
        assert Q.is_pure and Q.shape == (5, 7)
        assert np.array_equal(qmatrix_to_image(Q).pixels, img.pixels)

    def test_video(self, rng):
        frames = [random_image(rng) for _ in range(3)]
        v = ColorVideo.from_frames(frames)
        T = video_to_qtensor(v)
        assert T.is_pure and T.shape == (5, 7, 3)
        assert T.components[..., 1].tolist() == image_to_qmatrix(frames[1]).components.tolist()
        assert np.array_equal(qtensor_to_video(T).pixels, v.pixels)
        assert video_to_qtensor(ColorVideo(np.zeros((2, 2, 3, 4)))) == QuaternionTensor.zeros((2, 2, 4))

    def test_dispatch(self, rng):
        img = random_image(rng)
        assert from_quaternion(to_quaternion(img)) == img
        with pytest.raises(ValueError):
            from_quaternion(QuaternionTensor.zeros((2, 2, 2, 2)))

    def test_range_checked(self):
        with pytest.raises(ValueError):
            ColorImage(np.full((2, 2, 3), 256.0))
        with pytest.raises(ValueError):
            ColorVideo.from_frames([ColorImage(np.zeros((2, 2, 3))), ColorImage(np.zeros((3, 2, 3)))])

    def test_quantize_half_even(self):
        assert quantize(np.array([0.5, 1.5, 2.5, 254.5, 300.0, -1.0])).tolist() == [0, 2, 2, 254, 255, 0]


class TestFiles:
    @pytest.mark.parametrize("suffix", [".png", ".bmp"])
    def test_image_round_trip(self, tmp_path, rng, suffix):
        img = random_image(rng)
        save_media(tmp_path / f"a{suffix}", img)
        assert np.array_equal(load_media(tmp_path / f"a{suffix}").pixels, img.pixels)

    def test_png_pixels_identical_after_resave(self, tmp_path):
        src = tmp_path / "src.png"
        Image.fromarray(np.arange(48, dtype=np.uint8).reshape(4, 4, 3)).save(src)
        save_media(tmp_path / "out.png", load_media(src))
        a = np.asarray(Image.open(src))
        b = np.asarray(Image.open(tmp_path / "out.png"))
        assert a.tobytes() == b.tobytes()

    def test_bundled_fixture(self):
        from pathlib import Path
        img = load_media(Path(__file__).parent / "data" / "chelsea_80x120.png")
        assert img.pixels.shape == (80, 120, 3)

    def test_reject_16bit(self, tmp_path):
        rgb16_png(tmp_path / "c.png")
        with pytest.raises(UnsupportedMediaError, match="16-bit"):
            load_media(tmp_path / "c.png")
        Image.fromarray(np.zeros((3, 3), dtype=np.uint16)).save(tmp_path / "g.png")
        with pytest.raises(UnsupportedMediaError):
            load_media(tmp_path / "g.png")

    def test_reject_alpha(self, tmp_path):
        Image.new("RGBA", (3, 3)).save(tmp_path / "a.png")
        with pytest.raises(UnsupportedMediaError):
            load_media(tmp_path / "a.png")

    def test_reject_format(self, tmp_path):
        (tmp_path / "a.gif").write_bytes(b"GIF89a")
        with pytest.raises(UnsupportedMediaError):
            load_media(tmp_path / "a.gif")

    def test_corrupt_png(self, tmp_path):
        (tmp_path / "a.png").write_bytes(b"not a png")
        with pytest.raises(MediaError):
            load_media(tmp_path / "a.png")

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_media(tmp_path / "nope.png")

    def test_video_dir(self, tmp_path, rng):
        v = ColorVideo.from_frames([random_image(rng) for _ in range(3)])
        save_media(tmp_path / "clip", v)
        assert sorted(p.name for p in (tmp_path / "clip").iterdir()) == [
            "frame_0001.png", "frame_0002.png", "frame_0003.png"]
        assert np.array_equal(load_media(tmp_path / "clip").pixels, v.pixels)
        assert load_quaternion(tmp_path / "clip").shape == (5, 7, 3)

    def test_video_gap(self, tmp_path, rng):
        save_media(tmp_path / "clip", ColorVideo.from_frames([random_image(rng) for _ in range(3)]))
        (tmp_path / "clip" / "frame_0002.png").unlink()
        with pytest.raises(MediaError, match="gaps"):
            load_media(tmp_path / "clip")

    def test_video_inconsistent_frames(self, tmp_path, rng):
        d = tmp_path / "clip"
        d.mkdir()
        save_media(d / "frame_0001.png", random_image(rng, 4, 4))
        save_media(d / "frame_0002.png", random_image(rng, 5, 4))
        with pytest.raises(MediaError):
            load_media(d)

    def test_qt1_everywhere(self, tmp_path, rng):
        T = QuaternionTensor.random((3, 4, 2), rng)
        save_media(tmp_path / "t.qt1", T)
        assert load_media(tmp_path / "t.qt1") == T


class TestMaskFiles:
    def test_round_trip(self, tmp_path):
        m = generate_mask((7, 5, 3), 0.37, seed=4)
        save_mask(tmp_path / "m.qmsk", m)
        back = load_mask(tmp_path / "m.qmsk")
        assert back == m and back.count == m.count

    def test_full(self, tmp_path):
        save_mask(tmp_path / "m.qmsk", SamplingMask.full((3, 3)))
        assert load_mask(tmp_path / "m.qmsk").sr == 1.0

    def test_layout(self):
        buf = encode_mask(SamplingMask.from_indices((3, 3), [(1, 0), (0, 1)]))
        assert buf[:6] == b"QMSK1\x02"
        # flat F-order positions 1 and 3, little bit order
        assert buf[22:] == bytes([0b00001010, 0])

    def test_out_of_bounds_bit(self):
        buf = bytearray(encode_mask(SamplingMask.empty((3, 3))))
        buf[-1] |= 0b10
        with pytest.raises(FormatError):
            decode_mask(bytes(buf))

    @pytest.mark.parametrize("mutate", [lambda b: b[:-1], lambda b: b + b"\0",
                                        lambda b: b"QMSK2" + b[5:], lambda b: b[:9]])
    def test_corrupt(self, mutate):
        with pytest.raises(FormatError):
            decode_mask(mutate(encode_mask(SamplingMask.full((3, 3)))))

    def test_shape_mismatch(self, tmp_path):
        save_mask(tmp_path / "m.qmsk", SamplingMask.full((3, 3)))
        with pytest.raises(MediaError):
            load_mask(tmp_path / "m.qmsk", shape=(3, 4))
