import json
import os

import numpy as np
import pytest

from gelinspect.imageio import (
    ImageLoadError,
    decode_jpeg,
    encode_jpeg,
    load_image,
    quantize_u8,
    save_gray8,
    save_gray16,
    save_indicator,
    save_rgb8,
    write_json,
)


def test_quantize_u8_rounds_half_up():
    levels = quantize_u8(np.array([[0.0, 0.5, 1.0, 127.4 / 255.0, 127.6 / 255.0]]))
    assert levels.tolist() == [[0, 128, 255, 127, 128]]


def test_quantize_clips_out_of_range():
    levels = quantize_u8(np.array([[-0.3, 1.7]]))
    assert levels.tolist() == [[0, 255]]


def test_gray8_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(201)
    levels = rng.integers(0, 256, size=(17, 23), dtype=np.uint8)
    path = tmp_path / "img.png"
    save_gray8(path, levels / 255.0)
    back = load_image(path)
    assert np.array_equal(back, levels / 255.0)


def test_gray16_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(203)
    levels = rng.integers(0, 65536, size=(9, 13), dtype=np.uint16)
    path = tmp_path / "img16.png"
    save_gray16(path, levels / 65535.0)
    back = load_image(path)
    assert np.max(np.abs(back - levels / 65535.0)) == 0.0


def test_rgb_load_uses_luma_weights(tmp_path):
    arr = np.zeros((2, 2, 3))
    arr[0, 0] = (1.0, 0.0, 0.0)
    arr[0, 1] = (0.0, 1.0, 0.0)
    arr[1, 0] = (0.0, 0.0, 1.0)
    arr[1, 1] = (1.0, 1.0, 1.0)
    path = tmp_path / "rgb.png"
    save_rgb8(path, arr)
    gray = load_image(path)
    assert gray[0, 0] == pytest.approx(0.299, abs=1e-12)
    assert gray[0, 1] == pytest.approx(0.587, abs=1e-12)
    assert gray[1, 0] == pytest.approx(0.114, abs=1e-12)
    assert gray[1, 1] == pytest.approx(1.0, abs=1e-12)


def test_indicator_save_writes_only_black_and_white(tmp_path):
    bits = np.array([[1, 0], [0, 1]], dtype=np.uint8)
    path = tmp_path / "ind.png"
    save_indicator(path, bits)
    back = load_image(path)
    assert set(np.unique(back).tolist()) == {0.0, 1.0}
    with pytest.raises(ValueError):
        save_indicator(path, bits.astype(np.int64))


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "broken.png"
    path.write_bytes(b"not an image at all")
    with pytest.raises(ImageLoadError):
        load_image(path)
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "missing.png")


def test_no_partial_files_left_behind(tmp_path):
    save_gray8(tmp_path / "a.png", np.full((4, 4), 0.5))
    write_json(tmp_path / "a.json", {"x": 1})
    leftovers = [n for n in os.listdir(tmp_path) if n.endswith(".part")]
    assert leftovers == []


def test_write_json_stable_layout(tmp_path):
    path = tmp_path / "doc.json"
    write_json(path, {"b": 1, "a": [1.5, None]})
    text = path.read_text()
    assert text == '{\n  "b": 1,\n  "a": [\n    1.5,\n    null\n  ]\n}\n'
    assert json.loads(text) == {"b": 1, "a": [1.5, None]}


def test_jpeg_roundtrip_quality_ladder():
    rng = np.random.default_rng(207)
    image = np.clip(0.5 + 0.1 * rng.standard_normal((64, 64)), 0.0, 1.0)
    sizes = []
    for quality in (95, 60, 25, 5):
        payload = encode_jpeg(image, quality)
        sizes.append(len(payload))
        decoded = decode_jpeg(payload)
        assert decoded.shape == image.shape
        assert decoded.min() >= 0.0 and decoded.max() <= 1.0
    assert sizes == sorted(sizes, reverse=True)


def test_encode_jpeg_rejects_out_of_range_quality():
    with pytest.raises(ValueError):
        encode_jpeg(np.zeros((8, 8)), 0)
    with pytest.raises(ValueError):
        encode_jpeg(np.zeros((8, 8)), 101)
