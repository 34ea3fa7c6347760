import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crs.bitcodec import bits_to_str
from crs.imagepipe import (
    GrayImage, ImageFormatError, conceal_image, eve_direct_image, image_to_word, mean_abs_error,
    read_pgm, restore_image, synthetic_image, word_to_image, write_pgm,
)
from crs.keys import keygen
from crs.restoring import restore

# Eve-path images must miss the original by at least this much on average
EVE_MAE_FLOOR = 40 / 255

images = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda hw: st.lists(st.integers(0, 255), min_size=hw[0] * hw[1], max_size=hw[0] * hw[1]).map(
        lambda px: GrayImage(np.array(px, dtype=np.uint8).reshape(hw))
    )
)


def test_word_examples():
    assert bits_to_str(image_to_word(GrayImage(np.array([[255]])))) == "011111111"
    assert bits_to_str(image_to_word(GrayImage(np.array([[0]])))) == "000000000"
    assert bits_to_str(image_to_word(GrayImage(np.array([[0x81]])))) == "010000001"
    assert image_to_word(GrayImage(np.zeros((112, 92)))).size == 82_433
    assert word_to_image([0] + [1] * 8, 1, 1).pixels[0, 0] == 255


@given(images)
def test_word_round_trip(img):
    assert word_to_image(image_to_word(img), img.width, img.height) == img


@given(images)
def test_pgm_round_trip(img):
    assert read_pgm(write_pgm(img)) == img


def test_hand_made_p5():
    data = b"P5\n# one pixel\n1 1\n255\n\x7f"
    img = read_pgm(data)
    assert (img.width, img.height, int(img.pixels[0, 0])) == (1, 1, 127)
    # a single whitespace byte ends the header, so a payload byte of '\n' is data
    assert read_pgm(b"P5 2 1 255\n\n\x01").pixels.tolist() == [[10, 1]]


@pytest.mark.parametrize(
    "data",
    [b"P2\n1 1\n255\n7\n", b"P5\n1 1\n65535\n\x00\x00", b"P5\n2 2\n255\n\x00\x01", b"P5\nxx\n", b""],
)
def test_bad_pgm(data):
    with pytest.raises(ImageFormatError):
        read_pgm(data)


def test_bad_sizes():
    with pytest.raises(ImageFormatError):
        word_to_image([0] * 10, 1, 1)
    with pytest.raises(ImageFormatError):
        GrayImage(np.array([[300]]))


@pytest.mark.parametrize("nl", [None, "g_c"])
def test_honest_image_round_trip(nl):
    img = synthetic_image(32, seed=1)
    keys = keygen(2, nonlinear_id=nl, seed=2)
    data = conceal_image(img, keys, trial_seed=3)
    assert data.image_shape == (32, 32)
    assert restore_image(data, keys) == img


def test_eve_images_are_far_off():
    direct, missing = [], []
    for seed in range(10):
        img = synthetic_image(32, seed=seed)
        keys = keygen(2, sigma1=0.1, nonlinear_id="g_c", seed=seed)
        data = conceal_image(img, keys, trial_seed=seed)
        direct.append(np.mean([mean_abs_error(img, eve_direct_image(data, lv, 32, 32)) for lv in (1, 2, 3)]))
        blind = restore(data, keygen(2, sigma1=0.1, seed=seed)).word
        missing.append(mean_abs_error(img, word_to_image(blind, 32, 32)))
    assert np.mean(direct) > EVE_MAE_FLOOR
    assert np.mean(missing) > EVE_MAE_FLOOR


@pytest.mark.slow
def test_full_size_face_scale():
    img = synthetic_image(92, seed=0)
    img = GrayImage(np.resize(img.pixels, (112, 92)))
    keys = keygen(2, seed=5)
    assert restore_image(conceal_image(img, keys, 1), keys) == img
