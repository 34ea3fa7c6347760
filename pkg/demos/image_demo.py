"""Conceal a grayscale image and compare Bob's and Eve's views.

Writes PGM files next to this script.  Pass a P5 PGM path to use your own
image instead of the synthetic one:

    python3 demos/image_demo.py [face.pgm]
"""

import sys
from pathlib import Path

from crs import keygen, restore
from crs.imagepipe import (
    conceal_image, eve_direct_image, mean_abs_error, read_pgm, restore_image, synthetic_image,
    word_to_image, write_pgm,
)

out = Path(__file__).with_name("image_out")
out.mkdir(exist_ok=True)
img = read_pgm(Path(sys.argv[1]).read_bytes()) if len(sys.argv) > 1 else synthetic_image(64)
w, h = img.width, img.height

keys = keygen(2, sigma1=0.1, nonlinear_id="g_c", seed=7)
data = conceal_image(img, keys, trial_seed=0)

bob = restore_image(data, keys)
flips = int((bob.pixels != img.pixels).sum())
print(f"{w}x{h} image, Bob: {flips} pixels differ, MAE {mean_abs_error(img, bob):.4f}")
write_pgm_to = lambda name, im: (out / name).write_bytes(write_pgm(im))
write_pgm_to("original.pgm", img)
write_pgm_to("bob.pgm", bob)

for level in range(1, data.n_levels + 2):
    eve = eve_direct_image(data, level, w, h)
    print(f"Eve reads U^{level} directly: MAE {mean_abs_error(img, eve):.4f}")
    write_pgm_to(f"eve_u{level}.pgm", eve)

# Eve holds every key except the bijection
blind = word_to_image(restore(data, keygen(2, sigma1=0.1, seed=7)).word, w, h)
print(f"Eve without g_c: MAE {mean_abs_error(img, blind):.4f}")
write_pgm_to("eve_no_gc.pgm", blind)
