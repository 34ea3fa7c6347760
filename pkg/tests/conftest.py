import numpy as np

from crs.keys import KeyBundle, LevelKeys, NoiseSpec, NoiseTape

EQ20_WORD = "101111001000011110111"


def quiet_bundle(n_levels=1, a=0.0, b=1.0, b_u=1.0, nonlinear_id=None):
    """Noise-free bundle whose key streams are all zero."""
    lv = LevelKeys(a, b, b_u, NoiseSpec(0, 0), NoiseSpec(0, 0), 0.0)
    return KeyBundle((lv,) * n_levels, nonlinear_id)


def zero_tape(n_levels, length):
    return NoiseTape(np.zeros((n_levels, length)), np.zeros((n_levels, length)))


def pytest_addoption(parser):
    parser.addoption("--full-scale", action="store_true", help="run the T=K=100,000 statistics (hours)")
