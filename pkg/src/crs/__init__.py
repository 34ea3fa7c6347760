"""Concealing-restoring of bit words with noise-driven Langevin cascades and Kalman filtering."""

from .bitcodec import LogicLevels, ade, ade_trilevel, collapse_trichars, dae, strip_ancilla
from .concealing import ConcealedBundle, conceal, conceal_linear, conceal_nonlinear
from .keys import KeyBundle, LevelKeys, NoiseSpec, generate_noise_tape, keygen
from .nonlinear import G_C, G_S, G_SS, PiecewiseBijection, apply_extended, inverse
from .restoring import Restoration, restore

__version__ = "0.1.0"
