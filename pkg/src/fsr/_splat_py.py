"""Pure-numpy fallback for the compiled splatting loop.

Splatting a shared kernel from many sources is a convolution of the
sparse source image, so the whole group collapses to one FFT convolution
per channel. Results agree with the compiled loop to floating-point
round-off.
"""

from __future__ import annotations

import numpy as np
from scipy import signal


def splat_group(
    ys: np.ndarray,
    xs: np.ndarray,
    values: np.ndarray,
    kernel: np.ndarray,
    allowed: np.ndarray,
    energy: np.ndarray,
    weight: np.ndarray,
) -> None:
    h, w = weight.shape
    if kernel.shape == (1, 1):
        a = allowed[ys, xs] * kernel[0, 0]
        np.add.at(energy, (ys, xs), values * a[:, None])
        np.add.at(weight, (ys, xs), a)
        return
    src = np.zeros((h, w, 3), dtype=np.float64)
    mass = np.zeros((h, w), dtype=np.float64)
    np.add.at(src, (ys, xs), values)
    np.add.at(mass, (ys, xs), 1.0)
    for c in range(3):
        spread = signal.fftconvolve(src[:, :, c], kernel, mode="same")
        energy[:, :, c] += spread * allowed
    weight += signal.fftconvolve(mass, kernel, mode="same") * allowed
