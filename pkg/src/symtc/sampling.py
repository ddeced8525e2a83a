"""Index-addressed pseudo-random sampling.

Every sample ``i`` of a run with master seed ``seed`` draws from its own
generator seeded by ``(seed, stream, i)``.  A run can therefore be split
over any number of workers (each handling a range of indices) and the
merged result is identical to the serial one.
"""

from __future__ import annotations

import numpy as np


def sample_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(stream), int(index)])


def uniform_sphere(rng: np.random.Generator, ambient: int) -> np.ndarray:
    """Uniform point on the unit sphere of R^ambient (normalized Gaussian)."""
    while True:
        v = rng.standard_normal(ambient)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n


def random_frame(rng: np.random.Generator, ambient: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform orthonormal 2-frame in R^ambient (Gram-Schmidt on Gaussians)."""
    u1 = uniform_sphere(rng, ambient)
    while True:
        w = rng.standard_normal(ambient)
        w = w - (w @ u1) * u1
        n = np.linalg.norm(w)
        if n > 1e-6:
            return u1, w / n


def stream_id(*labels: str) -> int:
    """Stable integer stream id from text labels (independent of PYTHONHASHSEED)."""
    acc = 0
    for label in labels:
        for ch in label.encode():
            acc = (acc * 131 + ch) % (2**61 - 1)
        acc = (acc * 131 + 7) % (2**61 - 1)
    return acc
