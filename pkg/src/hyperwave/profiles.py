"""Initial-data generators (all returned in conjugated v-form)."""

from __future__ import annotations

import numpy as np

from .spectral import RadialGrid, RadialProfile


def philox(seed: int, counter: int = 0) -> np.random.Generator:
    """Counter-based stream: member ``counter`` of family ``seed``."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 32) | int(counter)))


def smooth_bump(x: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - x^2)) on |x| < 1, zero outside; peak value 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1 - 1 / (1 - x[inside] ** 2))
    return out


def gaussian(grid: RadialGrid, width: float = 1.0, amp: float = 1.0,
             center: float = 0.0) -> RadialProfile:
    """u = amp * exp(-(r/width)^2) if center == 0, else a pulse in v.

    An off-center pulse is odd-symmetrized:
    v = amp * (g(r - c) - g(-r - c)).
    """
    r = grid.r
    if center == 0:
        return RadialProfile(grid, amp * grid.sinh_r * np.exp(-(r / width) ** 2))
    g = lambda x: np.exp(-(x / width) ** 2)  # noqa: E731
    return RadialProfile(grid, amp * (g(r - center) - g(-r - center)))


def bump(grid: RadialGrid, center: float = 5.0, width: float = 2.0,
         amp: float = 1.0) -> RadialProfile:
    """Compactly supported C-infinity pulse in v on [center-width, center+width]."""
    r = grid.r
    return RadialProfile(grid, amp * (smooth_bump((r - center) / width)
                                      - smooth_bump((-r - center) / width)))


def named(grid: RadialGrid, name: str) -> RadialProfile:
    if name == "gaussian":
        return gaussian(grid)
    if name == "bump":
        return bump(grid, center=3.0, width=2.5)
    raise ValueError(f"unknown profile {name!r}")


def random_smooth(grid: RadialGrid, seed: int, index: int, n_pulses: int = 3,
                  r_max: float = 12.0) -> RadialProfile:
    """Sum of a few Gaussian pulses with random centers, widths and signs."""
    rng = philox(seed, index)
    v = np.zeros(grid.N)
    r = grid.r
    for _ in range(n_pulses):
        c = rng.uniform(1.0, r_max)
        w = rng.uniform(0.5, 2.0)
        a = rng.normal()
        v += a * (np.exp(-((r - c) / w) ** 2) - np.exp(-((r + c) / w) ** 2))
    return RadialProfile(grid, v)


def energy_normalized(state_v0: RadialProfile, state_v1: RadialProfile, k: float = 0.0):
    """Scale (v0, v1) so that ||sqrt(k - Delta) u0||^2 + ||u1||^2 = 1."""
    from .energy import energy_of

    e = energy_of(state_v0, state_v1, k)
    if e == 0:
        return state_v0, state_v1
    s = 1 / np.sqrt(e)
    return s * state_v0, s * state_v1
