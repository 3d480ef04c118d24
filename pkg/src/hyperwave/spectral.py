"""Radial functional calculus on H^3.

A radial function u on H^3 is stored through v(r) = sinh(r) u(r).  Under this
conjugation -Delta - 1 becomes -d^2/dr^2 acting on odd functions of r, so a
type-I discrete sine series on (0, R) diagonalizes every function of
D0 = sqrt(-Delta - 1) with eigenvalues lambda_k = k pi / R.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.integrate import simpson

DEFAULT_R = 40.0
DEFAULT_N = 2 ** 14


class SpectralTailWarning(UserWarning):
    """Profile or symbol is not resolved by the grid's spectral ladder."""


@dataclass(frozen=True)
class RadialGrid:
    R: float = DEFAULT_R
    N: int = DEFAULT_N

    def __post_init__(self):
        if self.R <= 0 or self.N < 4:
            raise ValueError("need R > 0 and N >= 4")

    @property
    def dr(self) -> float:
        return self.R / (self.N + 1)

    @cached_property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.N + 1)

    @cached_property
    def sinh_r(self) -> np.ndarray:
        return np.sinh(self.r)

    @cached_property
    def lam(self) -> np.ndarray:
        return np.pi / self.R * np.arange(1, self.N + 1)

    @property
    def lam_max(self) -> float:
        return np.pi * self.N / self.R

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.R, self.N * factor)


@dataclass
class RadialProfile:
    """Samples v(r_j) = sinh(r_j) u(r_j) on the interior grid points."""

    grid: RadialGrid
    v: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v)
        if self.v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got {self.v.shape}")

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        _same_grid(self, other)
        return RadialProfile(self.grid, self.v + other.v)

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        _same_grid(self, other)
        return RadialProfile(self.grid, self.v - other.v)

    def __mul__(self, c) -> "RadialProfile":
        return RadialProfile(self.grid, c * self.v)

    __rmul__ = __mul__

    def __neg__(self) -> "RadialProfile":
        return RadialProfile(self.grid, -self.v)

    def copy(self) -> "RadialProfile":
        return RadialProfile(self.grid, self.v.copy())

    @property
    def u(self) -> np.ndarray:
        return self.v / self.grid.sinh_r


def _same_grid(a: RadialProfile, b: RadialProfile) -> None:
    if a.grid != b.grid:
        raise ValueError("profiles live on different grids")


def zeros(grid: RadialGrid) -> RadialProfile:
    return RadialProfile(grid, np.zeros(grid.N))


def conjugate(u: np.ndarray, grid: RadialGrid) -> RadialProfile:
    u = np.asarray(u)
    if u.shape != (grid.N,):
        raise ValueError(f"expected {grid.N} samples, got {u.shape}")
    return RadialProfile(grid, grid.sinh_r * u)


def origin_value(profile: RadialProfile) -> float:
    """u(0) = v'(0), fourth order, using the odd symmetry of v."""
    v, h = profile.v, profile.grid.dr
    return (8 * v[0] - v[1]) / (6 * h)


def unconjugate(profile: RadialProfile, with_origin: bool = False) -> np.ndarray:
    """Return u on the interior grid; prepend u(0) if ``with_origin``."""
    u = profile.u
    if with_origin:
        return np.concatenate([[origin_value(profile)], u])
    return u


# ---------------------------------------------------------------- transforms

def sine_transform(profile: RadialProfile) -> np.ndarray:
    """Orthonormal DST-I coefficients (coefficient k pairs with lambda_k)."""
    return sfft.dst(profile.v, type=1, norm="ortho")


def inverse_sine_transform(coeffs: np.ndarray, grid: RadialGrid) -> RadialProfile:
    return RadialProfile(grid, sfft.dst(coeffs, type=1, norm="ortho"))


@dataclass
class MultiplierSpec:
    """Even function m(lambda) of D0.

    ``at_infinity`` is the limit of m as lambda -> infinity when it is a
    nonzero constant; that part acts as a multiple of the identity and is
    split off before kernels are computed.
    """

    symbol: Callable[[np.ndarray], np.ndarray]
    at_infinity: complex | None = None
    name: str = ""

    def __call__(self, lam: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.symbol(np.asarray(lam, dtype=float)))
        if vals.shape != np.shape(lam):
            vals = np.broadcast_to(vals, np.shape(lam)).copy()
        if np.isnan(vals).any():
            raise ValueError(f"symbol {self.name or '?'} produced NaN")
        return vals

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        inf = None
        if self.at_infinity is not None and other.at_infinity is not None:
            inf = self.at_infinity * other.at_infinity
        return MultiplierSpec(lambda lam: self(lam) * other(lam), inf,
                              f"({self.name})*({other.name})")


IDENTITY = MultiplierSpec(lambda lam: np.ones_like(lam), at_infinity=1.0, name="1")


def d_power(s: float) -> MultiplierSpec:
    """D^s = (-Delta)^{s/2}, symbol (lambda^2 + 1)^{s/2}."""
    return MultiplierSpec(lambda lam: (lam * lam + 1.0) ** (s / 2),
                          at_infinity=1.0 if s == 0 else None, name=f"D^{s}")


def sin_over_lam(t: float) -> MultiplierSpec:
    def sym(lam):
        return t * np.sinc(t * lam / np.pi)
    return MultiplierSpec(sym, name=f"sin({t}l)/l")


def cos_lam(t: float) -> MultiplierSpec:
    return MultiplierSpec(lambda lam: np.cos(t * lam), name=f"cos({t}l)")


# Coefficients below this fraction of the peak are transform roundoff; they are
# dropped before a growing symbol can amplify them (Krasny filter).
ROUNDOFF_FILTER = 1e-15


def apply_multiplier(profile: RadialProfile, m: MultiplierSpec) -> RadialProfile:
    lam = profile.grid.lam
    c = sine_transform(profile)
    mv = m(lam)
    if abs(mv[-1]) > abs(mv[0]):
        c = np.where(np.abs(c) > ROUNDOFF_FILTER * np.abs(c).max(), c, 0)
    return inverse_sine_transform(mv * c, profile.grid)


def spectral_tail_fraction(profile: RadialProfile, fraction: float = 0.1) -> float:
    """Share of the L^2 mass carried by the top ``fraction`` of the ladder."""
    c = np.abs(sine_transform(profile)) ** 2
    total = c.sum()
    if total == 0:
        return 0.0
    k0 = int(len(c) * (1 - fraction))
    return float(c[k0:].sum() / total)


def apply_fractional_D(profile: RadialProfile, s: float, tail_tol: float = 1e-10) -> RadialProfile:
    if s != 0 and spectral_tail_fraction(profile) > tail_tol:
        warnings.warn(f"profile not spectrally resolved for D^{s}", SpectralTailWarning, stacklevel=2)
    return apply_multiplier(profile, d_power(s))


def second_derivative(profile: RadialProfile) -> RadialProfile:
    """d^2 v / dr^2 spectrally; equals sinh(r) (Delta + 1) u."""
    return apply_multiplier(profile, MultiplierSpec(lambda lam: -lam * lam, name="-l^2"))


# ---------------------------------------------------------------- norms

def lq_norm(profile: RadialProfile, q: float) -> float:
    """L^q(H^3) norm of u = v / sinh r (radial volume 4 pi sinh^2 r dr)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    grid = profile.grid
    integrand = np.abs(profile.v) ** q * grid.sinh_r ** (2 - q)
    # r = 0 and r = R contribute zero (u finite at 0, v vanishes at R)
    y = np.concatenate([[0.0], integrand, [0.0]])
    total = 4 * np.pi * simpson(y, dx=grid.dr)
    return float(total ** (1 / q))


def l2_norm_spectral(profile: RadialProfile) -> float:
    """L^2(H^3) norm via Parseval (exact for the discrete sine series)."""
    return float(np.sqrt(4 * np.pi * profile.grid.dr * np.sum(np.abs(profile.v) ** 2)))


# ---------------------------------------------------------------- kernels

def kernel_of_multiplier(m: MultiplierSpec, grid: RadialGrid,
                         r: np.ndarray | None = None, resolve_tol: float = 1e-8) -> np.ndarray:
    """Convolution kernel K(r) of m(D0) at hyperbolic distance r > 0.

    K(r) = -1/(4 pi^2 sinh r) d/dtau m^(tau) at tau = r, with the Fourier
    transform taken on the grid's lambda-ladder by the trapezoid rule.  A
    constant part ``m.at_infinity`` only contributes at r = 0 and is dropped.
    """
    lam = grid.lam
    vals = m(lam).astype(complex)
    if m.at_infinity is not None:
        vals = vals - m.at_infinity
    weights = lam * vals
    scale = np.abs(weights).max()
    tail = np.abs(weights[int(0.95 * len(lam)):]).max() if scale > 0 else 0.0
    if scale > 0 and tail > resolve_tol * scale:
        warnings.warn(f"symbol {m.name or '?'} transform is not resolved on the grid",
                      SpectralTailWarning, stacklevel=2)
    dlam = np.pi / grid.R
    if r is None:
        rr = grid.r
        # sum_k w_k sin(lambda_k r_j) is half the unnormalized DST-I
        s = 0.5 * (sfft.dst(weights.real, type=1) + 1j * sfft.dst(weights.imag, type=1))
    else:
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        s = np.empty(rr.shape, dtype=complex)
        for i0 in range(0, rr.size, 256):
            chunk = rr.flat[i0:i0 + 256]
            s.flat[i0:i0 + 256] = np.sin(np.outer(chunk, lam)) @ weights
    dmhat = -2 * dlam * s
    K = -dmhat / (4 * np.pi ** 2 * np.sinh(rr))
    if np.all(np.isreal(vals)):
        return K.real
    return K
