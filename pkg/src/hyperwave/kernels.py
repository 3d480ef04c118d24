"""Complex-order Bessel potentials and the kernels of the analytic families.

Conventions (one spatial dimension, Fourier kernel e^{i eta r}):

    G_z(r) = a(z) int (1 + eta^2)^{z/2} e^{i eta r} d eta
    H_z(r) = a(z) int eta (1 + eta^2)^{(z-1)/2} e^{i eta r} d eta
    a(z)   = (z + 1) exp(z^2)

Off the origin both are evaluated through the Laplace representation

    int (1 + eta^2)^{z/2} e^{i eta r} d eta
        = 2 pi 2^{z/2} e^{-|r|} / (Gamma(-z/2) Gamma(1 + z/2)) * I_z(|r|),
    I_z(r) = int_0^inf e^{-r tau} (tau + tau^2/2)^{z/2} d tau,

which is entire in z for fixed r != 0 once written with 1/Gamma.  The
families S_z(t) = a(z) D^z sin(t D0)/D0 and C_z(t) = a(z) D^{z-1} cos(t D0)
on H^3 then have kernels

    K_S(t, r) = (G_z(r - t) - G_z(r + t)) / (8 pi^2 sinh r)
    K_C(t, r) = i (H_z(t - r) - H_z(t + r)) / (8 pi^2 sinh r).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import rgamma

from .reports import VerificationReport

DIAG_TOL = 1e-3


class QuadratureWarning(UserWarning):
    """A quadrature error estimate exceeded its tolerance."""


def a_factor(z: complex) -> complex:
    return (z + 1) * np.exp(z * z)


@dataclass(frozen=True)
class KernelSample:
    r: float
    t: float
    value: complex
    path: str


# ---------------------------------------------------------------- quadrature

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (16, 24)}


def _panel_nodes(edges: np.ndarray, n: int):
    x, w = _GL[n]
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (half * x + 0.5 * (a + b)).ravel(), (half * w).ravel()


# scaled variable x = r tau: dyadic panels below 2, unit panels to 64
_X_SMALL = 2.0 ** -40
_X_EDGES = np.concatenate([2.0 ** np.arange(-40, 1), np.arange(2.0, 64.5, 1.0)])
_X24, _W24 = _panel_nodes(_X_EDGES, 24)
_X16, _W16 = _panel_nodes(_X_EDGES, 16)


def laplace_integral(z: complex, r, with_error: bool = False):
    """I_z(r) for r > 0 (array-valued), Re z > -2.

    Uses x = r tau, so I_z(r) = r^{-z/2-1} int e^{-x} x^{z/2} (1 + x/(2r))^{z/2} dx
    on fixed panels; the piece [0, 2^-40] is integrated from the two-term
    Taylor expansion.  The error estimate is the 24- vs 16-point difference.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    w = z / 2

    def body(x, wts):
        xx = x[None, :]
        f = np.exp(-xx + w * np.log(xx) + w * np.log1p(xx / (2 * r[:, None])))
        return f @ wts

    d = _X_SMALL
    head = d ** (w + 1) / (w + 1) + (w / (2 * r) - 1) * d ** (w + 2) / (w + 2)
    q24 = body(_X24, _W24) + head
    scale = r ** (-w - 1)
    val = scale * q24
    if not with_error:
        return val
    q16 = body(_X16, _W16) + head
    return val, np.abs(scale * (q24 - q16))


def laplace_integral_direct(z: complex, r: float) -> complex:
    """I_z(r) in the original tau variable (independent panel layout).

    Dyadic panels from 2^-30 to 1 (Taylor head below), then panels that
    double up to width 2/r and stay there until r tau = 60.
    """
    r = float(r)
    if r <= 0:
        raise ValueError("r must be positive")
    w = z / 2
    eps = 2.0 ** -30
    edges = [2.0 ** k for k in range(-30, 1)]
    cap = 2.0 / r
    t_max = 60.0 / r + 1.0
    while edges[-1] < t_max:
        edges.append(edges[-1] + min(edges[-1], cap))
    x, wts = _panel_nodes(np.array(edges), 24)
    f = np.exp(-r * x + w * np.log(x) + w * np.log1p(x / 2))
    head = eps ** (w + 1) / (w + 1) + (w / 2 - r) * eps ** (w + 2) / (w + 2)
    return complex(f @ wts + head)


def _potential(z: complex, r, with_error: bool = False):
    """Unnormalized int (1+eta^2)^{z/2} e^{i eta r} d eta for r != 0."""
    r = np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    if np.any(r == 0):
        raise ValueError("Bessel potentials are evaluated only at r != 0")
    pref = 2 * np.pi * 2 ** (z / 2) * rgamma(-z / 2) * rgamma(1 + z / 2)
    if pref == 0:
        zero = np.zeros(r.shape, dtype=complex)
        return (zero, np.zeros(r.shape)) if with_error else zero
    if with_error:
        I, err = laplace_integral(z, r, with_error=True)
        return pref * np.exp(-r) * I, np.abs(pref) * np.exp(-r) * err
    return pref * np.exp(-r) * laplace_integral(z, r)


def bessel_G(z: complex, r, rel_tol: float = 1e-9):
    """G_z(r), vectorized over r; warns if the quadrature estimate is poor."""
    a = a_factor(z)
    scalar = np.ndim(r) == 0
    if a == 0:
        _check_r(r)
        out = np.zeros(np.shape(np.atleast_1d(r)), dtype=complex)
    else:
        val, err = _potential(z, r, with_error=True)
        _flag(err, val, rel_tol, f"G_{z}")
        out = a * val
    return complex(out[0]) if scalar else out


def bessel_H(z: complex, r, path: str = "h_formula", rel_tol: float = 1e-9):
    """H_z(r) via the derivative identity (default) or the 3-D formula.

    h_formula: H_z = -i e^{-2z-1}/(z+2) r G_{z+1}(r)
    three_d:   2 pi i a(z) e^{-|r|} r I_{z+1}(|r|) / (2^{(1-z)/2} Gamma((1-z)/2) Gamma((3+z)/2))
    The second path integrates I_{z+1} in the tau variable, so the two share
    no quadrature.  H is odd in r.
    """
    if z == -2:
        raise ValueError("z = -2 is excluded")
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    _check_r(r)
    sgn = np.sign(r)
    ra = np.abs(r)
    if path == "h_formula":
        g = bessel_G(z + 1, ra, rel_tol=rel_tol)
        out = -1j * np.exp(-2 * z - 1) / (z + 2) * ra * g
    elif path == "three_d":
        pref = 2j * np.pi * a_factor(z) * 2 ** (-(1 - z) / 2) * rgamma((1 - z) / 2) * rgamma((3 + z) / 2)
        if pref == 0:
            out = np.zeros(ra.shape, dtype=complex)
        else:
            I = np.array([laplace_integral_direct(z + 1, x) for x in ra])
            out = pref * np.exp(-ra) * ra * I
    else:
        raise ValueError(f"unknown path {path!r}")
    out = sgn * out
    return complex(out[0]) if scalar else out


def _check_r(r):
    if np.any(np.asarray(r) == 0):
        raise ValueError("Bessel potentials are evaluated only at r != 0")


def _flag(err, val, rel_tol, name):
    scale = max(float(np.abs(val).max()), 1e-300)
    bad = err > rel_tol * np.maximum(np.abs(val), 1e-3 * scale)
    if np.any(bad):
        warnings.warn(f"{name}: quadrature error estimate above tolerance at "
                      f"{int(bad.sum())} point(s)", QuadratureWarning, stacklevel=3)


# ---------------------------------------------------------------- oracle

ORACLE_CUTOFFS = (1e3, 4e3, 1.6e4)


@dataclass
class OracleResult:
    value: complex
    by_cutoff: list[complex] = field(default_factory=list)
    spread: float = 0.0


def _tail_series(z: complex, L: float, omega: float, n_terms: int = 24, n_pow: int = 8) -> complex:
    """int_L^inf g(eta) e^{i omega eta} d eta with g = z eta (1+eta^2)^{z/2-1}.

    Repeated integration by parts, with g expanded in the powers
    eta^{z-1-2j} (valid for eta > 1); terms stop once they start to grow.
    """
    coef = []
    c = 1.0 + 0j
    for j in range(n_pow):
        coef.append(z * c)
        c = c * (z / 2 - 1 - j) / (j + 1)
    exps = [z - 1 - 2 * j for j in range(n_pow)]

    def deriv(k):
        tot = 0j
        for cj, e in zip(coef, exps):
            fall = 1.0 + 0j
            for m in range(k):
                fall *= e - m
            tot += cj * fall * L ** (e - k)
        return tot

    total, prev = 0j, np.inf
    for k in range(n_terms):
        term = (-1) ** k * deriv(k) / (1j * omega) ** (k + 1)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-18 * max(abs(total), 1e-300):
            break
    return -np.exp(1j * omega * L) * total


def oscillatory_oracle(z: complex, r: float, cutoffs=ORACLE_CUTOFFS,
                       tol: float = 1e-7) -> OracleResult:
    """G_z(r) straight from its Fourier integral (Re z <= -1/2).

    One integration by parts gives G_z(r) = -(2 a(z)/r) int_0^inf g(eta)
    sin(eta r) d eta with g = z eta (1+eta^2)^{z/2-1}.  The integral is
    summed by Gauss-Legendre panels up to each cutoff L and closed with the
    asymptotic expansion of the remaining tail.  The change between the two
    largest cutoffs is the accuracy estimate; the expansion is only
    asymptotic, so the smallest cutoff may be poor when L r is small.
    """
    if r == 0:
        raise ValueError("r must be nonzero")
    if z.real > -0.5:
        raise ValueError("oracle needs Re z <= -1/2")
    r = abs(float(r))
    a = a_factor(z)
    if a == 0:
        return OracleResult(0j, [0j] * len(cutoffs), 0.0)
    L_max = max(cutoffs)
    width = min(1.0, np.pi / r)
    n_pan = int(np.ceil(L_max / width))
    edges = np.linspace(0, n_pan * width, n_pan + 1)
    # make the cutoffs panel edges
    edges = np.union1d(edges, np.array(cutoffs))
    edges = edges[edges <= L_max]
    x, w = _panel_nodes(edges, 16)
    g = z * x * np.exp((z / 2 - 1) * np.log1p(x * x))
    contrib = (g * np.sin(x * r) * w).reshape(len(edges) - 1, 16).sum(axis=1)
    partial = np.concatenate([[0], np.cumsum(contrib)])
    vals = []
    for L in cutoffs:
        k = int(np.searchsorted(edges, L))
        tail = (_tail_series(z, L, r) - _tail_series(z, L, -r)) / 2j
        total = partial[k] + tail
        vals.append(-2 * a / r * total)
    spread = float(abs(vals[-2] - vals[-1]))
    if spread > tol * max(abs(vals[-1]), 1e-300):
        warnings.warn(f"oracle at z={z}, r={r}: cutoff sequence spread {spread:.2e}",
                      QuadratureWarning, stacklevel=2)
    return OracleResult(vals[-1], vals, spread)


# ---------------------------------------------------------------- kernels

def _diag_check(t, r, diag_tol):
    if np.any(np.abs(np.asarray(r) - t) < diag_tol):
        raise ValueError(f"grid point within {diag_tol} of the diagonal r = t")


def kernel_S(z: complex, t: float, r, diag_tol: float = DIAG_TOL):
    """Kernel of a(z) D^z sin(t D0)/D0 at distance r > 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    _diag_check(t, r, diag_tol)
    return (bessel_G(z, r - t) - bessel_G(z, r + t)) / (8 * np.pi ** 2 * np.sinh(r))


def kernel_C(z: complex, t: float, r, diag_tol: float = DIAG_TOL):
    """Kernel of a(z) D^{z-1} cos(t D0) at distance r > 0."""
    if t <= 0:
        raise ValueError("t must be positive")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    _diag_check(t, r, diag_tol)
    return 1j * (bessel_H(z, t - r) - bessel_H(z, t + r)) / (8 * np.pi ** 2 * np.sinh(r))


def _r_grid(t: float, n_r: int, r_min: float = 0.01, r_extra: float = 10.0,
            diag_tol: float = DIAG_TOL) -> np.ndarray:
    r = np.linspace(r_min, t + r_extra, n_r)
    return r[np.abs(r - t) >= diag_tol]


def _scan_sups(s_list, t_grid, n_r, families):
    """sup_r |K| sinh t for every (family, s, t) cell."""
    out = {}
    failures = []
    for fam in families:
        kern = kernel_S if fam == "S" else kernel_C
        for s in s_list:
            z = complex(-1.0, s)
            for t in t_grid:
                r = _r_grid(t, n_r)
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", QuadratureWarning)
                    k = kern(z, t, r)
                if caught or not np.all(np.isfinite(k)):
                    failures.append({"family": fam, "s": s, "t": float(t)})
                out[(fam, s, float(t))] = float(np.abs(k).max() * np.sinh(t))
    return out, failures


def l1_linf_bound_scan(s_list=(0.5, 1.0, 2.0, 4.0), t_min: float = 0.2, t_max: float = 10.0,
                       n_t: int = 25, n_r: int = 200, families=("S", "C"),
                       stable_tol: float = 0.05) -> VerificationReport:
    """sup_r |kernel| sinh t on Re z = -1, rerun with both grids doubled."""
    t_grid = np.linspace(t_min, t_max, n_t)
    t_fine = np.linspace(t_min, t_max, 2 * n_t - 1)
    coarse, fail_c = _scan_sups(s_list, t_grid, n_r, families)
    fine, fail_f = _scan_sups(s_list, t_fine, 2 * n_r, families)
    sup_c = max(coarse.values()) if coarse else 0.0
    sup_f = max(fine.values()) if fine else 0.0
    delta = abs(sup_f - sup_c) / sup_f if sup_f > 0 else 0.0
    keys = sorted(fine)
    grid = [(0.0 if k[0] == "S" else 1.0, k[1], k[2]) for k in keys]
    ratios = [fine[k] for k in keys]
    finite = bool(np.all(np.isfinite(ratios)))
    return VerificationReport(
        estimate="kernel_l1_linf", grid_names=("family_C", "im_z", "t"), grid=grid,
        ratios=ratios, sup=sup_f, verdict=finite and delta < stable_tol and not fail_f,
        refinement_delta=delta, bound="sup_r |K_z(t, r)| <= C / sinh t on Re z = -1",
        details={"coarse_sup": sup_c, "failures": fail_c + fail_f,
                 "n_t": n_t, "n_r": n_r, "r_min": 0.01, "r_extra": 10.0,
                 "diag_tol": DIAG_TOL},
    )


def small_r_band(s: float, t_list=(2.0, 4.0, 8.0), r_list=(0.01, 0.1, 0.5, 0.99)) -> dict:
    """Kernel values for t >= 2, r < 1 against the mean-value bound.

    Since G_z is even, G(r - t) - G(r + t) = -2 r G'(xi) for some xi near t,
    so |K_S| <= r sup|G'| / (4 pi^2 sinh r) with the sup over [t-1, t+1].
    """
    z = complex(-1.0, s)
    rows = []
    for t in t_list:
        xi = np.linspace(t - 1, t + 1, 2001)
        dG = np.gradient(bessel_G(z, xi), xi)
        bound = float(np.abs(dG).max())
        for r in r_list:
            k = complex(kernel_S(z, t, r)[0])
            mvt = bound * r / (4 * np.pi ** 2 * np.sinh(r))
            rows.append({"t": t, "r": r, "abs_kernel": abs(k), "mvt_bound": float(mvt),
                         "ok": bool(abs(k) <= mvt * (1 + 1e-6))})
    return {"s": s, "rows": rows, "ok": all(x["ok"] for x in rows)}


def symbol_sup_S(z: complex, t: float, lam_max: float = 200.0, n_lam: int = 20001):
    """sup over lambda >= 0 of |a(z) (1+l^2)^{z/2} sin(t l)/l| with tail bound.

    For Re z = 1 the modulus is |a| sqrt(1+l^2)|sin(tl)|/l, bounded beyond
    lam_max by |a| sqrt(1 + lam_max^-2).
    """
    lam = np.linspace(0, lam_max, n_lam)
    mod = np.abs(a_factor(z)) * (1 + lam ** 2) ** (z.real / 2) * np.abs(t * np.sinc(t * lam / np.pi))
    tail = np.abs(a_factor(z)) * (1 + lam_max ** -2) ** (z.real / 2) * lam_max ** (z.real - 1)
    return float(mod.max()), float(tail)


def symbol_sup_C(z: complex, t: float, lam_max: float = 200.0, n_lam: int = 20001):
    lam = np.linspace(0, lam_max, n_lam)
    mod = np.abs(a_factor(z)) * (1 + lam ** 2) ** ((z.real - 1) / 2) * np.abs(np.cos(t * lam))
    tail = np.abs(a_factor(z)) * (1 + lam_max ** 2) ** ((z.real - 1) / 2)
    return float(mod.max()), float(tail)


def l2_bound_check(s_list=(0.0, 0.5, 1.0, 2.0), t_grid=None, lam_max: float = 200.0,
                   n_lam: int = 20001, stable_tol: float = 0.05) -> VerificationReport:
    """Spectral-theorem bounds on Re z = 1: S-family <= C(1+t), C-family <= C.

    The certified sup at each t is max(sampled sup, analytic tail bound).
    The fitted constant is max over t of sup / (1+t) (resp. sup); it is
    recomputed with the lambda grid doubled.
    """
    if t_grid is None:
        t_grid = np.linspace(0.05, 10, 40)
    t_grid = np.asarray(t_grid, dtype=float)

    def fit(n):
        rows, cs, cc = [], 0.0, 0.0
        for s in s_list:
            z = complex(1.0, s)
            for t in t_grid:
                ms, ts = symbol_sup_S(z, t, lam_max, n)
                mc, tc = symbol_sup_C(z, t, lam_max, n)
                sup_s, sup_c = max(ms, ts), max(mc, tc)
                rows.append((s, t, sup_s, sup_c))
                cs = max(cs, sup_s / (1 + t))
                cc = max(cc, sup_c)
        return rows, cs, cc

    rows, cs, cc = fit(n_lam)
    _, cs2, cc2 = fit(2 * n_lam - 1)
    delta = max(abs(cs2 - cs) / cs, abs(cc2 - cc) / cc)
    grid = [(s, t) for s, t, _, _ in rows]
    ratios = [sup_s / (1 + t) for s, t, sup_s, _ in rows]
    return VerificationReport(
        estimate="symbol_l2", grid_names=("im_z", "t"), grid=grid, ratios=ratios,
        sup=cs, verdict=bool(np.isfinite(cs) and np.isfinite(cc) and delta < stable_tol),
        refinement_delta=delta, bound="||S_z(t)|| <= C(1+t), ||C_z(t)|| <= C on Re z = 1",
        details={"C_S": cs, "C_C": cc, "C_S_refined": cs2, "C_C_refined": cc2,
                 "c_family_sups": [sup_c for *_, sup_c in rows],
                 "lam_max": lam_max, "n_lam": n_lam},
    )
