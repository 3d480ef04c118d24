"""Forward light cone <-> hyperbolic cylinder (radial, n = 3).

Inside Lambda = {t > r >= 0} put t = e^tau cosh s, r = e^tau sinh s.  Then
dt dx = e^{4 tau} dtau dV_{H^3}, and with u = e^{rho tau} w the flat wave
operator becomes  box w = e^{-(2 + rho) tau} (d_tau^2 - Delta_H - rho^2) u.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .exponents import ExponentContext, weighted_strichartz_admissible
from .profiles import philox, smooth_bump
from .reports import VerificationReport
from .spectral import RadialGrid, RadialProfile, second_derivative

N_DIM = 3
RHO = 1.0


def to_cone(tau, s):
    tau, s = np.asarray(tau, dtype=float), np.asarray(s, dtype=float)
    e = np.exp(tau)
    return e * np.cosh(s), e * np.sinh(s)


def from_cone(t, r):
    t, r = np.asarray(t, dtype=float), np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(t <= r):
        raise ValueError("point outside the forward cone t > r >= 0")
    return 0.5 * np.log((t - r) * (t + r)), np.arctanh(r / t)


# ---------------------------------------------------------------- conjugation

def conjugation_residual(w: Callable, h: float, tau_points=(0.0, 0.5, 1.0),
                         s_range=(0.2, 3.0), grid: RadialGrid | None = None) -> float:
    """max |box w - e^{-3 tau}(d_tau^2 - Delta_H - 1)(e^tau w)| over a lattice.

    ``w(tau, s)`` is vectorized.  The cone side uses centered differences in
    (t, r) with step h; the cylinder side differences in tau with step h and
    the spectral Laplacian in s on ``grid`` (lattice s-values are its nodes).
    """
    if grid is None:
        grid = RadialGrid(20.0, 2 ** 12)
    s = grid.r
    sel = (s >= s_range[0]) & (s <= s_range[1])
    ss = s[sel]
    worst = 0.0
    for tau in tau_points:
        u = [np.exp(RHO * (tau + d)) * w(tau + d, s) for d in (-h, 0.0, h)]
        u_tt = (u[0] - 2 * u[1] + u[2]) / h ** 2
        lap1 = second_derivative(RadialProfile(grid, grid.sinh_r * u[1])).v / grid.sinh_r
        cyl = np.exp(-(2 + RHO) * tau) * (u_tt - lap1)[sel]
        t, r = to_cone(tau, ss)
        if np.any(t - h <= r + h) or np.any(r - h < 0):
            raise ValueError("finite-difference stencil leaves the cone")

        def W(tt, rr):
            return w(*from_cone(tt, rr))

        w0 = W(t, r)
        w_tt = (W(t + h, r) - 2 * w0 + W(t - h, r)) / h ** 2
        w_rr = (W(t, r + h) - 2 * w0 + W(t, r - h)) / h ** 2
        w_r = (W(t, r + h) - W(t, r - h)) / (2 * h)
        box = w_tt - w_rr - (N_DIM - 1) / r * w_r
        worst = max(worst, float(np.abs(box - cyl).max()))
    return worst


# ---------------------------------------------------------------- norm identity

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _composite_gl(a: float, b: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _GL_X).ravel()
    wt = (half[:, None] * _GL_W).ravel()
    return x, wt


def product_member(tau_c: float, tau_w: float, s_w: float, amp: float = 1.0) -> Callable:
    """u(tau, s) = amp * bump((tau - tau_c) / tau_w) * bump(s / s_w)."""
    def u(tau, s):
        return amp * smooth_bump((np.asarray(tau) - tau_c) / tau_w) * smooth_bump(np.asarray(s) / s_w)
    u.support = (tau_c - tau_w, tau_c + tau_w, s_w)
    return u


def cone_side_norm(u: Callable, ctx: ExponentContext, support, panels: int = 64) -> float:
    """||(t^2 - r^2)^{gamma1} w||_{L^q(Lambda)}, w = e^{-rho tau} u, by (t, r) quadrature."""
    ta, tb, sb = support
    t_lo, t_hi = np.exp(ta), np.exp(tb) * np.cosh(sb)
    r_hi = np.exp(tb) * np.sinh(sb)
    t, wt = _composite_gl(t_lo, t_hi, panels)
    r, wr = _composite_gl(0.0, r_hi, panels)
    T, Rr = np.meshgrid(t, r, indexing="ij")
    inside = T > Rr
    val = np.zeros_like(T)
    tau, s = from_cone(T[inside], Rr[inside])
    w = np.exp(-RHO * tau) * u(tau, s)
    val[inside] = np.exp(2 * ctx.gamma1 * tau * ctx.q) * np.abs(w) ** ctx.q \
        * 4 * np.pi * Rr[inside] ** 2
    return float((wt @ val @ wr) ** (1 / ctx.q))


def cylinder_side_norm(u: Callable, ctx: ExponentContext, support, panels: int = 64) -> float:
    """||e^{(2 gamma1 - rho + 4/q) tau} u||_{L^q(dtau dV_{H^3})}."""
    ta, tb, sb = support
    tau, wt = _composite_gl(ta, tb, panels)
    s, ws = _composite_gl(0.0, sb, panels)
    TT, SS = np.meshgrid(tau, s, indexing="ij")
    val = np.exp(ctx.x_weight * ctx.q * TT) * np.abs(u(TT, SS)) ** ctx.q \
        * 4 * np.pi * np.sinh(SS) ** 2
    return float((wt @ val @ ws) ** (1 / ctx.q))


def random_members(seed: int, count: int) -> list[Callable]:
    out = []
    for i in range(count):
        rng = philox(seed, i)
        out.append(product_member(rng.uniform(-0.5, 1.5), rng.uniform(0.3, 1.2),
                                  rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.0)))
    return out


def norm_identity_check(members, ctx: ExponentContext, panels: int = 64,
                        tol: float = 1e-5) -> VerificationReport:
    """Relative gap between cone-side and cylinder-side norms for each member."""
    gaps, detail = [], []
    for u in members:
        a = cone_side_norm(u, ctx, u.support, panels)
        b = cylinder_side_norm(u, ctx, u.support, panels)
        scale = max(a, b)
        gaps.append(abs(a - b) / scale if scale > 0 else 0.0)
        detail.append({"cone": a, "cylinder": b})
    sup = max(gaps) if gaps else 0.0
    return VerificationReport(
        estimate="norm_identity", grid_names=("member",), grid=[(i,) for i in range(len(gaps))],
        ratios=gaps, sup=sup, verdict=bool(sup < tol), bound=f"relative gap < {tol:g}",
        details={"q": ctx.q, "gamma1": ctx.gamma1, "panels": panels, "norms": detail},
    )


# ---------------------------------------------------------------- Strichartz ratios

def _bump_and_d2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    b = smooth_bump(x)
    d2 = np.zeros_like(x)
    i = np.abs(x) < 1
    y = 1 - x[i] ** 2
    g1 = -2 * x[i] / y ** 2
    g2 = -2 / y ** 2 - 8 * x[i] ** 2 / y ** 3
    d2[i] = b[i] * (g2 + g1 ** 2)
    return b, d2


def _strichartz_ratio(tau_c, tau_w, psi: RadialProfile, ctx: ExponentContext, n_tau: int) -> float:
    """||(t^2-r^2)^{g1} w||_q / ||(t^2-r^2)^{g2} box w||_{q'} for u = phi(tau) psi(s)."""
    g = psi.grid
    tau = np.linspace(tau_c - tau_w, tau_c + tau_w, n_tau)
    phi, phi2 = _bump_and_d2((tau - tau_c) / tau_w)
    phi2 = phi2 / tau_w ** 2
    lap1 = second_derivative(psi).v                      # sinh(s) (Delta + 1) psi
    q, qp = ctx.q, ctx.q / (ctx.q - 1)

    def lq_rows(V, r):
        integ = np.abs(V) ** r * g.sinh_r ** (2 - r)
        return 4 * np.pi * g.dr * integ.sum(axis=1)

    V = np.outer(phi, psi.v)
    Fv = np.outer(phi2, psi.v) - np.outer(phi, lap1)
    dtau = tau[1] - tau[0]
    lhs = np.sum(np.exp(ctx.x_weight * q * tau) * lq_rows(V, q)) * dtau
    b = 2 * ctx.gamma2 - 2 - RHO
    rhs = np.sum(np.exp((b * qp + N_DIM + 1) * tau) * lq_rows(Fv, qp)) * dtau
    return float(lhs ** (1 / q) / rhs ** (1 / qp))


def strichartz_family(seed: int, count: int, grid: RadialGrid):
    out = []
    for i in range(count):
        rng = philox(seed, i)
        c, w = rng.uniform(0.0, 3.0), rng.uniform(0.5, 2.0)
        sc, sw = rng.uniform(0.0, 3.0), rng.uniform(0.5, 1.5)
        r = grid.r
        v = smooth_bump((r - sc) / sw) - smooth_bump((-r - sc) / sw)
        out.append((c, w, RadialProfile(grid, v)))
    return out


def weighted_strichartz_ratio(ctx: ExponentContext, members: int = 20, seed: int = 0,
                              grid: RadialGrid | None = None, n_tau: int = 801,
                              stable_tol: float = 0.05) -> VerificationReport:
    """Ratio per random member, rerun on a doubled (tau, s) resolution for stability."""
    if not weighted_strichartz_admissible(ctx).satisfied:
        raise ValueError("context is not weighted-Strichartz admissible")
    if ctx.n != N_DIM:
        raise ValueError("cylinder quadrature is implemented for n = 3")
    if grid is None:
        grid = RadialGrid(20.0, 2 ** 11)
    fine = grid.refined(2)
    ratios, fine_ratios = [], []
    for (c, w, psi), (_, _, psi_f) in zip(strichartz_family(seed, members, grid),
                                          strichartz_family(seed, members, fine)):
        ratios.append(_strichartz_ratio(c, w, psi, ctx, n_tau))
        fine_ratios.append(_strichartz_ratio(c, w, psi_f, ctx, 2 * n_tau - 1))
    sup, sup_f = max(ratios), max(fine_ratios)
    delta = abs(sup_f - sup) / sup_f
    return VerificationReport(
        estimate="weighted_strichartz", grid_names=("member",),
        grid=[(i,) for i in range(members)], ratios=ratios, sup=sup,
        verdict=bool(np.isfinite(sup) and delta < stable_tol), refinement_delta=delta,
        bound="||(t^2-r^2)^g1 w||_q <= C ||(t^2-r^2)^g2 box w||_q'",
        details={"q": ctx.q, "gamma1": ctx.gamma1, "gamma2": ctx.gamma2,
                 "fine_ratios": fine_ratios},
    )


def dilation_probe(ctx: ExponentContext, factors=(1.0, 2.0, 4.0, 8.0),
                   grid: RadialGrid | None = None) -> list[float]:
    """Ratio of one member as its tau-support is dilated (trend only)."""
    if grid is None:
        grid = RadialGrid(20.0, 2 ** 11)
    r = grid.r
    psi = RadialProfile(grid, smooth_bump((r - 1.0) / 1.0) - smooth_bump((-r - 1.0) / 1.0))
    return [_strichartz_ratio(f, f, psi, ctx, 801) for f in factors]
