"""Semilinear radial flows on H^3: time stepping, Picard iteration, thresholds.

The flow is (d_t^2 - Delta + k) u = F(u); k = -1 is the shifted wave
equation.  In v-form, v_tt = v_rr - (k + 1) v + sinh(r) F(v / sinh r).
Time stepping is kick-drift-kick: half kicks by the nonlinearity around an
exact spectral drift with omega = sqrt(lambda^2 + 1 + k).
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_simpson, simpson

from .energy import forcing_l2
from .exponents import ExponentContext
from .propagators import WaveState, check_margin
from .spectral import (
    RadialProfile, apply_multiplier, d_power, inverse_sine_transform, lq_norm, sine_transform,
)

BLOWUP_CAP = 1e6
CFL = 0.9
_FORMS = {"abs_p": "abs_p", "unsigned": "abs_p", "abs_p_sign": "abs_p_sign",
          "signed": "abs_p_sign"}


class CFLError(ValueError):
    """Time step exceeds the stability limit dt <= 0.9 dr."""


class TailWarning(UserWarning):
    """Truncated X-norm tail is not negligible."""


@dataclass(frozen=True)
class NonlinearitySpec:
    """F(u) = sign |u|^{p-1} u (abs_p_sign) or sign |u|^p (abs_p); sign +1 focuses."""

    p: float
    form: str = "abs_p_sign"
    sign: int = 1

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if self.form not in _FORMS:
            raise ValueError(f"unknown form {self.form!r}")
        object.__setattr__(self, "form", _FORMS[self.form])
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def signed(self) -> bool:
        return self.form == "abs_p_sign"

    @property
    def bound_constant(self) -> float:
        """C in |F(u)| + |u||F'(u)| <= C |u|^p."""
        return 1.0 + self.p

    def F(self, u):
        a = np.abs(u)
        if self.signed:
            return self.sign * a ** (self.p - 1) * u
        return self.sign * a ** self.p

    def dF(self, u):
        a = np.abs(u)
        d = self.sign * self.p * a ** (self.p - 1)
        return d if self.signed else d * np.sign(u)

    def G(self, u):
        a = np.abs(u)
        if self.signed:
            return self.sign * a ** (self.p + 1) / (self.p + 1)
        return self.sign * a ** self.p * u / (self.p + 1)


@dataclass
class RunReport:
    outcome: str
    blow_up_time: float | None
    times: list[float]
    x_norm_history: list[float]
    sup_u_history: list[float]
    energy_history: list[float]
    hamiltonian_history: list[float]
    abs_potential_history: list[float]
    forcing_history: list[float]
    params: dict = field(default_factory=dict)
    data_norms: dict = field(default_factory=dict)
    final_state: WaveState | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {f: getattr(self, f) for f in ("outcome", "blow_up_time", "params", "data_norms")}
        d["kind"] = "run"
        d["series"] = {
            "t": self.times, "sup_u": self.sup_u_history, "energy": self.energy_history,
            "hamiltonian": self.hamiltonian_history, "x_norm": self.x_norm_history,
            "forcing_l2": self.forcing_history,
        }
        return d


@dataclass
class ThresholdReport:
    p: float
    form: str
    sign: int
    data_id: str
    eps_lo: float | None
    eps_hi: float | None
    status: str
    bisection_history: list[dict] = field(default_factory=list)

    @property
    def rel_gap(self) -> float | None:
        if self.eps_lo is None or self.eps_hi is None:
            return None
        return (self.eps_hi - self.eps_lo) / self.eps_hi

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = "threshold"
        d["rel_gap"] = self.rel_gap
        d["series"] = {k: [h[k] for h in self.bisection_history]
                       for k in ("eps", "blow_up", "blow_up_time")}
        return d


@dataclass
class PicardReport:
    eps: float
    p: float
    T_x: float
    dt: float
    x_norms: list[float]
    increments: list[float]
    ratios: list[float]
    tail_fractions: list[float]
    diverged: bool
    residual: float
    u: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("u")
        d["kind"] = "picard"
        d["series"] = {"m": list(range(len(self.x_norms))), "x_norm": self.x_norms,
                       "increment": self.increments}
        return d


# ---------------------------------------------------------------- evolution

def data_norms(data: WaveState, p: float) -> dict:
    """Data norms at the critical index s = 4 (1/2 - 1/(p+1)), reported alongside runs."""
    s = 4 * (0.5 - 1 / (p + 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = apply_multiplier(data.v, d_power(s))
        b = apply_multiplier(data.vt, d_power(s - 1))
    return {"s": s, "Ds_u0": forcing_l2(a), "Ds1_u1": forcing_l2(b),
            "u0_Lp1": lq_norm(data.v, p + 1)}


def _sup_u(v: np.ndarray, sinh_r: np.ndarray, h: float) -> float:
    u0 = (8 * v[0] - v[1]) / (6 * h)
    return float(max(np.abs(v / sinh_r).max(), abs(u0)))


def evolve(data: WaveState, nl: NonlinearitySpec | None, eps: float, T: float, dt: float,
           k: float = -1.0, source: Callable[[float], RadialProfile] | None = None,
           cap: float = BLOWUP_CAP, sample_dt: float | None = None, adaptive: bool = True,
           enforce_margin: bool = True) -> RunReport:
    """Integrate from eps * data to time T or until blow-up.

    ``nl=None`` runs the linear flow.  ``source`` adds an external v-form
    forcing S(t).  Near blow-up the step shrinks to 0.05 sup|u|^{-(p-1)/2},
    the time scale of u'' = u^p.
    """
    linear = nl is None
    if linear:
        nl = NonlinearitySpec(3.0)
        adaptive = False
    g = data.grid
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    if dt > CFL * g.dr * (1 + 1e-12):
        raise CFLError(f"dt = {dt:.3g} exceeds {CFL} dr = {CFL * g.dr:.3g}")
    if k < -1:
        raise ValueError("k must be >= -1")
    if enforce_margin:
        check_margin(data, T)
    sinh_r, h_r = g.sinh_r, g.dr
    omega = np.sqrt(g.lam ** 2 + 1 + k)
    ctx = ExponentContext.scheme(3, nl.p)
    q, a = ctx.q, ctx.x_weight
    vol = 4 * np.pi * h_r

    def force(v, t):
        f = np.zeros_like(v) if linear else sinh_r * nl.F(v / sinh_r)
        if source is not None:
            f = f + source(t).v
        return f

    def flow_coeffs(h):
        return np.cos(h * omega), h * np.sinc(h * omega / np.pi), omega * np.sin(h * omega)

    v = eps * data.v.v.astype(float)
    vt = eps * data.vt.v.astype(float)
    c = sfft.dst(v, type=1, norm="ortho")
    base = flow_coeffs(dt)
    f = force(v, 0.0)

    times, sups, Es, Hs, Gs, Fs, xint = [], [], [], [], [], [], []

    def record(t, v, vt, c, f, s):
        e = vol * (np.sum(vt * vt) + np.sum(omega ** 2 * c * c))
        ug = np.zeros_like(v) if linear else nl.G(v / sinh_r) * sinh_r ** 2
        times.append(t)
        sups.append(s)
        Es.append(float(e))
        Hs.append(float(0.5 * e - vol * np.sum(ug)))
        Gs.append(float(vol * np.sum(np.abs(ug))))
        Fs.append(float(np.sqrt(vol * np.sum(f * f))))
        xint.append(np.exp(a * q * t) * lq_norm(RadialProfile(g, v), q) ** q)

    if sample_dt is None:
        sample_dt = max(dt, T / 500)
    s = _sup_u(v, sinh_r, h_r)
    record(0.0, v, vt, c, f, s)
    next_sample = sample_dt
    t, n_steps = 0.0, 0
    outcome, t_blow = "global_to_T", None
    while t < T * (1 - 1e-14):
        h = min(dt, T - t)
        if adaptive and s > 0:
            h = min(h, 0.05 * s ** (-(nl.p - 1) / 2))
        cs, sn_w, w_sn = base if h == dt else flow_coeffs(h)
        vt = vt + 0.5 * h * f
        ct = sfft.dst(vt, type=1, norm="ortho")
        c, ct = cs * c + sn_w * ct, -w_sn * c + cs * ct
        v = sfft.dst(c, type=1, norm="ortho")
        vt = sfft.dst(ct, type=1, norm="ortho")
        t += h
        n_steps += 1
        f = force(v, t)
        vt = vt + 0.5 * h * f
        s = _sup_u(v, sinh_r, h_r)
        if not np.isfinite(s) or s > cap or not np.all(np.isfinite(vt)):
            outcome, t_blow = "blow_up", t
            with np.errstate(all="ignore"):
                record(t, v, vt, sfft.dst(v, type=1, norm="ortho"), f,
                       s if np.isfinite(s) else float("inf"))
            break
        if t >= next_sample * (1 - 1e-12) or t >= T * (1 - 1e-14):
            record(t, v, vt, c, f, s)
            while next_sample <= t * (1 + 1e-12):
                next_sample += sample_dt
    xt = np.asarray(times)
    xi = np.asarray(xint)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (xi[1:] + xi[:-1]) * np.diff(xt))])
    final = WaveState(RadialProfile(g, v), RadialProfile(g, vt), t)
    return RunReport(
        outcome=outcome, blow_up_time=t_blow, times=list(map(float, times)),
        x_norm_history=(cum ** (1 / q)).tolist(), sup_u_history=list(map(float, sups)),
        energy_history=Es, hamiltonian_history=Hs, abs_potential_history=Gs,
        forcing_history=Fs,
        params={"p": None if linear else nl.p, "form": None if linear else nl.form,
                "sign": None if linear else nl.sign, "eps": eps, "T": T, "dt": dt,
                "k": k, "R": g.R, "N": g.N, "n_steps": n_steps},
        data_norms=data_norms(data, nl.p), final_state=final,
    )


def free_wave(data: WaveState, t: float, k: float = -1.0) -> WaveState:
    """Linear Klein-Gordon flow by the exact spectral formula."""
    g = data.grid
    om = np.sqrt(g.lam ** 2 + 1 + k)
    c0, c1 = sine_transform(data.v), sine_transform(data.vt)
    cs, sn = np.cos(t * om), np.sin(t * om)
    c = cs * c0 + t * np.sinc(t * om / np.pi) * c1
    ct = -om * sn * c0 + cs * c1
    return WaveState(inverse_sine_transform(c, g), inverse_sine_transform(ct, g), data.time + t)


# ---------------------------------------------------------------- X-norm

def _lq_rows(V: np.ndarray, sinh_r: np.ndarray, dr: float, q: float) -> np.ndarray:
    """||u(tau)||_q^q for each row of v-samples."""
    integ = np.abs(V) ** q * sinh_r ** (2 - q)
    pad = np.zeros((V.shape[0], 1))
    return 4 * np.pi * simpson(np.hstack([pad, integ, pad]), dx=dr, axis=1)


def x_norm_with_tail(V: np.ndarray, ctx: ExponentContext, tau: np.ndarray,
                     sinh_r: np.ndarray, dr: float) -> tuple[float, float]:
    """Weighted space-time L^q norm on [0, T_x] and the relative tail estimate.

    The tail beyond T_x is A e^{kappa T_x} / (-kappa) from an exponential fit
    to the last third of the integrand; a non-decaying fit gives an infinite
    tail fraction.
    """
    q = ctx.q
    g = np.exp(ctx.x_weight * q * tau) * _lq_rows(V, sinh_r, dr, q)
    total = float(simpson(g, x=tau))
    if total <= 0:
        return 0.0, 0.0
    sel = slice(2 * len(tau) // 3, None)
    gs, ts = g[sel], tau[sel]
    pos = gs > 0
    if pos.sum() < 3:
        tail = 0.0
    else:
        kappa, logA = np.polyfit(ts[pos], np.log(gs[pos]), 1)
        tail = float("inf") if kappa >= 0 else float(np.exp(logA + kappa * tau[-1]) / -kappa)
    return total ** (1 / q), tail / total


def x_norm(u, ctx: ExponentContext, tau, tail_tol: float = 1e-6) -> float:
    """X-norm of a time-indexed profile series (list of RadialProfile or a 2-D array + grid).

    Warns with :class:`TailWarning` when the tail estimate exceeds ``tail_tol``.
    """
    tau = np.asarray(tau, dtype=float)
    grid = u[0].grid
    V = np.array([p.v for p in u])
    val, frac = x_norm_with_tail(V, ctx, tau, grid.sinh_r, grid.dr)
    if frac > tail_tol:
        warnings.warn(f"X-norm tail fraction {frac:.2e} exceeds {tail_tol:g}", TailWarning,
                      stacklevel=2)
    return val


# ---------------------------------------------------------------- Picard

_GL_T, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_T, _GL_W = 0.5 * (_GL_T + 1), 0.5 * _GL_W


def _delta_F(nl: NonlinearitySpec, b: np.ndarray, d: np.ndarray) -> np.ndarray:
    """F(b + d) - F(b) as d * int_0^1 F'(b + theta d) dtheta (no cancellation)."""
    acc = np.zeros_like(b)
    for th, w in zip(_GL_T, _GL_W):
        acc += w * nl.dF(b + th * d)
    return acc * d


def _duhamel_series(Fv: np.ndarray, tau: np.ndarray, lam: np.ndarray, dt: float) -> np.ndarray:
    """v(tau_j) = int_0^tau_j S(tau_j - s) F(s) ds for v-form forcing rows."""
    Fh = sfft.dst(Fv, type=1, norm="ortho", axis=1)
    cs = np.cos(np.outer(tau, lam))
    sn = np.sin(np.outer(tau, lam))
    A = cumulative_simpson(cs * Fh, dx=dt, axis=0, initial=0)
    B = cumulative_simpson(sn * Fh, dx=dt, axis=0, initial=0)
    return sfft.dst((sn * A - cs * B) / lam, type=1, norm="ortho", axis=1)


def picard_iterate(data: WaveState, nl: NonlinearitySpec, eps: float,
                   ctx: ExponentContext | None = None, m_max: int = 8, T_x: float = 30.0,
                   dt: float = 0.05, keep_solution: bool = False) -> PicardReport:
    """u^(m) = u^(0) + int_0^tau S(tau - s) F(u^(m-1))(s) ds on [0, T_x].

    Increments d^(m) = u^(m) - u^(m-1) are propagated directly, so their
    X-norms stay meaningful far below the size of u.  ``residual`` is the
    relative X-norm of the last increment, i.e. the fixed-point defect of the
    final iterate.
    """
    if ctx is None:
        ctx = ExponentContext.scheme(3, nl.p)
    if nl.p > 3:
        raise ValueError("Picard scheme needs 1 < p <= 3")
    check_margin(data, T_x)
    g = data.grid
    n = int(round(T_x / dt))
    tau = dt * np.arange(n + 1)
    lam, sinh_r = g.lam, g.sinh_r
    c0, c1 = sine_transform(data.v), sine_transform(data.vt)
    U0h = np.cos(np.outer(tau, lam)) * c0 + np.outer(tau, np.ones_like(lam)) \
        * np.sinc(np.outer(tau, lam) / np.pi) * c1
    V = eps * sfft.dst(U0h, type=1, norm="ortho", axis=1)
    del U0h

    def xn(W):
        return x_norm_with_tail(W, ctx, tau, sinh_r, g.dr)

    x0, tail0 = xn(V)
    x_norms, incs, tails = [x0], [x0], [tail0]
    U_prev = np.zeros_like(V)
    D = V.copy()
    diverged, grow = False, 0
    for m in range(1, m_max + 1):
        # d^(m) = Duhamel[F(u^(m-1)) - F(u^(m-2))], u^(m-1) = U_prev + D
        dF = _delta_F(nl, U_prev / sinh_r, D / sinh_r) * sinh_r
        if m == 1:
            dF = dF + sinh_r * nl.F(np.zeros_like(V))
        U_prev = U_prev + D
        D = _duhamel_series(dF, tau, lam, dt)
        xd, _ = xn(D)
        xu, tu = xn(U_prev + D)
        incs.append(xd)
        x_norms.append(xu)
        tails.append(tu)
        grow = grow + 1 if xd > incs[-2] else 0
        if grow >= 3:
            diverged = True
            break
        if xd == 0:
            break
    inc = np.asarray(incs[1:])
    ratios = (inc[1:] / inc[:-1]).tolist() if inc.size > 1 and np.all(inc[:-1] > 0) else []
    residual = float(incs[-1] / x_norms[-1]) if x_norms[-1] > 0 else 0.0
    return PicardReport(eps=eps, p=nl.p, T_x=T_x, dt=dt, x_norms=x_norms, increments=incs,
                        ratios=ratios, tail_fractions=tails, diverged=diverged,
                        residual=residual, u=(U_prev + D) if keep_solution else None)


# ---------------------------------------------------------------- thresholds

def threshold_scan(data: WaveState, nl: NonlinearitySpec, T: float, eps_lo: float,
                   eps_hi: float, dt: float, rel_gap: float = 1e-3, data_id: str = "",
                   n_sweep: int = 0, max_probes: int = 80, **evolve_kw) -> ThresholdReport:
    """Bisect on eps (geometric midpoints) with evolve as the blow-up oracle.

    If the ends do not bracket a transition the status is ``all_global`` or
    ``all_blow_up``; ``n_sweep`` extra log-spaced interior probes are then
    run and recorded as well.
    """
    if not 0 < eps_lo < eps_hi:
        raise ValueError("need 0 < eps_lo < eps_hi")
    hist: list[dict] = []

    def probe(e):
        rep = evolve(data, nl, e, T, dt, **evolve_kw)
        hist.append({"eps": e, "blow_up": rep.outcome == "blow_up",
                     "blow_up_time": rep.blow_up_time})
        return rep.outcome == "blow_up"

    b_lo, b_hi = probe(eps_lo), probe(eps_hi)
    if b_lo == b_hi:
        for e in np.geomspace(eps_lo, eps_hi, n_sweep + 2)[1:-1]:
            probe(float(e))
        ok = all(h["blow_up"] == b_lo for h in hist)
        status = ("all_blow_up" if b_lo else "all_global") if ok else "non_monotone"
        lo = None if b_lo else max(h["eps"] for h in hist if not h["blow_up"])
        hi = min(h["eps"] for h in hist if h["blow_up"]) if any(h["blow_up"] for h in hist) else None
        return ThresholdReport(nl.p, nl.form, nl.sign, data_id, lo, hi, status, hist)
    if b_lo and not b_hi:
        return ThresholdReport(nl.p, nl.form, nl.sign, data_id, None, None, "non_monotone", hist)
    lo, hi = eps_lo, eps_hi
    while (hi - lo) / hi > rel_gap and len(hist) < max_probes:
        mid = float(np.sqrt(lo * hi))
        if probe(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdReport(nl.p, nl.form, nl.sign, data_id, lo, hi, "bracketed", hist)

