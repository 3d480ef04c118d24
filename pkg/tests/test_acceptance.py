"""Acceptance criteria, one test each, at the stated tolerances and runtime budgets."""

import math
import time
import warnings
from fractions import Fraction

import numpy as np
import pytest

from hyperwave import profiles
from hyperwave.cone import conjugation_residual, norm_identity_check, random_members
from hyperwave.energy import apriori_bound_check, energy_inequality_check
from hyperwave.exponents import (
    ExponentContext, p_conformal, p_fujita, p_strauss, p_super_limits,
    remark_counterexample_value,
)
from hyperwave.kernels import (
    QuadratureWarning, bessel_G, bessel_H, kernel_C, kernel_S, l1_linf_bound_scan,
    l2_bound_check, oscillatory_oracle,
)
from hyperwave.nonlinear import NonlinearitySpec, evolve, picard_iterate, threshold_scan
from hyperwave.propagators import (
    WaveState, dalembert_propagate, dispersive_ratio_scan, free_decay_scan, spectral_propagate,
)
from hyperwave.spectral import RadialGrid, zeros


class Timer:
    def __init__(self, budget):
        self.budget = budget
        self.t0 = time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.t0
        assert elapsed < self.budget, f"{elapsed:.1f} s exceeds budget {self.budget} s"


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


@pytest.mark.criterion(1, "exponent reproduction", 1)
def test_criterion_1_exponents():
    clock = Timer(1)
    assert abs(p_strauss(3) - (1 + math.sqrt(2))) < 1e-12
    for n in range(2, 11):
        assert abs(p_conformal(n) - (1 + 4 / (n - 1))) < 1e-12
        assert abs(p_fujita(n) - (1 + 2 / n)) < 1e-12
    assert abs(p_super_limits(4)[0] - 2.5) < 1e-12
    assert abs(p_super_limits(5)[0] - (6 + math.sqrt(21)) / 5) < 1e-12
    for n in range(6, 11):
        assert abs(p_super_limits(n)[0] - float(1 + 2 / (Fraction(n - 1, 2) - Fraction(1, n - 1)))) < 1e-12
    for n in range(4, 11):
        p1, p2 = p_super_limits(n)
        assert abs(p2 - (1 + 4 * n / (n * n - 3 * n - 2))) < 1e-12
        assert p1 < p2
    v = remark_counterexample_value()
    assert abs(v - 47 / 70) < 1e-12 and v > 0.5
    clock.check()


def _compact_state(grid, seed, i):
    rng = profiles.philox(seed, i)
    parts = []
    for _ in range(2):
        c0, w0 = rng.uniform(3, 12), rng.uniform(1, 3)
        c1, w1 = rng.uniform(3, 12), rng.uniform(1, 3)
        parts.append((profiles.bump(grid, c0, w0, rng.normal()),
                      profiles.bump(grid, c1, w1, rng.normal())))
    return WaveState(parts[0][0] + parts[1][0], parts[0][1] + parts[1][1])


@pytest.mark.criterion(2, "propagator oracle equivalence", 30)
def test_criterion_2_propagators():
    clock = Timer(30)
    g = RadialGrid(40.0, 2 ** 14)
    worst = 0.0
    for i in range(100):
        st = _compact_state(g, 2024, i)
        t = profiles.philox(2025, i).uniform(0.5, 20.0)
        a, b = dalembert_propagate(st, t), spectral_propagate(st, t)
        worst = max(worst, rel(a.v.v, b.v.v), rel(a.vt.v, b.vt.v))
    assert worst < 1e-8, worst
    st = _compact_state(g, 7, 0)
    two = spectral_propagate(spectral_propagate(st, 3.0), 5.0)
    one = spectral_propagate(st, 8.0)
    assert rel(two.v.v, one.v.v) < 1e-9 and rel(two.vt.v, one.vt.v) < 1e-9
    # the forward run passed the margin check; roundoff tails of the propagated
    # state would fail the support test on the way back
    back = spectral_propagate(one, -8.0, enforce_margin=False)
    assert rel(back.v.v, st.v.v) < 1e-9 and rel(back.vt.v, st.vt.v) < 1e-9
    clock.check()


@pytest.mark.criterion(3, "Bessel-potential kernel certification", 300)
def test_criterion_3_kernels():
    clock = Timer(300)
    r = np.array([0.01, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0, 3.5, 5.0, 7.5, 10.0, 12.5, 15.0])
    # (a) the order z = -1 vanishes identically
    assert np.abs(bessel_G(-1.0, r)).max() < 1e-12
    assert np.abs(bessel_H(-1.0, r)).max() < 1e-12
    assert np.abs(kernel_S(-1.0, 3.0, r[np.abs(r - 3) > 1e-3])).max() < 1e-12
    assert np.abs(kernel_C(-1.0, 3.0, r[np.abs(r - 3) > 1e-3])).max() < 1e-12
    # (b) Laplace path vs oscillatory oracle on Re z = -1
    worst = 0.0
    for s in np.linspace(-4, 4, 17):
        z = complex(-1, s)
        with warnings.catch_warnings():
            warnings.simplefilter("error", QuadratureWarning)
            g = bessel_G(z, r)
        for x, gx in zip(r, g):
            if gx == 0:
                assert abs(oscillatory_oracle(z, x).value) < 1e-12
                continue
            worst = max(worst, abs(oscillatory_oracle(z, x).value - gx) / abs(gx))
    assert worst < 1e-6, worst
    # (c) sup_r |kernel| sinh t finite and refinement-stable
    rep = l1_linf_bound_scan(s_list=(0.5, 1.0, 2.0, 4.0), t_min=0.2, t_max=10.0, families=("S",))
    assert rep.verdict and np.isfinite(rep.sup) and rep.refinement_delta < 0.05
    assert not rep.details.get("failures")
    # (d) L^2 symbol bound on Re z = +1
    l2 = l2_bound_check(s_list=(0.0, 0.5, 1.0, 2.0))
    assert l2.verdict and l2.refinement_delta < 0.05
    clock.check()


@pytest.mark.criterion(4, "dispersive estimate at q = 4", 120)
def test_criterion_4_dispersive():
    clock = Timer(120)
    g = RadialGrid(40.0, 2 ** 14)
    tau = np.linspace(0.1, 12.0, 60)
    data = [profiles.gaussian(g), profiles.bump(g, 3.0, 2.5)]
    data += [profiles.random_smooth(g, 41, i) for i in range(8)]
    for f in data:
        rep = dispersive_ratio_scan(f, 4.0, tau)
        assert rep.verdict and np.isfinite(rep.sup) and rep.refinement_delta < 0.05
    clock.check()


@pytest.mark.criterion(5, "free decay of compact data", 30)
def test_criterion_5_free_decay():
    clock = Timer(30)
    g = RadialGrid(40.0, 2 ** 14)
    tau = np.linspace(0.5, 15.0, 30)
    for f in (profiles.bump(g, 3.0, 2.5), profiles.bump(g, 1.5, 1.0), profiles.bump(g, 6.0, 3.0)):
        rep = free_decay_scan(WaveState.at_rest(f), tau)
        assert rep.verdict and np.isfinite(rep.sup) and rep.details["tail_slope"] <= 0.01
    clock.check()


@pytest.mark.criterion(6, "cone/cylinder norm identity and conjugation", 60)
def test_criterion_6_cone():
    clock = Timer(60)
    rep = norm_identity_check(random_members(0, 10), ExponentContext.scheme(3, 2))
    assert rep.verdict and rep.sup < 1e-5
    w = lambda tau, s: np.exp(-(tau - 0.5) ** 2 - s ** 2)    # noqa: E731
    hs = np.array([1e-2, 5e-3, 2.5e-3])
    res = [conjugation_residual(w, h) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(res), 1)[0]
    assert abs(slope - 2) < 0.1, slope
    clock.check()


@pytest.mark.criterion(7, "Picard contraction", 300)
def test_criterion_7_picard():
    clock = Timer(300)
    g = RadialGrid(40.0, 2 ** 12)
    data = WaveState.at_rest(profiles.gaussian(g))
    for p in (2, 3):
        nl = NonlinearitySpec(p)
        rep = picard_iterate(data, nl, 1e-3, m_max=7, T_x=30.0)
        r = np.array(rep.ratios[:6])
        assert not rep.diverged and len(r) == 6
        assert np.all(r < 0.1) and r.max() < 0.1
        doubled = picard_iterate(data, nl, 2e-3, m_max=1, T_x=30.0)
        scale = doubled.increments[1] / rep.increments[1]
        assert abs(scale / 2 ** p - 1) < 0.05
    clock.check()


@pytest.mark.criterion(8, "Hamiltonian machinery", 120)
def test_criterion_8_hamiltonian():
    clock = Timer(120)
    g = RadialGrid(40.0, 2 ** 12)
    defoc = NonlinearitySpec(3, "abs_p_sign", -1)
    data = WaveState.at_rest(profiles.gaussian(g))
    dts = g.dr / np.array([2.0, 4.0, 8.0])
    drift = []
    for dt in dts:
        run = evolve(data, defoc, 1.5, 10.0, dt, k=0.0)
        H = np.array(run.hamiltonian_history)
        drift.append(np.abs(H - H[0]).max() / abs(H[0]))
        assert energy_inequality_check(run).verdict
    slope = np.polyfit(np.log(dts), np.log(drift), 1)[0]
    assert abs(slope - 2) < 0.2, slope
    wide = RadialGrid(64.0, 2 ** 12)
    v0, v1 = profiles.energy_normalized(profiles.gaussian(wide), zeros(wide), 0.0)
    for eps in (0.05, 0.5):
        run = evolve(WaveState(v0, v1), defoc, eps, 50.0, 0.01, k=0.0)
        rep = apriori_bound_check(run, v0, v1, 0.0, eps, defoc)
        assert rep.details["eps_below_eps0"] and rep.verdict
        assert energy_inequality_check(run).verdict
    clock.check()


@pytest.mark.criterion(9, "small-data global existence vs blow-up thresholds", 600)
def test_criterion_9_thresholds():
    clock = Timer(600)
    wide = RadialGrid(64.0, 2 ** 12)
    defoc = NonlinearitySpec(3, "abs_p_sign", -1)
    data = WaveState.at_rest(profiles.gaussian(wide))
    for eps in (1e-3, 1e-2, 0.1, 0.3, 1.0):
        run = evolve(data, defoc, eps, 50.0, 0.01)
        assert run.outcome == "global_to_T"
    g = RadialGrid(40.0, 2 ** 12)
    foc = NonlinearitySpec(3, "abs_p_sign", 1)
    data = WaveState.at_rest(profiles.gaussian(g))
    found = []
    for dt in (0.008, 0.004):
        rep = threshold_scan(data, foc, 20.0, 0.1, 50.0, dt, rel_gap=1e-3, data_id="gaussian")
        assert rep.status == "bracketed" and rep.eps_lo < rep.eps_hi and rep.rel_gap <= 1e-3
        found.append(rep.eps_hi)
    assert abs(found[0] - found[1]) < 0.05 * found[1]
    clock.check()
