import numpy as np
import pytest

from hyperwave import profiles
from hyperwave.propagators import (
    SupportMarginError, WaveState, dalembert_propagate, decay_weight,
    dispersive_ratio_scan, duhamel_solve, flat_energy, free_decay_scan,
    spectral_propagate, support_radius,
)
from hyperwave.spectral import RadialGrid, RadialProfile, zeros

GRID = RadialGrid()
SMALL = RadialGrid(40.0, 2 ** 12)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def random_state(grid, seed, i):
    return WaveState(profiles.random_smooth(grid, seed, 2 * i),
                     profiles.random_smooth(grid, seed, 2 * i + 1))


@pytest.mark.parametrize("solver", [dalembert_propagate, spectral_propagate])
def test_time_zero_is_identity(solver):
    st = random_state(GRID, 0, 0)
    out = solver(st, 0.0)
    assert np.abs(out.v.v - st.v.v).max() < 1e-14
    assert np.abs(out.vt.v - st.vt.v).max() < 1e-14


def test_bump_splits_into_two_halves():
    st = WaveState.at_rest(profiles.bump(GRID, center=5.0, width=2.0))
    out = dalembert_propagate(st, 3.0)
    exact = 0.5 * (profiles.smooth_bump((GRID.r - 8) / 2) + profiles.smooth_bump((GRID.r - 2) / 2))
    assert np.abs(out.v.v - exact).max() < 1e-10
    assert out.time == 3.0


def test_dalembert_flat_energy_conserved():
    st = random_state(GRID, 3, 1)
    e0 = flat_energy(st)
    for t in np.linspace(0, 20, 9):
        assert abs(flat_energy(dalembert_propagate(st, t)) - e0) < 1e-9 * e0


@pytest.mark.parametrize("i", range(20))
def test_dual_solver_agreement(i):
    st = random_state(GRID, 11, i)
    t = 2.0 + 0.7 * i
    a, b = dalembert_propagate(st, t), spectral_propagate(st, t)
    assert rel(a.v.v, b.v.v) < 1e-8
    assert rel(a.vt.v, b.vt.v) < 1e-8


def test_group_law_and_reversal():
    st = random_state(GRID, 5, 2)
    two = spectral_propagate(spectral_propagate(st, 2.5), 4.0)
    one = spectral_propagate(st, 6.5)
    assert rel(two.v.v, one.v.v) < 1e-9 and rel(two.vt.v, one.vt.v) < 1e-9
    fwd = dalembert_propagate(st, 7.0)
    back = dalembert_propagate(WaveState(fwd.v, -fwd.vt), 7.0)
    assert rel(back.v.v, st.v.v) < 1e-8 and rel(-back.vt.v, st.vt.v) < 1e-8
    assert rel(spectral_propagate(fwd, -7.0).v.v, st.v.v) < 1e-12


def test_margin_rejected():
    st = WaveState.at_rest(profiles.bump(GRID, center=30.0, width=2.0))
    assert abs(support_radius(st) - 32) < 0.1
    with pytest.raises(SupportMarginError):
        dalembert_propagate(st, 9.0)
    with pytest.raises(SupportMarginError):
        spectral_propagate(st, -9.0)
    with pytest.raises(ValueError):
        dalembert_propagate(st, -1.0)


def test_duhamel_zero_forcing():
    out = duhamel_solve(lambda s: zeros(SMALL), 2.0, 0.1)
    assert not out.v.v.any() and not out.vt.v.any()


def test_duhamel_manufactured_solution():
    # v = sin(t) phi with -phi'' = l1^2 phi  =>  F = (l1^2 - 1) sin(t) phi;
    # phi is a global ladder mode, so the support margin does not apply
    g = SMALL
    l1 = np.pi / g.R
    phi = RadialProfile(g, np.sin(l1 * g.r))
    init = WaveState(zeros(g), phi)
    out = duhamel_solve(lambda s: (l1 ** 2 - 1) * np.sin(s) * phi, 3.0, 0.01, initial=init,
                       enforce_margin=False)
    assert np.abs(out.v.v - np.sin(3.0) * phi.v).max() < 1e-6
    assert np.abs(out.vt.v - np.cos(3.0) * phi.v).max() < 1e-6


def test_duhamel_fourth_order():
    g = SMALL
    l1 = np.pi / g.R
    phi = RadialProfile(g, np.sin(l1 * g.r))
    # v = (1 - cos t) phi from rest: F = cos(t) phi + l1^2 (1 - cos t) phi
    F = lambda s: (np.cos(s) + l1 ** 2 * (1 - np.cos(s))) * phi    # noqa: E731
    exact = (1 - np.cos(4.0)) * phi.v
    errs = [np.abs(duhamel_solve(F, 4.0, dt, grid=g, enforce_margin=False).v.v - exact).max() for dt in (0.2, 0.1, 0.05)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7), orders


def test_duhamel_linear_in_forcing():
    g = SMALL
    f1 = profiles.gaussian(g, width=1.0)
    f2 = profiles.bump(g, center=4.0, width=1.5)
    F1 = lambda s: np.cos(2 * s) * f1             # noqa: E731
    F2 = lambda s: np.exp(-s) * f2                # noqa: E731
    both = duhamel_solve(lambda s: 2 * F1(s) - 3 * F2(s), 2.0, 0.05)
    a, b = duhamel_solve(F1, 2.0, 0.05), duhamel_solve(F2, 2.0, 0.05)
    assert np.abs(both.v.v - (2 * a.v.v - 3 * b.v.v)).max() < 1e-12 * np.abs(both.v.v).max()


def test_free_decay():
    tau = np.linspace(0.5, 15, 30)
    z = free_decay_scan(WaveState.at_rest(zeros(GRID)), tau)
    assert z.sup == 0 and z.verdict
    st = WaveState.at_rest(profiles.gaussian(GRID))
    rep = free_decay_scan(st, tau)
    assert rep.verdict and rep.details["tail_slope"] <= 0.01 and np.isfinite(rep.sup)
    twice = free_decay_scan(st.scaled(2.0), tau)
    assert np.abs(np.array(twice.ratios) - 2 * np.array(rep.ratios)).max() < 1e-12 * rep.sup


def test_dispersive_scan_gaussian():
    f = profiles.gaussian(GRID)
    tau = np.linspace(0.1, 12, 40)
    rep = dispersive_ratio_scan(f, 4.0, tau)
    assert rep.verdict and rep.refinement_delta < 0.05
    # S(0) = 0 while K_4 blows up: the ratio vanishes at small tau
    small = dispersive_ratio_scan(f, 4.0, [1e-3, 1e-2])
    assert small.ratios[0] < small.ratios[1] < 0.01
    twice = dispersive_ratio_scan(2 * f, 4.0, tau)
    assert np.abs(np.array(twice.ratios) - np.array(rep.ratios)).max() < 1e-12 * rep.sup
    c = dispersive_ratio_scan(f, 4.0, tau, family="C")
    assert c.verdict


def test_dispersive_rejects_q():
    with pytest.raises(ValueError):
        dispersive_ratio_scan(profiles.gaussian(SMALL), 2.0, [1.0])


@pytest.mark.parametrize("q", [3, 4, 6, 8, 20])
def test_decay_weight_monotone(q):
    K = decay_weight(q, np.linspace(1, 40, 2000))
    assert np.all(np.diff(K) < 0)


def test_decay_weight_not_monotone_near_two():
    # the (1+tau)^{2/q} factor wins just above q = 2
    K = decay_weight(2.5, np.linspace(1, 40, 2000))
    assert not np.all(np.diff(K) < 0)
