import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperwave import profiles
from hyperwave.exponents import ExponentContext
from hyperwave.nonlinear import (
    CFLError, NonlinearitySpec, TailWarning, evolve, free_wave, picard_iterate,
    threshold_scan, x_norm,
)
from hyperwave.propagators import SupportMarginError, WaveState, spectral_propagate
from hyperwave.spectral import RadialGrid, RadialProfile, zeros

SMALL = RadialGrid(40.0, 2 ** 12)
WIDE = RadialGrid(64.0, 2 ** 12)
DT = 0.008
DEFOC = NonlinearitySpec(3, "signed", -1)
FOC = NonlinearitySpec(3, "signed", 1)


def gauss_state(g=SMALL):
    return WaveState.at_rest(profiles.gaussian(g))


def test_spec_validation_and_aliases():
    assert NonlinearitySpec(2, "unsigned").form == "abs_p"
    assert NonlinearitySpec(2, "signed").form == "abs_p_sign"
    for bad in ({"p": 1.0}, {"p": 2, "form": "cubic"}, {"p": 2, "sign": 0}):
        with pytest.raises(ValueError):
            NonlinearitySpec(**bad)


@settings(max_examples=50, deadline=None)
@given(p=st.floats(1.1, 5), s=st.floats(0.01, 50), form=st.sampled_from(["abs_p", "abs_p_sign"]),
       sign=st.sampled_from([1, -1]))
def test_homogeneity_and_bound_shape(p, s, form, sign):
    nl = NonlinearitySpec(p, form, sign)
    u = np.linspace(-3, 3, 61)
    assert np.allclose(nl.F(s * u), s ** p * nl.F(u), rtol=1e-12, atol=0)
    lhs = np.abs(nl.F(u)) + np.abs(u) * np.abs(nl.dF(u))
    assert np.all(lhs <= nl.bound_constant * np.abs(u) ** p * (1 + 1e-12))


def test_zero_coupling_is_free_flow():
    data = WaveState(profiles.gaussian(SMALL), profiles.bump(SMALL, 4, 2))
    run = evolve(data, FOC, 1e-9, 10.0, DT)
    ref = spectral_propagate(data, 10.0)
    assert np.abs(run.final_state.v.v / 1e-9 - ref.v.v).max() < 1e-8 * np.abs(ref.v.v).max()
    zero = evolve(data, FOC, 0.0, 2.0, DT)
    assert zero.outcome == "global_to_T" and max(zero.sup_u_history) == 0


def test_free_wave_matches_propagator():
    data = WaveState(profiles.gaussian(SMALL), profiles.bump(SMALL, 4, 2))
    a, b = free_wave(data, 3.0), spectral_propagate(data, 3.0)
    assert np.abs(a.v.v - b.v.v).max() < 1e-12


def test_cfl_and_margin():
    with pytest.raises(CFLError):
        evolve(gauss_state(), FOC, 1.0, 1.0, SMALL.dr)
    with pytest.raises(SupportMarginError):
        evolve(gauss_state(), FOC, 1.0, 38.0, DT)


def test_defocusing_global():
    run = evolve(gauss_state(WIDE), DEFOC, 0.1, 50.0, 0.01)
    assert run.outcome == "global_to_T" and run.blow_up_time is None
    assert max(run.sup_u_history) <= 0.1 * (1 + 1e-6)
    assert run.times[-1] == pytest.approx(50.0)
    assert run.data_norms["s"] == pytest.approx(1.0)


def test_focusing_blow_up_refinement():
    a = evolve(gauss_state(), FOC, 50.0, 10.0, DT)
    b = evolve(gauss_state(), FOC, 50.0, 10.0, DT / 2)
    assert a.outcome == b.outcome == "blow_up"
    assert abs(a.blow_up_time - b.blow_up_time) < 0.02 * b.blow_up_time
    assert a.sup_u_history[-1] > 1e6


def test_blow_up_time_monotone_in_eps():
    times = [evolve(gauss_state(), FOC, e, 10.0, DT).blow_up_time for e in (4, 8, 16, 32, 64)]
    assert all(t is not None for t in times)
    assert np.all(np.diff(times) < 0)


def test_small_eps_consistency():
    nl = NonlinearitySpec(2, "signed", 1)
    data = gauss_state()
    free = spectral_propagate(data, 5.0)
    eps = np.array([1e-3, 2e-3, 4e-3])
    err = [np.linalg.norm(evolve(data, nl, e, 5.0, DT).final_state.v.v - e * free.v.v) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(err), 1)[0]
    assert abs(slope - 2) < 0.2


def test_time_reversibility():
    data = gauss_state()
    fwd = evolve(data, DEFOC, 1.0, 5.0, DT).final_state
    back = evolve(WaveState(fwd.v, -fwd.vt), DEFOC, 1.0, 5.0, DT).final_state
    assert np.abs(back.v.v - data.v.v).max() < DT ** 2
    assert np.abs(back.vt.v).max() < DT ** 2


def test_x_norm_basics():
    ctx = ExponentContext.scheme(3, 2)
    tau = np.linspace(0, 30, 601)
    assert x_norm([zeros(SMALL)] * len(tau), ctx, tau) == 0
    data = gauss_state()
    u = [free_wave(data, t).v for t in tau]
    x1 = x_norm(u, ctx, tau)
    x2 = x_norm([-3.0 * p for p in u], ctx, tau)
    assert np.isfinite(x1) and abs(x2 - 3 * x1) < 1e-12 * x2
    with pytest.warns(TailWarning):
        x_norm(u[:61], ctx, tau[:61])


def test_picard_trivial():
    z = picard_iterate(WaveState.at_rest(zeros(SMALL)), NonlinearitySpec(2), 1e-3, m_max=3)
    assert max(z.x_norms) == 0
    e0 = picard_iterate(gauss_state(), NonlinearitySpec(2), 0.0, m_max=3)
    assert max(e0.x_norms) == 0
    with pytest.raises(ValueError):
        picard_iterate(gauss_state(), NonlinearitySpec(4), 1e-3)


@pytest.mark.parametrize("p", [2, 3])
def test_picard_contraction(p):
    rep = picard_iterate(gauss_state(), NonlinearitySpec(p), 1e-3, m_max=7)
    r = np.array(rep.ratios[:6])
    assert not rep.diverged and len(r) == 6
    assert np.all(r < 0.1) and r[-1] < r[0]
    assert rep.tail_fractions[0] < 1e-6
    assert rep.residual < 1e-5


def test_picard_homogeneity():
    a = picard_iterate(gauss_state(), NonlinearitySpec(2), 1e-3, m_max=1)
    b = picard_iterate(gauss_state(), NonlinearitySpec(2), 2e-3, m_max=1)
    assert abs(b.increments[1] / a.increments[1] / 4 - 1) < 0.05


def test_picard_divergence_flag():
    rep = picard_iterate(gauss_state(), NonlinearitySpec(3), 20.0, m_max=8)
    assert rep.diverged


def test_picard_limit_matches_time_stepper():
    nl = NonlinearitySpec(2)
    rep = picard_iterate(gauss_state(), nl, 0.5, m_max=8, T_x=5.0, keep_solution=True)
    run = evolve(gauss_state(), nl, 0.5, 5.0, DT / 2)
    diff = np.abs(rep.u[-1] - run.final_state.v.v).max()
    assert diff < 1e-5 * np.abs(run.final_state.v.v).max()


def test_threshold_trivial_and_defocusing():
    z = threshold_scan(WaveState.at_rest(zeros(SMALL)), FOC, 2.0, 1e-3, 1.0, DT)
    assert z.status == "all_global" and z.eps_hi is None
    d = threshold_scan(gauss_state(), DEFOC, 5.0, 1e-3, 1.0, DT, n_sweep=2)
    assert d.status == "all_global" and len(d.bisection_history) == 4


def test_threshold_bracket():
    rep = threshold_scan(gauss_state(), FOC, 3.0, 1.0, 50.0, DT, rel_gap=1e-3)
    assert rep.status == "bracketed" and rep.eps_lo < rep.eps_hi and rep.rel_gap <= 1e-3
    assert rep.to_dict()["kind"] == "threshold"


def test_run_report_dict():
    run = evolve(gauss_state(), DEFOC, 0.5, 1.0, DT)
    d = run.to_dict()
    assert d["outcome"] == "global_to_T" and "final_state" not in d
    assert len(d["series"]["t"]) == len(d["series"]["energy"])
    assert isinstance(RadialProfile(SMALL, run.final_state.v.v), RadialProfile)
