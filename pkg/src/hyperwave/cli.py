"""Command line entry point: ``hyperwave <command> [options]``.

Every option may also come from a JSON file given with ``--config``; keys
are the option names with dashes replaced by underscores, and flags given
on the command line take precedence.  Exit codes: 0 pass, 1 fail verdict,
2 usage or precondition error.  ``HYPERWAVE_THREADS`` sets the FFT worker
count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import profiles
from .reports import VerificationReport, content_hash, emit_report, jsonable

DEFAULTS = {
    "exponents": {"n": 3, "p": None, "delta": None},
    "simulate": {"p": 3.0, "form": "signed", "sign": 1, "eps": 0.1, "T": 50.0, "data": "gaussian",
                 "k": -1.0, "R": 64.0, "N": 4096, "dt": 0.01},
    "threshold": {"p": 3.0, "form": "signed", "sign": 1, "T": 20.0, "data": "gaussian",
                  "k": -1.0, "R": 40.0, "N": 4096, "dt": 0.008, "eps_lo": 0.1, "eps_hi": 50.0,
                  "rel_gap": 1e-3, "n_sweep": 0},
    "picard": {"p": 2.0, "form": "signed", "sign": 1, "eps": 1e-3, "m_max": 8, "T_x": 30.0,
               "data": "gaussian", "R": 40.0, "N": 4096, "dt": 0.05},
    "dispersive": {"q": 4.0, "tau_max": 12.0, "tau_min": 0.1, "n_tau": 40, "family": "S",
                   "data": "gaussian", "R": 40.0, "N": 16384},
    "kernels": {"imz_list": "0.5,1,2,4", "t_min": 0.2, "t_max": 10.0, "n_t": 25, "n_r": 200,
                "check": "l1"},
    "hamiltonian": {"p": 3.0, "form": "signed", "sign": -1, "eps": 0.05, "k": 0.0, "T": 50.0,
                    "data": "gaussian", "R": 64.0, "N": 4096, "dt": 0.01},
    "bridge": {"scheme": "n=3,p=2", "members": 20, "seed": 0},
    "decay": {"tau_max": 15.0, "n_tau": 30, "data": "bump", "R": 40.0, "N": 16384},
    "kernel-eval": {"z": "-1+1j", "r": "0.5,1,2", "kind": "G", "t": 1.0},
}


class UsageError(Exception):
    pass


def _add(p: argparse.ArgumentParser, *names, **kw):
    kw.setdefault("default", None)
    p.add_argument(*names, **kw)


def _grid_opts(p):
    _add(p, "--R", type=float, help="outer radius of the radial grid")
    _add(p, "--N", type=int, help="number of interior grid points")


def _nl_opts(p):
    _add(p, "--p", type=float, help="nonlinearity power")
    _add(p, "--form", choices=["signed", "unsigned", "abs_p", "abs_p_sign"])
    _add(p, "--sign", type=int, choices=[1, -1], help="+1 focusing, -1 defocusing")
    _add(p, "--data", choices=["gaussian", "bump"])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with option values")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="report path (JSON; a CSV sidecar is written next to it)")
    ap = argparse.ArgumentParser(prog="hyperwave", description=__doc__.splitlines()[0],
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)

    def add_parser(name, _sub=None, **kw):
        return (_sub or sub).add_parser(name, parents=[common], **kw)

    p = add_parser("exponents", help="critical exponents and scheme indices")
    _add(p, "--n", type=int)
    _add(p, "--p", type=float)
    _add(p, "--delta", type=float)

    p = add_parser("simulate", help="one semilinear run")
    _nl_opts(p)
    _grid_opts(p)
    for name in ("--eps", "--T", "--k", "--dt"):
        _add(p, name, type=float)

    p = add_parser("threshold", help="bisect the blow-up threshold in eps")
    _nl_opts(p)
    _grid_opts(p)
    for name in ("--T", "--k", "--dt", "--eps-lo", "--eps-hi", "--rel-gap"):
        _add(p, name, type=float)
    _add(p, "--n-sweep", type=int)

    p = add_parser("picard", help="Picard iteration in the weighted space-time norm")
    _nl_opts(p)
    _grid_opts(p)
    for name in ("--eps", "--T-x", "--dt"):
        _add(p, name, type=float)
    _add(p, "--m-max", type=int)

    p = add_parser("verify", help="run an estimate check")
    vs = p.add_subparsers(dest="check_name", required=True)
    v = add_parser(_sub=vs, name="dispersive")
    _grid_opts(v)
    for name in ("--q", "--tau-max", "--tau-min"):
        _add(v, name, type=float)
    _add(v, "--n-tau", type=int)
    _add(v, "--family", choices=["S", "C"])
    _add(v, "--data", choices=["gaussian", "bump"])
    v = add_parser(_sub=vs, name="kernels")
    _add(v, "--imz-list", help="comma-separated Im z values on Re z = -1 (or Re z = 1 for l2)")
    for name in ("--t-min", "--t-max"):
        _add(v, name, type=float)
    _add(v, "--n-t", type=int)
    _add(v, "--n-r", type=int)
    _add(v, "--check", choices=["l1", "l2"])
    v = add_parser(_sub=vs, name="hamiltonian")
    _nl_opts(v)
    _grid_opts(v)
    for name in ("--eps", "--k", "--T", "--dt"):
        _add(v, name, type=float)
    v = add_parser(_sub=vs, name="bridge")
    _add(v, "--scheme", help="e.g. n=3,p=2")
    _add(v, "--members", type=int)
    _add(v, "--seed", type=int)
    v = add_parser(_sub=vs, name="decay")
    _grid_opts(v)
    _add(v, "--tau-max", type=float)
    _add(v, "--n-tau", type=int)
    _add(v, "--data", choices=["gaussian", "bump"])

    p = add_parser("kernel-eval", help="evaluate a Bessel potential or kernel")
    _add(p, "--z", help="complex order, e.g. -1+0.5j")
    _add(p, "--r", help="comma-separated distances")
    _add(p, "--kind", choices=["G", "H", "S", "C"])
    _add(p, "--t", type=float)
    return ap


def resolve(args: argparse.Namespace) -> tuple[str, dict]:
    key = args.check_name if args.command == "verify" else args.command
    cfg = dict(DEFAULTS[key])
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from exc
        unknown = set(loaded) - set(cfg) - {"out"}
        if unknown:
            raise UsageError(f"unknown config keys for {key}: {sorted(unknown)}")
        cfg.update(loaded)
    for name, val in vars(args).items():
        if name in cfg and val is not None:
            cfg[name] = val
    if getattr(args, "out", None) is not None:
        cfg["out"] = args.out
    return key, cfg


# ---------------------------------------------------------------- commands

def _grid(cfg):
    from .spectral import RadialGrid
    return RadialGrid(float(cfg["R"]), int(cfg["N"]))


def _data(cfg):
    from .propagators import WaveState
    return WaveState.at_rest(profiles.named(_grid(cfg), cfg["data"]))


def _nl(cfg):
    from .nonlinear import NonlinearitySpec
    return NonlinearitySpec(float(cfg["p"]), cfg["form"], int(cfg["sign"]))


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def cmd_exponents(cfg):
    from .exponents import exponent_table
    table = exponent_table(int(cfg["n"]), cfg["p"], cfg["delta"])
    verdicts = table.get("verdicts", [])
    ok = all(v.satisfied for v in verdicts)
    return {"kind": "exponents", **jsonable(table)}, ok


def cmd_simulate(cfg):
    from .nonlinear import evolve
    run = evolve(_data(cfg), _nl(cfg), float(cfg["eps"]), float(cfg["T"]), float(cfg["dt"]),
                 k=float(cfg["k"]))
    return run.to_dict(), True


def cmd_threshold(cfg):
    from .nonlinear import threshold_scan
    rep = threshold_scan(_data(cfg), _nl(cfg), float(cfg["T"]), float(cfg["eps_lo"]),
                         float(cfg["eps_hi"]), float(cfg["dt"]), rel_gap=float(cfg["rel_gap"]),
                         data_id=cfg["data"], n_sweep=int(cfg["n_sweep"]), k=float(cfg["k"]))
    return rep.to_dict(), rep.status != "non_monotone"


def cmd_picard(cfg):
    from .nonlinear import picard_iterate
    rep = picard_iterate(_data(cfg), _nl(cfg), float(cfg["eps"]), m_max=int(cfg["m_max"]),
                         T_x=float(cfg["T_x"]), dt=float(cfg["dt"]))
    return rep.to_dict(), not rep.diverged


def cmd_dispersive(cfg):
    from .propagators import dispersive_ratio_scan
    f = profiles.named(_grid(cfg), cfg["data"])
    tau = np.linspace(float(cfg["tau_min"]), float(cfg["tau_max"]), int(cfg["n_tau"]))
    rep = dispersive_ratio_scan(f, float(cfg["q"]), tau, family=cfg["family"])
    return rep, rep.verdict


def cmd_kernels(cfg):
    from .kernels import l1_linf_bound_scan, l2_bound_check
    s = _floats(cfg["imz_list"])
    if cfg["check"] == "l2":
        t = np.linspace(float(cfg["t_min"]), float(cfg["t_max"]), int(cfg["n_t"]))
        rep = l2_bound_check(s_list=s, t_grid=t)
    else:
        rep = l1_linf_bound_scan(s_list=s, t_min=float(cfg["t_min"]), t_max=float(cfg["t_max"]),
                                 n_t=int(cfg["n_t"]), n_r=int(cfg["n_r"]))
    return rep, rep.verdict


def cmd_hamiltonian(cfg):
    from .energy import apriori_bound_check, energy_inequality_check
    from .nonlinear import evolve
    from .propagators import WaveState
    from .spectral import zeros
    g = _grid(cfg)
    k, eps, nl = float(cfg["k"]), float(cfg["eps"]), _nl(cfg)
    v0, v1 = profiles.energy_normalized(profiles.named(g, cfg["data"]), zeros(g), k)
    run = evolve(WaveState(v0, v1), nl, eps, float(cfg["T"]), float(cfg["dt"]), k=k)
    ap = apriori_bound_check(run, v0, v1, k, eps, nl)
    ineq = energy_inequality_check(run)
    H = np.asarray(run.hamiltonian_history)
    drift = float(np.abs(H - H[0]).max() / abs(H[0])) if H[0] != 0 else 0.0
    ap.details.update({"energy_inequality": ineq.verdict, "min_slack": ineq.details["min_slack"],
                       "hamiltonian_drift": drift, "outcome": run.outcome})
    ap.verdict = bool(ap.verdict and ineq.verdict)
    return ap, ap.verdict


def _parse_scheme(text: str) -> tuple[int, float]:
    try:
        kv = dict(part.split("=") for part in text.split(","))
        return int(kv["n"]), float(kv["p"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad scheme {text!r}; expected n=3,p=P") from exc


def cmd_bridge(cfg):
    from .cone import norm_identity_check, random_members, weighted_strichartz_ratio
    from .exponents import ExponentContext
    n, p = _parse_scheme(cfg["scheme"])
    if n != 3:
        raise UsageError("bridge checks are implemented for n = 3")
    ctx = ExponentContext.scheme(n, p)
    ident = norm_identity_check(random_members(int(cfg["seed"]), 10), ctx)
    rep = weighted_strichartz_ratio(ctx, members=int(cfg["members"]), seed=int(cfg["seed"]))
    rep.details.update({"norm_identity_sup": ident.sup, "norm_identity": ident.verdict})
    rep.verdict = bool(rep.verdict and ident.verdict)
    return rep, rep.verdict


def cmd_decay(cfg):
    from .propagators import free_decay_scan
    tau = np.linspace(0.5, float(cfg["tau_max"]), int(cfg["n_tau"]))
    rep = free_decay_scan(_data(cfg), tau)
    return rep, rep.verdict


def cmd_kernel_eval(cfg):
    from .kernels import bessel_G, bessel_H, kernel_C, kernel_S
    try:
        z = complex(str(cfg["z"]).replace(" ", ""))
    except ValueError as exc:
        raise UsageError(f"bad complex order {cfg['z']!r}") from exc
    r = np.asarray(_floats(cfg["r"]))
    kind, t = cfg["kind"], float(cfg["t"])
    fn = {"G": lambda: bessel_G(z, r), "H": lambda: bessel_H(z, r),
          "S": lambda: kernel_S(z, t, r), "C": lambda: kernel_C(z, t, r)}[kind]
    vals = np.asarray(fn(), dtype=complex)
    out = {"kind": "kernel_eval", "z": z, "which": kind, "t": t if kind in "SC" else None,
           "series": {"r": r.tolist(), "re": vals.real.tolist(), "im": vals.imag.tolist()}}
    return out, True


COMMANDS = {
    "exponents": cmd_exponents, "simulate": cmd_simulate, "threshold": cmd_threshold,
    "picard": cmd_picard, "dispersive": cmd_dispersive, "kernels": cmd_kernels,
    "hamiltonian": cmd_hamiltonian, "bridge": cmd_bridge, "decay": cmd_decay,
    "kernel-eval": cmd_kernel_eval,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        key, cfg = resolve(args)
        with sfft.set_workers(int(os.environ.get("HYPERWAVE_THREADS", "1"))):
            report, ok = COMMANDS[key](cfg)
    except (UsageError, ValueError) as exc:
        print(f"hyperwave: error: {exc}", file=sys.stderr)
        return 2
    out = cfg.pop("out", None)
    config = {"command": key, **cfg}
    if out:
        emit_report(report, out, config=config)
    else:
        payload = report.to_dict() if isinstance(report, VerificationReport) else jsonable(report)
        payload["config"] = jsonable(config)
        payload["input_hash"] = content_hash(config)
        print(json.dumps(payload, sort_keys=True, indent=2))
    return 0 if ok else 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
