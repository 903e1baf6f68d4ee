"""
Command-line driver: ``lambdaswap {scatter,sweep,protocol,estimate}``.

Parameter precedence is command-line flag, then the JSON ``--config`` file
(keys named like the flags, with underscores), then the built-in defaults,
which reproduce the published figure parameters. Output files go to
``--out-dir``, else ``$LAMBDASWAP_OUTPUT_DIR``, else the config's
``out_dir``, else the current directory.

Exit codes: 0 success, 1 physics-invariant violation, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import composer
from .adiabatic import SPIN_COHERENCE_NOTE, estimate_cavity
from .errors import ConfigurationError, InvariantViolation
from .fidelity import (DEFAULT_LENGTHS, DEFAULT_RATIOS, fidelity_at, gate_detuning,
                       sweep_fidelity, write_sweep_csv)
from .pulse import POINTS_PER_SCALE, PulseSpec, default_grid, load_envelope_csv, make_gaussian
from .scatter import AtomParams, scatter_pulse, write_scattering_csv

log = logging.getLogger("lambdaswap")

OUTPUT_DIR_ENV = "LAMBDASWAP_OUTPUT_DIR"
ANCHOR_LENGTH = 20.0
ANCHOR_RATIO = 1 / 1.4  # Gamma_H / Gamma_V = 1.4

DEFAULTS = {
    "scatter": {"l": None, "ratio": 1.0, "omega": 0.0, "r0": 0.0,
                "points_per_scale": POINTS_PER_SCALE, "envelope": None, "output": None},
    "sweep": {"gate": "both", "l_values": None, "ratio_values": None,
              "l_min": None, "l_max": None, "l_num": None,
              "ratio_min": None, "ratio_max": None, "ratio_num": None,
              "workers": 1, "points_per_scale": None},
    "protocol": {"atom": "0", "p3": "H", "branch": 1, "seed": 0, "trials": 50,
                 "with_finite_pulse": False, "l": ANCHOR_LENGTH, "ratio": ANCHOR_RATIO,
                 "output": "protocol_report.json"},
    "estimate": {"g": 16.0, "gamma": 0.2, "kappa": 32.0},
}


@dataclass
class RunConfig:
    """Resolved parameters for one subcommand."""

    command: str
    params: dict = field(default_factory=dict)
    out_dir: Path = Path(".")

    def __getattr__(self, name):
        try:
            return self.__dict__["params"][name]
        except KeyError:
            raise AttributeError(name) from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from None
        file_cfg = file_cfg.get(args.command, file_cfg)
    params = {}
    for key, default in DEFAULTS[args.command].items():
        value = getattr(args, key, None)
        if value is None:
            value = file_cfg.get(key, default)
        params[key] = value
    out_dir = args.out_dir or os.environ.get(OUTPUT_DIR_ENV) or file_cfg.get("out_dir") or "."
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"output directory {out_dir} not writable: {exc}") from None
    return RunConfig(args.command, params, out_dir)


def _positive(name, value):
    if value is None or not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be positive, got {value}")
    return float(value)


# -- scatter -----------------------------------------------------------------

def cmd_scatter(cfg: RunConfig) -> list[Path]:
    ratio = _positive("ratio", cfg.ratio)
    atom = AtomParams.from_ratio(ratio)
    if cfg.l is None:
        runs = [(2.5, "fig2a_scatter.csv"), (10.0, "fig2b_scatter.csv")]
    else:
        runs = [(_positive("l", cfg.l), cfg.output or
                 f"scatter_l{cfg.l:g}_ratio{ratio:g}_omega{cfg.omega:g}.csv")]
    written = []
    for length, name in runs:
        spec = PulseSpec(length, float(cfg.omega), float(cfg.r0),
                         "custom" if cfg.envelope else "gaussian")
        grid = default_grid(spec, atom.gamma_bar, int(cfg.points_per_scale))
        if cfg.envelope:
            f = load_envelope_csv(cfg.envelope, grid)
        else:
            f = make_gaussian(spec, grid)
        res = scatter_pulse(f, atom, grid)
        path = cfg.out_dir / name
        write_scattering_csv(res, path, {"l": length, "ratio": ratio, "omega": cfg.omega,
                                         "r0": cfg.r0, "n_points": grid.n_points})
        print(f"l={length:g} ratio={ratio:g} omega={cfg.omega:g}: "
              f"P={res.p_transition:.6f} P'={res.p_no_transition:.6f} -> {path}")
        written.append(path)
    return written


# -- sweep -------------------------------------------------------------------

def _axis(values, lo, hi, num, default):
    if values is not None:
        return [float(v) for v in values]
    if lo is None and hi is None and num is None:
        return list(default)
    lo = default[0] if lo is None else lo
    hi = default[-1] if hi is None else hi
    num = len(default) if num is None else int(num)
    return list(np.linspace(lo, hi, num))


def cmd_sweep(cfg: RunConfig) -> tuple[list[Path], bool]:
    lengths = _axis(cfg.l_values, cfg.l_min, cfg.l_max, cfg.l_num, DEFAULT_LENGTHS)
    ratios = _axis(cfg.ratio_values, cfg.ratio_min, cfg.ratio_max, cfg.ratio_num,
                   DEFAULT_RATIOS)
    gates = {"both": ["swap", "sqrt_swap"], "swap": ["swap"],
             "sqrt_swap": ["sqrt_swap"], "sqrtswap": ["sqrt_swap"]}.get(cfg.gate)
    if gates is None:
        raise ConfigurationError(f"unknown gate {cfg.gate!r}")
    files = {"swap": "fig3a_swap.csv", "sqrt_swap": "fig3b_sqrtswap.csv"}
    written, ok = [], True
    for gate in gates:
        points = sweep_fidelity(lengths, ratios, gate, workers=int(cfg.workers),
                                points_per_scale=cfg.points_per_scale)
        path = cfg.out_dir / files[gate]
        write_sweep_csv(points, path, {"gate": gate, "gamma_h": 1.0,
                                       "omega": gate_detuning(gate, AtomParams())})
        n_ok = sum(p.ok for p in points)
        print(f"{gate}: {n_ok}/{len(points)} points -> {path}")
        ok &= n_ok >= 0.95 * len(points)
        written.append(path)
    anchor = fidelity_at(ANCHOR_LENGTH, ANCHOR_RATIO, "sqrt_swap")
    print(f"anchor: l={ANCHOR_LENGTH:g}, Gamma_H/Gamma_V=1.4 -> F_sqrtSWAP = {anchor:.6f}")
    return written, ok


# -- protocol ----------------------------------------------------------------

_NAMED = {"0": [1, 0], "1": [0, 1], "H": [1, 0], "V": [0, 1],
          "plus": [1, 1], "+": [1, 1], "minus": [1, -1], "-": [1, -1]}


def _named_state(name: str, rng: np.random.Generator):
    if name == "mixed":
        return composer.maximally_mixed()
    if name == "random":
        return composer.random_state(rng)
    if name in _NAMED:
        return composer.pure(_NAMED[name])
    raise ConfigurationError(f"unknown state {name!r}; use one of "
                             f"{sorted(_NAMED) + ['mixed', 'random']}")


def _cplx(a):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]


def protocol_report(cfg: RunConfig) -> dict:
    branch = int(cfg.branch)
    if branch not in (1, -1):
        raise ConfigurationError(f"branch must be +1 or -1, got {branch}")
    rng = np.random.default_rng(int(cfg.seed))
    atom_state = _named_state(str(cfg.atom), rng)
    p3_state = _named_state(str(cfg.p3), rng)
    target = composer.SQRT_SWAP if branch == 1 else composer.SQRT_SWAP.conj().T

    # basis-input runs for every row of the truth table
    rows = []
    for i, (a, b) in enumerate([("H", "H"), ("H", "V"), ("V", "H"), ("V", "V")]):
        rep = composer.run_protocol(_NAMED[a], _NAMED[b], p3_state, atom_state, branch)
        expected = composer.pure(target[:, i])
        rows.append({"input": f"{a}1 {b}2", "fidelity": rep.target_fidelity,
                     "expected_fidelity": composer.state_fidelity(rep.output_rho, expected)})
    main = composer.run_protocol(composer.pure([1, 1j]), composer.pure([1, 0.5]),
                                 p3_state, atom_state, branch)

    sup = composer.protocol_process_matrix(atom_state, p3_state, branch=branch)
    m = composer.unitary_from_process(sup)
    ledger = composer.fit_local_phases(m, target)
    square = composer.fit_local_phases(m @ m, composer.SWAP)

    # atom / photon-3 independence over random environments
    reference = main.output_rho.rho
    distances = []
    for k in range(int(cfg.trials)):
        env_atom = (composer.maximally_mixed() if k == 0
                    else composer.random_state(rng, mixed=bool(k % 2)))
        env_p3 = composer.random_state(rng, mixed=bool((k // 2) % 2))
        rep = composer.run_protocol(composer.pure([1, 1j]), composer.pure([1, 0.5]),
                                    env_p3, env_atom, branch)
        distances.append(composer.trace_distance(rep.output_rho, reference))

    report = {
        "branch": branch,
        "atom_initial": str(cfg.atom),
        "p3_initial": str(cfg.p3),
        "target_fidelity": main.target_fidelity,
        "residual_entanglement": main.residual_entanglement,
        "transfer_check": main.transfer_check,
        "output_state_hash": composer.state_hash(main.output_rho.rho),
        "truth_table": rows,
        "process_matrix": _cplx(sup),
        "effective_unitary": _cplx(m),
        "phase_ledger": ledger.as_dict(),
        "square_vs_swap": square.as_dict(),
        "independence_max_trace_distance": max(distances) if distances else 0.0,
    }
    if cfg.with_finite_pulse:
        ratio = _positive("ratio", cfg.ratio)
        length = _positive("l", cfg.l)
        f_swap = fidelity_at(length, ratio, "swap")
        f_sqrt = fidelity_at(length, ratio, "sqrt_swap")
        report["finite_pulse"] = {
            "l": length, "gamma_ratio": ratio, "f_swap": f_swap, "f_sqrt_swap": f_sqrt,
            "composite": composer.composite_fidelity(f_swap, f_sqrt, main.target_fidelity),
        }
    return report


def _check_protocol(report: dict):
    problems = []
    if abs(report["target_fidelity"] - 1.0) > 1e-10:
        problems.append(f"target fidelity {report['target_fidelity']}")
    if report["phase_ledger"]["residual"] > 1e-10:
        problems.append("process matrix does not match sqrt(SWAP) up to local phases")
    if report["square_vs_swap"]["residual"] > 1e-10:
        problems.append("squared map is not SWAP up to local phases")
    if report["independence_max_trace_distance"] > 1e-10:
        problems.append("output depends on the atom or photon-3 state")
    for key, val in report["transfer_check"].items():
        if abs(val - 1.0) > 1e-12:
            problems.append(f"transfer {key} fidelity {val}")
    if problems:
        raise InvariantViolation("; ".join(problems))


def cmd_protocol(cfg: RunConfig) -> Path:
    report = protocol_report(cfg)
    path = cfg.out_dir / cfg.output
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(f"target fidelity {report['target_fidelity']:.12f}, "
          f"max independence distance {report['independence_max_trace_distance']:.2e}")
    if "finite_pulse" in report:
        print(f"composite finite-pulse estimate {report['finite_pulse']['composite']:.4f}")
    print(f"report -> {path}")
    _check_protocol(report)
    return path


# -- estimate ----------------------------------------------------------------

def cmd_estimate(cfg: RunConfig) -> dict:
    """Cavity parameters are given in GHz and multiplied by 2 pi."""
    two_pi = 2 * math.pi
    g = _positive("g", cfg.g)
    kappa = _positive("kappa", cfg.kappa)
    gamma = float(cfg.gamma)
    if gamma < 0:
        raise ConfigurationError(f"gamma must be non-negative, got {gamma}")
    est = estimate_cavity(two_pi * g, two_pi * gamma, two_pi * kappa)
    print(f"(g, gamma, kappa) = 2pi x ({g:g}, {gamma:g}, {kappa:g}) GHz")
    print(f"Gamma = g^2/kappa = 2pi x {est.gamma_eff / two_pi:.6g} GHz")
    print(f"loss per gate = gamma/(Gamma+gamma) = {100 * est.loss_per_gate:.3f} %")
    print(f"three-gate survival = {est.three_gate_survival:.6f}")
    print(f"1/Gamma = {1e3 / est.gamma_eff:.4g} ps")
    print(f"note: {SPIN_COHERENCE_NOTE}")
    return {"gamma_eff": est.gamma_eff, "loss_per_gate": est.loss_per_gate}


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameter defaults")
    common.add_argument("--out-dir", help=f"output directory (env: {OUTPUT_DIR_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lambdaswap", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", parents=[common], help="output wavepackets (CSV)")
    p.add_argument("--l", type=float, help="pulse length; default writes l=2.5 and l=10")
    p.add_argument("--ratio", type=float, help="Gamma_V / Gamma_H")
    p.add_argument("--omega", type=float, help="detuning in units of Gamma_H")
    p.add_argument("--r0", type=float, help="pulse center at t=0")
    p.add_argument("--points-per-scale", type=int)
    p.add_argument("--envelope", help="CSV with r, re f, im f columns instead of a Gaussian")
    p.add_argument("--output", help="file name inside the output directory")

    p = sub.add_parser("sweep", parents=[common], help="fidelity landscapes (CSV)")
    p.add_argument("--gate", choices=["both", "swap", "sqrt_swap", "sqrtswap"])
    p.add_argument("--l-values", type=float, nargs="+")
    p.add_argument("--ratio-values", type=float, nargs="+")
    for name in ("l", "ratio"):
        p.add_argument(f"--{name}-min", type=float)
        p.add_argument(f"--{name}-max", type=float)
        p.add_argument(f"--{name}-num", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--points-per-scale", type=int)

    p = sub.add_parser("protocol", parents=[common], help="three-photon sqrt(SWAP) report")
    p.add_argument("--atom", help="initial atom: 0, 1, plus, minus, mixed, random")
    p.add_argument("--p3", help="initial photon 3: H, V, plus, minus, mixed, random")
    p.add_argument("--branch", type=int, choices=[1, -1],
                   help="+1: photon 2 at omega=-Gamma_H, -1: omega=+Gamma_H")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--with-finite-pulse", action="store_true", default=None)
    p.add_argument("--l", type=float, help="pulse length for the finite-pulse estimate")
    p.add_argument("--ratio", type=float, help="Gamma_V / Gamma_H for the estimate")
    p.add_argument("--output")

    p = sub.add_parser("estimate", parents=[common], help="cavity-QED loss estimate")
    p.add_argument("--g", type=float, help="coupling, GHz (times 2 pi)")
    p.add_argument("--gamma", type=float, help="radiative loss, GHz (times 2 pi)")
    p.add_argument("--kappa", type=float, help="cavity decay, GHz (times 2 pi)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "scatter":
            cmd_scatter(cfg)
        elif args.command == "sweep":
            _, ok = cmd_sweep(cfg)
            if not ok:
                print("error: fewer than 95% of sweep points succeeded", file=sys.stderr)
                return 1
        elif args.command == "protocol":
            cmd_protocol(cfg)
        else:
            cmd_estimate(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
