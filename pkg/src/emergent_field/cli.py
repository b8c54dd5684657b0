"""Command line driver.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import emergence, guidance, modes, relativity
from .exceptions import EmptyShellError, InvalidParameterError
from .scenarios import (
    ConfigError, RunReport, boost_checks, converge_scenario, integrate_scenario, load_config,
    phase_checks, reconstruct_scenario, residual_checks, residual_reports, shell_identity_checks, timed,
    verify_scenario,
)


def _lattice_info(cfg, out_dir):
    try:
        lattice = modes.build_lattice(cfg.L, cfg.cutoff, cfg.mu)
        shell = guidance.shell_modes(lattice, cfg.shell_tol)
    except (InvalidParameterError, EmptyShellError) as exc:
        raise ConfigError(str(exc)) from exc
    rep = RunReport(cfg.name, cfg.params())
    rep.findings = {
        "modes": lattice.size,
        "volume": lattice.volume,
        "shell_size": len(shell),
        "shell_tol": shell.tol,
        "shell_integers": shell.integers.tolist(),
    }
    return rep


def _oracle(cfg, out_dir):
    if cfg.mu <= 0:
        raise ConfigError("oracle needs mu > 0")
    window = cfg.L / 2 if cfg.window is None else cfg.window
    r = np.linspace(0.0, window, cfg.grid_n + 1)
    phi = emergence.oracle_field(cfg.mu, cfg.L**3, r, cfg.t)
    path = Path(out_dir) / "oracle.csv"
    with path.open("w") as fh:
        fh.write("r,phi_oracle\n")
        for a, b in zip(r, phi):
            fh.write(f"{a:.17g},{b:.17g}\n")
    rep = RunReport(cfg.name, cfg.params(), artifacts=[path.name])
    rep.findings = {"first_zero": math.pi / cfg.mu, "value_at_origin": float(phi[0])}
    return rep


def _single(check_fn):
    def run(cfg, out_dir):
        rep = RunReport(cfg.name, cfg.params())
        rep.checks += check_fn(cfg)
        return rep
    return run


def _residual(cfg, out_dir):
    reports = residual_reports(cfg)
    rep = RunReport(cfg.name, cfg.params())
    rep.checks += residual_checks(cfg, reports)
    rep.findings = {"operator_satisfied": {k: r.satisfied for k, r in reports.items()},
                    "extrapolated_residuals": {k: r.extrapolated for k, r in reports.items()}}
    path = relativity.write_residual_csv(reports.values(), Path(out_dir) / "residuals.csv")
    rep.artifacts.append(path.name)
    return rep


COMMANDS = {
    "lattice-info": (_lattice_info, "lattice and shell summary"),
    "integrate": (integrate_scenario, "integrate the guided shell modes against the analytic solution"),
    "reconstruct": (reconstruct_scenario, "reconstruct the emergent field and compare its radial profile"),
    "oracle": (_oracle, "tabulate the closed-form emergent field"),
    "boost-check": (_single(boost_checks), "scalar transformation law and boost composition"),
    "shell-identity": (_single(shell_identity_checks), "delta-shell angular integral"),
    "residual": (_residual, "wave-operator residuals of the closed-form fields"),
    "phase-check": (_single(phase_checks), "kinematic reduction of the packet phase"),
    "verify": (verify_scenario, "all identity checks"),
    "converge": (converge_scenario, "profile error across shells and RK4 order"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efl", description="Emergent particle field simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--out", type=Path, default=Path("efl_out"), help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--json", action="store_true", help="print the run report as JSON")
    return parser


def _print_report(rep: RunReport, stream):
    for c in rep.checks:
        flag = "PASS" if c.passed else "FAIL"
        stream.write(f"{flag}  {c.name:<36} measured={c.measured:.3e}  tol={c.tolerance:.1e}\n")
    for k, v in rep.findings.items():
        stream.write(f"      {k}: {v}\n")
    if rep.checks:
        stream.write(f"{'PASS' if rep.passed else 'FAIL'}  overall\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    fn, _ = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, args.overrides)
        if args.config is None and not any(o.startswith("name=") for o in args.overrides):
            cfg.name = args.command
        args.out.mkdir(parents=True, exist_ok=True)
        rep = timed(fn, cfg, args.out)
    except ConfigError as exc:
        sys.stderr.write(f"efl {args.command}: configuration error: {exc}\n")
        return 2
    report_path = rep.write(args.out, args.command.replace("-", "_"))
    rep.artifacts.append(report_path.name)
    if args.json:
        sys.stdout.write(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n")
    else:
        _print_report(rep, sys.stdout)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
