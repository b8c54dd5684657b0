"""Scenario configuration, run reports and the individual checks behind the CLI."""
from __future__ import annotations

import json
import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import emergence, guidance, modes, relativity, wavefunctional as wf
from .exceptions import EmptyShellError, InvalidParameterError
from .validation import default_cutoff


class ConfigError(ValueError):
    pass


_PI = re.compile(r"^([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?$")


def parse_float(text) -> float:
    """Float, also accepting multiples of pi such as ``2pi``, ``2*pi`` or ``pi/2``."""
    s = str(text).strip()
    m = _PI.match(s)
    if m:
        coef = m.group(1)
        coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(s)


def _floats(text):
    return tuple(parse_float(p) for p in str(text).split(",") if p.strip())


@dataclass
class ScenarioConfig:
    name: str = "default"
    L: float = 2 * math.pi
    n_max: int | None = None
    mu: float = 1.0
    shell_tol: float | None = None
    t0: float = 0.0
    t1: float = 10.0
    dt: float = 1e-3
    reading: str = "collective"
    grid_n: int = 64
    t: float = 0.3
    window: float | None = None
    v: float = 0.6
    velocities: tuple = (0.3, 0.6, 0.9)
    mu_list: tuple = (5.0, 13.0, 25.0)
    boost_literal: bool = False
    n_events: int = 10000
    seed: int = 0
    h: float = 1e-2
    tol_endpoint: float = 1e-8
    tol_modulus: float = 1e-8
    tol_identity: float = 1e-12
    tol_shell: float = 1e-8
    tol_grad: float = 1e-6
    tol_residual: float = 1e-6

    @property
    def cutoff(self) -> int:
        return default_cutoff(self.mu, self.L) if self.n_max is None else self.n_max

    def check(self):
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if self.n_max is not None and self.n_max < 0:
            raise ConfigError("n_max must be non-negative")
        if self.mu < 0:
            raise ConfigError("mu must be non-negative")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.grid_n < 2:
            raise ConfigError("grid_n must be at least 2")
        if not abs(self.v) < 1 or any(not abs(u) < 1 for u in self.velocities):
            raise ConfigError("boost velocities must satisfy |v| < 1")
        if self.reading not in ("collective", "exact"):
            raise ConfigError(f"unknown reading {self.reading!r}")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        return self

    def params(self) -> dict:
        d = asdict(self)
        d["velocities"] = list(self.velocities)
        d["mu_list"] = list(self.mu_list)
        return d


def _coerce(f, raw):
    raw = str(raw).strip()
    typ = str(f.type)
    if raw.lower() in ("none", "") and "None" in typ:
        return None
    if f.name in ("velocities", "mu_list"):
        return _floats(raw)
    if typ.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{f.name}: not a boolean: {raw!r}")
    if typ.startswith("int"):
        return int(raw)
    if typ.startswith("float"):
        return parse_float(raw)
    return raw


def load_config(path=None, overrides=()) -> ScenarioConfig:
    """Flat ``key = value`` file (``#`` comments) followed by ``key=value`` overrides."""
    pairs = []
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key = value")
            pairs.append(tuple(p.strip() for p in line.split("=", 1)))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        pairs.append(tuple(p.strip() for p in item.split("=", 1)))
    known = {f.name: f for f in fields(ScenarioConfig)}
    cfg = ScenarioConfig()
    for key, raw in pairs:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            setattr(cfg, key, _coerce(known[key], raw))
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    return cfg.check()


@dataclass
class Check:
    name: str
    anchor: str
    measured: float
    tolerance: float
    passed: bool = None
    note: str = ""

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(np.isfinite(self.measured) and self.measured <= self.tolerance)
        self.measured = float(self.measured)
        self.passed = bool(self.passed)


@dataclass
class RunReport:
    scenario: str
    params: dict
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    findings: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "params": self.params,
            "checks": [asdict(c) for c in self.checks],
            "findings": self.findings,
            "artifacts": self.artifacts,
            "pass": self.passed,
            "metadata": self.metadata,
        }

    def write(self, out_dir, stem):
        path = Path(out_dir) / f"{stem}_report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path


def _threads():
    try:
        return max(1, int(os.environ.get("EFL_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def run_parallel(funcs):
    """Run independent checks, bounded by ``EFL_THREADS``; results keep input order."""
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(lambda fn: fn(), funcs))


# -- individual scenarios -------------------------------------------------

def integrate_scenario(cfg: ScenarioConfig, out_dir: Path) -> RunReport:
    if not cfg.t1 > cfg.t0:
        raise ConfigError(f"empty time range: t1 = {cfg.t1} must exceed t0 = {cfg.t0}")
    try:
        lattice = modes.build_lattice(cfg.L, cfg.cutoff, cfg.mu)
        shell = guidance.shell_modes(lattice, cfg.shell_tol)
        state = guidance.standing_wave_state(shell)
        q0 = guidance.analytic_mode_state(state, cfg.t0)
        record = guidance.integrate_modes(state, q0, cfg.t0, cfg.t1, cfg.dt, cfg.reading)
    except (InvalidParameterError, EmptyShellError) as exc:
        raise ConfigError(str(exc)) from exc
    w = state.shell_frequency()
    reps = state.support
    exact = guidance.analytic_mode_solution(w, record.times)
    err = max(float(np.max(np.abs(record.mode(i) - exact))) for i in reps)
    modulus = max(float(np.max(np.abs(np.abs(record.mode(i)) - 1 / math.sqrt(2 * w)))) for i in reps)
    path = guidance.write_trajectory_csv(record, Path(out_dir) / "trajectory.csv", support=reps)
    rep = RunReport(cfg.name, cfg.params(), artifacts=[path.name])
    rep.checks += [
        Check("endpoint_error", "guided mode vs exp(-i w t)/sqrt(2 w)", err, cfg.tol_endpoint),
        Check("modulus_drift", "|q| conserved by dq/dt = 1/(2i q*)", modulus, cfg.tol_modulus),
        Check("reality_drift", "q(-k) = conj(q(k))", float(np.max(record.reality_drift)), 1e-12),
    ]
    rep.findings = {"shell_size": len(shell), "omega": w, "steps": len(record) - 1,
                    "unwrap_count": record.unwrap_count}
    return rep


def reconstruct_scenario(cfg: ScenarioConfig, out_dir: Path) -> RunReport:
    try:
        lattice = modes.build_lattice(cfg.L, cfg.cutoff, cfg.mu)
        shell = guidance.shell_modes(lattice, cfg.shell_tol)
    except (InvalidParameterError, EmptyShellError) as exc:
        raise ConfigError(str(exc)) from exc
    grid = modes.GridSpec.periodic(cfg.L, cfg.grid_n)
    sample = emergence.reconstruct_field(lattice, shell, cfg.t, grid)
    rep = RunReport(cfg.name, cfg.params())
    imag_free = 0.0 if sample.is_real else float(np.max(np.abs(sample.values.imag)))
    rep.checks.append(Check("reality", "reconstructed field is real", imag_free, 1e-12))
    if cfg.t <= 0:
        rep.checks.append(Check("step_function", "field vanishes for t <= 0",
                                float(np.max(np.abs(sample.values))), 0.0))
        return rep
    window = cfg.L / 2 if cfg.window is None else cfg.window
    cmp = emergence.compare_profiles(sample, cfg.mu, cfg.t, lattice.volume, window=window)
    passed = cmp.zero_within_spacing
    csv_path = emergence.write_profile_csv(cmp, Path(out_dir) / "profile.csv")
    js_path = emergence.write_profile_summary(
        cmp, {"mu": cfg.mu, "L": cfg.L, "grid_n": cfg.grid_n, "t": cfg.t, "shell_size": len(shell)},
        Path(out_dir) / "summary.json", passed)
    rep.artifacts += [csv_path.name, js_path.name]
    rep.checks.append(Check("first_zero", "first zero of sin(mu r)/r at pi/mu",
                            cmp.first_zero_error, cmp.grid_spacing))
    rep.findings = {"l2_error": cmp.l2_error, "first_zero": cmp.first_zero,
                    "amplitude_ratio": cmp.amplitude_ratio, "shell_size": len(shell)}
    return rep


def converge_scenario(cfg: ScenarioConfig, out_dir: Path) -> RunReport:
    """Profile error across shells and RK4 convergence order."""
    rep = RunReport(cfg.name, cfg.params())
    grid = modes.GridSpec.periodic(cfg.L, cfg.grid_n)
    errors, rows = [], []
    for mu in cfg.mu_list:
        lattice = modes.build_lattice(cfg.L, default_cutoff(mu, cfg.L), mu)
        try:
            shell = guidance.shell_modes(lattice, cfg.shell_tol)
        except EmptyShellError as exc:
            raise ConfigError(str(exc)) from exc
        sample = emergence.reconstruct_field(lattice, shell, cfg.t, grid)
        cmp = emergence.compare_profiles(sample, mu, cfg.t, lattice.volume, window=cfg.L / 2)
        errors.append(cmp.l2_error)
        rows.append({"mu": mu, "shell_size": len(shell), "l2_error": cmp.l2_error,
                     "first_zero_error": cmp.first_zero_error})
        rep.checks.append(Check(f"first_zero[mu={mu:g}]", "first zero of sin(mu r)/r at pi/mu",
                                cmp.first_zero_error, cmp.grid_spacing))
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    worst = max((b - a for a, b in zip(errors, errors[1:])), default=-1.0)
    rep.checks.append(Check("l2_strictly_decreasing", "profile approaches sin(mu r)/r as the shell grows",
                            worst, 0.0, passed=decreasing))

    lattice = modes.build_lattice(2 * math.pi, 1, 1.0)
    shell = guidance.shell_modes(lattice, 0.0)
    state = guidance.standing_wave_state(shell)
    q0 = guidance.analytic_mode_state(state, 0.0)
    steps = np.array([0.08, 0.04, 0.02])
    errs = []
    for dt in steps:
        r = guidance.integrate_modes(state, q0, 0.0, 10.0, dt)
        errs.append(abs(r.mode(state.support[0])[-1] - guidance.analytic_mode_solution(1.0, r.times[-1])))
    order = guidance.convergence_order(errs, steps)
    rep.checks.append(Check("rk4_order", "fixed-step RK4 global error O(dt^4)", abs(order - 4.0), 0.3))
    rep.findings = {"shells": rows, "rk4_order": order, "rk4_errors": [float(e) for e in errs]}
    path = Path(out_dir) / "convergence.json"
    path.write_text(json.dumps(rep.findings, indent=2, sort_keys=True) + "\n")
    rep.artifacts.append(path.name)
    return rep


def shell_identity_checks(cfg: ScenarioConfig):
    out = []
    for mu in (1.0, 2.0):
        r = np.linspace(0.1, 20.0, 40) / mu
        rel = max(abs(emergence.shell_integral(mu, x) - math.sin(mu * x) / (math.pi * x))
                  / max(abs(math.sin(mu * x) / (math.pi * x)), 1e-300) for x in r
                  if abs(math.sin(mu * x)) > 1e-6)
        out.append(Check(f"shell_integral[mu={mu:g}]", "delta-shell angular integral = sin(mu r)/(pi r)",
                         rel, cfg.tol_shell))
    return out


def phase_checks(cfg: ScenarioConfig):
    vs = np.linspace(-0.99, 0.99, 100)
    worst_w = max(relativity.kinematic_phase_check(max(cfg.mu, 1.0), float(v), rng=cfg.seed)[0] for v in vs)
    worst_p = max(relativity.kinematic_phase_check(max(cfg.mu, 1.0), float(v), rng=cfg.seed)[1] for v in vs)
    return [
        Check("mass_shell", "mu gamma = sqrt(k^2 + mu^2) with k = mu gamma v", worst_w, cfg.tol_identity),
        Check("phase_reduction", "packet phase = -(w t - k z) mod 2 pi", worst_p, cfg.tol_identity),
    ]


def boost_checks(cfg: ScenarioConfig):
    rng = np.random.default_rng(cfg.seed)
    mu = max(cfg.mu, 1.0)
    V = cfg.L**3
    out = []
    for v in cfg.velocities:
        b = relativity.Boost(v)
        ev = rng.uniform(-5, 5, (cfg.n_events, 4)) / mu
        rest = relativity.boost_event(b, ev)
        moving = relativity.boosted_emergent_field(mu, V, b, *ev.T, literal=cfg.boost_literal)
        r = np.sqrt(np.sum(rest[:, 1:] ** 2, axis=1))
        ref = emergence.oracle_field(mu, V, r, rest[:, 0])
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        out.append(Check(f"emergent_scalar_law[v={v:g}]", "boosted field = rest field at rest-frame coordinates",
                         float(np.max(np.abs(moving - ref))) / scale, cfg.tol_identity))
        pk = relativity.mackinnon_field(mu, b, *ev.T)
        pk0 = relativity.mackinnon_field(mu, relativity.Boost(0.0), *rest.T)
        out.append(Check(f"packet_scalar_law[v={v:g}]", "packet = boost of its rest form",
                         float(np.max(np.abs(pk - pk0))) / mu, cfg.tol_identity))
    v1, v2 = cfg.velocities[0], cfg.velocities[-1]
    ev = rng.uniform(-5, 5, (1000, 4))
    two = relativity.boost_event(relativity.Boost(v1), relativity.boost_event(relativity.Boost(v2), ev))
    one = relativity.boost_event(relativity.Boost(v1).compose(relativity.Boost(v2)), ev)
    out.append(Check("composition", "velocity addition (v1+v2)/(1+v1 v2)",
                     float(np.max(np.abs(two - one))), cfg.tol_identity))
    return out


def residual_reports(cfg: ScenarioConfig):
    mu = max(cfg.mu, 1.0)
    steps = [cfg.h / mu, cfg.h / (2 * mu), cfg.h / (4 * mu)]
    fields_ = {
        "plane_wave": (relativity.plane_wave(mu, 0.75 * mu), (0.3 / mu, 0.1 / mu, -0.2 / mu, 0.4 / mu)),
        "emergent_rest": (relativity.emergent_sampler(mu, cfg.L**3),
                          (2 / mu, 1 / (mu * math.sqrt(3)), 1 / (mu * math.sqrt(3)), 1 / (mu * math.sqrt(3)))),
        "emergent_moving": (relativity.emergent_sampler(mu, cfg.L**3, relativity.Boost(cfg.v)),
                            (3 / mu, 0.4 / mu, 0.3 / mu, 0.5 / mu)),
        "packet": (relativity.mackinnon_sampler(mu, relativity.Boost(cfg.v)),
                   (0.7 / mu, 0.5 / mu, -0.3 / mu, 0.9 / mu)),
    }
    return {name: relativity.residual_report(f, e, mu, steps, cfg.tol_residual) for name, (f, e) in fields_.items()}


def residual_checks(cfg: ScenarioConfig, reports=None):
    reports = residual_reports(cfg) if reports is None else reports
    expected = {"plane_wave": "kg_plus", "emergent_rest": "massless",
                "emergent_moving": "massless", "packet": "massless"}
    out = []
    for name, rep in reports.items():
        want = expected[name]
        out.append(Check(f"residual[{name}]", f"field satisfies the {want} wave operator",
                         rep.extrapolated[want], cfg.tol_residual))
    return out


def guidance_checks(cfg: ScenarioConfig):
    rng = np.random.default_rng(cfg.seed)
    lattice = modes.build_lattice(2 * math.pi, 1, 1.0)
    shell = guidance.shell_modes(lattice, 0.0)
    state = guidance.standing_wave_state(shell)
    ts = np.linspace(0, 10, 100)
    worst = 0.0
    for t in ts:
        q = guidance.analytic_mode_state(state, t)
        rhs = guidance.guidance_rhs(state, q, t)[state.support]
        worst = max(worst, float(np.max(np.abs(rhs - (-1j * state.frequency * q.coefficients[state.support])))))
    out = [Check("amplitude_identity", "A = 1/sqrt(2 w) solves dq/dt = 1/(2i q*)", worst, cfg.tol_identity)]

    eps = 1e-6
    fd_worst = 0.0
    f = np.zeros(lattice.size, dtype=complex)
    f[state.support] = rng.uniform(0.5, 1.5, len(state.support))
    one = wf.OneQuantumState(lattice, f, frequency=1.0)
    for _ in range(50):
        q = modes.random_mode_state(lattice, rng).coefficients.copy()
        g = wf.grad_S(one, q, 0.0)
        for i in state.support:
            def S(dz):
                qq = q.copy()
                qq[i] += dz
                return wf.phase_S(one, qq, 0.0, E0=0.0)
            d = 0.5 * ((S(eps) - S(-eps)) / (2 * eps) + 1j * (S(1j * eps) - S(-1j * eps)) / (2 * eps))
            fd_worst = max(fd_worst, abs(d - g[i]))
    out.append(Check("grad_S_finite_difference", "dS/dq* = f/(2i sum f q*)", fd_worst, cfg.tol_grad))
    return out


def verify_scenario(cfg: ScenarioConfig, out_dir: Path) -> RunReport:
    rep = RunReport(cfg.name, cfg.params())
    reports = residual_reports(cfg)
    groups = run_parallel([
        lambda: shell_identity_checks(cfg),
        lambda: phase_checks(cfg),
        lambda: boost_checks(cfg),
        lambda: residual_checks(cfg, reports),
        lambda: guidance_checks(cfg),
    ])
    for g in groups:
        rep.checks += g
    rep.findings = {"operator_satisfied": {k: r.satisfied for k, r in reports.items()},
                    "extrapolated_residuals": {k: r.extrapolated for k, r in reports.items()}}
    path = relativity.write_residual_csv(reports.values(), Path(out_dir) / "residuals.csv")
    rep.artifacts.append(path.name)
    return rep


def timed(fn, cfg, out_dir):
    start = time.perf_counter()
    rep = fn(cfg, out_dir)
    rep.metadata = {"duration_s": time.perf_counter() - start,
                    "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")}
    return rep
