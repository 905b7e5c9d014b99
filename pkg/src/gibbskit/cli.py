"""Batch front end: config file in, deterministic CSV/JSON reports out.

Commands: spectrum, solve, sweep, eqf, global-min, weyl, fit, check.
Configuration is an INI file with [model], [grid], [potential] sections
plus one section per command; unknown sections or keys are rejected
before any computation.  Reports embed the config hash and the trusted
spectrum cap, use 12 significant digits, '.' decimals and LF line
endings, so identical configs produce byte-identical outputs.

Exit codes: 0 success, 1 check violations, 2 configuration or
feasibility errors, 3 solver failures.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotics, gibbs, observables
from .entropy import EntropyModel, make_model, validate_growth
from .errors import (
    ConfigError,
    GibbsKitError,
    InfeasibleConstraintError,
    ModelValidationError,
    SolverError,
)
from .spectral import (
    GridSpec,
    PotentialSpec,
    SpectralHamiltonian,
    assemble_and_solve,
    counting_function,
    riesz_mean,
)

COMMANDS = ("spectrum", "solve", "sweep", "eqf", "global-min", "weyl", "fit", "check")

_KNOWN_KEYS = {
    "model": {"name", "n_bar", "q", "gamma"},
    "grid": {"dimension", "half_width", "points", "count"},
    "potential": {"theta"},
    "solve": {"temperature", "tail_rule"},
    "sweep": {"temperatures", "t_min", "t_max", "points", "spacing", "identity_check", "tail_rule"},
    "eqf": {"t1", "t2"},
    "global_min": {"a0", "b0", "c"},
    "weyl": {"s", "energies", "e_min", "e_max", "points"},
    "fit": {"s", "t_min", "t_max", "points", "tail_rule"},
    "check": {"seed", "temperature", "trials"},
}

_DEFAULT_CONFIG = """\
[model]
name = boltzmann
n_bar = 1.0

[grid]
dimension = 1
half_width = 12.0
points = 1200
count = 120

[potential]
theta = 2.0

[solve]
temperature = 1.0

[sweep]
t_min = 0.5
t_max = 4.0
points = 6
spacing = log

[eqf]
t1 = 1.0
t2 = 2.0

[weyl]
s = 1.0
e_min = 10.0
e_max = 60.0
points = 6

[check]
seed = 20240801
temperature = 1.0
trials = 50
"""


def _fmt(value) -> str:
    v = float(value)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return f"{v:.12g}"


@dataclass
class RunConfig:
    """Validated run configuration plus its canonical hash."""

    command: str
    model_name: str
    n_bar: float
    model_params: dict
    grid: GridSpec
    potential: PotentialSpec
    count: int
    sections: dict
    config_hash: str


def _parse_config(text: str, command: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")

    canonical = []
    for section in sorted(parser.sections()):
        for key in sorted(parser[section]):
            canonical.append(f"{section}.{key}={parser[section][key].strip()}")
    digest = hashlib.sha256("\n".join(canonical).encode()).hexdigest()

    def need(section: str) -> configparser.SectionProxy:
        if section not in parser:
            raise ConfigError(f"missing config section [{section}]")
        return parser[section]

    def getfloat(section, key, default=None):
        try:
            if default is not None and key not in parser[section]:
                return default
            return parser[section].getfloat(key)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad or missing float '{key}' in [{section}]") from exc

    def getint(section, key, default=None):
        try:
            if default is not None and key not in parser[section]:
                return default
            return parser[section].getint(key)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad or missing integer '{key}' in [{section}]") from exc

    model_sec = need("model")
    name = model_sec.get("name", "").strip()
    if not name:
        raise ConfigError("model name is required")
    n_bar = getfloat("model", "n_bar")
    params: dict = {}
    if "q" in model_sec:
        params["q"] = getfloat("model", "q")
    if "gamma" in model_sec:
        params["gamma"] = getfloat("model", "gamma")

    need("grid")
    grid = GridSpec(
        dimension=getint("grid", "dimension", 1),
        half_width=getfloat("grid", "half_width"),
        points_per_axis=getint("grid", "points"),
    )
    count = getint("grid", "count")
    need("potential")
    potential = PotentialSpec(theta=getfloat("potential", "theta"))

    sections = {s: dict(parser[s]) for s in parser.sections()}
    section_name = command.replace("-", "_")
    needs_section = command not in ("spectrum", "check")
    if needs_section and section_name not in sections:
        raise ConfigError(f"missing config section [{section_name}] for command {command}")

    return RunConfig(
        command=command,
        model_name=name,
        n_bar=n_bar,
        model_params=params,
        grid=grid,
        potential=potential,
        count=count,
        sections=sections,
        config_hash=digest,
    )


def _temperature_grid(section: dict) -> np.ndarray:
    if "temperatures" in section:
        temps = np.array([float(v) for v in section["temperatures"].split(",")])
    else:
        t_min = float(section["t_min"])
        t_max = float(section["t_max"])
        points = int(section["points"])
        spacing = section.get("spacing", "log").strip()
        if spacing == "log":
            temps = np.geomspace(t_min, t_max, points)
        elif spacing == "linear":
            temps = np.linspace(t_min, t_max, points)
        else:
            raise ConfigError(f"unknown spacing '{spacing}'")
    if temps.size == 0 or np.any(temps <= 0.0) or np.any(np.diff(temps) <= 0.0):
        raise ConfigError("temperature grid must be positive and strictly increasing")
    return temps


def _energy_grid(section: dict) -> np.ndarray:
    if "energies" in section:
        energies = np.array([float(v) for v in section["energies"].split(",")])
    else:
        energies = np.linspace(float(section["e_min"]), float(section["e_max"]), int(section["points"]))
    if energies.size == 0 or np.any(np.diff(energies) <= 0.0):
        raise ConfigError("energy grid must be strictly increasing")
    return energies


# ---------------------------------------------------------------------------
# report writers
# ---------------------------------------------------------------------------


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        handle.write(text)


def _csv_text(cfg: RunConfig, ham: SpectralHamiltonian | None, columns, rows) -> str:
    out = io.StringIO()
    out.write(f"# command={cfg.command}\n")
    out.write(f"# config_hash={cfg.config_hash}\n")
    if ham is not None:
        out.write(f"# trusted_cap={_fmt(ham.trusted_cap)}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row) + "\n")
    return out.getvalue()


def _summary(cfg: RunConfig, status: str, headline: dict, ham: SpectralHamiltonian | None) -> str:
    payload = {
        "command": cfg.command,
        "config_hash": cfg.config_hash,
        "status": status,
        "headline_values": headline,
    }
    if ham is not None:
        payload["trusted_cap"] = _fmt(ham.trusted_cap)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _round(value) -> float:
    # 12 significant digits so JSON output is formatting-stable.
    return float(_fmt(value))


# ---------------------------------------------------------------------------
# command runners
# ---------------------------------------------------------------------------


def _build_model(cfg: RunConfig) -> EntropyModel:
    model = make_model(cfg.model_name, cfg.n_bar, cfg.model_params)
    validate_growth(model, dimension=cfg.grid.dimension)
    return model


def _build_ham(cfg: RunConfig) -> SpectralHamiltonian:
    return assemble_and_solve(cfg.grid, cfg.potential, cfg.count)


def _run_spectrum(cfg: RunConfig, out: Path) -> int:
    ham = _build_ham(cfg)
    rows = [(float(j), lam) for j, lam in enumerate(ham.eigenvalues)]
    _write_text(out / "spectrum.csv", _csv_text(cfg, ham, ["j", "lambda_j"], rows))
    headline = {
        "ground_energy": _round(ham.ground_energy),
        "spectral_gap": _round(ham.spectral_gap),
        "retained": ham.size,
    }
    _write_text(out / "summary.json", _summary(cfg, "ok", headline, ham))
    return 0


def _run_solve(cfg: RunConfig, out: Path) -> int:
    model = _build_model(cfg)
    ham = _build_ham(cfg)
    section = cfg.sections["solve"]
    temperature = float(section["temperature"])
    tail_rule = section.get("tail_rule", "continuum")
    point = gibbs.thermo_point(gibbs.build_state(model, ham, temperature, cfg.n_bar, tail_rule=tail_rule))
    columns = ["T", "mu", "energy", "entropy", "free_energy", "rank"]
    row = (
        point.temperature,
        point.chemical_potential,
        point.energy,
        point.entropy,
        point.free_energy,
        float(point.rank),
    )
    _write_text(out / "solve.csv", _csv_text(cfg, ham, columns, [row]))
    headline = {
        "mu": _round(point.chemical_potential),
        "energy": _round(point.energy),
        "entropy": _round(point.entropy),
        "free_energy": _round(point.free_energy),
    }
    _write_text(out / "summary.json", _summary(cfg, "ok", headline, ham))
    return 0


def _run_sweep(cfg: RunConfig, out: Path) -> int:
    model = _build_model(cfg)
    ham = _build_ham(cfg)
    section = cfg.sections["sweep"]
    temps = _temperature_grid(section)
    identity = section.get("identity_check", "false").strip().lower() in ("1", "true", "yes")
    tail_rule = section.get("tail_rule", "continuum")
    report = gibbs.temperature_sweep(
        model, ham, cfg.n_bar, temps, tail_rule=tail_rule, identity_check=identity
    )
    columns = ["T", "mu", "energy", "entropy", "free_energy", "rank"]
    rows = []
    for i, point in enumerate(report.points):
        if point is None:
            rows.append((report.temperatures[i], "error", "error", "error", "error", "error"))
        else:
            rows.append(
                (
                    point.temperature,
                    point.chemical_potential,
                    point.energy,
                    point.entropy,
                    point.free_energy,
                    float(point.rank),
                )
            )
    _write_text(out / "sweep.csv", _csv_text(cfg, ham, columns, rows))
    headline = {
        "rows": len(report.points),
        "failed_rows": len(report.row_errors),
        "critical_temperature": _round(report.critical_temperature),
        "energy_strictly_increasing": report.energy_strictly_increasing,
        "entropy_strictly_decreasing": report.entropy_strictly_decreasing,
        "mu_over_t_nondecreasing": report.mu_over_t_nondecreasing,
        "energy_floor_ok": report.energy_floor_ok,
    }
    if report.identity_residual is not None:
        headline["identity_residual"] = _round(report.identity_residual)
    status = "ok" if not report.row_errors else "partial"
    _write_text(out / "summary.json", _summary(cfg, status, headline, ham))
    return 0


def _run_eqf(cfg: RunConfig, out: Path) -> int:
    model = _build_model(cfg)
    ham = _build_ham(cfg)
    section = cfg.sections["eqf"]
    t1, t2 = float(section["t1"]), float(section["t2"])
    residual = gibbs.free_energy_identity_residual(model, ham, cfg.n_bar, t1, t2)
    _write_text(
        out / "eqf.csv",
        _csv_text(cfg, ham, ["t1", "t2", "residual"], [(t1, t2, residual)]),
    )
    _write_text(out / "summary.json", _summary(cfg, "ok", {"residual": _round(residual)}, ham))
    return 0


def _run_global_min(cfg: RunConfig, out: Path) -> int:
    model = _build_model(cfg)
    ham = _build_ham(cfg)
    if cfg.grid.dimension != 1:
        raise ConfigError("global-min field export supports dimension 1 only")
    section = cfg.sections["global_min"]
    a0 = float(section["a0"])
    b0 = np.array([float(v) for v in section["b0"].split(",")])
    c = float(section["c"])
    result = gibbs.global_entropy_minimizer(model, ham, a0, b0, c)
    gauged = observables.gauge_transform(result.state, result.gauge_vector)
    fields = observables.compute_fields(gauged)
    admiss = observables.admissibility_check(fields)

    x = cfg.grid.axis
    field_rows = [
        (x[i], fields.density[i], fields.current[0, i], fields.kinetic[i], fields.total_energy_density[i])
        for i in range(x.size)
    ]
    _write_text(out / "fields.csv", _csv_text(cfg, ham, ["x", "n", "u", "k", "e"], field_rows))
    columns = ["T", "b", "total_density", "total_current", "total_energy"]
    row = (
        result.temperature,
        result.gauge_vector[0],
        fields.total_density,
        fields.total_current[0],
        fields.total_energy,
    )
    _write_text(out / "global_min.csv", _csv_text(cfg, ham, columns, [row]))
    headline = {
        "temperature": _round(result.temperature),
        "gauge": _round(result.gauge_vector[0]),
        "total_density": _round(fields.total_density),
        "total_current": _round(fields.total_current[0]),
        "total_energy": _round(fields.total_energy),
        "admissibility_ok": admiss.all_ok,
    }
    _write_text(out / "summary.json", _summary(cfg, "ok", headline, ham))
    return 0


def _run_weyl(cfg: RunConfig, out: Path) -> int:
    ham = _build_ham(cfg)
    section = cfg.sections["weyl"]
    order = float(section["s"])
    energies = _energy_grid(section)
    scan = asymptotics.weyl_ratio_scan(ham, order, energies)
    rows = [(r.energy, r.ratio, scan.target, r.ratio / scan.target) for r in scan.rows]
    _write_text(out / "weyl.csv", _csv_text(cfg, ham, ["E", "value", "target", "ratio"], rows))
    headline = {
        "target": _round(scan.target),
        "final_value": _round(scan.rows[-1].ratio),
        "final_relative_deviation": _round(scan.final_relative_deviation),
    }
    _write_text(out / "summary.json", _summary(cfg, "ok", headline, ham))
    return 0


def _run_fit(cfg: RunConfig, out: Path) -> int:
    model = _build_model(cfg)
    ham = _build_ham(cfg)
    section = cfg.sections["fit"]
    order = float(section["s"])
    temps = np.geomspace(float(section["t_min"]), float(section["t_max"]), int(section["points"]))
    tail_rule = section.get("tail_rule", "continuum")
    sweep = gibbs.temperature_sweep(model, ham, cfg.n_bar, temps, tail_rule=tail_rule)
    fit = asymptotics.fit_scaling_exponent(sweep, order, cfg.grid.dimension, cfg.potential.theta)
    trend = asymptotics.high_temperature_diagnostics(sweep)
    anchor = sweep.ok_points()[-1]
    scale = anchor.energy / anchor.temperature**fit.predicted_exponent
    rows = []
    for point in sweep.ok_points():
        target = scale * point.temperature**fit.predicted_exponent
        rows.append((point.temperature, point.energy, target, point.energy / target))
    _write_text(out / "fit.csv", _csv_text(cfg, ham, ["T", "value", "target", "ratio"], rows))
    headline = {
        "fitted_exponent": _round(fit.fitted_exponent),
        "predicted_exponent": _round(fit.predicted_exponent),
        "window_points": fit.point_count,
        "mu_over_t_nondecreasing": trend.mu_over_t_nondecreasing,
        "cutoff_increasing": trend.cutoff_increasing,
        "cutoff_over_t_decreasing": trend.cutoff_over_t_decreasing,
    }
    _write_text(out / "summary.json", _summary(cfg, "ok", headline, ham))
    return 0


def _run_check(cfg: RunConfig, out: Path) -> int:
    section = cfg.sections.get("check", {})
    seed = int(section.get("seed", "20240801"))
    temperature = float(section.get("temperature", "1.0"))
    trials = int(section.get("trials", "50"))
    rng = np.random.default_rng(seed)

    model = _build_model(cfg)
    ham = _build_ham(cfg)
    results: list[tuple[str, bool, str]] = []

    def record(name: str, ok: bool, detail: str) -> None:
        results.append((name, bool(ok), detail))

    # entropy: inverse-map round trip, monotonicity, convexity
    xs = cfg.n_bar * np.linspace(0.001, 0.999, 1000)
    rt = np.abs(model.occupation(-model.entropy_deriv(xs)) - xs) / xs
    record("entropy_round_trip", float(np.max(rt)) <= 1e-10, f"max_rel={_fmt(np.max(rt))}")
    ts = np.linspace(max(model.domain_lo, -50.0) + 1e-6, min(model.domain_hi, 50.0) - 1e-6, 500)
    occ = model.occupation(ts)
    record("occupation_decreasing", bool(np.all(np.diff(occ) < 0.0)), "sampled 500 points")
    slopes = np.diff(model.entropy_density(xs)) / np.diff(xs)
    record("entropy_convex", bool(np.all(np.diff(slopes) > 0.0)), "chord slopes increase")

    # spectrum basics
    record(
        "spectrum_floor_and_gap",
        ham.ground_energy > cfg.potential.offset and ham.spectral_gap > 0.0,
        f"lambda0={_fmt(ham.ground_energy)} gap={_fmt(ham.spectral_gap)}",
    )
    e_probe = min(0.5 * ham.trusted_top, ham.eigenvalues[min(ham.size - 1, 20)] + 1.0)
    grid_y = np.linspace(0.0, e_probe, 4001)
    counts = np.searchsorted(ham.eigenvalues, grid_y, side="right")
    integral = float(np.trapezoid(counts, grid_y))
    rm = riesz_mean(ham, e_probe, 1.0)
    record(
        "riesz_counting_integral",
        abs(integral - rm) <= 1e-3 * max(1.0, rm),
        f"quad={_fmt(integral)} riesz={_fmt(rm)}",
    )

    # equilibrium state
    state = gibbs.build_state(model, ham, temperature, cfg.n_bar)
    record(
        "solve_trace",
        abs(state.trace - cfg.n_bar) <= 1e-9 * cfg.n_bar,
        f"defect={_fmt(abs(state.trace - cfg.n_bar))}",
    )
    record(
        "occupations_nonincreasing",
        bool(np.all(np.diff(state.occupations) <= 1e-12 * cfg.n_bar)),
        "",
    )
    mus = state.chemical_potential + np.array([0.0, 0.3, 0.9])
    zs = [gibbs.partition_function(model, ham, temperature, float(m)) for m in mus]
    record("partition_decreasing", zs[0] > zs[1] > zs[2], "sampled mu triple")
    floor = ham.ground_energy * cfg.n_bar
    record("energy_floor", state.energy() >= floor - 1e-9, f"E={_fmt(state.energy())}")
    opt = gibbs.check_optimality(state, gibbs.random_feasible_occupations(state, trials, rng))
    record(
        "optimality_random_trials",
        opt.all_nonnegative,
        f"min_gap={_fmt(opt.min_gap)} trials={opt.trial_count}",
    )
    tc = gibbs.critical_temperature(model, ham)
    sweep_hi = max(4.0 * temperature, 2.0 * (tc + 1.0))
    sweep = gibbs.temperature_sweep(
        model, ham, cfg.n_bar, np.geomspace(max(temperature, tc + 0.1), sweep_hi, 5)
    )
    record(
        "sweep_monotonicity",
        sweep.energy_strictly_increasing
        and sweep.entropy_strictly_decreasing
        and sweep.mu_over_t_nondecreasing
        and not sweep.row_errors,
        f"rows={len(sweep.points)}",
    )
    tail = gibbs.truncation_tail_bound(model, ham, temperature, state.chemical_potential)
    record("tail_certified", tail <= 1e-10 * cfg.n_bar, f"bound={_fmt(tail)}")

    # observables
    fields = observables.compute_fields(state)
    record(
        "fields_trace",
        abs(fields.total_density - state.trace) <= 1e-8 * max(1.0, state.trace),
        f"int_n={_fmt(fields.total_density)}",
    )
    admiss = observables.admissibility_check(fields)
    record("admissibility", admiss.all_ok, f"compat_viol={_fmt(admiss.compat_max_violation)}")
    if cfg.grid.dimension == 1:
        gauged = observables.gauge_transform(state, np.array([0.5]))
        direct = observables.compute_fields_materialized(gauged)
        closed = observables.compute_fields(gauged)
        dev = max(
            float(np.max(np.abs(direct.current - closed.current))),
            float(np.max(np.abs(direct.kinetic - closed.kinetic))),
            float(np.max(np.abs(direct.density - closed.density))),
        )
        record("gauge_consistency", dev <= 1e-8, f"max_dev={_fmt(dev)}")
        record(
            "gauge_entropy_invariant",
            abs(gauged.occupations.sum() - state.occupations.sum()) == 0.0,
            "occupations shared",
        )

    # asymptotics
    e_test = min(0.8 * ham.trusted_top, 50.0)
    closed_w = asymptotics.phase_space_volume(e_test, 1.0, cfg.grid.dimension, cfg.potential.theta)
    quad_w = asymptotics.phase_space_volume(
        e_test, 1.0, cfg.grid.dimension, cfg.potential.theta, method="quadrature"
    )
    record(
        "volume_quadrature",
        abs(closed_w - quad_w) <= 1e-8 * max(1.0, closed_w),
        f"closed={_fmt(closed_w)} quad={_fmt(quad_w)}",
    )
    kappa = asymptotics.riesz_ratio_constant(1.0, cfg.grid.dimension, cfg.potential.theta)
    record("ratio_constant_above_one", kappa > 1.0, f"kappa={_fmt(kappa)}")

    rows = [(name, "pass" if ok else "FAIL", detail) for name, ok, detail in results]
    text = _csv_text(cfg, ham, ["name", "status", "detail"], rows)
    _write_text(out / "check.csv", text)
    failures = [name for name, ok, _ in results if not ok]
    headline = {"checks": len(results), "failures": failures}
    _write_text(
        out / "summary.json",
        _summary(cfg, "ok" if not failures else "violations", headline, ham),
    )
    return 0 if not failures else 1


_RUNNERS = {
    "spectrum": _run_spectrum,
    "solve": _run_solve,
    "sweep": _run_sweep,
    "eqf": _run_eqf,
    "global-min": _run_global_min,
    "weyl": _run_weyl,
    "fit": _run_fit,
    "check": _run_check,
}


def run(command: str, config_text: str, out_dir: str | Path) -> int:
    """Parse, validate and execute one command; returns the exit code."""
    cfg = _parse_config(config_text, command)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[command](cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gibbskit",
        description="equilibrium states and spectral asymptotics for confined operators",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="INI config file (built-in defaults when omitted)")
    parser.add_argument("--out", default="reports", help="output directory (default: reports)")
    args = parser.parse_args(argv)

    try:
        if args.config is None:
            text = _DEFAULT_CONFIG
        else:
            path = Path(args.config)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            text = path.read_text()
        return run(args.command, text, args.out)
    except (ConfigError, ModelValidationError, InfeasibleConstraintError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, GibbsKitError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
