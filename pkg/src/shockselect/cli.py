"""Command-line front end.

    shockselect analyze    [--config FILE] [--set key=value ...] [--out DIR]
    shockselect solve-a    ...
    shockselect wave-speed ...
    shockselect simulate   ...
    shockselect sweep      ... [--workers N]

Configuration is a flat ``key=value`` file (``#`` starts a comment) or the
``metadata.json`` a previous run wrote; ``--set`` overrides it.  Every run
writes ``metadata.json`` with the fully resolved configuration, so feeding
that file back through ``--config`` repeats the run.

Exit codes: 0 success, 1 usage or I/O, 2 inadmissible model, 3 solver
failure, 4 simulation instability.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .errors import ConfigError, ShockSelectError
from .model import ZERO, DiffusivityModel, ReactionModel, classify_shape
from .pde import (CONSTANT_IC, HEAVISIDE, LAYER, LINEAR, METHODS, NONLINEAR, PLATEAU,
                  CENTRAL, CONSERVATIVE, SimulationConfig, discretisation_error_report,
                  integrate, shock_distance)
from .regularization import (CONSTANT, EXPONENTIAL, QUADRATIC, RegularisationWeight,
                             modified_area_closed_form_exponential,
                             shock_for_weight, solve_weight_parameter)
from .shock import (CONTINUOUS_D, EQUAL_AREA, LOWER_KNEE, UPPER_KNEE, ShockFamily,
                    all_rule_shocks, continuous_diffusivity_shock, equal_area_shock,
                    knee_shocks, shock_length_extrema)
from .wave import shoot_manifolds, solve_wave_speed, weak_solution_residual

COMMANDS = ("analyze", "solve-a", "wave-speed", "simulate", "sweep")
SWEEPABLE = ("analyze", "solve-a", "wave-speed")
ENV_OUT = "SHOCKSELECT_OUT"


def _text(v: str) -> str:
    return v.strip()


def _choice(*options):
    def parse(v: str) -> str:
        v = v.strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return parse


def _float(v: str) -> float:
    out = float(v)
    if not math.isfinite(out):
        raise ValueError("must be finite")
    return out


def _opt_float(v: str):
    return None if v.strip() in ("", "auto", "none") else _float(v)


def _float_list(v: str):
    v = v.strip()
    return None if not v else tuple(_float(p) for p in v.split(","))


# key -> (parser, default text)
SCHEMA = {
    "model.a": (_float, "0.2"),
    "model.b": (_float, "0.4"),
    "model.delta": (_float, "0.5"),
    "model.poly": (_float_list, ""),
    "reaction.family": (_choice("cubic", ZERO), "cubic"),
    "reaction.gamma": (_float, "0.5"),
    "reg.family": (_choice(CONSTANT, EXPONENTIAL, QUADRATIC), EXPONENTIAL),
    "reg.A": (_opt_float, "auto"),
    "shock.rule": (_choice(CONTINUOUS_D, EQUAL_AREA, LOWER_KNEE, UPPER_KNEE), CONTINUOUS_D),
    "wave.c": (_opt_float, ""),
    "wave.c_min": (_float, "0"),
    "wave.c_max": (_float, "0.5"),
    "sim.x_min": (_float, "0"),
    "sim.x_max": (_float, "10"),
    "sim.dx": (_float, "0.001"),
    "sim.T": (_float, "20"),
    "sim.snapshots": (_float_list, ""),
    "sim.eps": (_float, "0.01"),
    "sim.regularisation": (_choice(LINEAR, NONLINEAR), LINEAR),
    "sim.scheme": (_choice(CENTRAL, CONSERVATIVE), CENTRAL),
    "sim.ic": (_choice(HEAVISIDE, CONSTANT_IC), HEAVISIDE),
    "sim.x0": (_opt_float, ""),
    "sim.ic_value": (_float, "0"),
    "sim.u_left": (_float, "1"),
    "sim.u_right": (_float, "0"),
    "sim.rtol": (_float, "1e-6"),
    "sim.atol": (_float, "1e-9"),
    "sim.method": (_choice(*METHODS), "BDF"),
    "sim.extraction": (_choice(LAYER, PLATEAU), LAYER),
    "sweep.command": (_choice(*SWEEPABLE), "analyze"),
    "sweep.var": (_text, "model.delta"),
    "sweep.start": (_opt_float, ""),
    "sweep.stop": (_opt_float, ""),
    "sweep.step": (_opt_float, ""),
    "out.dir": (_text, "out"),
}


class RunConfig:
    """Resolved configuration: raw text values plus parsed values."""

    def __init__(self, raw: dict[str, str]):
        self.raw = {k: SCHEMA[k][1] for k in SCHEMA}
        for key, value in raw.items():
            self.set(key, value)

    def set(self, key: str, value) -> None:
        key = key.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        text = value if isinstance(value, str) else _render(value)
        try:
            SCHEMA[key][0](text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
        self.raw[key] = text.strip()

    def __getitem__(self, key: str):
        return SCHEMA[key][0](self.raw[key])

    def copy(self) -> "RunConfig":
        return RunConfig(dict(self.raw))

    def as_dict(self) -> dict[str, str]:
        return dict(sorted(self.raw.items()))


def _render(value) -> str:
    if isinstance(value, float):
        return io.fmt(value)
    return str(value)


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    raw: dict[str, str] = {}
    if path:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
        if p.suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
            raw = {str(k): str(v) for k, v in data.get("config", data).items()}
        else:
            raw = parse_config_text(text)
    cfg = RunConfig(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        cfg.set(key, value)
    return cfg


# -- model construction -------------------------------------------------------

def build_model(cfg: RunConfig) -> DiffusivityModel:
    poly = cfg["model.poly"]
    if poly:
        return DiffusivityModel.polynomial(poly)
    return DiffusivityModel.cubic(cfg["model.a"], cfg["model.b"], cfg["model.delta"])


def build_reaction(cfg: RunConfig) -> ReactionModel:
    if cfg["reaction.family"] == ZERO:
        return ReactionModel.zero()
    return ReactionModel("cubic", cfg["reaction.gamma"])


def target_shock(cfg: RunConfig, model):
    rule = cfg["shock.rule"]
    if rule == EQUAL_AREA:
        return equal_area_shock(model)
    if rule == CONTINUOUS_D:
        return continuous_diffusivity_shock(model)
    lower, upper = knee_shocks(model)
    return lower if rule == LOWER_KNEE else upper


def build_weight(cfg: RunConfig, model) -> RegularisationWeight:
    """Weight from ``reg.family``/``reg.A``; ``reg.A=auto`` solves for the target shock."""
    family = cfg["reg.family"]
    if family == CONSTANT:
        return RegularisationWeight.constant()
    A = cfg["reg.A"]
    if A is None:
        A = solve_weight_parameter(model, target_shock(cfg, model), family).A
    return RegularisationWeight(family, A)


def build_sim_config(cfg: RunConfig, weight: RegularisationWeight) -> SimulationConfig:
    return SimulationConfig(
        x_min=cfg["sim.x_min"], x_max=cfg["sim.x_max"], dx=cfg["sim.dx"], T=cfg["sim.T"],
        snapshot_times=cfg["sim.snapshots"], eps=cfg["sim.eps"],
        regularisation=cfg["sim.regularisation"], weight=weight, scheme=cfg["sim.scheme"],
        ic=cfg["sim.ic"], x0=cfg["sim.x0"], ic_value=cfg["sim.ic_value"],
        u_left=cfg["sim.u_left"], u_right=cfg["sim.u_right"], rtol=cfg["sim.rtol"],
        atol=cfg["sim.atol"], method=cfg["sim.method"])


# -- commands -------------------------------------------------------------------
# Each returns (summary rows for sweeps, files written).

ANALYZE_FIELDS = ("shape", "ea_u_left", "ea_u_right", "ea_phi_s", "cd_u_left",
                  "cd_u_right", "cd_phi_s", "lower_u_left", "upper_u_right")


def analyze(cfg: RunConfig, out: Path | None, gnuplot: bool = False) -> dict:
    model = build_model(cfg)
    shocks = all_rule_shocks(model)
    fam = ShockFamily(model)
    extrema = shock_length_extrema(model)
    by_rule = {s.rule: s for s in shocks}
    row = {"shape": classify_shape(model),
           "ea_u_left": by_rule[EQUAL_AREA].u_left, "ea_u_right": by_rule[EQUAL_AREA].u_right,
           "ea_phi_s": by_rule[EQUAL_AREA].phi_s,
           "cd_u_left": by_rule[CONTINUOUS_D].u_left, "cd_u_right": by_rule[CONTINUOUS_D].u_right,
           "cd_phi_s": by_rule[CONTINUOUS_D].phi_s,
           "lower_u_left": by_rule[LOWER_KNEE].u_left, "upper_u_right": by_rule[UPPER_KNEE].u_right}
    if out is not None:
        io.write_csv(out / "shocks.csv", ("rule", "u_left", "u_right", "phi_s", "length"),
                     [(s.rule, s.u_left, s.u_right, s.phi_s, s.length) for s in shocks])
        io.write_csv(out / "length_table.csv", ("phi_s", "u_left", "u_right", "length"),
                     fam.table(1001))
        io.write_csv(out / "extrema.csv", ("phi_s", "kind", "length", "global_max"),
                     [(e.phi_s, e.kind, e.length, e.global_max) for e in extrema])
        if gnuplot:
            _gnuplot(out / "length.gp", "length_table.csv", 1, 4, "Phi_S", "shock length")
        print(io.csv_text(("rule", "u_left", "u_right", "phi_s", "length"),
                          [(s.rule, s.u_left, s.u_right, s.phi_s, s.length) for s in shocks]),
              end="")
    return row


SOLVE_A_FIELDS = ("family", "A", "residual", "closed_form_residual", "u_left", "u_right")


def solve_a(cfg: RunConfig, out: Path | None, gnuplot: bool = False) -> dict:
    model = build_model(cfg)
    family = cfg["reg.family"]
    if family == CONSTANT:
        raise ConfigError("solve-a needs reg.family=exponential or quadratic")
    shock = target_shock(cfg, model)
    sol = solve_weight_parameter(model, shock, family)
    closed = (modified_area_closed_form_exponential(model, shock, sol.A)
              if family == EXPONENTIAL else float("nan"))
    row = {"family": family, "A": sol.A, "residual": sol.residual,
           "closed_form_residual": closed, "u_left": shock.u_left, "u_right": shock.u_right}
    if out is not None:
        io.write_csv(out / "weight.csv", SOLVE_A_FIELDS, [tuple(row[k] for k in SOLVE_A_FIELDS)])
        io.write_csv(out / "g_samples.csv", ("A", "G"), sol.samples)
        if gnuplot:
            _gnuplot(out / "g_samples.gp", "g_samples.csv", 1, 2, "A", "G(A)")
        print(io.csv_text(SOLVE_A_FIELDS, [tuple(row[k] for k in SOLVE_A_FIELDS)]), end="")
    return row


WAVE_FIELDS = ("mode", "c", "p_at_ur", "p_at_ul", "delta_p", "weak_residual", "u_left", "u_right")


def wave_speed(cfg: RunConfig, out: Path | None, gnuplot: bool = False) -> dict:
    model = build_model(cfg)
    reaction = build_reaction(cfg)
    shock = target_shock(cfg, model)
    fixed = cfg["wave.c"]
    scan = []
    if fixed is not None:
        shot = shoot_manifolds(fixed, shock, model, reaction)
        mode, c = "diagnostic", fixed
        pr, pl, unstable, stable = shot.p_at_ur, shot.p_at_ul, shot.unstable, shot.stable
        weak = weak_solution_residual(c, shock, pr, pl)
    else:
        sol = solve_wave_speed(shock, model, reaction, cfg["wave.c_min"], cfg["wave.c_max"])
        mode, c = "solve", sol.c
        pr, pl, unstable, stable, weak = (sol.p_at_ur, sol.p_at_ul, sol.unstable,
                                          sol.stable, sol.weak_residual)
        scan = sol.scan
    row = {"mode": mode, "c": c, "p_at_ur": pr, "p_at_ul": pl, "delta_p": pr - pl,
           "weak_residual": weak, "u_left": shock.u_left, "u_right": shock.u_right}
    if out is not None:
        io.write_csv(out / "speed.csv", WAVE_FIELDS, [tuple(row[k] for k in WAVE_FIELDS)])
        io.write_csv(out / "scan.csv", ("c", "delta_p"), scan)
        io.write_csv(out / "unstable_manifold.csv", ("psi", "u", "p"), unstable.rows())
        io.write_csv(out / "stable_manifold.csv", ("psi", "u", "p"), stable.rows())
        if gnuplot:
            _gnuplot(out / "phase_plane.gp", "unstable_manifold.csv", 2, 3, "u", "p",
                     extra="stable_manifold.csv")
        print(io.csv_text(WAVE_FIELDS, [tuple(row[k] for k in WAVE_FIELDS)]), end="")
    return row


def simulate(cfg: RunConfig, out: Path | None, gnuplot: bool = False) -> dict:
    model = build_model(cfg)
    reaction = build_reaction(cfg)
    nonlinear = cfg["sim.regularisation"] == NONLINEAR
    weight = build_weight(cfg, model) if nonlinear else RegularisationWeight.constant()
    sim = build_sim_config(cfg, weight)
    result = integrate(sim, model, reaction, cfg["sim.extraction"])
    prediction = shock_for_weight(model, weight) if nonlinear else equal_area_shock(model)
    final = result.final_shock
    row = {"u_left": final.u_left, "u_right": final.u_right, "x_s": final.x_s_fine,
           "speed": result.settled_speed(), "pred_u_left": prediction.u_left,
           "pred_u_right": prediction.u_right, "distance": shock_distance(final, prediction),
           "overshoot": result.overshoot, "runtime": result.runtime}
    if out is not None:
        snap_dir = out / "snapshots"
        for t, prof in zip(result.times, result.profiles):
            io.write_csv(snap_dir / io.snapshot_name(float(t)), ("x", "u"),
                         zip(result.x, prof))
        io.write_csv(out / "trace.csv", ("t", "x_s", "u_left", "u_right", "speed"),
                     result.trace())
        report = discretisation_error_report(sim, result.profiles[-1], model)
        (out / "discretisation_error.txt").write_text(report.text(), encoding="utf-8")
        if gnuplot:
            _gnuplot(out / "trace.gp", "trace.csv", 1, 2, "t", "x_s")
        summary = ("u_left", "u_right", "x_s", "speed", "pred_u_left", "pred_u_right",
                   "distance", "overshoot")
        print(io.csv_text(summary, [tuple(row[k] for k in summary)]), end="")
    return row


def _run_sub(command: str, raw: dict) -> dict:
    cfg = RunConfig(raw)
    fn = {"analyze": analyze, "solve-a": solve_a, "wave-speed": wave_speed}[command]
    return fn(cfg, None)


def _sweep_row(args) -> tuple[str, dict | str]:
    # top level so process pools can pickle it
    command, raw = args
    try:
        return "ok", _run_sub(command, raw)
    except ShockSelectError as exc:
        return "error", f"{type(exc).__name__}: {exc}"


def sweep_values(start, stop, step) -> list[float]:
    if start is None or stop is None or step is None:
        raise ConfigError("sweep needs sweep.start, sweep.stop and sweep.step")
    if step <= 0.0:
        raise ConfigError("sweep.step must be positive")
    if stop < start:
        raise ConfigError("empty sweep range (sweep.stop < sweep.start)")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps 0.1-steps from printing as 0.30000000000000004
    return [round(start + k * step, 12) for k in range(n)]


def sweep(cfg: RunConfig, out: Path, workers: int = 1, gnuplot: bool = False) -> int:
    command = cfg["sweep.command"]
    var = cfg["sweep.var"]
    if var not in SCHEMA or var.startswith(("sweep.", "out.")):
        raise ConfigError(f"cannot sweep {var!r}")
    values = sweep_values(cfg["sweep.start"], cfg["sweep.stop"], cfg["sweep.step"])
    jobs = []
    for v in values:
        sub = cfg.copy()
        sub.set(var, io.fmt(v))
        jobs.append((command, sub.as_dict()))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_row, jobs))
    else:
        results = [_sweep_row(j) for j in jobs]
    fields = {"analyze": ANALYZE_FIELDS, "solve-a": SOLVE_A_FIELDS,
              "wave-speed": WAVE_FIELDS}[command]
    rows = []
    for v, (status, payload) in zip(values, results):
        if status == "ok":
            rows.append((v, status, "") + tuple(payload[k] for k in fields))
        else:
            rows.append((v, status, payload) + ("",) * len(fields))
    header = (var, "status", "message") + fields
    io.write_csv(out / "sweep.csv", header, rows)
    if gnuplot:
        _gnuplot(out / "sweep.gp", "sweep.csv", 1, 4, var, fields[0])
    print(io.csv_text(header, rows), end="")
    if all(r[1] != "ok" for r in rows):
        return 3
    return 0


def _gnuplot(path: Path, data: str, xcol: int, ycol: int, xlabel: str, ylabel: str,
             extra: str | None = None) -> None:
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set xlabel '{xlabel}'", f"set ylabel '{ylabel}'",
             "set terminal pngcairo size 900,600",
             f"set output '{path.with_suffix('.png').name}'"]
    plot = f"plot '{data}' using {xcol}:{ycol} with lines"
    if extra:
        plot += f", '{extra}' using {xcol}:{ycol} with lines"
    lines.append(plot)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- entry point -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share exit code 1 with I/O errors
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shockselect",
                description="Shock selection for reaction-diffusion equations "
                            "with negative diffusivity.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH", help="key=value file or a metadata.json")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   help="override one config key (repeatable)")
    p.add_argument("--out", metavar="DIR", help=f"output directory (${ENV_OUT} wins)")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    p.add_argument("--gnuplot-script", action="store_true",
                   help="also write a gnuplot script next to the data")
    return p


def resolve_out(cfg: RunConfig, flag: str | None) -> Path:
    if os.environ.get(ENV_OUT):
        cfg.set("out.dir", os.environ[ENV_OUT])
    elif flag:
        cfg.set("out.dir", flag)
    return Path(cfg["out.dir"])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config, args.set)
        out = resolve_out(cfg, args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_metadata(out / "metadata.json", args.command, cfg.as_dict())
        if args.command == "sweep":
            return sweep(cfg, out, args.workers, args.gnuplot_script)
        fn = {"analyze": analyze, "solve-a": solve_a, "wave-speed": wave_speed,
              "simulate": simulate}[args.command]
        fn(cfg, out, args.gnuplot_script)
        return 0
    except ShockSelectError as exc:
        print(f"shockselect: {type(exc).__name__}: {exc}", file=sys.stderr)
        t = getattr(exc, "time", None)
        if t is not None:
            print(f"shockselect: failed at t={t:.17g}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"shockselect: I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
