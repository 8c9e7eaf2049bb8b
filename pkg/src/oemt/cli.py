"""Command-line entry point: run experiment configs into result bundles.

Usage:
    oemt CONFIG.yaml [--out DIR] [--jobs N]
    oemt --preset NAME [--out FILE]
    oemt --list-presets

A config is a YAML tree with a single ``task`` (spectrum, protocol,
sweep, search or validate), a model source (``preset`` name or inline
``model``), optional scalar ``overrides``, and a task section of the same
name.  ``variants`` is a list of named override sets evaluated side by
side (e.g. matched vs mismatched curves); the first variant renders solid
and the second dashed by convention.  All randomness flows from the
single top-level ``seed``.  Annotated examples for every task live in the
repo's ``configs/`` directory.

Exit codes: 0 success, 2 config error, 3 physics/validation error,
4 numerical failure.  Failures print one machine-readable JSON line to
stderr.  Data files in a bundle are deterministic; timestamps only ever
appear in ``metadata.json``.
"""

from __future__ import annotations

import argparse
import datetime
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .dynamics import StateTrajectory
from .errors import (ConfigError, ModelValidationError, NumericalError,
                     OEMTError, PhysicsError)
from .gaussian import (coherent_state, displaced_squeezed_state,
                       thermal_state, vacuum_state)
from .io import BundleWriter, fields_table, sanitize, schedule_table, \
    trajectory_table
from .metrics import effective_temperature
from .model import TransducerModel, validate_model
from .presets import load_preset, preset_names
from .scattering import conversion_matrix, halfwidth, noise_budget, \
    probe_spectrum
from .schedule import exponential_rise_pulse, gaussian_pulse, sampled_pulse
from .search import SearchProblem, match_impedance, optimize
from . import protocols

__all__ = ["main", "run_config"]

_VERSION = "0.1.0"

_STYLES = ("solid", "dashed", "dotted", "dashdot")


# -- config plumbing -------------------------------------------------------------

def _load_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            config = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" \
            if mark else ""
        raise ConfigError(f"cannot parse {path}{where}: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError(f"config root must be a mapping, got "
                          f"{type(config).__name__}")
    return config


def _build_model(config, *, strict=True):
    if "preset" in config and "model" in config:
        raise ConfigError("give either 'preset' or 'model', not both")
    if "preset" in config:
        model = load_preset(config["preset"])
    elif "model" in config:
        model = TransducerModel.from_dict(config["model"])
    else:
        raise ConfigError("config needs a model source: 'preset' or 'model'")
    overrides = config.get("overrides") or {}
    if overrides:
        model = model.with_params(**overrides)
    if strict:
        validate_model(model, raise_on_error=True)
    return model


def _variants(config):
    """Normalized variant list: (name, overrides, protocol overrides, style)."""
    raw = config.get("variants")
    if not raw:
        return [{"name": "", "overrides": {}, "protocol": {}, "style": "solid"}]
    out = []
    for k, entry in enumerate(raw):
        if not isinstance(entry, dict) or not entry.get("name"):
            raise ConfigError("every variant needs a 'name'")
        out.append({
            "name": str(entry["name"]),
            "overrides": entry.get("overrides") or {},
            "protocol": entry.get("protocol") or {},
            "style": entry.get("style") or _STYLES[k % len(_STYLES)],
        })
    names = [v["name"] for v in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"variant names must be unique, got {names}")
    return out


def _variant_model(model, variant):
    if variant["overrides"]:
        model = model.with_params(**variant["overrides"])
        validate_model(model, raise_on_error=True)
    return model


def _table_name(base, variant):
    return f"{base}_{variant['name']}" if variant["name"] else base


def _as_complex(value, what):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{what} as a list needs [re, im]")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(float(value), 0.0)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number or [re, im], "
                          f"got {value!r}") from None


def _signal_state(section):
    section = section or {}
    kind = section.get("type", "coherent")
    if kind == "vacuum":
        return vacuum_state(("signal",))
    if kind == "coherent":
        return coherent_state("signal", _as_complex(section.get("alpha", 1.0),
                                                    "input alpha"))
    if kind == "thermal":
        return thermal_state(("signal",),
                             float(section.get("occupation", 0.0)))
    if kind == "displaced_squeezed":
        return displaced_squeezed_state(
            "signal", _as_complex(section.get("alpha", 0.0), "input alpha"),
            _as_complex(section.get("squeeze", 0.0), "input squeeze"))
    raise ConfigError(f"unknown input state type {kind!r}; choose from "
                      "vacuum, coherent, thermal, displaced_squeezed")


def _pulse_shape(section):
    if not section:
        raise ConfigError("this task needs a 'pulse' section")
    kind = section.get("type", "gaussian")
    if kind == "gaussian":
        return gaussian_pulse(float(section.get("amplitude", 1.0)),
                              float(section["sigma"]),
                              float(section.get("center", 0.0)))
    if kind == "exponential_rise":
        return exponential_rise_pulse(float(section.get("amplitude", 1.0)),
                                      float(section["rate"]))
    if kind == "samples":
        return sampled_pulse(section["times"], section["values"])
    raise ConfigError(f"unknown pulse type {kind!r}; choose from gaussian, "
                      "exponential_rise, samples")


def _omega_grid(section):
    if not section:
        raise ConfigError("spectrum task needs an 'omega' section "
                          "(min/max/points or values)")
    if "values" in section:
        return np.asarray([float(v) for v in section["values"]])
    try:
        lo, hi = float(section["min"]), float(section["max"])
        n = int(section.get("points", 801))
    except KeyError as exc:
        raise ConfigError(f"omega section missing {exc}") from None
    if hi <= lo or n < 2:
        raise ConfigError("omega section needs max > min and points >= 2")
    return np.linspace(lo, hi, n)


# -- protocol dispatch -----------------------------------------------------------

def _run_protocol(model, section):
    if not section or "name" not in section:
        raise ConfigError("protocol section needs a 'name'")
    name = section["name"]
    pps = section.get("points_per_segment")
    kw = {"points_per_segment": int(pps)} if pps else {}
    if name == "double_swap":
        return protocols.run_double_swap(model, _signal_state(
            section.get("input")), **kw)
    if name == "precooled_double_swap":
        return protocols.run_precooled_double_swap(
            model, _signal_state(section.get("input")),
            delay=float(section.get("delay", 0.0)), **kw)
    if name == "adiabatic_dark_mode":
        if "duration" not in section:
            raise ConfigError("adiabatic_dark_mode needs a 'duration'")
        return protocols.run_adiabatic_dark_mode(
            model, _signal_state(section.get("input")),
            float(section["duration"]),
            ramp=section.get("ramp", "raised_cosine"), **kw)
    if name == "raman":
        offset = section.get("delta_offset")
        return protocols.run_raman(
            model, _signal_state(section.get("input")),
            delta_offset=None if offset is None else float(offset), **kw)
    if name == "itinerant":
        if "window" not in section:
            raise ConfigError("itinerant protocol needs a 'window' [t0, t1]")
        dt = section.get("dt")
        return protocols.run_itinerant(
            model, _pulse_shape(section.get("pulse")),
            window=tuple(float(v) for v in section["window"]),
            dt=None if dt is None else float(dt))
    if name == "entangle_red_blue":
        duration = section.get("duration")
        return protocols.run_entangle_red_blue(
            model, duration=None if duration is None else float(duration),
            steady=bool(section.get("steady", False)),
            points=int(section.get("points", 401)))
    raise ConfigError(
        f"unknown protocol {name!r}; choose from double_swap, "
        "precooled_double_swap, adiabatic_dark_mode, raman, itinerant, "
        "entangle_red_blue")


def _protocol_metrics(model, result):
    """Numeric metric dictionary for sweeps, with derived extras."""
    out = {}
    for key, value in result.metrics.items():
        if isinstance(value, (bool, np.bool_)):
            out[key] = 1.0 if value else 0.0
        elif isinstance(value, (int, float, np.integer, np.floating)):
            out[key] = float(value)
    out["bath_temperature"] = effective_temperature(
        model.n_th_m, model.omega_m, model.units)
    if "mech_occupation_after_precool" in out:
        out["t_eff_after_precool"] = effective_temperature(
            out["mech_occupation_after_precool"], model.omega_m, model.units)
    return out


def _scattering_scalars(model, section):
    cm0 = conversion_matrix(model, 0.0)
    budget = noise_budget(model)
    total = model.Gamma1 + model.Gamma2 + model.gamma_m
    out = {
        "t31_zero_abs": float(abs(cm0.entry(3, 1)[0])),
        "signal_zero_abs": float(abs(cm0.signal_amplitude[0])),
        "mech_noise_ratio": float(abs(budget.t32_over_t31)),
        "snr": budget.snr,
        "impedance_residual": (abs(model.Gamma1 - model.Gamma2) / total
                               if total > 0 else 1.0),
        "unitarity_defect_zero": cm0.unitarity_defect(),
    }
    try:
        omega_max = float(section.get("omega_max", 20.0 * max(total,
                                                              model.gamma_m)))
        out["halfwidth"] = halfwidth(model, omega_max).delta_omega
    except (NumericalError, PhysicsError):
        out["halfwidth"] = math.nan
    return out


# -- task: spectrum -------------------------------------------------------------

def _spectrum_sidecar(kind, variant, model, columns, extras):
    return {
        "kind": kind,
        "variant": variant["name"],
        "style": variant["style"],
        "columns": list(columns),
        "frequency_convention": "interaction picture; omega = 0 is each "
                                "cavity's own resonance",
        "model": model.to_dict(),
        "metrics": extras,
    }


def _task_spectrum(model_base, config, writer):
    section = config.get("spectrum") or {}
    kind = section.get("kind", "conversion")
    omega = _omega_grid(section.get("omega"))
    for variant in _variants(config):
        model = _variant_model(model_base, variant)
        if kind == "conversion":
            cm = conversion_matrix(model, omega)
            t31 = cm.entry(3, 1)
            t32 = cm.entry(3, 2)
            t33 = cm.entry(3, 3)
            # omega-resolved signal-to-mechanical-noise amplitude ratio;
            # at omega = 0 it reduces to nu1 sqrt(Gamma1 / (gamma_m n_th))
            denom = np.abs(t32) * math.sqrt(model.n_th_m)
            snr = np.where(denom > 0.0,
                           model.nu1 * np.abs(t31) / np.where(denom > 0.0,
                                                              denom, 1.0),
                           np.inf)
            columns = {
                "omega": omega,
                "t31_abs": np.abs(t31),
                "t31_arg": np.angle(t31),
                "t32_abs": np.abs(t32),
                "t33_abs": np.abs(t33),
                "signal_abs": np.abs(cm.signal_amplitude),
                "snr": snr,
                "unitarity_defect": cm.unitarity_defects(),
            }
            extras = _scattering_scalars(model, {"omega_max": float(omega.max())
                                                 if omega.max() > 0 else 1.0})
        elif kind == "probe":
            ps = probe_spectrum(model, omega)
            columns = {
                "omega": omega,
                "amplitude_re": ps.amplitude.real,
                "amplitude_im": ps.amplitude.imag,
                "power": ps.power,
            }
            extras = {"minima": list(ps.minima()), "maxima": list(ps.maxima())}
        else:
            raise ConfigError(f"unknown spectrum kind {kind!r}; choose "
                              "'conversion' or 'probe'")
        writer.add_table(_table_name("spectrum", variant), columns,
                         _spectrum_sidecar(kind, variant, model, columns,
                                           extras))


# -- task: protocol -------------------------------------------------------------

def _task_protocol(model_base, config, writer):
    section = config.get("protocol")
    if not section:
        raise ConfigError("protocol task needs a 'protocol' section")
    for variant in _variants(config):
        model = _variant_model(model_base, variant)
        merged = {**section, **variant["protocol"]}
        result = _run_protocol(model, merged)
        base_meta = {
            "kind": result.kind,
            "variant": variant["name"],
            "style": variant["style"],
            "model": model.to_dict(),
            "metrics": result.metrics,
            "notes": result.notes,
        }
        traj = result.trajectory
        if isinstance(traj, StateTrajectory):
            columns, ordering = trajectory_table(traj)
            writer.add_table(
                _table_name("trajectory", variant), columns,
                {**base_meta, "columns": list(columns),
                 "quadrature_order": ordering,
                 "covariance_layout": "row-major upper triangle over the "
                                      "quadrature order"})
            if result.series:
                series = {"t": traj.t, **result.series}
                writer.add_table(_table_name("series", variant), series,
                                 {**base_meta, "columns": list(series)})
        elif traj is not None:
            columns = fields_table(traj)
            writer.add_table(_table_name("fields", variant), columns,
                             {**base_meta, "columns": list(columns)})
        if result.schedule is not None:
            writer.add_table(_table_name("schedule", variant),
                             schedule_table(result.schedule),
                             {**base_meta,
                              "columns": ["t", "g1", "g2", "delta1", "delta2"]})
        if result.output_state is not None:
            base_meta["output_state"] = {
                "modes": list(result.output_state.modes),
                "mean": result.output_state.mean,
                "cov": result.output_state.cov,
            }
        writer.add_json(_table_name("metrics", variant), base_meta)


# -- task: sweep ----------------------------------------------------------------

def _axis_points(entry):
    if "param" not in entry:
        raise ConfigError("every sweep axis needs a 'param' name")
    if "values" in entry:
        return [float(v) for v in entry["values"]]
    try:
        lo, hi, n = float(entry["min"]), float(entry["max"]), int(entry["points"])
    except KeyError as exc:
        raise ConfigError(f"sweep axis {entry['param']!r} missing {exc}") \
            from None
    if n < 0:
        raise ConfigError("axis points must be >= 0")
    spacing = entry.get("spacing", "linear")
    if spacing == "linear":
        return list(np.linspace(lo, hi, n))
    if spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log spacing needs positive endpoints")
        return list(np.geomspace(lo, hi, n))
    raise ConfigError(f"unknown axis spacing {spacing!r}")


def _sweep_eval(payload):
    """One grid-point evaluation (top level so worker pools can import it)."""
    model = TransducerModel.from_dict(payload["model"])
    if payload["params"]:
        model = model.with_params(**payload["params"])
    evaluate = payload["evaluate"]
    if evaluate["type"] == "protocol":
        result = _run_protocol(model, evaluate["protocol"])
        return _protocol_metrics(model, result)
    if evaluate["type"] == "scattering":
        return _scattering_scalars(model, evaluate)
    raise ConfigError(f"unknown evaluate type {evaluate['type']!r}; choose "
                      "'protocol' or 'scattering'")


def _task_sweep(model_base, config, writer, jobs):
    section = config.get("sweep")
    if not section:
        raise ConfigError("sweep task needs a 'sweep' section")
    axes = section.get("axes") or []
    axis_names = [a["param"] for a in axes]
    axis_values = [_axis_points(a) for a in axes]
    n_points = int(np.prod([len(v) for v in axis_values])) if axes else 1
    if n_points > 1_000_000:
        raise ConfigError(f"sweep grid has {n_points} points (limit 1e6)")
    evaluate = section.get("evaluate")
    if not evaluate or "type" not in evaluate:
        raise ConfigError("sweep needs an 'evaluate' section with a 'type'")
    metrics = evaluate.get("metrics")
    if not metrics:
        raise ConfigError("sweep evaluate section needs a 'metrics' list")

    variants = _variants(config)
    payloads = []
    keys = []
    for variant in variants:
        model = _variant_model(model_base, variant)
        ev = dict(evaluate)
        if evaluate["type"] == "protocol":
            proto = {**(evaluate.get("protocol") or {}), **variant["protocol"]}
            ev["protocol"] = proto
        for combo in itertools.product(*axis_values) if axes else [()]:
            params = dict(zip(axis_names, combo))
            payloads.append({"model": model.to_dict(), "params": params,
                             "evaluate": ev})
            keys.append((variant["name"], combo))

    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            evaluated = list(pool.map(_sweep_eval, payloads,
                                      chunksize=max(1, len(payloads) // (4 * jobs))))
    else:
        evaluated = [_sweep_eval(p) for p in payloads]

    named = any(v["name"] for v in variants)
    # Variants may report different metric sets (precooling adds an
    # effective-temperature reading the plain protocol lacks); a metric is an
    # error only when no evaluation produced it, otherwise gaps become NaN.
    for metric in metrics:
        if evaluated and not any(metric in m for m in evaluated):
            available = sorted({k for m in evaluated for k in m})
            raise ConfigError(
                f"metric {metric!r} not produced by this evaluation; "
                f"available: {available}")
    columns = {}
    if named:
        columns["variant"] = []
    for name in axis_names:
        columns[name] = []
    columns["metric"] = []
    columns["value"] = []
    for (vname, combo), values in zip(keys, evaluated):
        for metric in metrics:
            if named:
                columns["variant"].append(vname)
            for name, val in zip(axis_names, combo):
                columns[name].append(val)
            columns["metric"].append(metric)
            columns["value"].append(float(values.get(metric, math.nan)))
    sidecar = {
        "kind": "sweep",
        "axes": axis_names,
        "metrics": list(metrics),
        "row_order": "variants outermost, then declared axes row-major, "
                     "then metrics",
        "variants": [{"name": v["name"], "style": v["style"]}
                     for v in variants],
        "evaluate": evaluate,
        "model": model_base.to_dict(),
    }
    writer.add_table("sweep", columns, sidecar)


# -- task: search ---------------------------------------------------------------

def _task_search(model, config, writer, seed):
    section = config.get("search")
    if not section:
        raise ConfigError("search task needs a 'search' section")
    if "match_impedance" in section:
        spec = section["match_impedance"] or {}
        matched, report = match_impedance(
            model, spec.get("adjust", "g2"),
            bounds=spec.get("bounds"),
            method=spec.get("method", "exact"))
        writer.add_json("result", {
            "kind": "match_impedance",
            "report": report,
            "model": matched.to_dict(),
        })
        return
    if "objective" not in section:
        raise ConfigError("search section needs an 'objective' or a "
                          "'match_impedance' block")
    raw = section.get("parameters") or {}
    parameters = {}
    for name, bounds in raw.items():
        if isinstance(bounds, dict):
            bounds = (bounds["min"], bounds["max"])
        if len(bounds) != 2:
            raise ConfigError(f"parameter {name!r} bounds must be "
                              "[low, high]")
        parameters[name] = (float(bounds[0]), float(bounds[1]))
    problem = SearchProblem(model, section["objective"], parameters,
                            maximize=section.get("maximize"),
                            options=section.get("options") or {})
    result = optimize(problem,
                      n_starts=int(section.get("n_starts", 1)),
                      seed=seed,
                      max_evals=int(section.get("max_evals", 2000)))
    columns = {"eval": [k for k, _, _ in result.trace]}
    for name in problem.names:
        columns[name] = [params[name] for _, params, _ in result.trace]
    columns["objective"] = [value for _, _, value in result.trace]
    writer.add_table("trace", columns, {
        "kind": "search_trace",
        "objective": section["objective"],
        "columns": list(columns),
        "model": model.to_dict(),
    })
    writer.add_json("result", {
        "kind": "search",
        "objective": section["objective"],
        "best_params": result.best_params,
        "best_value": result.best_value,
        "n_evaluations": result.n_evaluations,
        "converged": result.converged,
        "start_values": result.start_values,
        "seed": seed,
    })


# -- task: validate -------------------------------------------------------------

def _task_validate(config, writer):
    model = _build_model(config, strict=False)
    report = validate_model(model)
    writer.add_json("validation", {
        "kind": "validation",
        "ok": report.ok,
        "violations": report.violations,
        "derived": report.derived,
        "model": model.to_dict(),
    })
    return report


# -- driver -----------------------------------------------------------------------

_TASKS = ("spectrum", "protocol", "sweep", "search", "validate")


def run_config(path, *, out=None, jobs=1):
    """Execute one config file; returns the bundle path."""
    config = _load_config(path)
    task = config.get("task")
    if task not in _TASKS:
        raise ConfigError(f"config needs task in {_TASKS}, got {task!r}")
    seed = int(config.get("seed", 0))
    target = Path(out or config.get("out") or f"results/{task}")
    jobs = max(1, int(jobs))

    report = None
    with BundleWriter(target) as writer:
        writer.add_json("metadata", {
            "tool": "oemt",
            "version": _VERSION,
            "task": task,
            "created": datetime.datetime.now(datetime.timezone.utc)
                               .isoformat(),
            "config_path": str(path),
            "config": sanitize(config),
            "seed": seed,
            "jobs": jobs,
        })
        if task == "validate":
            report = _task_validate(config, writer)
        else:
            model = _build_model(config)
            if task == "spectrum":
                _task_spectrum(model, config, writer)
            elif task == "protocol":
                _task_protocol(model, config, writer)
            elif task == "sweep":
                _task_sweep(model, config, writer, jobs)
            elif task == "search":
                _task_search(model, config, writer, seed)
    if report is not None and not report.ok:
        raise ModelValidationError(
            "model validation failed: " + "; ".join(report.violations))
    return target


def _fail(exc, code):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                      "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="oemt",
        description="Linearized optoelectromechanical transducer toolkit: "
                    "run spectra, protocols, sweeps and searches from a "
                    "YAML config into a deterministic result bundle.")
    parser.add_argument("config", nargs="?", help="YAML experiment config")
    parser.add_argument("--out", help="output bundle directory (or file for "
                                      "--preset)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for sweeps (default 1)")
    parser.add_argument("--preset", metavar="NAME",
                        help="export a preset model as JSON and exit")
    parser.add_argument("--list-presets", action="store_true",
                        help="list preset names and exit")
    args = parser.parse_args(argv)

    try:
        if args.list_presets:
            for name in preset_names():
                print(name)
            return 0
        if args.preset is not None:
            model = load_preset(args.preset)
            report = validate_model(model)
            payload = json.dumps(sanitize({
                "preset": args.preset,
                "model": model.to_dict(),
                "derived": report.derived,
            }), indent=2, sort_keys=True)
            if args.out:
                Path(args.out).write_text(payload + "\n")
            else:
                print(payload)
            return 0
        if not args.config:
            raise ConfigError("give a config file, --preset NAME, or "
                              "--list-presets")
        bundle = run_config(args.config, out=args.out, jobs=args.jobs)
        print(bundle)
        return 0
    except ConfigError as exc:
        return _fail(exc, 2)
    except (NumericalError,) as exc:
        return _fail(exc, 4)
    except (PhysicsError,) as exc:
        return _fail(exc, 3)
    except OEMTError as exc:
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
