"""Scenario-driven command line: config ingestion, scan orchestration with
seeded deterministic parallelism, CSV/plot emission and run manifests.

Subcommands: ``run <config>``, ``validate <config>``, ``plot <csv>``.
Configs are JSON with strict validation (unknown keys rejected); scalar
leaves can be overridden with ``--set path=value``.  Worker count comes
from ``--workers`` or the RYDSIM_WORKERS environment variable; results are
byte-identical for any worker count because every task carries its own
counter-derived seed and reduction happens in task order.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, blockade, bloch, foerster, gates, model, traces
from .bloch import IntegrationError


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config schemas: field -> (kind, default); kind in {float, int, bool, str,
# float3, floats, or a nested dict schema}; None default means required
# --------------------------------------------------------------------------

_CHANNEL_SCHEMA = {
    "defect_zero_field_MHz": ("float", model.DEFAULT_DEFECT_37P_MHZ),
    "anchor_field_V_per_cm": ("float", 1.79),
    "anchor_defect_MHz": ("float", 0.0),
    "dd_coeff_MHz_um3": ("float", model.DEFAULT_DD_COEFF_MHZ_UM3),
}

_VOLUME_SCHEMA = {
    "shape": ("str", "box"),
    "size_um": ("float", 25.0),
    "r_min_um": ("float", 2.0),
}

_RF_SCHEMA = {
    "frequency_MHz": ("float", 15.0),
    "defect_modulation_MHz": ("float", 0.0),
}

_SPECTRUM_PARAMS = {
    "wavelengths_nm": ("float3", [780.0, 1367.0, 743.0]),
    "detunings_MHz": ("float3", [92.0, 0.0, 0.0]),
    "rabi_MHz": ("float3", [2.0, 30.0, 2.0]),
    "linewidths_MHz": ("float3", [0.3, 0.3, 0.3]),
    "decay_MHz": ("float3", [6.07, 3.2, 0.0]),
    "interaction_time_us": ("float", 2.0),
    "delta3_min_MHz": ("float", -120.0),
    "delta3_max_MHz": ("float", 20.0),
    "delta3_step_MHz": ("float", 0.5),
    "atom_number": ("float", 1.0),
}

SCENARIO_SCHEMAS = {
    "spectrum": _SPECTRUM_PARAMS,
    "doppler": {
        **_SPECTRUM_PARAMS,
        "geometry": ("str", "star"),
        "temperature_K": ("float", 300.0),
        "mass_amu": ("float", 85.0),
        "velocity_samples": ("int", 32),
    },
    "foerster-scan": {
        "channel": _CHANNEL_SCHEMA,
        "volume": _VOLUME_SCHEMA,
        "rf": _RF_SCHEMA,
        "E_min_V_per_cm": ("float", 1.54),
        "E_max_V_per_cm": ("float", 2.04),
        "E_step_V_per_cm": ("float", 0.004),
        "interaction_time_us": ("float", 0.5),
        "atom_count": ("int", 2),
        "samples": ("int", 300),
    },
    "foerster-time": {
        "channel": _CHANNEL_SCHEMA,
        "volume": _VOLUME_SCHEMA,
        "t_grid_us": ("floats", [0.1, 0.15, 0.25, 0.4, 0.7, 1.0, 1.5, 2.0]),
        "E_halfspan_V_per_cm": ("float", 0.15),
        "E_step_V_per_cm": ("float", 0.0015),
        "atom_count": ("int", 2),
        "samples": ("int", 300),
    },
    "rf-floquet": {
        "channel": _CHANNEL_SCHEMA,
        "rf": _RF_SCHEMA,
        "m_max": ("int", 2),
        "E_min_V_per_cm": ("float", 0.0),
        "E_max_V_per_cm": ("float", 2.5),
    },
    "blockade-revivals": {
        "n_bar": ("float", 7.0),
        "trap_radius_um": ("float", 2.0),
        "rabi1_MHz": ("float", 1.2094863136295272),
        "C6_MHz_um6": ("float", 3.2e6),
        "t_max_us": ("float", 10.0),
        "t_points": ("int", 601),
        "samples": ("int", 500),
        "distribution": ("str", "gaussian"),
    },
    "chirp": {
        "rabi1_MHz": ("float", 1.0),
        "sweep_start_MHz": ("float", -40.0),
        "sweep_end_MHz": ("float", 40.0),
        "duration_us": ("float", 200.0),
        "n_min": ("int", 1),
        "n_max": ("int", 10),
    },
    "stirap": {
        "pump_peak_MHz": ("float", 20.0),
        "pump_center_us": ("float", 6.0),
        "pump_width_us": ("float", 1.0),
        "stokes_peak_MHz": ("float", 20.0),
        "stokes_center_us": ("float", 4.8),
        "stokes_width_us": ("float", 1.0),
        "intermediate_detuning_MHz": ("float", 0.0),
    },
    "gate-sim": {
        "rabi_MHz": ("float", 1.0),
        "blockade_over_rabi": ("floats", [1.0, 3.0, 10.0, 30.0, 100.0, 300.0]),
    },
    "mesoscopic-gate": {
        "theta_rad": ("float", math.pi / 3.0),
        "rabi1_MHz": ("float", 1.0),
        "n_min": ("int", 1),
        "n_max": ("int", 10),
        "compensated": ("bool", True),
    },
}

_TOP_SCHEMA = {
    "scenario": ("str", None),
    "seed": ("int", 12345),
    "output_dir": ("str", "runs"),
    "plot": ("bool", False),
    "params": ("nested", None),
}

_KIND_CHECKS = {
    "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "bool": lambda v: isinstance(v, bool),
    "str": lambda v: isinstance(v, str),
}


def _validate_section(section, schema, path):
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in section:
        if key not in schema:
            raise ConfigError(f"{path}.{key}: unknown key")
    out = {}
    for key, (kind, default) in schema.items():
        if key in section:
            val = section[key]
        elif default is not None:
            val = default
        else:
            raise ConfigError(f"{path}.{key}: required key missing")
        where = f"{path}.{key}"
        if isinstance(kind, dict):
            raise AssertionError("nested schemas handled by caller")
        if kind in _KIND_CHECKS:
            if not _KIND_CHECKS[kind](val):
                raise ConfigError(f"{where}: expected {kind}, got {val!r}")
            out[key] = float(val) if kind == "float" else val
        elif kind == "float3":
            if not (isinstance(val, list) and len(val) == 3) or not all(
                _KIND_CHECKS["float"](x) for x in val
            ):
                raise ConfigError(f"{where}: expected a list of three numbers")
            out[key] = [float(x) for x in val]
        elif kind == "floats":
            if not isinstance(val, list) or not val or not all(
                _KIND_CHECKS["float"](x) for x in val
            ):
                raise ConfigError(f"{where}: expected a nonempty list of numbers")
            out[key] = [float(x) for x in val]
        else:
            raise AssertionError(f"unhandled kind {kind}")
    return out


def _validate_params(scenario, params):
    schema = SCENARIO_SCHEMAS[scenario]
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object")
    out = {}
    for key in params:
        if key not in schema:
            raise ConfigError(f"params.{key}: unknown key")
    for key, spec in schema.items():
        if isinstance(spec, dict):
            out[key] = _validate_section(params.get(key, {}), spec, f"params.{key}")
        else:
            sub = {key: spec}
            got = _validate_section(
                {key: params[key]} if key in params else {}, sub, "params"
            )
            out[key] = got[key]
    _check_physics(scenario, out)
    return out


def _check_physics(scenario, p):
    def positive(key, val):
        if val <= 0:
            raise ConfigError(f"params.{key}: must be > 0, got {val}")

    def nonneg(key, val):
        if val < 0:
            raise ConfigError(f"params.{key}: must be >= 0, got {val}")

    for key, val in p.items():
        if key in ("rabi_MHz", "linewidths_MHz", "decay_MHz") and isinstance(val, list):
            for i, x in enumerate(val):
                nonneg(f"{key}[{i}]", x)
        if key == "wavelengths_nm":
            for i, x in enumerate(val):
                positive(f"{key}[{i}]", x)
        if key in (
            "interaction_time_us", "rabi1_MHz", "rabi_MHz", "n_bar", "trap_radius_um",
            "C6_MHz_um6", "t_max_us", "duration_us", "mass_amu", "temperature_K",
        ) and isinstance(val, float):
            positive(key, val)
        if key in ("samples", "velocity_samples", "t_points", "atom_count") and val < 1:
            raise ConfigError(f"params.{key}: must be >= 1, got {val}")
    if "volume" in p and p["volume"]["shape"] not in ("box", "sphere"):
        raise ConfigError(f"params.volume.shape: must be 'box' or 'sphere'")
    if scenario == "doppler" and p["geometry"] not in ("star", "collinear"):
        raise ConfigError("params.geometry: must be 'star' or 'collinear'")
    if scenario == "blockade-revivals" and p["distribution"] not in ("uniform", "gaussian"):
        raise ConfigError("params.distribution: must be 'uniform' or 'gaussian'")


class ScenarioConfig:
    def __init__(self, scenario, seed, output_dir, plot, params):
        self.scenario = scenario
        self.seed = seed
        self.output_dir = output_dir
        self.plot = plot
        self.params = params

    def resolved(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "plot": self.plot,
            "params": self.params,
        }


def load_config(path, overrides=()) -> ScenarioConfig:
    """Parse, default and validate a scenario config; unknown keys are
    rejected, never ignored."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for key, value in (_parse_override(o) for o in overrides):
        _apply_override(raw, key, value)
    for key in raw:
        if key not in _TOP_SCHEMA:
            raise ConfigError(f"{key}: unknown key")
    if "scenario" not in raw:
        raise ConfigError("scenario: required key missing")
    scenario = raw["scenario"]
    if scenario not in SCENARIO_SCHEMAS:
        raise ConfigError(
            f"scenario: unknown scenario {scenario!r}; pick one of {sorted(SCENARIO_SCHEMAS)}"
        )
    seed = raw.get("seed", _TOP_SCHEMA["seed"][1])
    if not _KIND_CHECKS["int"](seed):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    output_dir = raw.get("output_dir", _TOP_SCHEMA["output_dir"][1])
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir: expected a string")
    plot = raw.get("plot", _TOP_SCHEMA["plot"][1])
    if not isinstance(plot, bool):
        raise ConfigError("plot: expected a boolean")
    params = _validate_params(scenario, raw.get("params", {}))
    return ScenarioConfig(scenario, int(seed), output_dir, plot, params)


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"--set {text!r}: expected path=value")
    key, _, val = text.partition("=")
    try:
        value = json.loads(val)
    except json.JSONDecodeError:
        value = val
    return key.strip(), value


def _apply_override(raw, dotted, value):
    parts = dotted.split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {dotted}: {p} is not an object")
    node[parts[-1]] = value


# --------------------------------------------------------------------------
# scenario runners; each returns {filename: Trace | str}
# --------------------------------------------------------------------------


def _worker_count(explicit=None):
    if explicit:
        return max(1, int(explicit))
    env = os.environ.get("RYDSIM_WORKERS", "")
    return max(1, int(env)) if env.strip().isdigit() else 1


def _parallel_chunks(items, fn, workers, min_chunk=4):
    """Apply fn to contiguous chunks of items, in order.

    Only the decomposition is parallel; results come back in chunk order so
    downstream concatenation is independent of the worker count.
    """
    if workers <= 1 or len(items) <= min_chunk:
        return [fn(items)]
    n_chunks = max(1, min(workers * 4, len(items) // min_chunk))
    chunks = np.array_split(np.asarray(items), n_chunks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def _grid(lo, hi, step, name):
    if step <= 0 or hi <= lo:
        raise ConfigError(f"params.{name}: need max > min and step > 0")
    n = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def _scheme_from(p):
    steps = tuple(
        model.LaserField(w, d, r, g)
        for w, d, r, g in zip(
            p["wavelengths_nm"], p["detunings_MHz"], p["rabi_MHz"], p["linewidths_MHz"]
        )
    )
    return bloch.LevelScheme(steps, tuple(p["decay_MHz"]), p["interaction_time_us"])


def _run_spectrum(p, seed, workers):
    scheme = _scheme_from(p)
    grid = _grid(p["delta3_min_MHz"], p["delta3_max_MHz"], p["delta3_step_MHz"], "delta3")
    parts = _parallel_chunks(
        grid, lambda g: bloch.scan_spectrum(scheme, g, N0=p["atom_number"]), workers
    )
    data = np.vstack([t.data for t in parts])
    return {"trace.csv": traces.Trace(("delta3_MHz", "signal"), data)}


def _run_doppler(p, seed, workers):
    scheme = _scheme_from(p)
    if p["geometry"] == "star":
        _, geom = model.beam_angles(p["wavelengths_nm"])
    else:
        geom = model.collinear_geometry(p["wavelengths_nm"])
    grid = _grid(p["delta3_min_MHz"], p["delta3_max_MHz"], p["delta3_step_MHz"], "delta3")

    def chunk(g):
        return bloch.doppler_averaged_spectrum(
            scheme, geom, p["temperature_K"], p["mass_amu"], g,
            n_velocity_samples=p["velocity_samples"], seed=seed,
        )

    parts = _parallel_chunks(grid, chunk, workers)
    data = np.vstack([t.data for t in parts])
    return {"trace.csv": traces.Trace(("delta3_MHz", "signal"), data)}


def _channel_from(p):
    ch = p["channel"]
    return model.calibrate_channel(
        ch["defect_zero_field_MHz"],
        ch["anchor_field_V_per_cm"],
        resonant_defect_MHz=ch["anchor_defect_MHz"],
        dd_coeff_MHz_um3=ch["dd_coeff_MHz_um3"],
    )


def _volume_from(p):
    v = p["volume"]
    return foerster.ExcitationVolume(v["shape"], v["size_um"], v["r_min_um"])


def _rf_from(p):
    rf = p.get("rf")
    if rf is None or rf["defect_modulation_MHz"] == 0.0:
        return None
    return model.RfField(rf["frequency_MHz"], rf["defect_modulation_MHz"])


def _run_foerster_scan(p, seed, workers):
    channel, volume, rf = _channel_from(p), _volume_from(p), _rf_from(p)
    grid = _grid(p["E_min_V_per_cm"], p["E_max_V_per_cm"], p["E_step_V_per_cm"], "E")

    def chunk(g):
        tr, _ = foerster.scan_stark(
            channel, volume, g, p["interaction_time_us"], p["atom_count"],
            n_samples=p["samples"], seed=seed, rf=rf,
        )
        return tr

    parts = _parallel_chunks(grid, chunk, workers)
    data = np.vstack([t.data for t in parts])
    return {"trace.csv": traces.Trace(("E_Vcm", "rhoS"), data)}


def _run_foerster_time(p, seed, workers):
    channel, volume = _channel_from(p), _volume_from(p)
    e_res = p["channel"]["anchor_field_V_per_cm"]
    e_grid = _grid(
        e_res - p["E_halfspan_V_per_cm"], e_res + p["E_halfspan_V_per_cm"],
        p["E_step_V_per_cm"], "E",
    )

    def one_time(ts):
        return [
            foerster.time_dependence(
                channel, volume, [t], e_grid, p["atom_count"], p["samples"], seed
            ).data
            for t in ts
        ]

    parts = _parallel_chunks(p["t_grid_us"], one_time, workers)
    rows = np.vstack([row for chunk in parts for row in chunk])
    return {"trace.csv": traces.Trace(("T_us", "amplitude", "fwhm"), rows)}


def _run_rf_floquet(p, seed, workers):
    channel = _channel_from(p)
    rf = model.RfField(p["rf"]["frequency_MHz"], max(p["rf"]["defect_modulation_MHz"], 1e-9))
    crossings = foerster.floquet_crossings(
        channel, rf, p["m_max"], (p["E_min_V_per_cm"], p["E_max_V_per_cm"])
    )
    data = np.asarray([[m, e] for m, e in crossings], dtype=float).reshape(-1, 2)
    return {"trace.csv": traces.Trace(("m", "E_Vcm"), data)}


def _run_blockade_revivals(p, seed, workers):
    t = np.linspace(0.0, p["t_max_us"], p["t_points"])
    n_samples = p["samples"]

    def chunk(sample_ids):
        out = []
        for i in sample_ids:
            s = blockade.sample_ensemble(
                p["n_bar"], p["trap_radius_um"],
                np.random.SeedSequence((seed, int(i))).generate_state(1)[0],
                distribution=p["distribution"],
            )
            h, basis = blockade.build_blockade_hamiltonian(
                s, p["rabi1_MHz"], 0.0, p["C6_MHz_um6"]
            )
            out.append(blockade.excitation_dynamics(h, basis, t).data[:, 1:4])
        return out

    parts = _parallel_chunks(list(range(n_samples)), chunk, workers)
    # sum strictly in sample order so the bytes never depend on the chunking
    acc = np.zeros((t.size, 3))
    for per_sample in parts:
        for arr in per_sample:
            acc += arr
    acc /= n_samples
    return {"trace.csv": traces.Trace(("t_us", "P0", "P1", "P2"), np.column_stack([t, acc]))}


def _run_chirp(p, seed, workers):
    chirp = blockade.ChirpPulse(
        p["rabi1_MHz"], p["sweep_start_MHz"], p["sweep_end_MHz"], p["duration_us"]
    )
    ns = list(range(p["n_min"], p["n_max"] + 1))

    def chunk(nv):
        return [[n, blockade.chirped_excitation(int(n), p["rabi1_MHz"], chirp)] for n in nv]

    parts = _parallel_chunks(ns, chunk, workers)
    rows = np.asarray([row for c in parts for row in c], dtype=float)
    return {"trace.csv": traces.Trace(("N", "P1"), rows)}


def _run_stirap(p, seed, workers):
    counter = blockade.StirapPulses(
        p["pump_peak_MHz"], p["pump_center_us"], p["pump_width_us"],
        p["stokes_peak_MHz"], p["stokes_center_us"], p["stokes_width_us"],
        p["intermediate_detuning_MHz"],
    )
    swapped = blockade.StirapPulses(
        p["pump_peak_MHz"], p["stokes_center_us"], p["pump_width_us"],
        p["stokes_peak_MHz"], p["pump_center_us"], p["stokes_width_us"],
        p["intermediate_detuning_MHz"],
    )
    rows = np.asarray(
        [
            [1.0, blockade.stirap_transfer(counter)],
            [0.0, blockade.stirap_transfer(swapped)],
        ]
    )
    return {"trace.csv": traces.Trace(("counter_intuitive", "efficiency"), rows)}


def _run_gate_sim(p, seed, workers):
    ratios = p["blockade_over_rabi"]

    def chunk(rv):
        return [
            [r, gates.simulate_blockade_cz(p["rabi_MHz"], r * p["rabi_MHz"]).fidelity]
            for r in rv
        ]

    parts = _parallel_chunks(ratios, chunk, workers)
    rows = np.asarray([row for c in parts for row in c], dtype=float)
    out = {"trace.csv": traces.Trace(("B_over_rabi", "fidelity"), rows)}
    _, table = gates.simulate_blockade_cnot(p["rabi_MHz"], ratios[-1] * p["rabi_MHz"])
    lines = ["input,output00,output01,output10,output11"]
    for label in ("00", "01", "10", "11"):
        probs = table[label]
        lines.append(
            label + "," + ",".join(f"{probs[o]:.11e}" for o in ("00", "01", "10", "11"))
        )
    out["truth_table.csv"] = "\n".join(lines) + "\n"
    return out


def _run_mesoscopic(p, seed, workers):
    seq = gates.rotation_sequence(p["theta_rad"])
    if p["compensated"]:
        seq = gates.phase_compensated(seq)
    ns = list(range(p["n_min"], p["n_max"] + 1))

    def chunk(nv):
        return [(int(n), gates.mesoscopic_unitary(seq, gates.MesoscopicRegister(int(n), p["rabi1_MHz"]))) for n in nv]

    parts = _parallel_chunks(ns, chunk, workers)
    flat = [item for c in parts for item in c]
    ref = flat[0][1].logical
    rows = [
        [n, float(np.linalg.norm(r.logical - ref, 2)), r.leakage] for n, r in flat
    ]
    return {"trace.csv": traces.Trace(("N", "deviation", "leakage"), np.asarray(rows))}


RUNNERS = {
    "spectrum": _run_spectrum,
    "doppler": _run_doppler,
    "foerster-scan": _run_foerster_scan,
    "foerster-time": _run_foerster_time,
    "rf-floquet": _run_rf_floquet,
    "blockade-revivals": _run_blockade_revivals,
    "chirp": _run_chirp,
    "stirap": _run_stirap,
    "gate-sim": _run_gate_sim,
    "mesoscopic-gate": _run_mesoscopic,
}


def emit_plot(csv_path, out_path, style: str = "line") -> None:
    """Render a trace CSV as an SVG line plot; presentational only."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    tr = traces.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    x = tr.data[:, 0]
    for j, name in enumerate(tr.columns[1:], start=1):
        ax.plot(x, tr.data[:, j], lw=1.2, label=name)
    ax.set_xlabel(tr.columns[0])
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)


def run_scenario(config: ScenarioConfig, workers=None) -> Path:
    """Execute the scenario and write outputs plus the manifest; returns the
    run directory."""
    workers = _worker_count(workers)
    started = datetime.now(timezone.utc)
    t0 = time.monotonic()
    outputs = RUNNERS[config.scenario](config.params, config.seed, workers)

    stamp = started.strftime("%Y%m%d-%H%M%S-%f")
    run_dir = Path(config.output_dir) / f"{config.scenario}-{stamp}"
    run_dir.mkdir(parents=True, exist_ok=False)
    checksums = {}
    for name, content in outputs.items():
        path = run_dir / name
        if isinstance(content, traces.Trace):
            content.write_csv(path)
        else:
            path.write_text(content)
        checksums[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    if config.plot:
        plot_path = run_dir / "plot.svg"
        emit_plot(run_dir / "trace.csv", plot_path)
        checksums["plot.svg"] = hashlib.sha256(plot_path.read_bytes()).hexdigest()
    manifest = {
        "tool": "rydsim",
        "version": __version__,
        "config": config.resolved(),
        "workers": workers,
        "started_utc": started.isoformat(),
        "wall_clock_s": round(time.monotonic() - t0, 6),
        "outputs": checksums,
    }
    tmp = run_dir / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, run_dir / "manifest.json")
    return run_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rydsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--set", action="append", default=[], metavar="PATH=VALUE")
    p_run.add_argument("--workers", type=int, default=None)
    p_val = sub.add_parser("validate", help="validate a scenario config")
    p_val.add_argument("config")
    p_val.add_argument("--set", action="append", default=[], metavar="PATH=VALUE")
    p_plot = sub.add_parser("plot", help="render a trace CSV to SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("-o", "--output", default=None)
    args = parser.parse_args(argv)

    try:
        if args.command == "validate":
            config = load_config(args.config, args.set)
            print(json.dumps(config.resolved(), indent=2, sort_keys=True))
            return 0
        if args.command == "run":
            config = load_config(args.config, args.set)
            run_dir = run_scenario(config, workers=args.workers)
            print(run_dir)
            return 0
        if args.command == "plot":
            out = args.output or str(Path(args.csv).with_suffix(".svg"))
            try:
                emit_plot(args.csv, out)
            except (OSError, ValueError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 2
            print(out)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
