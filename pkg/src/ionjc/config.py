"""Experiment configuration: a single JSON object, parsed to dimensionless form.

Frequencies are dimensionless (units of the axial trap frequency) when
``units`` is "nu1"; with "si" the chain is given in SI (mass in amu, nu1 in
rad/s, wavevector in 1/m, times in seconds) and every quantity is converted at
parse time.  Parsing always produces a fully defaulted dimensionless
``normalized`` mapping; serializing that mapping and parsing it again is the
identity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chain import ChainModel, LaserDrive
from .fock import HilbertConfig
from .hamiltonians import ModelSpec

HBAR_SI = 1.054571817e-34
AMU_SI = 1.66053906892e-27

EXPERIMENTS = ("modes", "resonance", "sweep-rabi", "evolve")
METHODS = ("exact", "pipeline_exact", "pipeline_rwa", "standard_rwa", "rwa_jc")
MAX_IONS = 10


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the JSON path."""


@dataclass(frozen=True, eq=False)
class SweepSpec:
    grid: np.ndarray  # Rabi frequencies, strictly increasing
    drive: int  # 1-based index into the drive list
    mode: int  # target mode for the corrected resonance


@dataclass(frozen=True, eq=False)
class EvolveSpec:
    times: np.ndarray
    method: str
    resonant_pair: tuple[int, int] | None
    fock: tuple[int, ...] | None
    coherent: tuple[complex, ...] | None
    spins: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    experiment: str
    model: ModelSpec
    sweep: SweepSpec | None
    evolve: EvolveSpec | None
    out_path: str | None
    out_format: str
    normalized: dict


def _require(mapping, key, path, kind=None):
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: required field is missing")
    return _typed(mapping[key], kind, f"{path}.{key}") if kind else mapping[key]


def _typed(value, kind, path):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    if kind is dict and not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ConfigError(f"{path}: expected an array, got {value!r}")
    return value


def _load(source) -> dict:
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config file: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top-level value must be an object")
    return raw


def parse_config(source) -> ExperimentConfig:
    """Parse and validate a config file path or already-loaded mapping."""
    raw = _load(source)
    experiment = _require(raw, "experiment", "$", str)
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"$.experiment: unknown experiment {experiment!r}; pick from {EXPERIMENTS}")
    units = _typed(raw.get("units", "nu1"), str, "$.units")
    if units not in ("nu1", "si"):
        raise ConfigError(f"$.units: must be 'nu1' or 'si', got {units!r}")

    chain_raw = _require(raw, "chain", "$", dict)
    n_ions = _require(chain_raw, "N", "$.chain", int)
    if not 1 <= n_ions <= MAX_IONS:
        raise ConfigError(f"$.chain.N: N exceeds supported range 1..{MAX_IONS}")

    if units == "si":
        mu_si = _require(chain_raw, "mu", "$.chain", float) * AMU_SI
        nu1_si = _require(chain_raw, "nu1", "$.chain", float)
        if mu_si <= 0 or nu1_si <= 0:
            raise ConfigError("$.chain: mu and nu1 must be positive")
        freq_scale = nu1_si  # divide SI angular frequencies by this
        k_scale = np.sqrt(HBAR_SI / (2.0 * mu_si * nu1_si))  # k_L -> dimensionless prefactor
        mu, nu1 = 0.5, 1.0  # so sqrt(2 mu nu1) = 1 after conversion
    else:
        mu = _typed(chain_raw.get("mu", 0.5), float, "$.chain.mu")
        nu1 = _typed(chain_raw.get("nu1", 1.0), float, "$.chain.nu1")
        if mu <= 0 or nu1 <= 0:
            raise ConfigError("$.chain: mu and nu1 must be positive")
        freq_scale = 1.0
        k_scale = 1.0

    hilbert = _typed(raw.get("hilbert", {}), dict, "$.hilbert")
    n_max = _typed(hilbert.get("n_max", 40 if n_ions == 1 else 12), int, "$.hilbert.n_max")
    guard = _typed(hilbert.get("guard", 10 if n_ions == 1 else 4), int, "$.hilbert.guard")
    if n_max < 2:
        raise ConfigError("$.hilbert.n_max: must be >= 2")
    if not 0 <= guard < n_max:
        raise ConfigError("$.hilbert.guard: must satisfy 0 <= guard < n_max")

    omega_ge = _typed(raw.get("omega_ge", 0.0), float, "$.omega_ge") / freq_scale

    drives_raw = _require(raw, "drives", "$", list)
    if not drives_raw:
        raise ConfigError("$.drives: at least one drive is required")
    drives = []
    for i, d in enumerate(drives_raw):
        path = f"$.drives[{i}]"
        d = _typed(d, dict, path)
        ion = _require(d, "ion", path, int)
        omega_r = _require(d, "Omega_R", path, float) / freq_scale
        if "delta" in d and "omega_L" in d:
            raise ConfigError(f"{path}: give either delta or omega_L, not both")
        if "delta" in d:
            omega_l = omega_ge - _typed(d["delta"], float, f"{path}.delta") / freq_scale
        elif "omega_L" in d:
            omega_l = _typed(d["omega_L"], float, f"{path}.omega_L") / freq_scale
        else:
            raise ConfigError(f"{path}: needs delta or omega_L")
        k_l = _require(d, "k_L", path, float) * k_scale
        phi = _typed(d.get("phi_beam", 0.0), float, f"{path}.phi_beam")
        phase = _typed(d.get("phase", 0.0), float, f"{path}.phase")
        try:
            drives.append(
                LaserDrive(ion=ion, Omega_R=omega_r, omega_L=omega_l, k_L=k_l,
                           phi_beam=phi, phase=phase, omega_ge=omega_ge)
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    try:
        chain = ChainModel.build(n_ions, mu=mu, nu1=nu1)
        hconf = HilbertConfig(n_modes=n_ions, n_max=n_max, n_spins=len(drives), guard=guard)
        model = ModelSpec(chain=chain, drives=tuple(drives), config=hconf, omega_ge=omega_ge)
    except ValueError as exc:
        raise ConfigError(f"$: {exc}") from exc

    sweep = _parse_sweep(raw, model, freq_scale) if experiment == "sweep-rabi" else None
    evolve = _parse_evolve(raw, model, freq_scale) if experiment == "evolve" else None

    output = _typed(raw.get("output", {}), dict, "$.output")
    out_path = output.get("path")
    if out_path is not None and not isinstance(out_path, str):
        raise ConfigError("$.output.path: expected a string")
    out_format = _typed(output.get("format", "csv"), str, "$.output.format")
    if out_format not in ("csv", "json"):
        raise ConfigError("$.output.format: must be 'csv' or 'json'")

    normalized = _normalize(experiment, model, sweep, evolve, out_path, out_format)
    return ExperimentConfig(
        experiment=experiment, model=model, sweep=sweep, evolve=evolve,
        out_path=out_path, out_format=out_format, normalized=normalized,
    )


def _parse_sweep(raw, model, freq_scale) -> SweepSpec:
    s = _typed(raw.get("sweep", {}), dict, "$.sweep")
    drive = _typed(s.get("drive", 1), int, "$.sweep.drive")
    mode = _typed(s.get("mode", 1), int, "$.sweep.mode")
    if not 1 <= drive <= len(model.drives):
        raise ConfigError("$.sweep.drive: out of range")
    if not 1 <= mode <= model.chain.N:
        raise ConfigError("$.sweep.mode: out of range")
    if "grid" in s:
        grid = np.array([_typed(v, float, "$.sweep.grid[*]") for v in _typed(s["grid"], list, "$.sweep.grid")])
        grid = grid / freq_scale
    else:
        start = _typed(s.get("start", 1e-2), float, "$.sweep.start") / freq_scale
        stop = _typed(s.get("stop", 10.0), float, "$.sweep.stop") / freq_scale
        points = _typed(s.get("points", 25), int, "$.sweep.points")
        scale = _typed(s.get("scale", "log"), str, "$.sweep.scale")
        if points < 2:
            raise ConfigError("$.sweep.points: need at least 2 grid points")
        if start <= 0 or stop <= start:
            raise ConfigError("$.sweep: need 0 < start < stop")
        if scale == "log":
            grid = np.logspace(np.log10(start), np.log10(stop), points)
        elif scale == "linear":
            grid = np.linspace(start, stop, points)
        else:
            raise ConfigError("$.sweep.scale: must be 'log' or 'linear'")
    if len(grid) < 2 or not np.all(np.diff(grid) > 0) or grid[0] <= 0:
        raise ConfigError("$.sweep.grid: must be positive and strictly increasing with >= 2 points")
    eta_k = model.eta_matrix()[drive - 1, mode - 1]
    if eta_k == 0.0:
        raise ConfigError("$.sweep: the swept drive does not couple to the target mode (eta = 0)")
    return SweepSpec(grid=grid, drive=drive, mode=mode)


def _parse_evolve(raw, model, freq_scale) -> EvolveSpec:
    e = _require(raw, "evolve", "$", dict)
    if "times" in e:
        times = np.array([_typed(v, float, "$.evolve.times[*]") for v in _typed(e["times"], list, "$.evolve.times")])
        times = times * freq_scale
    else:
        t_stop = _require(e, "t_stop", "$.evolve", float) * freq_scale
        t_start = _typed(e.get("t_start", 0.0), float, "$.evolve.t_start") * freq_scale
        steps = _typed(e.get("steps", 200), int, "$.evolve.steps")
        if steps < 2 or t_stop <= t_start:
            raise ConfigError("$.evolve: need t_stop > t_start and steps >= 2")
        times = np.linspace(t_start, t_stop, steps)
    if len(times) < 2 or not np.all(np.diff(times) > 0):
        raise ConfigError("$.evolve.times: must be strictly increasing with >= 2 points")

    method = _typed(e.get("method", "exact"), str, "$.evolve.method")
    if method not in METHODS:
        raise ConfigError(f"$.evolve.method: unknown method {method!r}; pick from {METHODS}")
    pair = None
    if method in ("pipeline_rwa", "standard_rwa", "rwa_jc"):
        ion = _require(e, "resonant_drive", "$.evolve", int)
        mode = _require(e, "resonant_mode", "$.evolve", int)
        if not 1 <= ion <= len(model.drives) or not 1 <= mode <= model.chain.N:
            raise ConfigError("$.evolve: resonant pair out of range")
        pair = (ion, mode)

    st = _require(e, "initial_state", "$.evolve", dict)
    spins = tuple(_typed(s, str, "$.evolve.initial_state.spins[*]")
                  for s in _require(st, "spins", "$.evolve.initial_state", list))
    if len(spins) != len(model.drives) or any(s not in ("e", "g") for s in spins):
        raise ConfigError("$.evolve.initial_state.spins: one 'e'/'g' label per drive")
    fock = coherent = None
    if ("fock" in st) == ("coherent" in st):
        raise ConfigError("$.evolve.initial_state: give exactly one of fock or coherent")
    if "fock" in st:
        fock = tuple(_typed(n, int, "$.evolve.initial_state.fock[*]")
                     for n in _typed(st["fock"], list, "$.evolve.initial_state.fock"))
        if len(fock) != model.chain.N or any(n < 0 or n >= model.config.n_max for n in fock):
            raise ConfigError("$.evolve.initial_state.fock: one index in 0..n_max-1 per mode")
    else:
        coherent = tuple(complex(_typed(a, float, "$.evolve.initial_state.coherent[*]"))
                         for a in _typed(st["coherent"], list, "$.evolve.initial_state.coherent"))
        if len(coherent) != model.chain.N:
            raise ConfigError("$.evolve.initial_state.coherent: one amplitude per mode")
    return EvolveSpec(times=times, method=method, resonant_pair=pair,
                      fock=fock, coherent=coherent, spins=spins)


def _normalize(experiment, model, sweep, evolve, out_path, out_format) -> dict:
    out = {
        "experiment": experiment,
        "units": "nu1",
        "chain": {"N": model.chain.N, "mu": model.chain.mu, "nu1": model.chain.nu1},
        "hilbert": {"n_max": model.config.n_max, "guard": model.config.guard},
        "omega_ge": model.omega_ge,
        "drives": [
            {"ion": d.ion, "Omega_R": d.Omega_R, "omega_L": d.omega_L, "k_L": d.k_L,
             "phi_beam": d.phi_beam, "phase": d.phase}
            for d in model.drives
        ],
        "output": {"path": out_path, "format": out_format},
    }
    if sweep is not None:
        out["sweep"] = {"drive": sweep.drive, "mode": sweep.mode, "grid": [float(v) for v in sweep.grid]}
    if evolve is not None:
        state = {"spins": list(evolve.spins)}
        if evolve.fock is not None:
            state["fock"] = list(evolve.fock)
        else:
            state["coherent"] = [float(a.real) for a in evolve.coherent]
        out["evolve"] = {
            "times": [float(t) for t in evolve.times],
            "method": evolve.method,
            "initial_state": state,
        }
        if evolve.resonant_pair is not None:
            out["evolve"]["resonant_drive"] = evolve.resonant_pair[0]
            out["evolve"]["resonant_mode"] = evolve.resonant_pair[1]
    return out


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical JSON text of the normalized configuration."""
    return json.dumps(cfg.normalized, indent=2, sort_keys=True) + "\n"
