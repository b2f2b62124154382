"""Command-line front end: ``cntqd <command> --config <file> --out <path>``.

A scenario file is a JSON object. It has an optional ``command`` key, an
optional ``dot`` section and one section named after the command
(``two-qubit`` may also use the section name ``two_qubit``). Missing keys take the
defaults listed in :data:`SCHEMA`. Unknown keys are rejected. A grid is
either a list of numbers or ``{"start": a, "stop": b, "num": n}``.

Output tables, one row per grid point (units in brackets):

* spectrum: ``B[T], E1[ueV] .. E4[ueV]`` (ascending eigenvalues)
* gate, phase protocol: ``t[ns], P_alpha, P_delta, P_beta, P_gamma, phase[rad]``
* gate, rabi protocol: ``t[ns], P_beta, P_gamma, phase[rad]`` (phase is Ω_R·t)
* two-qubit: ``t[ns], phase[rad], entangling_power, swap_fidelity``
* memory: ``t[ns], overlap, offloaded, faraday``
* trap: ``mode, frequency[cm^-1], translation`` plus a sibling ``.xyz`` file

Each CSV gets a sibling ``<out>.meta.json`` holding the scenario hash,
the tool version, column units and a per-command summary.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
Failures print a single ``error: <Class>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .dotmodel import DotParameters, build_hamiltonian, diagonal_energies, spectrum_sweep
from .errors import CntqdError, InputError, NumericalError
from .gates import (
    SWAP,
    PulseKind,
    PulseSpec,
    RabiMode,
    TwoDotGeometry,
    entangling_power,
    exchange_gate,
    expected_phase,
    gate_fidelity,
    phase_gate,
    resonant_frequency,
    two_qubit_gate,
    valley_rabi,
)
from .constants import HBAR
from .dotmodel import DOT_SPACE, PRODUCT_INDEX
from .memory import (
    MemoryScenario,
    NoResonanceFound,
    NuclearChain,
    coherence_trajectory,
    hartmann_hahn_field,
    initial_state,
    swap_time,
    write_protocol,
)
from .qstate import HilbertSpace, QuantumState, evolve_many
from .trap import TrapConfig, normal_modes, relax_chain, to_xyz, transverse_stability

COMMANDS = ("spectrum", "gate", "two-qubit", "memory", "trap")
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ParseError(InputError):
    pass


class ValidationError(InputError):
    pass


class UnknownKey(ValidationError):
    pass


class IoError(CntqdError, OSError):
    pass


# ------------------------------------------------------------------ schema

_REQUIRED = object()


@dataclass(frozen=True)
class Key:
    kind: str  # float, int, str, bool, grid, floats, qubit
    default: Any = None
    optional: bool = False  # accepts null
    choices: tuple = ()
    check: Callable[[Any], bool] | None = None
    expect: str = ""

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _sign(v):
    return v in (-1, 1)


_DOT = {
    "delta_so": Key("float", 400.0, check=_positive, expect="> 0"),
    "delta_kk": Key("float", 65.0, check=_nonneg, expect=">= 0"),
    "g_s": Key("float", 2.0, check=_positive, expect="> 0"),
    "mu_orb": Key("float", 330.0, check=_positive, expect="> 0"),
    "lever_arm": Key("float", 1000.0),
    "so_sign": Key("int", -1, check=_sign, expect="+1 or -1"),
    "zeeman_sign": Key("int", 1, check=_sign, expect="+1 or -1"),
}

SCHEMA: dict[str, dict[str, Key]] = {
    "dot": _DOT,
    "spectrum": {
        "b_grid": Key("grid", _REQUIRED),
        "gate_voltage": Key("float", 0.0),
    },
    "gate": {
        "protocol": Key("str", "phase", choices=("phase", "rabi")),
        "b_field": Key("float", 0.5),
        "duration": Key("float", None, optional=True, check=_nonneg, expect=">= 0"),
        "theta": Key("float", None, optional=True),
        "drive_amp": Key("float", 1.0, check=_nonneg, expect=">= 0"),
        "drive_freq": Key("float", None, optional=True, check=_nonneg, expect=">= 0"),
        "phase": Key("float", 0.0),
        "mode": Key("str", "rwa_two_level", choices=tuple(m.value for m in RabiMode)),
        "samples": Key("int", 101, check=lambda v: v >= 2, expect=">= 2"),
        "steps_per_period": Key("int", 200, check=lambda v: v >= 4, expect=">= 4"),
        "gate_voltage": Key("float", 0.0),
    },
    "two_qubit": {
        "interaction": Key("str", "dipole", choices=("dipole", "exchange")),
        "separation": Key("float", 1000.0, check=_positive, expect="> 0"),
        "coupling_strength": Key("float", None, optional=True),
        "j_ex": Key("float", 1.0),
        "times": Key("grid", None, optional=True),
        "samples": Key("int", 101, check=lambda v: v >= 2, expect=">= 2"),
    },
    "memory": {
        "positions": Key("floats", [3.0]),
        "g_n": Key("float", 5.5856946893),
        "electron_position": Key("float", 0.0),
        "b_field": Key("float", None, optional=True),
        "coupling_scale": Key("float", None, optional=True, check=_nonneg, expect=">= 0"),
        "valley": Key("int", 1, check=_sign, expect="+1 or -1"),
        "write_mode": Key("str", "swap", choices=("swap", "collective")),
        "electron_qubit": Key("qubit", [math.pi, 0.0]),
        "times": Key("grid", None, optional=True),
        "samples": Key("int", 101, check=lambda v: v >= 2, expect=">= 2"),
    },
    "trap": {
        "preset": Key("str", "hydrogen", choices=("hydrogen", "nitrogen")),
        "tube_radius": Key("float", None, optional=True),
        "tube_length": Key("float", None, optional=True),
        "wall_epsilon": Key("float", None, optional=True),
        "wall_sigma": Key("float", None, optional=True),
        "surface_density": Key("float", None, optional=True),
        "atom_epsilon": Key("float", None, optional=True),
        "atom_sigma": Key("float", None, optional=True),
        "element": Key("str", None, optional=True),
        "mass": Key("float", None, optional=True),
        "quadrature_order": Key("int", None, optional=True),
        "n_atoms": Key("int", 8, check=lambda v: v >= 1, expect=">= 1"),
        "seed_jitter": Key("float", 0.0, check=_nonneg, expect=">= 0"),
        "seed": Key("int", 0),
    },
}

SECTION = {"spectrum": "spectrum", "gate": "gate", "two-qubit": "two_qubit", "memory": "memory", "trap": "trap"}

# engine config fields and the scenario key that sets each one
FIELD_MAP = {
    DotParameters: {f: f"dot.{f}" for f in _DOT},
    PulseSpec: {
        "kind": "gate.protocol", "b_field": "gate.b_field", "duration": "gate.duration",
        "drive_amp": "gate.drive_amp", "drive_freq": "gate.drive_freq", "phase": "gate.phase",
    },
    TwoDotGeometry: {"separation": "two_qubit.separation", "coupling_strength": "two_qubit.coupling_strength"},
    NuclearChain: {"positions": "memory.positions", "g_n": "memory.g_n"},
    MemoryScenario: {
        "chain": "memory.positions", "dot": "dot", "electron_position": "memory.electron_position",
        "b_field": "memory.b_field", "coupling_scale": "memory.coupling_scale",
    },
    TrapConfig: {f.name: f"trap.{f.name}" for f in dataclasses.fields(TrapConfig)},
}


@dataclass(frozen=True)
class Scenario:
    command: str
    parameters: dict
    output_path: str | None = None

    @property
    def digest(self) -> str:
        blob = json.dumps({"command": self.command, "parameters": self.parameters}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def _number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _coerce(path: str, key: Key, v):
    if v is None:
        if key.optional:
            return None
        raise ValidationError(f"{path}: expected {key.kind}, got null")
    if key.kind == "float":
        if not _number(v):
            raise ValidationError(f"{path}: expected a finite number, got {v!r}")
        v = float(v)
    elif key.kind == "int":
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ValidationError(f"{path}: expected an integer, got {v!r}")
    elif key.kind == "str":
        if not isinstance(v, str):
            raise ValidationError(f"{path}: expected a string, got {v!r}")
        if key.choices and v not in key.choices:
            raise ValidationError(f"{path}: expected one of {list(key.choices)}, got {v!r}")
    elif key.kind == "floats":
        if not isinstance(v, list) or not v or not all(_number(x) for x in v):
            raise ValidationError(f"{path}: expected a non-empty list of numbers, got {v!r}")
        v = [float(x) for x in v]
    elif key.kind == "qubit":
        if not (isinstance(v, list) and len(v) == 2 and all(_number(x) for x in v)):
            raise ValidationError(f"{path}: expected [polar, azimuth] in rad, got {v!r}")
        v = [float(x) for x in v]
    elif key.kind == "grid":
        v = _grid(path, v)
    if key.check is not None and not key.check(v):
        raise ValidationError(f"{path}: expected {key.expect}, got {v!r}")
    return v


def _grid(path: str, v) -> list[float]:
    if isinstance(v, dict):
        unknown = set(v) - {"start", "stop", "num"}
        if unknown:
            raise UnknownKey(f"{path}: unknown grid key(s) {sorted(unknown)}")
        try:
            start, stop, num = v["start"], v["stop"], v["num"]
        except KeyError as e:
            raise ValidationError(f"{path}: grid needs start, stop and num (missing {e.args[0]})") from None
        if not (_number(start) and _number(stop)):
            raise ValidationError(f"{path}: start and stop must be finite numbers")
        if not (isinstance(num, int) and not isinstance(num, bool) and num >= 1):
            raise ValidationError(f"{path}.num: expected an integer >= 1, got {num!r}")
        return [float(x) for x in np.linspace(start, stop, num)]
    if isinstance(v, list) and v and all(_number(x) for x in v):
        return [float(x) for x in v]
    raise ValidationError(f"{path}: expected a non-empty list of numbers or {{start, stop, num}}, got {v!r}")


def _section(name: str, raw) -> dict:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError(f"{name}: expected an object, got {type(raw).__name__}")
    schema = SCHEMA[name]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise UnknownKey(f"{name}: unknown key(s) {unknown}")
    out = {}
    for key, entry in schema.items():
        path = f"{name}.{key}"
        if key in raw:
            out[key] = _coerce(path, entry, raw[key])
        elif entry.required:
            raise ValidationError(f"{path}: required key missing")
        else:
            out[key] = entry.default
    return out


def parse_scenario(text: str, command: str | None = None, output_path: str | None = None) -> Scenario:
    """Parse and validate a scenario document, filling in defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    doc = dict(doc)
    named = doc.pop("command", None)
    if named is not None and command is not None and named != command:
        raise ValidationError(f"command: file says {named!r} but {command!r} was requested")
    cmd = command or named
    if cmd not in COMMANDS:
        raise ValidationError(f"command: expected one of {list(COMMANDS)}, got {cmd!r}")
    section = SECTION[cmd]
    if section != cmd and cmd in doc:
        if section in doc:
            raise ValidationError(f"both {cmd!r} and {section!r} sections given")
        doc[section] = doc.pop(cmd)
    allowed = {"dot", section}
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise UnknownKey(f"unknown key(s) {unknown} for command {cmd!r}")
    params = {"dot": _section("dot", doc.get("dot")), section: _section(section, doc.get(section))}
    scenario = Scenario(cmd, params, output_path)
    _build_engine_configs(scenario)  # surfaces cross-field violations before any run
    return scenario


# ------------------------------------------------------------------ results


@dataclass
class ResultTable:
    """Numeric table with ``name[unit]`` column headers."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    attachments: dict[str, str] = field(default_factory=dict)  # suffix -> text

    def __post_init__(self):
        for c in self.columns:
            if not re.fullmatch(r"[^\[\]]+\[[^\[\]]*\]", c):
                raise InputError(f"column {c!r} lacks a [unit] suffix")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise InputError(f"row arity {len(r)} differs from {len(self.columns)} columns")

    def append(self, row) -> None:
        row = [float(x) for x in row]
        if len(row) != len(self.columns):
            raise InputError(f"row arity {len(row)} differs from {len(self.columns)} columns")
        self.rows.append(row)

    @property
    def units(self) -> dict[str, str]:
        return {c.split("[")[0]: c[c.index("[") + 1:-1] for c in self.columns}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def emit_csv(t: ResultTable, path: str | Path) -> None:
    """Write ``t`` as CSV plus the ``.meta.json`` sibling and any attachments."""
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([_fmt(x) for x in row])
        meta = dict(t.metadata)
        meta["units"] = t.units
        _meta_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        for suffix, text in t.attachments.items():
            path.with_suffix(suffix).write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {e.filename or path}: {e.strerror or e}") from None


# ------------------------------------------------------------------ engines


def _dot(params) -> DotParameters:
    return DotParameters(**params["dot"])


def _trap_config(sec) -> TrapConfig:
    overrides = {k: sec[k] for k in FIELD_MAP[TrapConfig] if sec.get(k) is not None}
    return TrapConfig.preset(sec["preset"], **overrides)


def _memory_scenario(params) -> MemoryScenario:
    sec = params["memory"]
    chain = NuclearChain(tuple(sec["positions"]), sec["g_n"])
    return MemoryScenario(chain, _dot(params), sec["electron_position"], sec["b_field"] or 0.0, sec["coupling_scale"])


def _build_engine_configs(s: Scenario) -> None:
    """Construct every engine object the scenario implies, mapping failures to ValidationError."""
    try:
        p = _dot(s.parameters)
        if s.command == "gate":
            sec = s.parameters["gate"]
            if sec["duration"] is None and sec["theta"] is None:
                raise ValidationError("gate: give duration or theta")
            if sec["protocol"] == "rabi" and sec["duration"] is None:
                raise ValidationError("gate.duration: required for the rabi protocol")
            if sec["protocol"] == "phase" and sec["duration"] is None:
                de = diagonal_energies(p, sec["b_field"])
                if de["alpha"] == de["gamma"]:
                    raise ValidationError("gate.theta: no phase accumulates at b_field = 0")
        elif s.command == "two-qubit":
            sec = s.parameters["two_qubit"]
            if sec["interaction"] == "exchange" and sec["times"] is None and sec["j_ex"] == 0:
                raise ValidationError("two_qubit.times: required when j_ex = 0")
            _geometry(p, sec)
        elif s.command == "memory":
            scen = _memory_scenario(s.parameters)
            if s.parameters["memory"]["write_mode"] == "swap" and scen.chain.count != 1:
                raise ValidationError("memory.write_mode: swap needs exactly one position; use collective")
        elif s.command == "trap":
            _trap_config(s.parameters["trap"])
    except ValidationError:
        raise
    except InputError as e:
        raise ValidationError(f"{s.command}: {e}") from None


def _geometry(p: DotParameters, sec) -> TwoDotGeometry:
    if sec["coupling_strength"] is not None:
        return TwoDotGeometry(sec["separation"], sec["coupling_strength"])
    return TwoDotGeometry.from_dot(p, sec["separation"])


def _run_spectrum(s: Scenario) -> ResultTable:
    p, sec = _dot(s.parameters), s.parameters["spectrum"]
    table = ResultTable(["B[T]", "E1[ueV]", "E2[ueV]", "E3[ueV]", "E4[ueV]"])
    for point in spectrum_sweep(p, sec["b_grid"], sec["gate_voltage"]):
        table.append([point.b_field, *point.energies])
    table.metadata["summary"] = {"points": len(table.rows)}
    return table


def _run_gate(s: Scenario) -> ResultTable:
    p, sec = _dot(s.parameters), s.parameters["gate"]
    vg = sec["gate_voltage"]
    if sec["protocol"] == "phase":
        duration = sec["duration"]
        if duration is None:
            duration = sec["theta"] / expected_phase(p, sec["b_field"], 1.0)
            if duration < 0:
                raise ValidationError("gate.theta: sign is opposite to the phase accumulated at this b_field")
        times = np.linspace(0.0, duration, sec["samples"])
        table = ResultTable(["t[ns]", "P_alpha[1]", "P_delta[1]", "P_beta[1]", "P_gamma[1]", "phase[rad]"])
        psi0 = QuantumState(DOT_SPACE, (np.eye(4)[PRODUCT_INDEX["gamma"]] + np.eye(4)[PRODUCT_INDEX["alpha"]]) / np.sqrt(2))
        amps = evolve_many(build_hamiltonian(p, sec["b_field"], vg), psi0, times)
        leakage = 0.0
        for t, a in zip(times, amps):
            g = phase_gate(p, PulseSpec(PulseKind.FIELD_KICK, sec["b_field"], float(t)), vg)
            leakage = max(leakage, g.leakage)
            pops = np.abs(a) ** 2
            table.append([t, *(pops[PRODUCT_INDEX[n]] for n in ("alpha", "delta", "beta", "gamma")), g.theta])
        table.metadata["summary"] = {"duration_ns": float(duration), "theta_rad": table.rows[-1][-1], "max_leakage": leakage}
        return table

    freq = sec["drive_freq"]
    if freq is None:
        freq = resonant_frequency(p, sec["b_field"], vg)
    drive = PulseSpec(PulseKind.MICROWAVE_DRIVE, sec["b_field"], sec["duration"], sec["drive_amp"], freq, sec["phase"])
    r = valley_rabi(p, drive, sec["mode"], samples=sec["samples"], steps_per_period=sec["steps_per_period"], vg=vg)
    table = ResultTable(["t[ns]", "P_beta[1]", "P_gamma[1]", "phase[rad]"])
    for row in zip(r.times, r.p_beta, r.p_gamma, r.rabi_frequency * r.times):
        table.append(row)
    table.metadata["summary"] = {"drive_freq_GHz": float(freq), "rabi_frequency_rad_per_ns": float(r.rabi_frequency),
                                 "detuning_rad_per_ns": float(r.detuning)}
    return table


def _run_two_qubit(s: Scenario) -> ResultTable:
    p, sec = _dot(s.parameters), s.parameters["two_qubit"]
    table = ResultTable(["t[ns]", "phase[rad]", "entangling_power[1]", "swap_fidelity[1]"])
    if sec["interaction"] == "dipole":
        geom = _geometry(p, sec)
        t_star = np.pi * HBAR / (4 * geom.coupling_strength)
        times = sec["times"] or list(np.linspace(0.0, 2 * t_star, sec["samples"]))
        for t in times:
            g = two_qubit_gate(geom, float(t))
            table.append([t, g.phase, entangling_power(g.valley_unitary), gate_fidelity(g.valley_unitary, SWAP)])
        table.metadata["summary"] = {"coupling_ueV": float(geom.coupling_strength), "cz_time_ns": float(t_star)}
    else:
        j = sec["j_ex"]
        times = sec["times"] or list(np.linspace(0.0, np.pi * HBAR / abs(j), sec["samples"]))
        for t in times:
            u = exchange_gate(j, float(t)).entries
            diag = np.diag(u)
            phase = float(np.mod(np.angle(diag[0] * diag[3] * np.conj(diag[1] * diag[2])), 2 * np.pi))
            table.append([t, phase, entangling_power(u), gate_fidelity(u, SWAP)])
        table.metadata["summary"] = {"j_ex_ueV": float(j), "swap_time_ns": float(np.pi * HBAR / abs(j)) if j else None}
    return table


def _run_memory(s: Scenario) -> ResultTable:
    sec = s.parameters["memory"]
    scen = _memory_scenario(s.parameters)
    polar, azimuth = sec["electron_qubit"]
    qubit = QuantumState(HilbertSpace.of(("spin_e", 2)), np.array([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)]))
    summary: dict[str, Any] = {}
    if scen.coupling_scale > 0:
        w = write_protocol(scen, qubit, sec["valley"], "collective" if sec["write_mode"] == "collective" else "swap")
        summary.update(transfer_fidelity=w.transfer_fidelity, hartmann_hahn_T=w.b_field, t_swap_ns=w.t_swap)
    if sec["b_field"] is None:
        try:
            scen = dataclasses.replace(scen, b_field=hartmann_hahn_field(scen, sec["valley"]))
        except NoResonanceFound:
            if scen.coupling_scale > 0:
                raise
    times = sec["times"]
    if times is None:
        a = abs(scen.couplings).max() / 2 if scen.coupling_scale > 0 else 1.0
        times = list(np.linspace(0.0, 4 * swap_time(a), sec["samples"]))
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError("memory.times: must be ascending")
    traj = coherence_trajectory(scen, initial_state(scen, qubit, sec["valley"]), times)
    table = ResultTable(["t[ns]", "overlap[1]", "offloaded[1]", "faraday[1]"])
    for row in zip(traj.times, traj.overlap, traj.offloaded, traj.faraday):
        table.append(row)
    summary["b_field_T"] = float(scen.b_field)
    table.metadata["summary"] = summary
    return table


def _run_trap(s: Scenario) -> ResultTable:
    sec = s.parameters["trap"]
    c = _trap_config(sec)
    state = relax_chain(sec["n_atoms"], c, sec["seed_jitter"], sec["seed"])
    modes = normal_modes(state, c)
    table = ResultTable(["mode[1]", "frequency[cm^-1]", "translation[1]"])
    for k, f in enumerate(modes.frequencies):
        table.append([k, f, 1.0 if k == modes.translation_mode else 0.0])
    table.metadata["summary"] = {
        "energy_meV": state.energy,
        "gradient_norm": state.gradient_norm,
        "converged": state.converged,
        "spacings_A": [float(x) for x in state.spacings],
        "transverse_stability_meV_per_A2": transverse_stability(state, c),
    }
    table.attachments[".xyz"] = to_xyz(state, c, f"{sec['n_atoms']} {c.element} atoms, E = {state.energy:.10f} meV")
    return table


_RUNNERS = {"spectrum": _run_spectrum, "gate": _run_gate, "two-qubit": _run_two_qubit,
            "memory": _run_memory, "trap": _run_trap}


def run_scenario(s: Scenario) -> ResultTable:
    """Execute a validated scenario. Engine errors gain the command name as context."""
    try:
        table = _RUNNERS[s.command](s)
    except CntqdError as e:
        e.args = (f"{s.command}: {e.args[0] if e.args else ''}",) + tuple(e.args[1:])
        raise
    table.metadata.update(command=s.command, scenario_hash=s.digest, version=__version__,
                          parameters=s.parameters)
    return table


# ------------------------------------------------------------------ entry point


def _exit_code(e: BaseException) -> int:
    if isinstance(e, IoError):
        return EXIT_IO
    if isinstance(e, NumericalError):
        return EXIT_NUMERIC
    if isinstance(e, InputError):
        return EXIT_INPUT
    return EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cntqd", description="Nanotube quantum-dot qubit simulator.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", help="output CSV path (required unless --validate-only)")
    ap.add_argument("--validate-only", action="store_true", help="parse and validate, then exit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise IoError(f"cannot read {args.config}: {e.strerror or e}") from None
        scenario = parse_scenario(text, args.command, args.out)
        if args.validate_only:
            return EXIT_OK
        if not args.out:
            raise ValidationError("--out is required unless --validate-only is given")
        emit_csv(run_scenario(scenario), args.out)
    except CntqdError as e:
        msg = " ".join(str(e).split())
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return _exit_code(e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
