"""Experiment configs: a YAML file with key-path errors and unit-suffixed quantities.

Scalar quantities are either bare numbers (already in base units: rad/s for
every frequency/rate/energy, SI for everything else) or strings "value unit".
Hz-family suffixes are multiplied by 2*pi on input -- the whole package works
in angular rates -- and eV-type energies become E/hbar.  The normalization is
recorded in output metadata.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .constants import BARN, E_CHARGE, HBAR, TWO_PI
from .hilbert import FockSpace, make_space
from .magnonics import EffectiveParams, PhysicalConfig, derive_effective_params
from .protocols import QSwitchSchedule, SweepAxis, default_qswitch_schedule

UNIT_CONVENTION = (
    "angular: frequencies, rates, and energies are rad/s internally; "
    "Hz-family inputs are multiplied by 2*pi, eV inputs become E/hbar"
)


class ConfigError(ValueError):
    """Schema violation, carrying the offending key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


_EV = E_CHARGE / HBAR  # eV -> rad/s

_UNIT_TABLES: dict[str, dict[str, float]] = {
    "freq": {
        "rad/s": 1.0,
        "Hz": TWO_PI,
        "kHz": TWO_PI * 1e3,
        "MHz": TWO_PI * 1e6,
        "GHz": TWO_PI * 1e9,
        "THz": TWO_PI * 1e12,
        "meV": 1e-3 * _EV,
        "eV": _EV,
    },
    "gamma": {
        "rad/s/T": 1.0,
        "Hz/T": TWO_PI,
        "kHz/T": TWO_PI * 1e3,
        "MHz/T": TWO_PI * 1e6,
    },
    "gonq": {
        "rad/s/(V/m)^2": 1.0,
        "Hz/(V/m)^2": TWO_PI,
        "Hz/(MV/m)^2": TWO_PI * 1e-12,
        "kHz/(MV/m)^2": TWO_PI * 1e-9,
        "MHz/(MV/m)^2": TWO_PI * 1e-6,
    },
    "bfield": {"T": 1.0, "mT": 1e-3},
    "efield": {"V/m": 1.0, "kV/m": 1e3, "MV/m": 1e6},
    "temp": {"K": 1.0, "mK": 1e-3, "uK": 1e-6},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "length": {"m": 1.0, "nm": 1e-9, "angstrom": 1e-10, "pm": 1e-12},
    "density": {"m^-3": 1.0, "cm^-3": 1e6, "nm^-3": 1e27},
    "area": {"m^2": 1.0, "barn": BARN, "fm^2": 1e-30},
    "volume": {"m^3": 1.0, "um^3": 1e-18, "nm^3": 1e-27},
    "dimless": {},
}

_QTY_RE = re.compile(r"^\s*([-+]?[\d.]+(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(raw, path: str, kind: str) -> float:
    """Number -> base units as-is; 'value unit' string -> normalized base units."""
    if isinstance(raw, bool):
        raise ConfigError(path, f"expected a number, got {raw!r}")
    if isinstance(raw, (int, float)):
        return float(raw)
    if not isinstance(raw, str):
        raise ConfigError(path, f"expected a number or 'value unit' string, got {type(raw).__name__}")
    m = _QTY_RE.match(raw)
    if not m:
        raise ConfigError(path, f"cannot parse quantity {raw!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise ConfigError(path, f"cannot parse magnitude in {raw!r}") from None
    unit = m.group(2)
    table = _UNIT_TABLES[kind]
    if not unit:
        return value
    if unit not in table:
        accepted = ", ".join(sorted(table)) or "none (bare number only)"
        raise ConfigError(path, f"unknown unit {unit!r} for this field (accepted: {accepted})")
    return value * table[unit]


MODES = ("params", "dispersion", "cool", "steady", "sweep", "qswitch")

# field -> (unit kind, positivity: "pos" | "nonneg" | None)
_PHYSICAL_FIELDS: dict[str, tuple[str, str | None]] = {
    "gamma_n": ("gamma", "pos"),
    "B_field": ("bfield", "pos"),
    "J_exchange": ("freq", "pos"),
    "spin_I": ("dimless", "pos"),
    "lattice_const": ("length", "pos"),
    "rho_n": ("density", "pos"),
    "g_onq": ("gonq", "pos"),
    "E_pump": ("efield", "pos"),
    "omega_h": ("freq", "pos"),
    "Q_h": ("dimless", "pos"),
    "temperature": ("temp", "nonneg"),
    "N_spins": ("dimless", "pos"),
    "V_h": ("volume", "pos"),
}
_PHYSICAL_REQUIRED = ("gamma_n", "B_field", "J_exchange", "spin_I", "lattice", "lattice_const")

_EFFECTIVE_FIELDS: dict[str, tuple[str, str | None]] = {
    "omega_0": ("freq", "nonneg"),
    "detuning": ("freq", None),
    "G_h": ("freq", "nonneg"),
    "kappa_0": ("freq", "nonneg"),
    "kappa_h": ("freq", "nonneg"),
    "n_th": ("dimless", "nonneg"),
}
_PARAM_FIELDS = tuple(_EFFECTIVE_FIELDS)


def _check_sign(value: float, path: str, rule: str | None) -> float:
    if rule == "pos" and not value > 0:
        raise ConfigError(path, f"must be positive, got {value}")
    if rule == "nonneg" and value < 0:
        raise ConfigError(path, f"must be >= 0, got {value}")
    return value


def _expect_mapping(block, path: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(path, f"expected a mapping, got {type(block).__name__}")
    return block


def _reject_unknown(block: dict, allowed, path: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else str(key), "unknown key")


def _parse_int(raw, path: str, minimum: int) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ConfigError(path, f"expected an integer, got {raw!r}")
    if raw < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {raw}")
    return raw


@dataclass
class RunSpec:
    label: str
    params: EffectiveParams
    overrides: dict[str, float]


@dataclass
class ResolvedExperiment:
    mode: str
    space: FockSpace
    params: EffectiveParams | None
    provenance: dict[str, str]
    physical: PhysicalConfig | None
    physical_values: dict[str, float | str]
    output_prefix: str
    warnings: list[str] = field(default_factory=list)
    # cool
    t_end: float | None = None
    samples: int = 401
    runs: list[RunSpec] = field(default_factory=list)
    # sweep
    sweep_axes: list[SweepAxis] = field(default_factory=list)
    include_qswitch: bool = False
    qswitch_cycles: int = 6
    # qswitch
    qswitch: QSwitchSchedule | None = None
    samples_per_cycle: int = 40
    # dispersion
    direction: tuple[float, float, float] = (1.0, 1.0, 1.0)
    n_points: int = 101

    def metadata(self) -> dict:
        md: dict = {
            "version": __version__,
            "mode": self.mode,
            "unit_convention": UNIT_CONVENTION,
            "space": {"dim_magnon": self.space.dim_magnon, "dim_photon": self.space.dim_photon},
            "tolerances": {
                "rtol": 1e-8,
                "atol": 1e-10,
                "steady_method": "trace-constrained sparse LU on the vectorized generator",
            },
            "output_prefix": self.output_prefix,
        }
        if self.params is not None:
            md["params"] = {f: getattr(self.params, f) for f in _PARAM_FIELDS}
            md["provenance"] = dict(self.provenance)
        if self.physical_values:
            md["physical"] = dict(self.physical_values)
        if self.mode == "cool":
            md["t_end"] = self.t_end
            md["samples"] = self.samples
            md["runs"] = [
                {"label": r.label, "params": {f: getattr(r.params, f) for f in _PARAM_FIELDS}}
                for r in self.runs
            ]
        if self.mode == "sweep":
            md["axes"] = [{"param": ax.param, "values": list(ax.values)} for ax in self.sweep_axes]
            md["include_qswitch"] = self.include_qswitch
        if self.mode == "qswitch" and self.qswitch is not None:
            md["schedule"] = {
                "kappa_low": self.qswitch.kappa_low,
                "kappa_high": self.qswitch.kappa_high,
                "hold_time": self.qswitch.hold_time,
                "dump_time": self.qswitch.dump_time,
                "cycles": self.qswitch.cycles,
            }
        if self.mode == "dispersion":
            md["direction"] = list(self.direction)
            md["n_points"] = self.n_points
        if self.warnings:
            md["warnings"] = list(self.warnings)
        return md


def _parse_physical(block: dict) -> tuple[PhysicalConfig, dict[str, float | str]]:
    _reject_unknown(block, set(_PHYSICAL_FIELDS) | {"lattice"}, "physical")
    for name in _PHYSICAL_REQUIRED:
        if name not in block:
            raise ConfigError(f"physical.{name}", "required when a physical block is given")
    values: dict[str, float | str] = {}
    lattice = block["lattice"]
    if lattice not in ("simple_cubic", "fcc"):
        raise ConfigError("physical.lattice", f"must be simple_cubic or fcc, got {lattice!r}")
    values["lattice"] = lattice
    for name, (kind, sign) in _PHYSICAL_FIELDS.items():
        if name in block:
            values[name] = _check_sign(
                parse_quantity(block[name], f"physical.{name}", kind), f"physical.{name}", sign
            )
    try:
        cfg = PhysicalConfig(**values)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigError("physical", str(exc)) from exc
    return cfg, values


def _parse_effective(block: dict, path: str = "effective") -> dict[str, float]:
    _reject_unknown(block, set(_EFFECTIVE_FIELDS), path)
    out = {}
    for name, (kind, sign) in _EFFECTIVE_FIELDS.items():
        if name in block:
            out[name] = _check_sign(
                parse_quantity(block[name], f"{path}.{name}", kind), f"{path}.{name}", sign
            )
    return out


def _resolve_params(
    overrides: dict[str, float],
    physical: PhysicalConfig | None,
    n0_ref: float | None,
) -> tuple[EffectiveParams, dict[str, str]]:
    derived = None
    derived_err: str | None = None
    if physical is not None:
        try:
            derived = derive_effective_params(physical, n0_ref)
        except ValueError as exc:
            derived_err = str(exc)
    values: dict[str, float] = {}
    provenance: dict[str, str] = {}
    for name in _PARAM_FIELDS:
        if name in overrides:
            values[name] = overrides[name]
            provenance[name] = "override"
        elif derived is not None:
            values[name] = getattr(derived, name)
            provenance[name] = "derived"
        elif name in ("omega_0", "detuning"):
            values[name] = 0.0
            provenance[name] = "default"
        else:
            hint = (
                f" (derivation from the physical block failed: {derived_err})"
                if derived_err
                else " (no physical block to derive it from)"
            )
            raise ConfigError(f"effective.{name}", "required" + hint)
    return EffectiveParams(**values), provenance


def _parse_axis(spec, idx: int) -> SweepAxis:
    path = f"sweep.axes[{idx}]"
    spec = _expect_mapping(spec, path)
    _reject_unknown(spec, {"param", "from", "to", "points", "spacing", "values"}, path)
    if "param" not in spec:
        raise ConfigError(f"{path}.param", "required")
    param = spec["param"]
    kind = "dimless" if param == "n_th" else "freq"
    if "values" in spec:
        if not isinstance(spec["values"], list) or not spec["values"]:
            raise ConfigError(f"{path}.values", "expected a nonempty list")
        vals = tuple(
            parse_quantity(v, f"{path}.values[{k}]", kind) for k, v in enumerate(spec["values"])
        )
    else:
        for key in ("from", "to", "points"):
            if key not in spec:
                raise ConfigError(f"{path}.{key}", "required (or give explicit values)")
        lo = parse_quantity(spec["from"], f"{path}.from", kind)
        hi = parse_quantity(spec["to"], f"{path}.to", kind)
        pts = _parse_int(spec["points"], f"{path}.points", 1)
        spacing = spec.get("spacing", "log")
        if spacing not in ("log", "linear"):
            raise ConfigError(f"{path}.spacing", f"must be log or linear, got {spacing!r}")
        if pts == 1:
            vals = (lo,)
        elif spacing == "log":
            if lo <= 0:
                raise ConfigError(f"{path}.from", "log spacing needs a positive start")
            vals = tuple(float(v) for v in np.geomspace(lo, hi, pts))
        else:
            vals = tuple(float(v) for v in np.linspace(lo, hi, pts))
    try:
        return SweepAxis(param=param, values=vals)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


_TOP_KEYS = {
    "mode",
    "space",
    "physical",
    "effective",
    "n0_ref",
    "cool",
    "steady",
    "sweep",
    "qswitch",
    "dispersion",
    "output",
}

_PREFIX_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


def resolve_config(raw) -> ResolvedExperiment:
    """Validate and normalize a parsed config mapping; raises ConfigError with key paths."""
    raw = _expect_mapping(raw, "<config>")
    _reject_unknown(raw, _TOP_KEYS, "")

    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")

    space_block = _expect_mapping(raw.get("space", {}), "space")
    _reject_unknown(space_block, {"dim_magnon", "dim_photon"}, "space")
    dim_m = _parse_int(space_block.get("dim_magnon", 12), "space.dim_magnon", 2)
    dim_p = _parse_int(space_block.get("dim_photon", 12), "space.dim_photon", 2)
    space = make_space(dim_m, dim_p)

    physical = None
    physical_values: dict[str, float | str] = {}
    if "physical" in raw:
        physical, physical_values = _parse_physical(_expect_mapping(raw["physical"], "physical"))

    n0_ref = None
    if "n0_ref" in raw:
        n0_ref = _check_sign(parse_quantity(raw["n0_ref"], "n0_ref", "dimless"), "n0_ref", "nonneg")

    overrides = _parse_effective(_expect_mapping(raw.get("effective", {}), "effective"))

    params = None
    provenance: dict[str, str] = {}
    if mode == "cool":
        # per-run overrides may complete a partial top-level set, so a failure
        # here is only fatal if some run leaves the same field unresolved
        try:
            params, provenance = _resolve_params(overrides, physical, n0_ref)
        except ConfigError:
            pass
    elif mode != "dispersion":
        params, provenance = _resolve_params(overrides, physical, n0_ref)

    output_block = _expect_mapping(raw.get("output", {}), "output")
    _reject_unknown(output_block, {"prefix"}, "output")
    prefix = output_block.get("prefix", mode)
    if not isinstance(prefix, str) or not _PREFIX_RE.match(prefix):
        raise ConfigError("output.prefix", f"must match [A-Za-z0-9_.-]+, got {prefix!r}")

    exp = ResolvedExperiment(
        mode=mode,
        space=space,
        params=params,
        provenance=provenance,
        physical=physical,
        physical_values=physical_values,
        output_prefix=prefix,
    )

    if mode == "cool":
        block = _expect_mapping(raw.get("cool", {}), "cool")
        _reject_unknown(block, {"t_end", "samples", "runs"}, "cool")
        if "t_end" not in block:
            raise ConfigError("cool.t_end", "required")
        exp.t_end = parse_quantity(block["t_end"], "cool.t_end", "time")
        if exp.t_end <= 0:
            raise ConfigError("cool.t_end", f"must be positive, got {exp.t_end}")
        exp.samples = _parse_int(block.get("samples", 401), "cool.samples", 2)
        runs_block = block.get("runs", [{"label": "run"}])
        if not isinstance(runs_block, list) or not runs_block:
            raise ConfigError("cool.runs", "expected a nonempty list")
        labels = set()
        for k, run_raw in enumerate(runs_block):
            rpath = f"cool.runs[{k}]"
            run_raw = _expect_mapping(run_raw, rpath)
            _reject_unknown(run_raw, set(_EFFECTIVE_FIELDS) | {"label"}, rpath)
            label = run_raw.get("label", f"run{k + 1}")
            if not isinstance(label, str) or not _PREFIX_RE.match(label):
                raise ConfigError(f"{rpath}.label", f"must match [A-Za-z0-9_.-]+, got {label!r}")
            if label in labels:
                raise ConfigError(f"{rpath}.label", f"duplicate label {label!r}")
            labels.add(label)
            run_over = _parse_effective(
                {k2: v for k2, v in run_raw.items() if k2 != "label"}, rpath
            )
            run_params, _ = _resolve_params({**overrides, **run_over}, physical, n0_ref)
            exp.runs.append(RunSpec(label=label, params=run_params, overrides=run_over))

    elif mode == "steady":
        _reject_unknown(_expect_mapping(raw.get("steady", {}), "steady"), set(), "steady")

    elif mode == "sweep":
        block = _expect_mapping(raw.get("sweep", {}), "sweep")
        _reject_unknown(block, {"axes", "include_qswitch", "qswitch_cycles"}, "sweep")
        axes_raw = block.get("axes")
        if not isinstance(axes_raw, list) or not 1 <= len(axes_raw) <= 3:
            raise ConfigError("sweep.axes", "expected a list of 1 to 3 axes")
        exp.sweep_axes = [_parse_axis(a, i) for i, a in enumerate(axes_raw)]
        inc = block.get("include_qswitch", False)
        if not isinstance(inc, bool):
            raise ConfigError("sweep.include_qswitch", f"expected a boolean, got {inc!r}")
        exp.include_qswitch = inc
        exp.qswitch_cycles = _parse_int(block.get("qswitch_cycles", 6), "sweep.qswitch_cycles", 1)

    elif mode == "qswitch":
        block = _expect_mapping(raw.get("qswitch", {}), "qswitch")
        _reject_unknown(
            block,
            {"kappa_low", "kappa_high", "hold_time", "dump_time", "cycles", "samples_per_cycle"},
            "qswitch",
        )
        cycles = _parse_int(block.get("cycles", 6), "qswitch.cycles", 1)
        exp.samples_per_cycle = _parse_int(
            block.get("samples_per_cycle", 40), "qswitch.samples_per_cycle", 2
        )
        assert params is not None
        try:
            base = default_qswitch_schedule(params, cycles=cycles)
        except ValueError as exc:
            raise ConfigError("effective.G_h", str(exc)) from exc
        fields = {
            "kappa_low": base.kappa_low,
            "kappa_high": base.kappa_high,
            "hold_time": base.hold_time,
            "dump_time": base.dump_time,
        }
        for name in ("kappa_low", "kappa_high"):
            if name in block:
                fields[name] = parse_quantity(block[name], f"qswitch.{name}", "freq")
        for name in ("hold_time", "dump_time"):
            if name in block:
                fields[name] = parse_quantity(block[name], f"qswitch.{name}", "time")
        try:
            exp.qswitch = QSwitchSchedule(cycles=cycles, **fields)
        except ValueError as exc:
            raise ConfigError("qswitch", str(exc)) from exc

    elif mode == "dispersion":
        if physical is None:
            raise ConfigError("physical", "required for dispersion mode")
        block = _expect_mapping(raw.get("dispersion", {}), "dispersion")
        _reject_unknown(block, {"direction", "n_points"}, "dispersion")
        direction = block.get("direction", [1, 1, 1])
        if (
            not isinstance(direction, list)
            or len(direction) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in direction)
        ):
            raise ConfigError("dispersion.direction", f"expected 3 numbers, got {direction!r}")
        if all(v == 0 for v in direction):
            raise ConfigError("dispersion.direction", "must not be the zero vector")
        exp.direction = tuple(float(v) for v in direction)
        exp.n_points = _parse_int(block.get("n_points", 101), "dispersion.n_points", 2)

    # physics sanity heuristics (warnings, not errors)
    n_th_seen = [r.params.n_th for r in exp.runs]
    if params is not None:
        n_th_seen.append(params.n_th)
    if n_th_seen and max(n_th_seen) * 6 >= space.dim_magnon:
        exp.warnings.append(
            f"space.dim_magnon: truncation may be inadequate for n_th = {max(n_th_seen)} "
            f"(heuristic wants 6*n_th < dim, got dim = {space.dim_magnon})"
        )
    return exp


def validate_config(raw) -> dict:
    """Dry-run report: schema plus sanity checks, no solving."""
    violations: list[dict[str, str]] = []
    warnings: list[str] = []
    try:
        exp = resolve_config(raw)
        warnings.extend(exp.warnings)
    except ConfigError as exc:
        violations.append({"path": exc.path, "message": str(exc)})
    return {"ok": not violations, "violations": violations, "warnings": warnings}
