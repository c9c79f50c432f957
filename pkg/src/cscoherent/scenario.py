"""Strict JSON scenario files.

A scenario names a model, a schedule, how to build the classical
trajectory, the quantum state(s), the quadrature, the validation suites and
their tolerances. Unknown keys anywhere are rejected before any computation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .classical import explicit_trajectory, periodic_envelope
from .exceptions import CSError, ConfigError
from .integration import QuadratureSpec
from .models import ModelSpec, SpectrumLabel
from .schedule import ParameterSchedule
from .wavefunctions import SymmetricPolynomial

SUITES = ("eigen", "schrodinger", "orthogonality", "unitary", "superposition", "eq22", "eq36", "floquet")

DEFAULT_TOLERANCES = {
    "eigen_residual": 1e-6,
    "convergence_order": 0.2,
    "schrodinger_residual": 1e-5,
    "gram_offdiag": 1e-3,
    "mc_sigmas": 3.0,
    "unitary_defect": 1e-10,
    "superposition_ratio": 1e-10,
    "eq22_defect": 1e-5,
    "eq36_defect": 1e-5,
    "route_agreement": 1e-5,
    "gamma_discrepancy": 1e-4,
    "quasi_periodicity": 1e-6,
    "wronskian_drift": 1e-10,
    "determinant": 1e-10,
    "periodicity_defect": 1e-8,
}

_MODEL_KEYS = {"variant", "N", "lambda", "alpha", "hbar", "allow_weak_coupling", "w_cross"}
_SCHEDULE_KEYS = {"M", "w2", "tau"}
_TRAJ_KEYS = {"mode", "u0", "udot0", "v0", "vdot0", "uf0", "ufdot0", "steps", "tau_prime",
              "zero_nonperiodic_uf"}
_LABEL_KEYS = {"m", "n", "k", "level", "radial", "polynomial"}
_QUANTUM_KEYS = _LABEL_KEYS | {"states", "w_constant"}
_QUAD_KEYS = {"method", "points_per_dim", "samples", "seed", "eps_guard", "fd_step_x", "fd_step_t",
              "strict", "threads", "time_nodes"}
_PHASE_KEYS = {"dressing_rule", "eq36_form"}
_SWEEP_KEYS = {"parameter", "values"}
_TOP_KEYS = {"model", "schedule", "trajectory", "quantum", "quadrature", "suites", "tolerances",
             "output_dir", "sweep", "phase", "description"}
SWEEP_PARAMETERS = ("lambda", "alpha", "hbar", "v_amplitude", "label")


def _check_keys(block, allowed, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object")
    extra = sorted(set(block) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _require(block, keys, where):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(missing)}")


@dataclass(frozen=True)
class StateEntry:
    label: SpectrumLabel
    poly: SymmetricPolynomial | None = None

    def to_dict(self):
        out = self.label.to_dict()
        if self.poly is not None:
            out["polynomial"] = self.poly.to_records()
        return out


@dataclass(frozen=True)
class Scenario:
    model: ModelSpec
    schedule: ParameterSchedule
    trajectory: dict
    states: tuple
    quadrature: QuadratureSpec
    suites: tuple = ()
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "out"
    time_nodes: int = 64
    w_constant: float | None = None
    dressing_rule: str = "invariant"
    eq36_form: str = "printed"
    sweep: dict | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def state(self) -> StateEntry:
        return self.states[0]

    def build_trajectory(self, schedule: ParameterSchedule | None = None):
        schedule = self.schedule if schedule is None else schedule
        t = self.trajectory
        steps = int(t.get("steps", 4096))
        uf = (float(t.get("uf0", 0.0)), float(t.get("ufdot0", 0.0)))
        zero = bool(t.get("zero_nonperiodic_uf", True))
        tau_prime = t.get("tau_prime")
        tau_prime = None if tau_prime is None else float(ParameterSchedule("1", "1", tau_prime).tau)
        if t["mode"] == "floquet":
            return periodic_envelope(schedule, *uf, steps=steps, tau_prime=tau_prime,
                                     zero_nonperiodic_uf=zero)
        return explicit_trajectory(schedule, float(t["u0"]), float(t["udot0"]), float(t["v0"]),
                                   float(t["vdot0"]), *uf, tau_prime=tau_prime, steps=steps,
                                   zero_nonperiodic_uf=zero)

    def with_seed(self, seed):
        return replace(self, quadrature=replace(self.quadrature, seed=int(seed)))

    def with_threads(self, threads):
        return replace(self, quadrature=replace(self.quadrature, threads=int(threads)))

    def with_strict(self, strict=True):
        return replace(self, quadrature=replace(self.quadrature, strict=bool(strict)))

    def echo(self):
        return self.raw


def _parse_poly(value, N, where):
    if value is None:
        return None
    if isinstance(value, dict):
        _check_keys(value, {"centered_power_sum"}, where)
        return SymmetricPolynomial.centered_power_sum(N, int(value["centered_power_sum"]))
    if isinstance(value, list):
        for i, rec in enumerate(value):
            _check_keys(rec, {"exponents", "coeff"}, f"{where}[{i}]")
            _require(rec, ("exponents", "coeff"), f"{where}[{i}]")
        return SymmetricPolynomial.from_records(value)
    raise ConfigError(f"{where} must be a list of terms or {{'centered_power_sum': k}}")


def _parse_state(block, spec, where):
    _check_keys(block, _LABEL_KEYS, where)
    label = SpectrumLabel(**{k: block[k] for k in ("m", "n", "k", "level", "radial") if k in block})
    label.validate(spec)
    return StateEntry(label, _parse_poly(block.get("polynomial"), spec.N, f"{where}.polynomial"))


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded scenario document; raises :class:`ConfigError`."""
    try:
        return _parse(doc)
    except ConfigError:
        raise
    except (CSError, TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def _parse(doc):
    _check_keys(doc, _TOP_KEYS, "scenario")
    _require(doc, ("model", "schedule", "trajectory", "quantum"), "scenario")
    m = doc["model"]
    _check_keys(m, _MODEL_KEYS, "model")
    _require(m, ("variant", "N", "lambda"), "model")
    spec = ModelSpec(m["variant"], m["N"], float(m["lambda"]),
                     None if m.get("alpha") is None else float(m["alpha"]),
                     float(m.get("hbar", 1.0)), bool(m.get("allow_weak_coupling", False)),
                     m.get("w_cross", "derived"))

    s = doc["schedule"]
    _check_keys(s, _SCHEDULE_KEYS, "schedule")
    _require(s, ("M", "w2", "tau"), "schedule")
    schedule = ParameterSchedule(str(s["M"]), str(s["w2"]), s["tau"]).validate()

    t = doc["trajectory"]
    _check_keys(t, _TRAJ_KEYS, "trajectory")
    _require(t, ("mode",), "trajectory")
    if t["mode"] == "explicit":
        _require(t, ("u0", "udot0", "v0", "vdot0"), "trajectory")
    elif t["mode"] != "floquet":
        raise ConfigError("trajectory.mode must be 'floquet' or 'explicit'")

    q = doc["quantum"]
    _check_keys(q, _QUANTUM_KEYS, "quantum")
    if "states" in q:
        if set(q) & _LABEL_KEYS:
            raise ConfigError("quantum takes either a single label or a 'states' list, not both")
        if not isinstance(q["states"], list) or not q["states"]:
            raise ConfigError("quantum.states must be a non-empty list")
        entries = [_parse_state(st, spec, f"quantum.states[{i}]") for i, st in enumerate(q["states"])]
    else:
        entries = [_parse_state({k: v for k, v in q.items() if k in _LABEL_KEYS}, spec, "quantum")]

    qd = dict(doc.get("quadrature", {}))
    _check_keys(qd, _QUAD_KEYS, "quadrature")
    time_nodes = int(qd.pop("time_nodes", 64))
    if time_nodes < 64 or time_nodes % 2:
        raise ConfigError("quadrature.time_nodes must be even and at least 64")
    quad = QuadratureSpec(**qd)

    suites = doc.get("suites", [])
    if not isinstance(suites, list) or any(x not in SUITES for x in suites):
        raise ConfigError(f"suites must be a list drawn from {SUITES}")

    tol = dict(DEFAULT_TOLERANCES)
    user_tol = doc.get("tolerances", {})
    _check_keys(user_tol, set(DEFAULT_TOLERANCES), "tolerances")
    for k, v in user_tol.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"tolerance {k!r} must be a positive number")
        tol[k] = float(v)

    ph = doc.get("phase", {})
    _check_keys(ph, _PHASE_KEYS, "phase")
    dressing_rule = ph.get("dressing_rule", "invariant")
    eq36_form = ph.get("eq36_form", "printed")
    if dressing_rule not in ("invariant", "energy") or eq36_form not in ("printed", "corrected"):
        raise ConfigError("phase.dressing_rule in {invariant, energy}; phase.eq36_form in {printed, corrected}")

    sweep = doc.get("sweep")
    if sweep is not None:
        _check_keys(sweep, _SWEEP_KEYS, "sweep")
        _require(sweep, ("parameter", "values"), "sweep")
        if sweep["parameter"] not in SWEEP_PARAMETERS or not isinstance(sweep["values"], list):
            raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS} with a list of values")

    w_constant = q.get("w_constant")
    return Scenario(model=spec, schedule=schedule, trajectory=dict(t), states=tuple(entries),
                    quadrature=quad, suites=tuple(suites), tolerances=tol,
                    output_dir=str(doc.get("output_dir", "out")), time_nodes=time_nodes,
                    w_constant=None if w_constant is None else float(w_constant),
                    dressing_rule=dressing_rule, eq36_form=eq36_form, sweep=sweep, raw=doc)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
