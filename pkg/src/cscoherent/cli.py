"""Command-line front end: ``cscoherent {classical,validate,phase,sweep} --scenario FILE``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .classical import stability
from .exceptions import (BranchError, ConfigError, DomainError, InstabilityError, QuasiPeriodicityError,
                         ScheduleError, SectorError, TruncationError)
from .models import energy_eigenvalue
from .phase import geometric_phase_closed, measure_global_phase, phase_report
from .scenario import StateEntry, load_scenario, _parse_state
from .validation import run_suites
from .wavefunctions import CoherentState

log = logging.getLogger("cscoherent")

EXIT_OK, EXIT_FAIL, EXIT_QUASI, EXIT_UNSTABLE, EXIT_CONFIG = 0, 1, 2, 3, 4
PHASE_CSV_HEADER = ("t", "H_exp_re", "H_exp_im", "overlap_dt_im")
SWEEP_CSV_HEADER = ("parameter", "gamma", "chi", "E")


def _dump(obj, path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n")


def _fmt(x):
    return format(float(x), ".17g")


def _write_metadata(out, command, scn):
    meta = {"command": command, "version": __version__, "seed": int(scn.quadrature.seed),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}
    _dump(meta, out / "metadata.json")


# -- commands ---------------------------------------------------------------


def cmd_classical(scn, out, args):
    T, tr, stable = stability(scn.schedule, int(scn.trajectory.get("steps", 4096)))
    report = {"trace": tr, "det": float(np.linalg.det(T)), "tau_prime": None, "stable": stable}
    if not stable and scn.trajectory["mode"] == "floquet":
        _dump(report, out / "monodromy.json")
        log.error("unstable schedule: monodromy trace %.12g outside [-2, 2]", tr)
        return EXIT_UNSTABLE
    traj = scn.build_trajectory()
    report["tau_prime"] = traj.tau_prime
    report["omega"] = traj.omega
    report["rho_periodicity_defect"] = traj.periodicity_defect()
    traj.write_csv(out / "trajectory.csv")
    _dump(report, out / "monodromy.json")
    if not stable:
        log.error("unstable schedule: monodromy trace %.12g outside [-2, 2]", tr)
        return EXIT_UNSTABLE
    return EXIT_OK


def cmd_validate(scn, out, args):
    rows = run_suites(scn)
    _dump(rows, out / "validation.json")
    failed = [r for r in rows if not r["pass"]]
    for r in failed:
        log.warning("FAIL %s/%s %s = %.3g (tol %s)", r["suite"], r["case"], r["metric"], r["value"], r["tolerance"])
    return EXIT_FAIL if failed else EXIT_OK


def _phase_of(scn, traj, entry, threads):
    if not traj.rho_periodic:
        raise QuasiPeriodicityError("the envelope is not periodic over tau'")
    state = CoherentState(scn.model, entry.label, traj, poly=entry.poly, w_constant=scn.w_constant)
    return phase_report(state, scn.schedule, scn.quadrature, n_nodes=scn.time_nodes, threads=threads,
                        dressing_rule=scn.dressing_rule, tol=scn.tolerances["quasi_periodicity"])


def cmd_phase(scn, out, args):
    traj = scn.build_trajectory()
    rep = _phase_of(scn, traj, scn.state, args.threads or scn.quadrature.threads)
    doc = rep.to_dict()
    doc["scenario"] = scn.echo()
    doc["tolerances"] = scn.tolerances
    _dump(doc, out / "phase_report.json")
    with open(out / "phase_nodes.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PHASE_CSV_HEADER)
        for q in rep.nodes:
            w.writerow([_fmt(q.t), _fmt(q.H_exp.real), _fmt(q.H_exp.imag), _fmt(q.dt_overlap.imag)])
    ok = rep.disc_routes < scn.tolerances["route_agreement"] and rep.disc_gamma < scn.tolerances["gamma_discrepancy"]
    return EXIT_OK if ok else EXIT_FAIL


def _sweep_point(scn, parameter, value):
    """Scenario, state and printable parameter for one sweep value."""
    if parameter in ("lambda", "alpha", "hbar"):
        field = {"lambda": "lam"}.get(parameter, parameter)
        spec = replace(scn.model, **{field: float(value)})
        entries = tuple(StateEntry(e.label.validate(spec), e.poly) for e in scn.states)
        return replace(scn, model=spec, states=entries), entries[0], _fmt(value)
    if parameter == "v_amplitude":
        if scn.trajectory["mode"] != "explicit":
            raise ConfigError("v_amplitude sweeps need an explicit trajectory")
        traj = dict(scn.trajectory, vdot0=float(value))
        return replace(scn, trajectory=traj), scn.state, _fmt(value)
    entry = _parse_state(value, scn.model, "sweep.values")
    name = ";".join(f"{k}={v}" for k, v in entry.label.to_dict().items() if v) or "ground"
    return scn, entry, name


def cmd_sweep(scn, out, args):
    if scn.sweep is None:
        raise ConfigError("scenario has no sweep block")
    parameter = scn.sweep["parameter"]
    rows, failures = [], 0
    for value in scn.sweep["values"]:
        try:
            point, entry, name = _sweep_point(scn, parameter, value)
            traj = point.build_trajectory()
            state = CoherentState(point.model, entry.label, traj, poly=entry.poly, w_constant=point.w_constant)
            chi, _ = measure_global_phase(state, tol=point.tolerances["quasi_periodicity"])
            gamma = geometric_phase_closed(point.model, entry.label, traj, point.dressing_rule)
            E = energy_eigenvalue(point.model, entry.label)
            rows.append([name, _fmt(gamma), _fmt(chi), _fmt(E)])
        except ConfigError:
            raise
        except (DomainError, InstabilityError, QuasiPeriodicityError, BranchError, ScheduleError) as exc:
            log.warning("sweep point %r failed: %s", value, exc)
            failures += 1
            rows.append([json.dumps(value, sort_keys=True) if isinstance(value, dict) else _fmt(value),
                         "nan", "nan", "nan"])
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_CSV_HEADER)
        w.writerows(rows)
    return EXIT_FAIL if failures else EXIT_OK


COMMANDS = {"classical": cmd_classical, "validate": cmd_validate, "phase": cmd_phase, "sweep": cmd_sweep}


def build_parser():
    p = argparse.ArgumentParser(prog="cscoherent", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="output directory (default: the scenario's output_dir)")
    p.add_argument("--strict", action="store_true", help="treat quadrature truncation warnings as errors")
    p.add_argument("--seed", type=int, help="override the Monte Carlo seed (unsigned 64-bit)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for sector integrals")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        scn = load_scenario(args.scenario)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            scn = scn.with_seed(args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be positive")
            scn = scn.with_threads(args.threads)
        if args.strict:
            scn = scn.with_strict()
        out = Path(args.out or scn.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, DomainError, ScheduleError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    try:
        code = COMMANDS[args.command](scn, out, args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except QuasiPeriodicityError as exc:
        log.error("quasi-periodicity violation: %s", exc)
        code = EXIT_QUASI
    except InstabilityError as exc:
        log.error("classical instability: %s", exc)
        code = EXIT_UNSTABLE
    except (DomainError, SectorError, TruncationError, BranchError, ScheduleError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        code = EXIT_FAIL
    _write_metadata(out, args.command, scn)
    return code


if __name__ == "__main__":
    sys.exit(main())
