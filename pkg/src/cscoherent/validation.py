"""Validation suites producing flat ``{suite, case, metric, value, tolerance, pass}`` rows."""

from __future__ import annotations

import math
from dataclasses import replace
from statistics import NormalDist

import numpy as np

from .classical import monodromy
from .integration import (Envelope, eigen_residual, fit_w_excited_constant,
                          gram_matrix, node_quantities)
from .models import SpectrumLabel, energy_eigenvalue, sector_contains
from .phase import default_probes, eq22_rhs, eq36_defect, simpson
from .wavefunctions import CoherentState, coherent_by_transform, eval_coherent, superpose_radial

CONVERGENCE_STEPS = (4e-3, 2e-3, 1e-3)


def row(suite, case, metric, value, tolerance, passed=None):
    value = float(value)
    if passed is None:
        passed = bool(np.isfinite(value) and value < tolerance)
    return {"suite": suite, "case": case, "metric": metric, "value": value,
            "tolerance": None if tolerance is None else float(tolerance), "pass": bool(passed)}


def _case(label, poly=None):
    parts = [f"{k}={v}" for k, v in label.to_dict().items() if v]
    if poly is not None:
        parts.append(f"P(deg {poly.degree})")
    return ",".join(parts) or "ground"


def _states(scn):
    return [(e.label, e.poly) for e in scn.states]


def sector_points(spec, count, seed=7, scale=1.0, center=0.0):
    """Random sector points around the oscillator scale (deterministic)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = rng.normal(center, scale * math.sqrt(spec.hbar), size=(4 * count, spec.N))
        if spec.variant == "B":
            x = np.abs(x)
        x = np.sort(x, axis=-1)
        out.extend(x[sector_contains(spec, x, 1e-2)])
    return np.array(out[:count])


# -- suites ---------------------------------------------------------------


def suite_eigen(scn, traj=None):
    spec, quad, tol = scn.model, replace(scn.quadrature, method="tensor"), scn.tolerances
    rows = []
    for label, poly in _states(scn):
        wc = scn.w_constant
        if spec.variant == "W" and label.level == 1 and wc is None:
            wc, _ = fit_w_excited_constant(spec, quad)
            rows.append(row("eigen", _case(label), "fitted_constant", wc, None, True))
        res = eigen_residual(spec, label, quad, poly=poly, w_constant=wc)
        rows.append(row("eigen", _case(label, poly), "relative_residual", res, tol["eigen_residual"]))
        r = [eigen_residual(spec, label, quad, fd_step=h * math.sqrt(spec.hbar), poly=poly, w_constant=wc)
             for h in CONVERGENCE_STEPS]
        order = math.log2(r[1] / r[2])
        rows.append(row("eigen", _case(label, poly), "convergence_order", abs(order - 2.0),
                        tol["convergence_order"]))
    return rows


def residual_times(traj, count=5):
    return [traj.tau_prime * (j + 0.5) / count for j in range(count)]


def suite_schrodinger(scn, traj):
    rows = []
    for label, poly in _states(scn):
        st = CoherentState(scn.model, label, traj, poly=poly, w_constant=scn.w_constant)
        worst = max(node_quantities(st, scn.schedule, t, scn.quadrature).residual for t in residual_times(traj))
        rows.append(row("schrodinger", _case(label, poly), "max_relative_residual", worst,
                        scn.tolerances["schrodinger_residual"]))
    return rows


def gram_states(spec):
    """The state family used for Gram matrices of each variant."""
    if spec.variant == "A":
        return [SpectrumLabel(m, n) for m in range(3) for n in range(3) if m + n <= 2]
    if spec.variant == "W":
        return [SpectrumLabel(level=0), SpectrumLabel(level=1)]
    return [SpectrumLabel(n=n) for n in range(3)]


def gram_report(spec, traj, t, quad, w_constant=None):
    labels = gram_states(spec)
    psis = [lambda x, lab=lab: eval_coherent(spec, lab, traj, t, x, w_constant=w_constant, check=False)
            for lab in labels]
    pt = traj.at(float(t))
    energy = max(energy_eigenvalue(spec, lab) for lab in labels)
    env = Envelope(center=float(pt.u_f), rho=float(pt.rho), omega=float(pt.omega), energy=energy,
                   hbar=spec.hbar)
    G, err = gram_matrix(psis, spec, quad, env)
    return labels, G, err


def _offdiag_mass(G):
    d = np.sqrt(np.abs(np.diag(G)).real)
    rel = np.abs(G) / np.outer(d, d)
    np.fill_diagonal(rel, 0.0)
    return rel


def familywise_sigma(sigmas: float, count: int) -> float:
    """Per-entry z threshold giving a ``sigmas``-level false-alarm rate over ``count`` entries (Sidak)."""
    nd = NormalDist()
    p_family = 2 * (1 - nd.cdf(sigmas))
    p_each = 1 - (1 - p_family) ** (1.0 / count)
    return nd.inv_cdf(1 - p_each / 2)


def suite_orthogonality(scn, traj):
    spec, tol = scn.model, scn.tolerances
    t = traj.tau_prime / 3
    rows = []
    tensor = replace(scn.quadrature, method="tensor")
    mc = replace(scn.quadrature, method="montecarlo")
    G_t = None
    if spec.N <= 3:
        _, G_t, _ = gram_report(spec, traj, t, tensor, scn.w_constant)
        rows.append(row("orthogonality", "tensor", "max_offdiag_relative", _offdiag_mass(G_t).max(),
                        tol["gram_offdiag"]))
    labels, G_m, err = gram_report(spec, traj, t, mc, scn.w_constant)
    k = len(labels)
    upper = np.triu_indices(k, 1)
    z = np.abs(G_m[upper]) / err[upper]
    rows.append(row("orthogonality", "montecarlo", "max_offdiag_sigma", z.max(),
                    familywise_sigma(tol["mc_sigmas"], z.size)))
    if G_t is not None:
        both = np.triu_indices(k)
        zc = np.abs(G_m - G_t)[both] / np.maximum(err[both], 1e-300)
        rows.append(row("orthogonality", "tensor_vs_montecarlo", "max_sigma", zc.max(),
                        familywise_sigma(tol["mc_sigmas"], zc.size)))
    return rows


def suite_unitary(scn, traj, points=50, times=8):
    spec = scn.model
    rows = []
    for label, poly in _states(scn):
        worst = 0.0
        for j in range(times):
            t = traj.tau_prime * j / times
            pt = traj.at(t)
            x = sector_points(spec, points, seed=11 + j, scale=float(pt.rho / math.sqrt(pt.omega)),
                              center=0.0 if spec.variant == "B" else float(pt.u_f))
            a = eval_coherent(spec, label, traj, t, x, poly=poly, w_constant=scn.w_constant)
            b = coherent_by_transform(spec, label, traj, t, x, poly=poly, w_constant=scn.w_constant)
            worst = max(worst, float(np.max(np.abs(a - b) / np.abs(a))))
        rows.append(row("unitary", _case(label, poly), "max_relative_defect", worst, scn.tolerances["unitary_defect"]))
    return rows


def superposition_ratio(spec, n, x, traj=None, t=None):
    """``(constant, spread)`` of the pointwise ratio of the two expansion sides."""
    closed, summed = superpose_radial(spec, n, x, traj, t)
    ratio = closed / summed
    return complex(ratio[0]), float(np.max(np.abs(ratio / ratio[0] - 1)))


def suite_superposition(scn, traj, max_n=4, points=20):
    spec = scn.model
    if spec.variant != "A":
        return []
    rows = []
    x = sector_points(spec, points, seed=3)
    for n in range(max_n + 1):
        c, spread = superposition_ratio(spec, n, x)
        rows.append(row("superposition", f"n={n}", "ratio_spread", spread, scn.tolerances["superposition_ratio"]))
        rows.append(row("superposition", f"n={n}", "ratio_constant", c.real, None, True))
        if traj is not None and not traj.has_displacement:
            _, spread_t = superposition_ratio(spec, n, x, traj, traj.tau_prime / 3)
            rows.append(row("superposition", f"n={n},coherent", "ratio_spread", spread_t,
                            scn.tolerances["superposition_ratio"]))
    return rows


def eq22_check(spec, label, traj, quad, times):
    """Pointwise real-part defect and the period integral of the imaginary part."""
    worst = 0.0
    for t in times:
        st = CoherentState(spec, label, traj)
        lhs = node_quantities(st, None if traj is None else traj.schedule, t, quad).dt_overlap / 1j
        rhs = eq22_rhs(spec, label, traj, t)
        worst = max(worst, abs(rhs.real - lhs.real) / max(1.0, abs(lhs.real)))
    k = int(round(traj.tau_prime / traj.step))
    grid = traj.grid[traj.i0: traj.i0 + k + 1]
    stride = max(1, k // 256)
    if (k // stride) * stride != k or (k // stride) % 2:
        stride = 1
    im = [eq22_rhs(spec, label, traj, t).imag for t in grid[::stride]]
    h = traj.step * stride
    im_int = float(simpson(im, h))
    return worst, abs(im_int)


def suite_eq22(scn, traj):
    spec = scn.model
    if spec.variant != "A":
        return []
    rows = []
    for label, poly in _states(scn):
        if label.radial or label.k:
            continue
        re_def, im_int = eq22_check(spec, label, traj, scn.quadrature, [0.4, traj.tau_prime / 3])
        rows.append(row("eq22", _case(label), "real_part_defect", re_def, scn.tolerances["eq22_defect"]))
        rows.append(row("eq22", _case(label), "imag_part_period_integral", im_int, scn.tolerances["eq22_defect"]))
    return rows


def suite_eq36(scn, traj):
    spec = scn.model
    if spec.variant != "W":
        return []
    probes = default_probes(spec, traj)
    corrected = scn.eq36_form == "corrected"
    worst = max(eq36_defect(spec, traj, t, probes, corrected=corrected) for t in residual_times(traj, 4))
    return [row("eq36", scn.eq36_form, "max_ratio_defect", worst, scn.tolerances["eq36_defect"])]


def suite_floquet(scn, traj):
    tol = scn.tolerances
    T = monodromy(scn.schedule)
    tr = float(np.trace(T))
    rows = [row("floquet", "monodromy", "det_minus_one", abs(np.linalg.det(T) - 1), tol["determinant"]),
            row("floquet", "monodromy", "trace", tr, None, True)]
    if traj is not None:
        W = traj.wronskian()
        rows.append(row("floquet", "trajectory", "wronskian_drift",
                        float(np.max(np.abs(W - W[traj.i0])) / abs(W[traj.i0])), tol["wronskian_drift"]))
        rows.append(row("floquet", "trajectory", "rho_periodicity_defect", traj.periodicity_defect(),
                        tol["periodicity_defect"]))
    return rows


SUITE_FUNCS = {
    "eigen": suite_eigen,
    "schrodinger": suite_schrodinger,
    "orthogonality": suite_orthogonality,
    "unitary": suite_unitary,
    "superposition": suite_superposition,
    "eq22": suite_eq22,
    "eq36": suite_eq36,
    "floquet": suite_floquet,
}


def run_suites(scn, traj=None):
    """Run the scenario's suites in order; builds the trajectory if any suite needs one."""
    if traj is None and any(name != "eigen" for name in scn.suites):
        traj = scn.build_trajectory()
    rows = []
    for name in scn.suites:
        rows.extend(SUITE_FUNCS[name](scn, traj))
    return rows
