"""Global, dynamical and geometric phases of quasi-periodic coherent states."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, QuasiPeriodicityError, UnsupportedClosedForm
from .integration import QuadratureSpec, node_quantities, time_derivative
from .models import ModelSpec, SpectrumLabel, energy_eigenvalue, sector_contains
from .wavefunctions import eval_coherent

CONSTANCY_TOL = 1e-6


def simpson(y, h):
    """Composite Simpson rule for an odd number of equally spaced samples."""
    y = np.asarray(y)
    if y.size < 3 or y.size % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number (>= 3) of samples")
    return h / 3 * (y[0] + y[-1] + 4 * np.sum(y[1:-1:2]) + 2 * np.sum(y[2:-1:2]))


def _period_samples(traj, values):
    """Restrict grid samples to [0, tau'] and integrate them."""
    k = int(round(traj.tau_prime / traj.step))
    sl = slice(traj.i0, traj.i0 + k + 1)
    y = np.asarray(values)[sl]
    if y.size % 2 == 0:
        raise ValueError("tau' must span an even number of grid steps")
    return simpson(y, traj.step)


def envelope_integrals(traj):
    """``(int Omega/(M rho^2), int M rho'^2/Omega, int M u_f'^2)`` over one period."""
    M = traj.M_grid
    rho = traj.rho
    rate = traj.omega / (M * rho**2)
    squeeze = M * traj.rho_dot**2 / traj.omega
    disp = M * traj.u_f_dot**2
    return (float(_period_samples(traj, rate)), float(_period_samples(traj, squeeze)),
            float(_period_samples(traj, disp)))


def default_probes(spec: ModelSpec, traj, count: int = 10, seed: int = 12345):
    """Deterministic sector points drawn from the t = 0 envelope."""
    pt = traj.at(0.0)
    sigma = float(pt.rho) * math.sqrt(spec.hbar / pt.omega)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = rng.normal(float(pt.u_f), sigma, size=(4 * count, spec.N))
        if spec.variant == "B":
            x = np.abs(x)
        x = np.sort(x, axis=-1)
        keep = sector_contains(spec, x, 1e-2 * sigma)
        out.extend(x[keep])
    return np.array(out[:count])


def measure_global_phase(state, probe_points=None, tol: float = CONSTANCY_TOL, raise_on_defect: bool = True):
    """Winding-resolved phase ``chi`` acquired over one period ``tau'``.

    The argument of ``psi(t, x0)`` is followed continuously along the
    trajectory grid at the probe that stays farthest from a node; the ratio
    ``psi(tau')/psi(0)`` at every probe then validates ``exp(i chi)``.
    Returns ``(chi, constancy_defect)``.
    """
    traj = state.traj
    probes = default_probes(state.spec, traj) if probe_points is None else np.asarray(probe_points, float)
    k = int(round(traj.tau_prime / traj.step))
    times = traj.grid[traj.i0: traj.i0 + k + 1]
    vals = np.array([state(t, probes) for t in times])
    mags = np.abs(vals)
    quality = mags.min(axis=0) / mags.max(axis=0)
    ref = int(np.argmax(quality))
    phases = np.unwrap(np.angle(vals[:, ref]))
    chi = float(phases[-1] - phases[0])
    ratio = vals[-1] / vals[0]
    defect = float(np.max(np.abs(ratio * np.exp(-1j * chi) - 1)))
    if raise_on_defect and defect > tol:
        raise QuasiPeriodicityError(f"state is not quasi-periodic: defect {defect:.3g} > {tol:g}")
    return chi, defect


def closed_form_chi(spec: ModelSpec, label: SpectrumLabel, traj) -> float:
    """``-(E/hbar) int_0^tau' Omega/(M rho^2) dt``; available for variant A only."""
    if spec.variant != "A":
        raise UnsupportedClosedForm(f"no closed-form global phase for variant {spec.variant}")
    E = energy_eigenvalue(spec, label)
    return -E / spec.hbar * envelope_integrals(traj)[0]


def geometric_phase_closed(spec: ModelSpec, label: SpectrumLabel, traj, dressing_rule: str = "invariant") -> float:
    """Closed-form geometric phase from the classical solutions.

    ``dressing_rule="invariant"`` gives a dressed A state the phase of its
    undressed parent; ``"energy"`` scales the squeezing term with the full
    dressed energy instead.
    """
    if not traj.rho_periodic:
        raise DomainError("geometric phase requires a periodic envelope")
    if spec.variant != "A" and traj.has_displacement:
        raise DomainError(f"variant {spec.variant} uses squeeze-only coherent states")
    _, squeeze, disp = envelope_integrals(traj)
    h = spec.hbar
    if spec.variant == "A":
        E = energy_eigenvalue(spec, label)
        if label.k and dressing_rule == "invariant":
            E -= h * label.k
        elif dressing_rule not in ("invariant", "energy"):
            raise DomainError(f"unknown dressing rule {dressing_rule!r}")
        return spec.N / h * disp + E / h * squeeze
    return energy_eigenvalue(spec, label) / h * squeeze


def _nodes(state, schedule, quad, n_nodes, threads):
    if n_nodes < 2 or n_nodes % 2:
        raise ValueError("the number of time intervals must be even")
    times = np.linspace(0.0, state.traj.tau_prime, n_nodes + 1)
    work = lambda t: node_quantities(state, schedule, float(t), quad)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(work, times))
    return [work(t) for t in times]


def dynamical_phase(state, schedule, quad: QuadratureSpec, n_nodes: int = 64, threads: int = 1):
    """``(1/hbar) int Re <H> dt`` and ``i int <psi|d/dt psi> dt`` over one period.

    Returns ``(dyn, berry, nodes)`` where ``nodes`` holds the per-time integrals.
    """
    nodes = _nodes(state, schedule, quad, n_nodes, threads)
    h = state.traj.tau_prime / n_nodes
    dyn = float(simpson([q.H_exp.real for q in nodes], h)) / state.spec.hbar
    berry = float((1j * simpson([q.dt_overlap for q in nodes], h)).real)
    return dyn, berry, nodes


def eq22_rhs(spec: ModelSpec, label: SpectrumLabel, traj, t: float) -> complex:
    """Right-hand side of the derivative identity for ``(1/i)<psi|d/dt psi>/<psi|psi>``.

    Evaluated exactly as printed; its imaginary part is ``-(b + 3/2) rho'/rho``
    pointwise (the exact left-hand side is real) and integrates to zero.
    """
    if spec.variant != "A" or label.radial or label.k:
        raise DomainError("the identity is stated for undressed (m, n) states of variant A")
    pt = traj.at(float(t))
    h, N = spec.hbar, spec.N
    E = energy_eigenvalue(spec, label)
    q = label.m + 2 * label.n
    chi_dot = -E / h * pt.omega / (pt.M * pt.rho**2)
    kick_dot = -pt.M * pt.w2 * pt.u_f  # d/dt (M u_f') from the equation of motion
    return complex(chi_dot + N * pt.u_f / h * kick_dot + 1j * q * pt.rho_dot / pt.rho
                   + 1j * (q + spec.b + 1.5) * pt.rho**2 / (2 * pt.omega) * pt.squeeze_dot)


def eq36_rhs(spec: ModelSpec, traj, t: float, x, corrected: bool = False):
    """Right-hand side of the W-model relation for ``(1/i) d/dt psi_0`` at ``x``.

    ``corrected=True`` adds ``i (E_0/hbar)(rho'/rho) psi_0``, the term from the
    time dependence of the modulus of the prefactor.
    """
    if spec.variant != "W":
        raise DomainError("the relation belongs to variant W")
    pt = traj.at(float(t))
    h = spec.hbar
    E0 = energy_eigenvalue(spec, SpectrumLabel())
    psi0 = eval_coherent(spec, SpectrumLabel(), traj, t, x, check=False)
    psi1 = eval_coherent(spec, SpectrumLabel(level=1), traj, t, x, check=False)
    chi_dot = -E0 / h * pt.omega / (pt.M * pt.rho**2)
    rot = np.exp(2j * pt.theta)  # (rho/(u - i v))^2
    out = chi_dot * psi0 + 1j / (2 * h) * pt.rho**2 / pt.omega * pt.squeeze_dot * (rot * psi1 + E0 * psi0)
    if corrected:
        out = out + 1j * E0 / h * pt.rho_dot / pt.rho * psi0
    return out


def eq36_defect(spec: ModelSpec, traj, t: float, probes, dt: float | None = None, corrected: bool = False):
    """Max relative mismatch between :func:`eq36_rhs` and ``(1/i) d/dt psi_0`` at the probes."""
    probes = np.asarray(probes, float)
    dt = traj.tau_prime / 8192 if dt is None else dt
    fn = lambda s: eval_coherent(spec, SpectrumLabel(), traj, s, probes, check=False)
    lhs = time_derivative(fn, float(t), dt) / 1j
    rhs = eq36_rhs(spec, traj, t, probes, corrected=corrected)
    return float(np.max(np.abs(rhs - lhs) / np.abs(lhs)))


@dataclass
class PhaseReport:
    chi: float
    chi_closed: float | None
    dyn: float
    berry: float
    gamma_numeric: float
    gamma_closed: float
    disc_gamma: float
    disc_routes: float
    constancy_defect: float = 0.0
    energy: float = 0.0
    nodes: list = field(default_factory=list, repr=False)

    def to_dict(self):
        keys = ("chi", "chi_closed", "dyn", "berry", "gamma_numeric", "gamma_closed",
                "disc_gamma", "disc_routes")
        return {k: getattr(self, k) for k in keys}


def phase_report(state, schedule, quad: QuadratureSpec, n_nodes: int = 64, probes=None,
                 threads: int = 1, dressing_rule: str = "invariant", tol: float = CONSTANCY_TOL) -> PhaseReport:
    """Measured and closed-form phases of ``state`` over one period."""
    spec, label, traj = state.spec, state.label, state.traj
    chi, defect = measure_global_phase(state, probes, tol=tol)
    try:
        chi_closed = closed_form_chi(spec, label, traj)
    except UnsupportedClosedForm:
        chi_closed = None
    dyn, berry, nodes = dynamical_phase(state, schedule, quad, n_nodes, threads)
    gamma_num = chi + dyn
    gamma_cl = geometric_phase_closed(spec, label, traj, dressing_rule)
    return PhaseReport(chi=chi, chi_closed=chi_closed, dyn=dyn, berry=berry, gamma_numeric=gamma_num,
                       gamma_closed=gamma_cl, disc_gamma=abs(gamma_num - gamma_cl),
                       disc_routes=abs(dyn - berry), constancy_defect=defect,
                       energy=energy_eigenvalue(spec, label), nodes=nodes)
