"""Sector quadrature, finite-difference Hamiltonians and Schrödinger residuals.

Tensor quadrature maps the ordered sector onto a box: the first coordinate
(or, for B, the distance from the origin) and the successive gaps
``x_{i+1} - x_i`` are the integration variables, each discretised with
Gauss-Legendre nodes. This keeps the integrand smooth, whereas multiplying a
box rule by the sector indicator would leave a kink on every wall.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import warnings

import numpy as np

from .exceptions import DomainError, SectorError, TruncationError
from .models import DEFAULT_EPS, ModelSpec, energy_eigenvalue, potential, sector_contains

TAIL_QUANTA = 20.0
MC_CHUNK = 16384
PRUNE_RADIUS = 1.25
TAIL_WARN = 1e-7  # mass fraction beyond 0.8 of the half-width


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "tensor"
    points_per_dim: int = 64
    samples: int = 200_000
    seed: int = 0
    eps_guard: float = DEFAULT_EPS
    fd_step_x: float | None = None
    fd_step_t: float | None = None
    strict: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.method not in ("tensor", "montecarlo"):
            raise DomainError(f"unknown quadrature method {self.method!r}")
        if self.points_per_dim < 2 or self.samples < 2:
            raise DomainError("quadrature sizes must be at least 2")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def x_step(self, hbar):
        return 1e-4 * math.sqrt(hbar) if self.fd_step_x is None else self.fd_step_x

    def t_step(self, tau_prime):
        return tau_prime / 8192 if self.fd_step_t is None else self.fd_step_t

    def check_dimension(self, N):
        if self.method == "tensor" and N > 3:
            raise DomainError("tensor quadrature supports N <= 3; use montecarlo")
        if N > 6:
            raise DomainError("quadrature supports N <= 6")


@dataclass(frozen=True)
class OverlapResult:
    value: complex
    stderr: float
    method: str = "tensor"
    samples: int = 0

    def to_dict(self):
        return {"value_re": float(self.value.real), "value_im": float(self.value.imag),
                "stderr": float(self.stderr), "method": self.method, "samples": int(self.samples)}


@dataclass(frozen=True)
class Envelope:
    """Where the probability density lives: centre, width ``rho/sqrt(Omega)`` and energy."""

    center: float = 0.0
    rho: float = 1.0
    omega: float = 1.0
    energy: float = 0.0
    hbar: float = 1.0

    @classmethod
    def of(cls, state, t):
        pt = state.traj.at(float(t))
        return cls(center=float(pt.u_f), rho=float(pt.rho), omega=float(pt.omega),
                   energy=float(state.energy), hbar=state.spec.hbar)

    @property
    def half_width(self):
        return self.rho * math.sqrt(2 * self.hbar * (self.energy / self.hbar + TAIL_QUANTA) / self.omega)

    def widen(self, energy):
        return replace(self, energy=max(self.energy, float(energy)))


def _gauss_legendre(n, lo, hi):
    z, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * z + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def tensor_rule(spec: ModelSpec, env: Envelope, n: int, eps: float = DEFAULT_EPS):
    """Nodes ``(P, N)`` and weights for the sector integral over the truncated box."""
    N = spec.N
    L = env.half_width
    if spec.variant == "B":
        first = _gauss_legendre(n, 0.0, L)
        gap = _gauss_legendre(n, 0.0, L)
    else:
        first = _gauss_legendre(n, env.center - L, env.center + L)
        gap = _gauss_legendre(n, 0.0, 2 * L)
    axes = [first] + [gap] * (N - 1)
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrid = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrid], axis=-1), axis=-1)
    x = np.cumsum(coords, axis=-1)
    keep = sector_contains(spec, x, eps)
    # beyond radius L the density is below exp(-2 (E/hbar + 20)); the margin keeps
    # the cut far outside anything the rule resolves
    shift = 0.0 if spec.variant == "B" else env.center
    keep &= np.sum((x - shift) ** 2, axis=-1) <= (PRUNE_RADIUS * L) ** 2
    return x[keep], weights[keep]


def _tail_fraction(x, w, f, env):
    dev = np.max(np.abs(x - env.center), axis=-1)
    outer = dev > 0.8 * env.half_width
    total = np.sum(w * np.abs(f))
    return float(np.sum(w[outer] * np.abs(f[outer])) / total) if total > 0 else 0.0


def _check_tail(frac, strict):
    if frac > TAIL_WARN:
        msg = f"quadrature box truncation: boundary mass fraction {frac:.3g}"
        if strict:
            raise TruncationError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def integrate(f, spec: ModelSpec, quad: QuadratureSpec, env: Envelope) -> OverlapResult:
    """Integrate ``f(x)`` (vectorized, complex allowed) over the sector."""
    quad.check_dimension(spec.N)
    if quad.method == "tensor":
        n = quad.points_per_dim
        x, w = tensor_rule(spec, env, n, quad.eps_guard)
        vals = f(x)
        value = complex(np.sum(w * vals))
        _check_tail(_tail_fraction(x, w, vals, env), quad.strict)
        xc, wc = tensor_rule(spec, env, max(2, n // 2), quad.eps_guard)
        coarse = complex(np.sum(wc * f(xc)))
        return OverlapResult(value, abs(value - coarse), "tensor", int(w.size))
    return _monte_carlo(f, spec, quad, env)


def _mc_chunk(args):
    f, spec, quad, env, seq, size = args
    rng = np.random.default_rng(seq)
    sigma = env.rho * math.sqrt(env.hbar / env.omega)
    center = 0.0 if spec.variant == "B" else env.center
    z = rng.standard_normal((size, spec.N))
    x = center + sigma * z
    logq = -0.5 * np.sum(z * z, axis=-1) - spec.N * math.log(sigma * math.sqrt(2 * math.pi))
    inside = sector_contains(spec, x, quad.eps_guard)
    vals = np.zeros(size, dtype=complex)
    if np.any(inside):
        vals[inside] = f(x[inside]) / np.exp(logq[inside])
    return np.sum(vals), np.sum(vals.real**2), np.sum(vals.imag**2)


def _monte_carlo(f, spec, quad, env):
    n = int(quad.samples)
    sizes = [MC_CHUNK] * (n // MC_CHUNK) + ([n % MC_CHUNK] if n % MC_CHUNK else [])
    seqs = np.random.SeedSequence(int(quad.seed)).spawn(len(sizes))
    jobs = [(f, spec, quad, env, s, k) for s, k in zip(seqs, sizes)]
    if quad.threads > 1:
        with ThreadPoolExecutor(quad.threads) as pool:
            parts = list(pool.map(_mc_chunk, jobs))
    else:
        parts = [_mc_chunk(j) for j in jobs]
    s = sum(p[0] for p in parts)
    s_re2 = sum(p[1] for p in parts)
    s_im2 = sum(p[2] for p in parts)
    mean = s / n
    var = (s_re2 / n - mean.real**2) + (s_im2 / n - mean.imag**2)
    return OverlapResult(complex(mean), float(math.sqrt(max(var, 0.0) / n)), "montecarlo", n)


def inner_product(psi1, psi2, spec: ModelSpec, quad: QuadratureSpec, env: Envelope) -> OverlapResult:
    """``<psi1|psi2>`` over the sector; ``psi1`` and ``psi2`` map ``(P, N)`` arrays to values."""
    return integrate(lambda x: np.conj(psi1(x)) * psi2(x), spec, quad, env)


def laplacian(psi, x, h):
    """Central second-difference Laplacian of ``psi`` at ``x``."""
    x = np.asarray(x, dtype=float)
    centre = psi(x)
    out = -2 * x.shape[-1] * centre
    for i in range(x.shape[-1]):
        step = np.zeros(x.shape[-1])
        step[i] = h
        out = out + psi(x + step) + psi(x - step)
    return out / (h * h), centre


def apply_hamiltonian(spec: ModelSpec, schedule, t, psi, x, fd_step: float, eps: float = DEFAULT_EPS,
                      return_psi: bool = False):
    """``-(hbar^2 / 2M) Laplacian psi + V psi`` by central differences.

    ``schedule=None`` means the constant-parameter Hamiltonian ``M = w = 1``.
    """
    x = np.asarray(x, dtype=float)
    for i in range(spec.N):
        for sgn in (1, -1):
            shifted = x.copy()
            shifted[..., i] += sgn * fd_step
            if not np.all(sector_contains(spec, shifted, eps)):
                raise SectorError("finite-difference stencil leaves the sector")
    M = 1.0 if schedule is None else schedule.M(t)
    lap, centre = laplacian(psi, x, fd_step)
    out = -(spec.hbar**2) / (2 * M) * lap + potential(spec, schedule, t, x, check=False) * centre
    return (out, centre) if return_psi else out


def static_envelope(spec: ModelSpec, energy: float) -> Envelope:
    return Envelope(energy=energy, hbar=spec.hbar)


def eigen_residual(spec: ModelSpec, label, quad: QuadratureSpec, fd_step: float | None = None,
                   poly=None, w_constant: float | None = None) -> float:
    """Relative residual ``||H phi - E phi|| / ||phi||`` of a static eigenstate."""
    from .wavefunctions import Eigenstate

    state = Eigenstate(spec, label, poly=poly, w_constant=w_constant)
    E = state.energy
    h = quad.x_step(spec.hbar) if fd_step is None else fd_step
    env = static_envelope(spec, E)
    tq = replace(quad, method="tensor")
    x, w = tensor_rule(spec, env, tq.points_per_dim, tq.eps_guard)
    Hphi, phi = apply_hamiltonian(spec, None, 0.0, state, x, h, tq.eps_guard, return_psi=True)
    num = np.sum(w * np.abs(Hphi - E * phi) ** 2)
    den = np.sum(w * np.abs(phi) ** 2)
    return float(math.sqrt(num / den))


def fit_w_excited_constant(spec: ModelSpec, quad: QuadratureSpec, fd_step: float | None = None):
    """Least-squares ``c`` minimising the eigen-residual of ``(r^2 - c hbar) phi_0``.

    The residual is affine in ``c``, so the minimiser is a projection.
    Returns ``(c_best, residual_at_c_best)``.
    """
    from .models import SpectrumLabel
    from .wavefunctions import Eigenstate

    if spec.variant != "W":
        raise DomainError("the excited-state constant belongs to variant W")
    ground = Eigenstate(spec, SpectrumLabel())
    E1 = energy_eigenvalue(spec, SpectrumLabel(level=1))
    h_fd = quad.x_step(spec.hbar) if fd_step is None else fd_step
    env = static_envelope(spec, E1)
    x, w = tensor_rule(spec, env, quad.points_per_dim, quad.eps_guard)
    r2 = lambda z: np.sum(z * z, axis=-1)
    f_state = lambda z: r2(z) * ground(z)
    Hf, f = apply_hamiltonian(spec, None, 0.0, f_state, x, h_fd, return_psi=True)
    Hg, g = apply_hamiltonian(spec, None, 0.0, ground, x, h_fd, return_psi=True)
    # residual(c) = (Hf - E1 f) - c hbar (Hg - E1 g)
    a = Hf - E1 * f
    b = spec.hbar * (Hg - E1 * g)
    c = float(np.sum(w * a * b) / np.sum(w * b * b))
    phi = f - c * spec.hbar * g
    res = math.sqrt(np.sum(w * (a - c * b) ** 2) / np.sum(w * phi**2))
    return c, res


def time_derivative(fn, t: float, dt: float):
    """Fourth-order central difference of ``fn`` at ``t``."""
    return (-fn(t + 2 * dt) + 8 * fn(t + dt) - 8 * fn(t - dt) + fn(t - 2 * dt)) / (12 * dt)


@dataclass(frozen=True)
class NodeQuantities:
    """Sector integrals of a coherent state at one time."""

    t: float
    norm: float
    H_exp: complex        # <psi|H psi> / <psi|psi>
    dt_overlap: complex   # <psi|d/dt psi> / <psi|psi>
    residual: float       # ||i hbar d/dt psi - H psi|| / ||psi||


def node_quantities(state, schedule, t: float, quad: QuadratureSpec) -> NodeQuantities:
    """Norm, energy expectation, time-derivative overlap and Schrödinger residual at ``t``.

    Tensor nodes are used for all four integrals (deterministic weights make
    the residual meaningful pointwise).
    """
    spec = state.spec
    quad.check_dimension(spec.N)
    env = Envelope.of(state, t)
    h_x = quad.x_step(spec.hbar)
    dt = quad.t_step(state.traj.tau_prime)
    if quad.method == "tensor":
        x, w = tensor_rule(spec, env, quad.points_per_dim, quad.eps_guard)
    else:
        x, w = _mc_nodes(spec, quad, env)
    fn = lambda s: state(s, x)
    psi = fn(t)
    Hpsi = apply_hamiltonian(spec, schedule, t, lambda z: state(t, z), x, h_x, quad.eps_guard)
    dpsi = time_derivative(fn, t, dt)
    norm = float(np.sum(w * np.abs(psi) ** 2))
    H_exp = complex(np.sum(w * np.conj(psi) * Hpsi)) / norm
    dt_ov = complex(np.sum(w * np.conj(psi) * dpsi)) / norm
    res = math.sqrt(float(np.sum(w * np.abs(1j * spec.hbar * dpsi - Hpsi) ** 2)) / norm)
    return NodeQuantities(t=float(t), norm=norm, H_exp=H_exp, dt_overlap=dt_ov, residual=res)


def _mc_nodes(spec, quad, env, margin=None):
    """Importance-sampled nodes with weights ``1/(n q)`` restricted to the sector."""
    xs, ws = [], []
    n = int(quad.samples)
    sizes = [MC_CHUNK] * (n // MC_CHUNK) + ([n % MC_CHUNK] if n % MC_CHUNK else [])
    sigma = env.rho * math.sqrt(env.hbar / env.omega)
    center = 0.0 if spec.variant == "B" else env.center
    for seq, size in zip(np.random.SeedSequence(int(quad.seed)).spawn(len(sizes)), sizes):
        z = np.random.default_rng(seq).standard_normal((size, spec.N))
        x = center + sigma * z
        logq = -0.5 * np.sum(z * z, axis=-1) - spec.N * math.log(sigma * math.sqrt(2 * math.pi))
        if margin is None:
            margin = max(quad.eps_guard, 4 * quad.x_step(spec.hbar))
        inside = sector_contains(spec, x, margin)
        xs.append(x[inside])
        ws.append(np.exp(-logq[inside]) / n)
    return np.concatenate(xs), np.concatenate(ws)


def schrodinger_residual(state, schedule, t: float, quad: QuadratureSpec) -> float:
    """Relative residual ``||i hbar d/dt psi - H psi|| / ||psi||`` at time ``t``."""
    return node_quantities(state, schedule, t, quad).residual


def time_derivative_overlap(state, t: float, quad: QuadratureSpec) -> complex:
    """``<psi|d/dt psi> / <psi|psi>`` with centred time differences."""
    spec = state.spec
    env = Envelope.of(state, t)
    dt = quad.t_step(state.traj.tau_prime)
    if quad.method == "tensor":
        x, w = tensor_rule(spec, env, quad.points_per_dim, quad.eps_guard)
    else:
        x, w = _mc_nodes(spec, quad, env)
    fn = lambda s: state(s, x)
    psi = fn(t)
    dpsi = time_derivative(fn, t, dt)
    return complex(np.sum(w * np.conj(psi) * dpsi) / np.sum(w * np.abs(psi) ** 2))


def expectation_energy(state, schedule, t: float, quad: QuadratureSpec) -> complex:
    """``<psi|H psi> / <psi|psi>`` at time ``t``."""
    return node_quantities(state, schedule, t, quad).H_exp


def gram_matrix(states, spec: ModelSpec, quad: QuadratureSpec, env: Envelope):
    """Overlaps ``G_ij = <psi_i|psi_j>`` of callables ``psi(x)`` on shared nodes.

    Returns ``(G, stderr)``. For Monte Carlo the standard error of every entry
    comes from the per-sample spread of the weighted integrand; for tensor
    rules it is the change against the half-resolution rule.
    """
    quad.check_dimension(spec.N)

    def on(x, w):
        vals = np.array([psi(x) for psi in states])
        return vals, np.einsum("p,ip,jp->ij", w, np.conj(vals), vals)

    if quad.method == "tensor":
        x, w = tensor_rule(spec, env, quad.points_per_dim, quad.eps_guard)
        vals, G = on(x, w)
        for i in range(len(states)):
            _check_tail(_tail_fraction(x, w, np.abs(vals[i]) ** 2, env), quad.strict)
        xc, wc = tensor_rule(spec, env, max(2, quad.points_per_dim // 2), quad.eps_guard)
        return G, np.abs(G - on(xc, wc)[1])
    x, w = _mc_nodes(spec, quad, env, margin=quad.eps_guard)
    n = int(quad.samples)
    vals = np.array([psi(x) for psi in states])
    # per-sample contributions n w f_i* f_j, zero outside the sector
    G = np.einsum("p,ip,jp->ij", w, np.conj(vals), vals)
    second = np.einsum("p,ip,jp->ij", n * w * w, np.abs(vals) ** 2, np.abs(vals) ** 2)
    var = second - np.abs(G) ** 2
    return G, np.sqrt(np.maximum(var, 0.0) / n)
