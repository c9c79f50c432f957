"""Unnormalized eigenstates and coherent states as functions of configurations.

Coherent states are available in two independent forms: the closed
expressions (:func:`eval_coherent`) and the composition of the squeeze and
displacement unitaries with the static eigenstate
(:func:`coherent_by_transform`). Non-integer complex powers use the
continuous argument of ``u + i v`` stored on the trajectory, with the
principal branch fixed at t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Callable, Mapping, Sequence

import numpy as np

from .classical import ClassicalTrajectory
from .exceptions import DomainError
from .models import ModelSpec, SpectrumLabel, coordinates, energy_eigenvalue, require_sector
from .special import hermite, laguerre

MAX_SUPERPOSITION_N = 8


def _power(z, a):
    """Real power keeping the sign for integer exponents."""
    if float(a).is_integer():
        return z ** int(a)
    return np.abs(z) ** a


def jastrow(x, lam):
    """``prod_{i>j} (x_i - x_j)^lam``."""
    x = np.asarray(x, dtype=float)
    out = np.ones(x.shape[:-1])
    for i, j in combinations(range(x.shape[-1]), 2):
        out = out * _power(x[..., j] - x[..., i], lam)
    return out


def w_factor(x, alpha):
    """``prod_i w_i^alpha``."""
    w = coordinates(x)[2]
    return np.prod(_power(w, alpha), axis=-1)


def b_factor(x, lam, alpha):
    """``prod_{i>j} (x_i^2 - x_j^2)^lam prod_i x_i^alpha``."""
    x = np.asarray(x, dtype=float)
    out = np.prod(_power(x, alpha), axis=-1)
    for i, j in combinations(range(x.shape[-1]), 2):
        out = out * _power(x[..., j] ** 2 - x[..., i] ** 2, lam)
    return out


# --------------------------------------------------------------------------
# symmetric polynomials


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(p + q for p, q in zip(ea, eb))
            out[e] = out.get(e, 0.0) + ca * cb
    return out


@dataclass(frozen=True)
class SymmetricPolynomial:
    """Linear combination of monomial symmetric functions.

    Each term ``(exponents, coeff)`` stands for ``coeff`` times the sum of
    ``prod_i x_i^{e_i}`` over all distinct permutations of ``exponents``.
    """

    terms: tuple
    N: int = field(init=False)
    degree: int = field(init=False)

    def __post_init__(self):
        terms = tuple((tuple(int(e) for e in exps), float(c)) for exps, c in self.terms)
        if not terms:
            raise DomainError("a polynomial needs at least one term")
        sizes = {len(e) for e, _ in terms}
        degrees = {sum(e) for e, _ in terms}
        if len(sizes) != 1 or len(degrees) != 1:
            raise DomainError("terms must share the number of variables and the total degree")
        if any(x < 0 for e, _ in terms for x in e):
            raise DomainError("exponents must be nonnegative")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "N", sizes.pop())
        object.__setattr__(self, "degree", degrees.pop())

    @classmethod
    def from_records(cls, records: Sequence[Mapping]):
        return cls(tuple((r["exponents"], r["coeff"]) for r in records))

    @classmethod
    def centered_power_sum(cls, N: int, k: int):
        """``sum_i (x_i - xbar)^k`` expanded into monomial symmetric functions."""
        total = {}
        for i in range(N):
            base = {}
            for j in range(N):
                e = [0] * N
                e[j] = 1
                base[tuple(e)] = (1.0 if j == i else 0.0) - 1.0 / N
            term = {tuple([0] * N): 1.0}
            for _ in range(k):
                term = _poly_mul(term, base)
            for e, c in term.items():
                total[e] = total.get(e, 0.0) + c
        collected = {}
        for e, c in total.items():
            key = tuple(sorted(e, reverse=True))
            collected.setdefault(key, c)
        terms = tuple((e, c) for e, c in sorted(collected.items()) if abs(c) > 1e-14)
        return cls(terms)

    def to_records(self):
        return [{"exponents": list(e), "coeff": c} for e, c in self.terms]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.N:
            raise DomainError(f"polynomial expects {self.N} variables")
        out = np.zeros(x.shape[:-1])
        for exps, c in self.terms:
            for perm in set(permutations(exps)):
                mono = np.ones(x.shape[:-1])
                for i, e in enumerate(perm):
                    if e:
                        mono = mono * x[..., i] ** e
                out = out + c * mono
        return out

    def check_invariants(self, rng=None, samples: int = 8, rtol: float = 1e-10):
        """Numerically confirm symmetry, translation invariance and homogeneity.

        Returns a dict of the worst defects; raises DomainError if any exceeds
        its tolerance.
        """
        rng = np.random.default_rng(0) if rng is None else rng
        x = rng.normal(size=(samples, self.N))
        base = self(x)
        scale = np.maximum(np.abs(base), 1e-300) + np.max(np.abs(base))
        perm = np.array([rng.permutation(row) for row in x])
        shift = x + rng.normal(size=(samples, 1))
        s = rng.uniform(0.5, 2.0, size=(samples, 1))
        defects = {
            "symmetry": float(np.max(np.abs(self(perm) - base) / scale)),
            "translation": float(np.max(np.abs(self(shift) - base) / scale)),
            "homogeneity": float(np.max(np.abs(self(s * x) - s[:, 0] ** self.degree * base) / scale)),
        }
        limits = {"symmetry": 1e-12, "translation": rtol, "homogeneity": rtol}
        bad = [k for k, v in defects.items() if v > limits[k]]
        if bad:
            raise DomainError(f"polynomial violates {', '.join(bad)} ({defects})")
        return defects


# --------------------------------------------------------------------------
# static eigenstates


def _check_poly(spec, label, poly):
    if poly is None:
        if spec.variant == "A" and label.k:
            raise DomainError("k > 0 requires a dressing polynomial")
        return
    if spec.variant != "A" or label.radial:
        raise DomainError("dressing polynomials apply to (m, n) states of variant A only")
    if poly.N != spec.N or poly.degree != label.k:
        raise DomainError("polynomial degree must equal label.k and use N variables")


def eval_eigenstate(spec: ModelSpec, label: SpectrumLabel, x, poly=None,
                    w_constant: float | None = None, check: bool = True):
    """Unnormalized eigenstate of the constant-parameter Hamiltonian (M = w = 1)."""
    label.validate(spec)
    _check_poly(spec, label, poly)
    x = np.asarray(x, dtype=float)
    if check:
        require_sector(spec, x)
    h = spec.hbar
    y, r, _ = coordinates(x)
    r2 = r * r
    gauss = np.exp(-r2 / (2 * h))
    if spec.variant == "A":
        J = jastrow(x, spec.lam)
        if label.radial:
            return J * gauss * laguerre(label.n, spec.b + 0.5, r2 / h)
        out = J * gauss * hermite(label.m, y / math.sqrt(h)) * laguerre(label.n, spec.b, (r2 - y * y) / h)
        return out if poly is None else out * poly(x)
    if spec.variant == "W":
        phi0 = jastrow(x, spec.lam) * w_factor(x, spec.alpha) * gauss
        if label.level == 0:
            return phi0
        c = spec.zero_point if w_constant is None else w_constant
        return (r2 - c * h) * phi0
    return b_factor(x, spec.lam, spec.alpha) * gauss * laguerre(label.n, spec.b_tilde, r2 / h)


# --------------------------------------------------------------------------
# coherent states


class BranchTracker:
    """Continuous arguments of ``u + i v`` and ``u - i v`` along a trajectory."""

    def __init__(self, traj: ClassicalTrajectory):
        self.traj = traj

    def arg_plus(self, t):
        return self.traj.at(t).theta

    def arg_minus(self, t):
        return -self.traj.at(t).theta

    @staticmethod
    def power_plus(pt, a, scale):
        """``((u + i v)/scale)^a`` with the tracked branch."""
        return np.exp(a * (np.log(pt.rho / scale) + 1j * pt.theta))

    @staticmethod
    def power_minus_unit(pt, a):
        """``((u - i v)/rho)^a`` with the tracked branch."""
        return np.exp(-1j * a * pt.theta)


def _no_displacement(spec, traj):
    if spec.variant != "A" and traj.has_displacement:
        raise DomainError(f"variant {spec.variant} coherent states use squeezing only (u_f must be 0)")


def eval_coherent(spec: ModelSpec, label: SpectrumLabel, traj: ClassicalTrajectory, t: float, x,
                  poly=None, dressing: str = "sqrt", w_constant: float | None = None,
                  check: bool = True):
    """Closed-form coherent state ``psi(t, x)`` (complex)."""
    label.validate(spec)
    _check_poly(spec, label, poly)
    _no_displacement(spec, traj)
    x = np.asarray(x, dtype=float)
    if check:
        require_sector(spec, x)
    pt = traj.at(float(t))
    h, N = spec.hbar, spec.N
    omega, rho = pt.omega, pt.rho
    sq = pt.squeeze
    sqrt_om = math.sqrt(omega)
    y, r, _ = coordinates(x)
    r2 = r * r
    if spec.variant == "A":
        c = spec.zero_point
        uf = pt.u_f
        disp_r2 = r2 - 2 * math.sqrt(N) * y * uf + N * uf * uf
        phase = np.exp(1j * (N * pt.delta_f + pt.M * pt.u_f_dot * math.sqrt(N) * y) / h)
        gauss = np.exp(-sq / (2 * h) * disp_r2)
        J = jastrow(x, spec.lam)
        if label.radial:
            pref = BranchTracker.power_minus_unit(pt, 2 * label.n) * BranchTracker.power_plus(pt, -c, sqrt_om)
            return phase * pref * J * gauss * laguerre(label.n, spec.b + 0.5, omega * disp_r2 / (h * rho**2))
        pref = BranchTracker.power_minus_unit(pt, label.m + 2 * label.n) * BranchTracker.power_plus(pt, -c, sqrt_om)
        herm = hermite(label.m, math.sqrt(omega / h) * (y - math.sqrt(N) * uf) / rho)
        lag = laguerre(label.n, spec.b, omega / (h * rho**2) * (r2 - y * y))
        out = phase * pref * J * gauss * herm * lag
        if poly is not None:
            if dressing == "sqrt":
                dress = BranchTracker.power_plus(pt, -label.k, sqrt_om)
            elif dressing == "literal":
                dress = BranchTracker.power_plus(pt, -label.k, omega)
            else:
                raise DomainError(f"unknown dressing normalization {dressing!r}")
            out = out * dress * poly(x)
        return out
    E0 = spec.zero_point
    gauss = np.exp(-sq * r2 / (2 * h))
    pref = BranchTracker.power_plus(pt, -E0, sqrt_om)
    if spec.variant == "W":
        psi0 = pref * jastrow(x, spec.lam) * w_factor(x, spec.alpha) * gauss
        if label.level == 0:
            return psi0
        c = E0 if w_constant is None else w_constant
        return BranchTracker.power_minus_unit(pt, 2) * (omega * r2 / rho**2 - c * h) * psi0
    pref = pref * BranchTracker.power_minus_unit(pt, 2 * label.n)
    lag = laguerre(label.n, spec.b_tilde, omega * r2 / (h * rho**2))
    return pref * b_factor(x, spec.lam, spec.alpha) * gauss * lag


def apply_U_N(phi: Callable, traj: ClassicalTrajectory, t: float, N: int, hbar: float = 1.0) -> Callable:
    """Squeeze unitary: dilation by ``sqrt(Omega)/rho`` with the chirp ``exp(i M rho'/(2 hbar rho) r^2)``."""
    pt = traj.at(float(t))
    scale = math.sqrt(pt.omega) / pt.rho
    norm = (pt.omega / pt.rho**2) ** (N / 4)
    chirp = pt.M * pt.rho_dot / (2 * hbar * pt.rho)

    def transformed(x):
        x = np.asarray(x, dtype=float)
        return norm * np.exp(1j * chirp * np.sum(x * x, axis=-1)) * phi(scale * x)

    return transformed


def apply_U_f(phi: Callable, traj: ClassicalTrajectory, t: float, N: int, hbar: float = 1.0) -> Callable:
    """Displacement unitary: shift every coordinate by ``u_f`` with momentum ``M u_f'``."""
    pt = traj.at(float(t))
    uf, kick, delta = float(pt.u_f), float(pt.M * pt.u_f_dot), float(pt.delta_f)

    def transformed(x):
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * (N * delta + kick * np.sum(x, axis=-1)) / hbar)
        return phase * phi(x - uf)

    return transformed


def coherent_by_transform(spec: ModelSpec, label: SpectrumLabel, traj: ClassicalTrajectory, t: float,
                          x, poly=None, w_constant: float | None = None, check: bool = True):
    """``((u - i v)/rho)^{E/hbar} U_f U_N phi^s`` evaluated at ``x``."""
    _no_displacement(spec, traj)
    x = np.asarray(x, dtype=float)
    if check:
        require_sector(spec, x)
    E = energy_eigenvalue(spec, label)

    def phi(z):
        return eval_eigenstate(spec, label, z, poly=poly, w_constant=w_constant, check=False)

    psi = apply_U_N(phi, traj, t, spec.N, spec.hbar)
    if spec.variant == "A":
        psi = apply_U_f(psi, traj, t, spec.N, spec.hbar)
    pt = traj.at(float(t))
    return BranchTracker.power_minus_unit(pt, E / spec.hbar) * psi(x)


def superposition_coefficients(n: int):
    """Weights ``(-1)^l / (4^l l!)`` of the ``(2l, n-l)`` states."""
    return [(-1) ** l / (4**l * math.factorial(l)) for l in range(n + 1)]


def superpose_radial(spec: ModelSpec, n: int, x, traj: ClassicalTrajectory | None = None,
                     t: float | None = None):
    """Both sides of the radial-state expansion at ``x``.

    Returns ``(closed, summed)``: the ``L_n^{b+1/2}(r^2)`` state and the
    weighted sum of ``(m, n') = (2l, n-l)`` states. With a trajectory the
    coherent versions at time ``t`` are compared instead.
    """
    if spec.variant != "A":
        raise DomainError("the radial expansion is defined for variant A")
    if int(n) != n or not 0 <= n <= MAX_SUPERPOSITION_N:
        raise DomainError(f"n must be an integer in [0, {MAX_SUPERPOSITION_N}]")
    x = np.asarray(x, dtype=float)
    require_sector(spec, x)
    if traj is None:
        evaluate = lambda lab: eval_eigenstate(spec, lab, x, check=False)
    else:
        evaluate = lambda lab: eval_coherent(spec, lab, traj, t, x, check=False)
    closed = evaluate(SpectrumLabel(n=n, radial=True))
    summed = sum(c * evaluate(SpectrumLabel(m=2 * l, n=n - l))
                 for l, c in enumerate(superposition_coefficients(n)))
    return closed, summed


@dataclass(frozen=True)
class Eigenstate:
    """Static eigenstate bundled with its energy."""

    spec: ModelSpec
    label: SpectrumLabel
    poly: SymmetricPolynomial | None = None
    w_constant: float | None = None

    @property
    def energy(self):
        return energy_eigenvalue(self.spec, self.label)

    def __call__(self, x, check=False):
        return eval_eigenstate(self.spec, self.label, x, poly=self.poly,
                               w_constant=self.w_constant, check=check)


@dataclass(frozen=True)
class CoherentState:
    """Time-dependent coherent state ``psi(t, x)`` on a fixed trajectory."""

    spec: ModelSpec
    label: SpectrumLabel
    traj: ClassicalTrajectory
    poly: SymmetricPolynomial | None = None
    dressing: str = "sqrt"
    w_constant: float | None = None
    route: str = "closed"

    @property
    def energy(self):
        return energy_eigenvalue(self.spec, self.label)

    def __call__(self, t, x, check=False):
        if self.route == "transform":
            return coherent_by_transform(self.spec, self.label, self.traj, t, x, poly=self.poly,
                                         w_constant=self.w_constant, check=check)
        return eval_coherent(self.spec, self.label, self.traj, t, x, poly=self.poly,
                             dressing=self.dressing, w_constant=self.w_constant, check=check)

    def scaled(self, factor: complex):
        """Same state multiplied by a constant (gauge checks)."""
        return _Scaled(self, complex(factor))


@dataclass(frozen=True)
class _Scaled:
    base: CoherentState
    factor: complex

    spec = property(lambda self: self.base.spec)
    label = property(lambda self: self.base.label)
    traj = property(lambda self: self.base.traj)
    energy = property(lambda self: self.base.energy)

    def __call__(self, t, x, check=False):
        return self.factor * self.base(t, x, check=check)
