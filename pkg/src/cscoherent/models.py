"""Model variants, sectors, potentials and exact spectra.

Three variants are supported:

``A``  the A_{N-1} Calogero model (pair interactions in ``x_i - x_j``),
``W``  the A-type model with extra three-body-like terms in
       ``w_i = sum_j x_j - N x_i``,
``B``  the B_N model (pair terms in ``x_i -+ x_j`` plus ``1/x_i^2``).

Configurations are arrays whose last axis has length ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .exceptions import DomainError, SectorError

VARIANTS = ("A", "W", "B")
DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class ModelSpec:
    variant: str
    N: int
    lam: float
    alpha: float | None = None
    hbar: float = 1.0
    allow_weak_coupling: bool = False
    # W only: "derived" uses N a (a + N lam) for the 1/(w_i w_j) term, which makes
    # the product ground state exact for every N; "displayed" doubles it. The
    # term vanishes identically at N = 3.
    w_cross: str = "derived"

    def __post_init__(self):
        if self.w_cross not in ("derived", "displayed"):
            raise DomainError(f"w_cross must be 'derived' or 'displayed', got {self.w_cross!r}")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not self.hbar > 0:
            raise DomainError("hbar must be positive")
        lam_min = 0.5 if self.allow_weak_coupling else 1.0
        if not (self.lam >= lam_min and (self.lam > 0.5)):
            raise DomainError(f"lambda={self.lam} outside the admitted coupling domain")
        if self.variant == "A":
            if self.alpha is not None:
                raise DomainError("variant A takes no alpha coupling")
        else:
            if self.alpha is None:
                raise DomainError(f"variant {self.variant} requires alpha")
            alpha_min = 0.0 if self.allow_weak_coupling else 1.0
            if not self.alpha >= alpha_min:
                raise DomainError(f"alpha={self.alpha} outside the admitted coupling domain")

    @property
    def b(self) -> float:
        """Laguerre order of the relative-motion factor of the A model."""
        N = self.N
        return 0.5 * (N - 3) + 0.5 * self.lam * N * (N - 1)

    @property
    def b_tilde(self) -> float:
        """Laguerre order of the radial factor of the B model."""
        N = self.N
        return N / 2 + self.lam * N * (N - 1) + N * self.alpha - 1

    @property
    def zero_point(self) -> float:
        """Ground-state energy in units of hbar."""
        N, lam = self.N, self.lam
        if self.variant == "A":
            return 0.5 * (N + lam * N * (N - 1))
        if self.variant == "W":
            return lam * N * (N - 1) / 2 + self.alpha * N + N / 2
        return N / 2 + lam * N * (N - 1) + self.alpha * N

    def to_dict(self):
        return {"variant": self.variant, "N": self.N, "lambda": self.lam, "alpha": self.alpha,
                "hbar": self.hbar, "allow_weak_coupling": self.allow_weak_coupling,
                "w_cross": self.w_cross}


@dataclass(frozen=True)
class SpectrumLabel:
    """Quantum numbers. A uses ``m, n, k`` (``radial`` selects the
    ``L_n^{b+1/2}(r^2)`` family); W uses ``level``; B uses ``n``."""

    m: int = 0
    n: int = 0
    k: int = 0
    level: int = 0
    radial: bool = False

    def validate(self, spec: ModelSpec):
        for name in ("m", "n", "k", "level"):
            val = getattr(self, name)
            if int(val) != val or val < 0:
                raise DomainError(f"{name} must be a nonnegative integer")
        if spec.variant == "A":
            if self.level:
                raise DomainError("variant A has no 'level' quantum number")
            if self.radial and (self.m or self.k):
                raise DomainError("radial A states carry only n")
        elif spec.variant == "W":
            if self.level not in (0, 1) or self.m or self.n or self.k or self.radial:
                raise DomainError("variant W supports level 0 or 1 only")
        else:
            if self.m or self.k or self.level or self.radial:
                raise DomainError("variant B carries only n")
        return self

    def to_dict(self):
        return {"m": self.m, "n": self.n, "k": self.k, "level": self.level, "radial": self.radial}


def energy_eigenvalue(spec: ModelSpec, label: SpectrumLabel) -> float:
    """Exact energy of the labelled eigenstate."""
    label.validate(spec)
    h = spec.hbar
    if spec.variant == "A":
        if label.radial:
            return h * (spec.zero_point + 2 * label.n)
        return h * (label.m + 2 * label.n + label.k) + h * spec.zero_point
    if spec.variant == "W":
        return h * (spec.zero_point + 2 * label.level)
    return h * (spec.zero_point + 2 * label.n)


def coordinates(x):
    """Return ``(y_N, r, w)``: scaled centre of mass, radius and the w_i coordinates."""
    x = np.asarray(x, dtype=float)
    N = x.shape[-1]
    s = x.sum(axis=-1)
    y = s / np.sqrt(N)
    r = np.sqrt(np.sum(x * x, axis=-1))
    w = s[..., None] - N * x
    return y, r, w


def sector_contains(spec: ModelSpec, x, eps: float = DEFAULT_EPS):
    """Membership in the fundamental sector ``x_1 < ... < x_N`` (plus variant guards)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    ok = np.all(np.diff(x, axis=-1) > eps, axis=-1)
    if spec.variant == "W":
        ok &= np.all(np.abs(coordinates(x)[2]) > eps, axis=-1)
    elif spec.variant == "B":
        ok &= x[..., 0] > eps
    return ok if np.ndim(ok) else bool(ok)


def require_sector(spec: ModelSpec, x, eps: float = DEFAULT_EPS):
    if not np.all(sector_contains(spec, x, eps)):
        raise SectorError(f"configuration outside the {spec.variant} sector")


def interaction(spec: ModelSpec, x):
    """Inverse-square part of the static potential (coefficient of ``1/M``)."""
    x = np.asarray(x, dtype=float)
    N, lam, h2 = spec.N, spec.lam, spec.hbar**2
    pairs = list(combinations(range(N), 2))
    out = np.zeros(x.shape[:-1])
    g = h2 * lam * (lam - 1)
    if g:
        for i, j in pairs:
            out = out + g / (x[..., j] - x[..., i]) ** 2
    if spec.variant == "W":
        a = spec.alpha
        w = coordinates(x)[2]
        if a * (a - 1):
            out = out + h2 * a * (a - 1) * N * (N - 1) / 2 * np.sum(1.0 / w**2, axis=-1)
        cross = N * a * (a + N * lam) * (2 if spec.w_cross == "displayed" else 1)
        for i, j in pairs:
            out = out - h2 * cross / (w[..., i] * w[..., j])
    elif spec.variant == "B":
        a = spec.alpha
        if a * (a - 1):
            out = out + h2 * a * (a - 1) / 2 * np.sum(1.0 / x**2, axis=-1)
        if g:
            for i, j in pairs:
                out = out + g / (x[..., j] + x[..., i]) ** 2
    return out


def potential(spec: ModelSpec, schedule, t, x, eps: float = DEFAULT_EPS, check: bool = True):
    """Full time-dependent potential ``M w^2 r^2 / 2 + interaction / M``."""
    x = np.asarray(x, dtype=float)
    if check:
        require_sector(spec, x, eps)
    if schedule is None:
        M, w2 = 1.0, 1.0
    else:
        M, w2 = schedule.M(t), schedule.w2(t)
    return 0.5 * M * w2 * np.sum(x * x, axis=-1) + interaction(spec, x) / M
