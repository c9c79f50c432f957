"""Classical envelope dynamics for ``d/dt(M x') + M w^2 x = 0``.

Everything here works on phase-space data ``(x, p)`` with ``p = M x'``, which
keeps the first-order system free of ``M'``. Integration is fixed-step RK4 on
a uniform grid so that downstream time quadratures line up with the samples.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BranchError, InstabilityError, MarginalStabilityError
from .schedule import ParameterSchedule

DEFAULT_STEPS = 4096
MARGINAL_TOL = 1e-9
PERIODIC_TOL = 1e-8
# extra grid nodes on both sides of [0, tau'] so centred time stencils fit
PAD_STEPS = 8

TRAJECTORY_HEADER = ("t", "u", "u_dot", "v", "v_dot", "rho", "rho_dot", "u_f", "u_f_dot", "delta_f")


def _rk4(schedule, y0, grid):
    """Integrate columns of ``y0`` (shape (2, K)) along ``grid`` starting at grid[0]."""
    grid = np.asarray(grid, dtype=float)
    y = np.array(y0, dtype=float).reshape(2, -1)
    out = np.empty((grid.size, 2, y.shape[1]))
    out[0] = y
    h = np.diff(grid)
    mid = grid[:-1] + 0.5 * h
    M0, M1, Mm = schedule.M(grid[:-1]), schedule.M(grid[1:]), schedule.M(mid)
    W0, W1, Wm = schedule.w2(grid[:-1]), schedule.w2(grid[1:]), schedule.w2(mid)
    for j in range(h.size):
        x, p = y
        dt = h[j]
        k1x, k1p = p / M0[j], -M0[j] * W0[j] * x
        x2, p2 = x + 0.5 * dt * k1x, p + 0.5 * dt * k1p
        k2x, k2p = p2 / Mm[j], -Mm[j] * Wm[j] * x2
        x3, p3 = x + 0.5 * dt * k2x, p + 0.5 * dt * k2p
        k3x, k3p = p3 / Mm[j], -Mm[j] * Wm[j] * x3
        x4, p4 = x + dt * k3x, p + dt * k3p
        k4x, k4p = p4 / M1[j], -M1[j] * W1[j] * x4
        y = np.array([x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
                      p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)])
        out[j + 1] = y
    return out


def integrate_eom(schedule: ParameterSchedule, x0: float, xdot0: float, grid):
    """Solve the classical equation of motion on ``grid`` (initial data at grid[0]).

    Returns ``(x, xdot)`` sampled on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a strictly increasing 1-d array")
    M0 = float(schedule.M(grid[0]))
    sol = _rk4(schedule, [[x0], [M0 * xdot0]], grid)
    x, p = sol[:, 0, 0], sol[:, 1, 0]
    return x, p / schedule.M(grid)


def monodromy(schedule: ParameterSchedule, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Period map on ``(x, M x')``; columns are the images of the unit vectors."""
    grid = np.linspace(0.0, schedule.tau, steps + 1)
    sol = _rk4(schedule, np.eye(2), grid)
    return sol[-1]


def _uniform_grid(tau, steps, span):
    h = tau / steps
    n = int(round(span / h))
    return h * np.arange(-PAD_STEPS, n + PAD_STEPS + 1), PAD_STEPS, PAD_STEPS + n


def _propagate(schedule, y0, grid, i0):
    """Integrate from grid[i0] both forward and backward."""
    fwd = _rk4(schedule, y0, grid[i0:])
    back = _rk4(schedule, y0, grid[: i0 + 1][::-1])[::-1]
    return np.concatenate([back[:-1], fwd], axis=0)


def _hermite_interp(grid, f, df, t):
    """Cubic Hermite interpolation on a uniform grid with nodal derivatives."""
    h = grid[1] - grid[0]
    s = (np.asarray(t, dtype=float) - grid[0]) / h
    j = np.clip(np.floor(s).astype(int), 0, grid.size - 2)
    x = s - j
    h00 = (1 + 2 * x) * (1 - x) ** 2
    h10 = x * (1 - x) ** 2
    h01 = x * x * (3 - 2 * x)
    h11 = x * x * (x - 1)
    return h00 * f[j] + h10 * h * df[j] + h01 * f[j + 1] + h11 * h * df[j + 1]


@dataclass(frozen=True)
class TrajectoryPoint:
    """Classical quantities at a single time (components may be arrays)."""

    t: object
    u: object
    u_dot: object
    v: object
    v_dot: object
    rho: object
    rho_dot: object
    omega: float
    M: object
    w2: object
    u_f: object
    u_f_dot: object
    delta_f: object
    theta: object  # continuous arg(u + i v)

    @property
    def squeeze(self):
        """Complex width parameter ``Omega/rho^2 - i M rho_dot/rho``."""
        return self.omega / self.rho**2 - 1j * self.M * self.rho_dot / self.rho

    @property
    def squeeze_dot(self):
        """Time derivative of :attr:`squeeze` from the equation of motion."""
        rho2 = self.rho**2
        d_real = -2 * self.omega * self.rho_dot / self.rho**3
        # d/dt (u p_u + v p_v)/rho^2 with p' = -M w^2 x
        d_chirp = (self.M * (self.u_dot**2 + self.v_dot**2) - self.M * self.w2 * rho2) / rho2 \
            - 2 * self.M * self.rho_dot**2 / rho2
        return d_real - 1j * d_chirp


@dataclass(frozen=True)
class ClassicalTrajectory:
    """Sampled pair of classical solutions, their envelope and a displacement solution.

    ``grid`` extends a few steps beyond ``[0, span]`` on both sides; ``i0`` and
    ``i_end`` index t = 0 and t = span. ``span`` is ``tau_prime`` times
    ``n_periods``.
    """

    schedule: ParameterSchedule
    grid: np.ndarray
    i0: int
    i_end: int
    u: np.ndarray
    p_u: np.ndarray
    v: np.ndarray
    p_v: np.ndarray
    u_f: np.ndarray
    p_f: np.ndarray
    delta_f: np.ndarray
    omega: float
    tau_prime: float
    n_periods: int = 1
    uf_periodic: bool = True
    uf_zeroed: bool = False
    rho_periodic: bool = True
    theta: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_M", self.schedule.M(self.grid))
        object.__setattr__(self, "_W", self.schedule.w2(self.grid))
        if self.theta is None:
            object.__setattr__(self, "theta", _track_argument(self))

    # sampled views -------------------------------------------------------
    @property
    def M_grid(self):
        return self._M

    @property
    def u_dot(self):
        return self.p_u / self.M_grid

    @property
    def v_dot(self):
        return self.p_v / self.M_grid

    @property
    def u_f_dot(self):
        return self.p_f / self.M_grid

    @property
    def rho(self):
        return np.hypot(self.u, self.v)

    @property
    def rho_dot(self):
        return (self.u * self.u_dot + self.v * self.v_dot) / self.rho

    @property
    def has_displacement(self):
        return bool(np.any(self.u_f != 0) or np.any(self.p_f != 0))

    @property
    def span(self):
        return self.tau_prime * self.n_periods

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    def window(self):
        """Slice of samples covering ``[0, span]``."""
        return slice(self.i0, self.i_end + 1)

    def wronskian(self):
        """``M (v' u - u' v)`` at every grid point."""
        return self.u * self.p_v - self.v * self.p_u

    def periodicity_defect(self):
        """Max mismatch of (rho, rho_dot) between t and t + tau_prime over one period."""
        k = int(round(self.tau_prime / self.step))
        sl = slice(self.i0, self.i_end + 1 - k)
        rho, rho_dot = self.rho, self.rho_dot
        return max(float(np.max(np.abs(rho[sl.start + k: sl.stop + k] - rho[sl]))),
                   float(np.max(np.abs(rho_dot[sl.start + k: sl.stop + k] - rho_dot[sl]))))

    # evaluation ------------------------------------------------------------
    def at(self, t) -> TrajectoryPoint:
        t = np.asarray(t, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise ValueError(f"time outside trajectory grid [{lo}, {hi}]")
        M, W = self._M, self._W
        Mt, Wt = self.schedule.M(t), self.schedule.w2(t)

        def interp(x, p):
            xv = _hermite_interp(self.grid, x, p / M, t)
            pv = _hermite_interp(self.grid, p, -M * W * x, t)
            return xv, pv / Mt

        u, ud = interp(self.u, self.p_u)
        v, vd = interp(self.v, self.p_v)
        uf, ufd = interp(self.u_f, self.p_f)
        ddf = 0.5 * (M * W * self.u_f**2 - self.p_f**2 / M)
        df = _hermite_interp(self.grid, self.delta_f, ddf, t)
        rho = np.hypot(u, v)
        rho_dot = (u * ud + v * vd) / rho
        theta = self._theta_at(t, u, v)
        return TrajectoryPoint(t=t, u=u, u_dot=ud, v=v, v_dot=vd, rho=rho, rho_dot=rho_dot,
                               omega=self.omega, M=Mt, w2=Wt, u_f=uf, u_f_dot=ufd,
                               delta_f=df, theta=theta)

    def _theta_at(self, t, u, v):
        j = np.clip(np.rint((t - self.grid[0]) / self.step).astype(int), 0, self.grid.size - 1)
        ref = self.theta[j]
        raw = np.arctan2(v, u)
        return ref + np.angle(np.exp(1j * (raw - ref)))

    def samples(self):
        """Rows of the trajectory CSV over ``[0, span]``."""
        sl = self.window()
        cols = [self.grid - self.grid[self.i0], self.u, self.u_dot, self.v, self.v_dot,
                self.rho, self.rho_dot, self.u_f, self.u_f_dot, self.delta_f]
        return np.column_stack([np.asarray(c)[sl] for c in cols])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_HEADER)
            for row in self.samples():
                writer.writerow([format(float(x), ".17g") for x in row])


def _track_argument(traj):
    """Continuous arg(u + i v) along the grid with the principal value at t = 0."""
    M = traj.schedule.M(traj.grid)
    rate = np.abs(traj.omega) / (M * (traj.u**2 + traj.v**2))
    if np.max(rate) * traj.step >= math.pi / 2:
        raise BranchError("trajectory grid too coarse to track arg(u + i v)")
    theta = np.unwrap(np.arctan2(traj.v, traj.u))
    principal = math.atan2(traj.v[traj.i0], traj.u[traj.i0])
    return theta - theta[traj.i0] + principal


@dataclass(frozen=True)
class DisplacementSolution:
    grid: np.ndarray
    u_f: np.ndarray
    u_f_dot: np.ndarray
    delta_f: np.ndarray
    periodic: bool
    p_f: np.ndarray = field(repr=False, default=None)


def _delta_f(schedule, grid, i0, uf, pf):
    M, W = schedule.M(grid), schedule.w2(grid)
    rate = 0.5 * (M * W * uf**2 - pf**2 / M)
    h = grid[1] - grid[0]
    seg = 0.5 * h * (rate[1:] + rate[:-1])
    # fourth-order cubic-through-four-points rule away from the two ends
    seg[1:-1] = h / 24 * (-rate[:-3] + 13 * rate[1:-2] + 13 * rate[2:-1] - rate[3:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum - cum[i0]


def _is_periodic(x, p, i0, k, scale=None, tol=PERIODIC_TOL):
    scale = scale or max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(p))))
    return abs(x[i0 + k] - x[i0]) <= tol * scale and abs(p[i0 + k] - p[i0]) <= tol * scale


def displacement_solution(schedule: ParameterSchedule, uf0: float, uf_dot0: float,
                          tau_prime: float | None = None, steps: int = DEFAULT_STEPS,
                          n_periods: int = 1) -> DisplacementSolution:
    """Displacement solution ``u_f`` on ``[0, n_periods * tau_prime]`` and its phase ``delta_f``.

    ``periodic`` reports whether ``(u_f, u_f')`` returns to its initial value
    after ``tau_prime``; callers zero ``u_f`` when it does not.
    """
    tau_prime = schedule.tau if tau_prime is None else float(tau_prime)
    grid, i0, _ = _uniform_grid(schedule.tau, steps, tau_prime * n_periods)
    M0 = float(schedule.M(0.0))
    sol = _propagate(schedule, [[uf0], [M0 * uf_dot0]], grid, i0)
    uf, pf = sol[:, 0, 0], sol[:, 1, 0]
    k = int(round(tau_prime / (grid[1] - grid[0])))
    periodic = _is_periodic(uf, pf, i0, k)
    return DisplacementSolution(grid=grid - 0.0, u_f=uf, u_f_dot=pf / schedule.M(grid),
                                delta_f=_delta_f(schedule, grid, i0, uf, pf),
                                periodic=bool(periodic), p_f=pf)


def _build(schedule, u_ic, v_ic, uf_ic, tau_prime, steps, n_periods, zero_nonperiodic_uf=True):
    schedule.validate()
    grid, i0, i_end = _uniform_grid(schedule.tau, steps, tau_prime * n_periods)
    M0 = float(schedule.M(0.0))
    y0 = np.array([[u_ic[0], v_ic[0], uf_ic[0]],
                   [M0 * u_ic[1], M0 * v_ic[1], M0 * uf_ic[1]]], dtype=float)
    sol = _propagate(schedule, y0, grid, i0)
    u, v, uf = sol[:, 0, 0], sol[:, 0, 1], sol[:, 0, 2]
    pu, pv, pf = sol[:, 1, 0], sol[:, 1, 1], sol[:, 1, 2]
    k = int(round(tau_prime / (grid[1] - grid[0])))
    omega = float(u[i0] * pv[i0] - v[i0] * pu[i0])
    rho = np.hypot(u, v)
    rho_dot = (u * pu + v * pv) / (rho * schedule.M(grid))
    rho_periodic = _is_periodic(rho, rho_dot, i0, k, scale=max(1.0, float(np.max(rho))))
    uf_periodic = True
    zeroed = False
    if np.any(y0[:, 2] != 0):
        uf_periodic = _is_periodic(uf, pf, i0, k)
        if not uf_periodic and zero_nonperiodic_uf:
            uf, pf = np.zeros_like(uf), np.zeros_like(pf)
            zeroed = True
    return ClassicalTrajectory(schedule=schedule, grid=grid, i0=i0, i_end=i_end, u=u, p_u=pu,
                               v=v, p_v=pv, u_f=uf, p_f=pf,
                               delta_f=_delta_f(schedule, grid, i0, uf, pf), omega=omega,
                               tau_prime=float(tau_prime), n_periods=int(n_periods),
                               uf_periodic=bool(uf_periodic), uf_zeroed=zeroed,
                               rho_periodic=bool(rho_periodic))


def _is_scalar(T, tol=1e-8):
    """True when the monodromy is ``+I`` or ``-I`` (every solution (anti)periodic)."""
    return any(np.max(np.abs(T - s * np.eye(2))) <= tol for s in (1.0, -1.0))


def stability(schedule: ParameterSchedule, steps: int = DEFAULT_STEPS):
    """Return ``(monodromy, trace, stable)``.

    ``stable`` means bounded motion: elliptic (|trace| < 2) or the degenerate
    parabolic case ``T = +-I``.
    """
    T = monodromy(schedule, steps)
    tr = float(np.trace(T))
    return T, tr, bool(abs(tr) < 2 - MARGINAL_TOL or _is_scalar(T))


def periodic_envelope(schedule: ParameterSchedule, uf0: float = 0.0, uf_dot0: float = 0.0,
                      steps: int = DEFAULT_STEPS, n_periods: int = 1,
                      tau_prime: float | None = None,
                      zero_nonperiodic_uf: bool = True) -> ClassicalTrajectory:
    """Trajectory whose envelope rho is periodic, built from the Floquet eigensolution.

    The complex solution ``xi`` with ``xi(t + tau) = exp(i theta) xi(t)`` gives
    ``u = Re xi`` and ``v = Im xi``; ``|xi|^2`` is then tau-periodic. The
    solution is normalised to ``Omega = 1`` with ``v(0) = 0``.
    """
    T, tr, _ = stability(schedule, steps)
    tau_prime = schedule.tau if tau_prime is None else float(tau_prime)
    M0 = float(schedule.M(0.0))
    if _is_scalar(T):
        # every solution returns to +-itself; any Omega = 1 pair works
        return _build(schedule, (1.0, 0.0), (0.0, 1.0 / M0), (uf0, uf_dot0), tau_prime, steps,
                      n_periods, zero_nonperiodic_uf)
    if abs(abs(tr) - 2) <= MARGINAL_TOL:
        raise MarginalStabilityError(f"monodromy trace {tr!r} is marginal (|trace| = 2)")
    if abs(tr) > 2:
        raise InstabilityError(f"no bounded periodic envelope: monodromy trace {tr!r}")
    lam = complex(tr / 2, math.sqrt(4 - tr * tr) / 2)
    cand = [np.array([T[0, 1], lam - T[0, 0]]), np.array([lam - T[1, 1], T[1, 0]])]
    zeta = max(cand, key=lambda z: float(np.linalg.norm(z)))
    wr = (np.conj(zeta[0]) * zeta[1]).imag
    if wr < 0:
        zeta = np.conj(zeta)
        wr = -wr
    zeta = zeta / math.sqrt(wr)
    zeta = zeta * np.exp(-1j * np.angle(zeta[0]))
    u_ic = (zeta[0].real, zeta[1].real / M0)
    v_ic = (0.0, zeta[1].imag / M0)
    return _build(schedule, u_ic, v_ic, (uf0, uf_dot0), tau_prime, steps, n_periods,
                  zero_nonperiodic_uf)


def explicit_trajectory(schedule: ParameterSchedule, u0: float, udot0: float, v0: float,
                        vdot0: float, uf0: float = 0.0, uf_dot0: float = 0.0,
                        tau_prime: float | None = None, steps: int = DEFAULT_STEPS,
                        n_periods: int = 1, zero_nonperiodic_uf: bool = True) -> ClassicalTrajectory:
    """Trajectory from user-supplied initial data for ``u`` and ``v``.

    When ``tau_prime`` is not given, tau is tried first and then 2 tau; if rho
    is periodic for neither, the trajectory is returned over tau with
    ``rho_periodic = False``. A displacement solution that is not periodic
    over ``tau_prime`` is replaced by zero unless ``zero_nonperiodic_uf`` is
    False (the Schrödinger equation holds either way; only quasi-periodicity
    needs it).
    """
    args = ((u0, udot0), (v0, vdot0), (uf0, uf_dot0))
    if tau_prime is None:
        for cand in (schedule.tau, 2 * schedule.tau):
            traj = _build(schedule, *args, cand, steps, n_periods, zero_nonperiodic_uf)
            if traj.rho_periodic:
                return traj
        tau_prime = schedule.tau
    return _build(schedule, *args, tau_prime, steps, n_periods, zero_nonperiodic_uf)
