"""Estimator-style wrappers: ``fit`` on a parameter schedule, then query.

These follow the scikit-learn conventions (constructor stores parameters
verbatim, ``fit`` returns ``self``, fitted attributes end in ``_``) so that
``get_params``/``set_params``/``clone`` work for parameter sweeps.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .classical import TRAJECTORY_HEADER, explicit_trajectory, periodic_envelope, stability
from .integration import QuadratureSpec
from .models import ModelSpec, SpectrumLabel, sector_contains
from .phase import phase_report
from .schedule import ParameterSchedule
from .wavefunctions import CoherentState


def _as_schedule(X):
    if isinstance(X, ParameterSchedule):
        return X
    if isinstance(X, dict):
        return ParameterSchedule(str(X["M"]), str(X["w2"]), X["tau"])
    raise TypeError("expected a ParameterSchedule or a {'M', 'w2', 'tau'} mapping")


class EnvelopeSolver(TransformerMixin, BaseEstimator):
    """Classical solutions for a periodic schedule.

    ``mode="floquet"`` builds the periodic envelope from the monodromy
    eigenvector; ``mode="explicit"`` integrates ``initial = (u0, u0', v0, v0')``.
    ``transform(times)`` returns the trajectory columns (see
    :data:`TRAJECTORY_HEADER`) at the requested times.
    """

    def __init__(self, mode="floquet", initial=None, displacement=(0.0, 0.0), steps=4096,
                 zero_nonperiodic_uf=True):
        self.mode = mode
        self.initial = initial
        self.displacement = displacement
        self.steps = steps
        self.zero_nonperiodic_uf = zero_nonperiodic_uf

    def fit(self, X, y=None):
        schedule = _as_schedule(X)
        uf0, ufd0 = self.displacement
        if self.mode == "floquet":
            traj = periodic_envelope(schedule, uf0, ufd0, steps=self.steps,
                                     zero_nonperiodic_uf=self.zero_nonperiodic_uf)
        elif self.mode == "explicit":
            if self.initial is None or len(self.initial) != 4:
                raise ValueError("explicit mode needs initial=(u0, udot0, v0, vdot0)")
            traj = explicit_trajectory(schedule, *map(float, self.initial), uf0=uf0, uf_dot0=ufd0,
                                       steps=self.steps, zero_nonperiodic_uf=self.zero_nonperiodic_uf)
        else:
            raise ValueError(f"mode must be 'floquet' or 'explicit', got {self.mode!r}")
        T, tr, stable = stability(schedule, self.steps)
        self.schedule_ = schedule
        self.trajectory_ = traj
        self.monodromy_ = T
        self.trace_ = tr
        self.stable_ = stable
        self.omega_ = traj.omega
        self.tau_prime_ = traj.tau_prime
        return self

    def transform(self, X):
        check_is_fitted(self, "trajectory_")
        t = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_2d=True).ravel()
        rows = []
        for ti in t:
            pt = self.trajectory_.at(float(ti))
            rows.append([getattr(pt, name) for name in TRAJECTORY_HEADER])
        return np.array(rows, dtype=float)

    def get_feature_names_out(self, input_features=None):
        return np.array(TRAJECTORY_HEADER, dtype=object)


class CoherentStateModel(BaseEstimator):
    """Coherent state of one model on the envelope of a fitted schedule.

    ``predict(X, t)`` evaluates ``psi(t, x)`` on an ``(P, N)`` array of sector
    points; ``phase_report()`` runs the global/dynamical/geometric phase
    pipeline on the fitted trajectory.
    """

    def __init__(self, variant="A", N=2, lam=1.0, alpha=None, hbar=1.0, m=0, n=0, k=0, level=0,
                 poly=None, solver=None, quadrature=None):
        self.variant = variant
        self.N = N
        self.lam = lam
        self.alpha = alpha
        self.hbar = hbar
        self.m = m
        self.n = n
        self.k = k
        self.level = level
        self.poly = poly
        self.solver = solver
        self.quadrature = quadrature

    def _spec(self):
        return ModelSpec(self.variant, self.N, self.lam, self.alpha, self.hbar)

    def fit(self, X, y=None):
        spec = self._spec()
        label = SpectrumLabel(self.m, self.n, self.k, self.level).validate(spec)
        solver = EnvelopeSolver() if self.solver is None else self.solver
        solver = solver.fit(X) if not hasattr(solver, "trajectory_") else solver
        self.spec_ = spec
        self.label_ = label
        self.solver_ = solver
        self.state_ = CoherentState(spec, label, solver.trajectory_, poly=self.poly)
        self.energy_ = self.state_.energy
        return self

    def predict(self, X, t=0.0):
        check_is_fitted(self, "state_")
        x = check_array(X, dtype=float)
        if x.shape[1] != self.spec_.N:
            raise ValueError(f"expected {self.spec_.N} coordinates per point, got {x.shape[1]}")
        return self.state_(float(t), x, check=True)

    def in_sector(self, X):
        check_is_fitted(self, "state_")
        return sector_contains(self.spec_, check_array(X, dtype=float))

    def phase_report(self, n_nodes=64, threads=1):
        check_is_fitted(self, "state_")
        quad = QuadratureSpec() if self.quadrature is None else self.quadrature
        return phase_report(self.state_, self.solver_.schedule_, quad, n_nodes=n_nodes, threads=threads)
