"""Hermite and associated Laguerre polynomials by upward three-term recurrence.

All functions broadcast over ``x``. The Laguerre parameter may be any real
number greater than -1, which is needed because the radial parameters of the
models are half-integers for some particle numbers.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DomainError

MAX_DEGREE = 64


def _check_degree(k):
    if int(k) != k or k < 0:
        raise DomainError(f"degree must be a nonnegative integer, got {k!r}")
    if k > MAX_DEGREE:
        raise DomainError(f"degree {k} exceeds the cap of {MAX_DEGREE}")
    return int(k)


def _check_parameter(a):
    if not a > -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {a!r}")


def hermite(m: int, x):
    """Physicists' Hermite polynomial ``H_m(x)``."""
    m = _check_degree(m)
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for k in range(m):
        prev, cur = cur, 2 * x * cur - 2 * k * prev
    return cur if cur.ndim else float(cur)


def laguerre(n: int, a: float, x):
    """Associated Laguerre polynomial ``L_n^a(x)`` for real ``a > -1``."""
    n = _check_degree(n)
    _check_parameter(a)
    x = np.asarray(x, dtype=float)
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for k in range(n):
        prev, cur = cur, ((2 * k + 1 + a - x) * cur - (k + a) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def hermite_derivative(m: int, x):
    """``H_m'(x) = 2 m H_{m-1}(x)``."""
    m = _check_degree(m)
    if m == 0:
        return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
    return 2 * m * hermite(m - 1, x)


def laguerre_derivative(n: int, a: float, x, order: int = 1):
    """Derivative of ``L_n^a``; each order applies ``(L_n^a)' = -L_{n-1}^{a+1}``."""
    n = _check_degree(n)
    _check_parameter(a)
    if order > n:
        return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
    return (-1) ** order * laguerre(n - order, a + order, x)
