"""Closed-form regime constants for Poisson branching / ER graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class RegimeConstants:
    lam: float
    zeta: float
    I: float


def _survival_residual(z: float, lam: float) -> float:
    return z - 1.0 + math.exp(-lam * z)


def survival_probability(lam: float, tol: float = 1e-12) -> float:
    """Survival probability of a Poisson(``lam``) branching process.

    Zero for ``lam <= 1``. Otherwise the root of ``z = 1 - exp(-lam z)`` in
    ``(0, 1)``, found by bisection on ``[tol, 1]``; the bracket is halved until
    it cannot shrink further in floating point, so the residual ends up far
    below ``tol`` away from the critical point.
    """
    if not math.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam}")
    if lam <= 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if lam <= 1.0:
        return 0.0
    lo, hi = tol, 1.0
    if _survival_residual(lo, lam) >= 0:
        # lam so close to 1 that the root sits below tol
        lo = math.ulp(0.0)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _survival_residual(mid, lam) < 0:
            lo = mid
        else:
            hi = mid
    z = lo if abs(_survival_residual(lo, lam)) <= abs(_survival_residual(hi, lam)) else hi
    if abs(_survival_residual(z, lam)) > tol:
        raise ArithmeticError(f"bisection residual above tol={tol} at lambda={lam}")
    return z


def fragmentation_constant(lam: float) -> float:
    """``I = lam - 1 - log(lam)`` on the subcritical range ``0 < lam < 1``."""
    if not (0.0 < lam < 1.0):
        raise DomainError(f"fragmentation constant needs 0 < lambda < 1, got {lam}")
    return _rate_function(lam)


def _rate_function(lam: float) -> float:
    # lam - 1 - log(lam) with the cancellation near lam = 1 removed
    x = lam - 1.0
    return x - math.log1p(x)


def critical_schedule(theta: float, n: int) -> float:
    """``1 + theta * n**(-1/3)``."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    lam = 1.0 + theta / float(np.cbrt(float(n)))
    if lam < 0:
        raise DomainError(f"critical schedule is negative: 1 + {theta}*{n}^(-1/3) = {lam}")
    if lam > n:
        raise DomainError(f"critical schedule {lam} exceeds n={n}")
    return lam


def regime_constants(lam: float, tol: float = 1e-12) -> RegimeConstants:
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError(f"lambda must be positive and finite, got {lam}")
    return RegimeConstants(lam, survival_probability(lam, tol), _rate_function(lam))


def supercritical_schedule(lam: float, delta: float, n: int) -> float:
    """Homogeneous perturbation ``lam * (1 + sqrt(2 delta log(n) / (lam n))``.

    Its aggregate size ``R_n`` against the base ``lam`` is ``delta log n`` up to
    a factor ``1 + O(1/n)``.
    """
    if lam <= 0 or delta < 0:
        raise DomainError(f"need lambda > 0 and delta >= 0, got {lam}, {delta}")
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return lam * (1.0 + math.sqrt(2.0 * delta / lam * math.log(n) / n))
