# backend/satlab/core/statdist.py

"""
Statistical distance between two-outcome experiments.

Two probabilities are distinguishable in m trials when their gap is at least
the sum of their standard errors. Counting a maximal chain of such points
between p1 and p2 and dividing by sqrt(m) gives, as m grows, the length
    d(p1, p2) = integral dp / (2 sqrt(p (1 - p))) = arccos(sqrt(p1 p2) + sqrt(q1 q2)),
which does not depend on how the probabilities are parametrised.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from pydantic import ValidationError
from scipy import integrate, optimize

from satlab.errors import (
    NeverDistinguishableError,
    PreconditionError,
    QuadratureError,
)
from satlab.schemas import BernoulliPoint, DistanceRecord, Orientation

logger = logging.getLogger(__name__)

QUAD_TOLERANCE = 1e-10
ERROR_CEILING = 1e-7
_MONOTONE_SAMPLES = 257


def _point(p: float) -> BernoulliPoint:
    try:
        return BernoulliPoint(p=p)
    except ValidationError as exc:
        raise PreconditionError(f"probability must be in [0, 1], got {p}") from exc


def _orientation(theta: float) -> Orientation:
    try:
        return Orientation(theta=theta)
    except ValidationError as exc:
        raise PreconditionError(f"theta must be in [0, pi/2], got {theta}") from exc


def _check_trials(m: float) -> None:
    if m < 1:
        raise PreconditionError(f"number of trials must be >= 1, got {m}")


# --------------------------------------------------------------------------- #
# Uncertainty and distinguishability
# --------------------------------------------------------------------------- #


def delta_p(p: float, m: float) -> float:
    _check_trials(m)
    p = _point(p).p
    return math.sqrt(p * (1.0 - p) / m)


def distinguishable(p: float, p_other: float, m: float) -> bool:
    """|p - p'| >= dp + dp'; the boundary counts as distinguishable."""
    return abs(p - p_other) >= delta_p(p, m) + delta_p(p_other, m)


def min_trials_from_zero(p2: float) -> int:
    """Smallest m for which 0 and p2 are distinguishable: ceil((1 - p2) / p2)."""
    p2 = _point(p2).p
    if p2 == 0.0:
        raise NeverDistinguishableError("0 and 0 are never distinguishable")
    m = math.ceil((1.0 - p2) / p2)
    if m == 0:
        return 0
    # Guard the ceiling against rounding in either direction.
    while not distinguishable(0.0, p2, m):
        m += 1
    while m > 1 and distinguishable(0.0, p2, m - 1):
        m -= 1
    return m


def bernoulli_distance(p1: float, p2: float) -> float:
    """
    arccos(sqrt(p1 p2) + sqrt(q1 q2)), evaluated as the difference of the
    angles asin(sqrt(p)); the two agree exactly and the latter is additive
    along the interval to rounding.
    """
    a = math.asin(math.sqrt(_point(p1).p))
    b = math.asin(math.sqrt(_point(p2).p))
    return abs(b - a)


def sat_ensemble_distance(gamma1: float, gamma2: float) -> float:
    """
    Distance between formula ensembles, defined through the one-to-one map from
    an ensemble to its output probability gamma.
    """
    return bernoulli_distance(gamma1, gamma2)


# --------------------------------------------------------------------------- #
# Polarization model
# --------------------------------------------------------------------------- #


def polarization_prob(theta: float) -> BernoulliPoint:
    theta = _orientation(theta).theta
    return BernoulliPoint(p=min(1.0, max(0.0, math.cos(theta) ** 2)))


def delta_theta(theta: float, m: float) -> float:
    """
    |dp/dtheta|^-1 * dp for p = cos^2(theta). Algebraically 1/(2 sqrt(m)); the
    endpoints are removable 0/0 points and return that limit.
    """
    _check_trials(m)
    theta = _orientation(theta).theta
    s, c = math.sin(theta), math.cos(theta)
    slope = abs(2.0 * s * c)
    if slope == 0.0:
        return 1.0 / (2.0 * math.sqrt(m))
    # p(1-p) = cos^2 sin^2, taken directly to avoid 1 - cos^2 cancellation.
    return math.sqrt((c * c) * (s * s) / m) / slope


def distinguishable_orientations(theta: float, theta_other: float, m: float) -> bool:
    return abs(theta - theta_other) >= delta_theta(theta, m) + delta_theta(theta_other, m)


def orientation_distance(theta1: float, theta2: float) -> float:
    """Closed form of the length integral for p = cos^2(theta)."""
    return abs(_orientation(theta2).theta - _orientation(theta1).theta)


# --------------------------------------------------------------------------- #
# Curves in probability space
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class ParamCurve:
    p_of_t: Callable[[float], float]
    t1: float
    t2: float
    dp_dt: Optional[Callable[[float], float]] = None

    def derivative(self, t: float) -> float:
        if self.dp_dt is not None:
            return self.dp_dt(t)
        lo, hi = min(self.t1, self.t2), max(self.t1, self.t2)
        h = 1e-6 * max(1.0, abs(t))
        # Stay inside the interval: p may be undefined outside it.
        if t - h < lo:
            return (self.p_of_t(t + h) - self.p_of_t(t)) / h
        if t + h > hi:
            return (self.p_of_t(t) - self.p_of_t(t - h)) / h
        return (self.p_of_t(t + h) - self.p_of_t(t - h)) / (2.0 * h)


def polarization_curve(theta1: float, theta2: float) -> ParamCurve:
    _orientation(theta1)
    _orientation(theta2)
    return ParamCurve(
        p_of_t=lambda t: math.cos(t) ** 2,
        t1=theta1,
        t2=theta2,
        dp_dt=lambda t: -math.sin(2.0 * t),
    )


def power_curve(a: float, b: float, exponent: float) -> ParamCurve:
    """p(t) = a + (b - a) t**exponent on t in [0, 1]."""
    _point(a)
    _point(b)
    if exponent <= 0:
        raise PreconditionError(f"exponent must be positive, got {exponent}")

    def slope(t: float) -> float:
        if t == 0.0 and exponent < 1.0:
            return math.inf
        return (b - a) * exponent * t ** (exponent - 1.0)

    return ParamCurve(
        p_of_t=lambda t: a + (b - a) * t**exponent,
        t1=0.0,
        t2=1.0,
        dp_dt=slope,
    )


def _check_monotone(curve: ParamCurve) -> None:
    ts = np.linspace(curve.t1, curve.t2, _MONOTONE_SAMPLES)
    ps = np.array([curve.p_of_t(float(t)) for t in ts])
    if np.any(ps < 0.0) or np.any(ps > 1.0) or not np.all(np.isfinite(ps)):
        raise PreconditionError("curve leaves [0, 1]")
    steps = np.diff(ps)
    if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
        raise PreconditionError("curve is not strictly monotone on its interval")


def _integrand(curve: ParamCurve, t: float) -> float:
    p = curve.p_of_t(t)
    spread = p * (1.0 - p)
    if spread <= 0.0:
        return 0.0
    return abs(curve.derivative(t)) / (2.0 * math.sqrt(spread))


def curve_distance(curve: ParamCurve) -> float:
    """
    Length integral |dp/dt| / (2 sqrt(p (1 - p))) along the curve.

    The parameter is mapped through t = t1 + (t2 - t1) sin^2(phi), phi in
    [0, pi/2]. Where p reaches 0 or 1 linearly the integrand has an inverse
    square-root blow-up; the sin^2 map turns it into a bounded, smooth one.
    """
    if curve.t1 == curve.t2:
        return 0.0
    _check_monotone(curve)
    span = curve.t2 - curve.t1

    def transformed(phi: float) -> float:
        s = math.sin(phi)
        t = curve.t1 + span * s * s
        return _integrand(curve, t) * abs(span) * math.sin(2.0 * phi)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, error = integrate.quad(
            transformed,
            0.0,
            math.pi / 2,
            epsabs=QUAD_TOLERANCE,
            epsrel=QUAD_TOLERANCE,
            limit=200,
        )
    for warning in caught:
        logger.debug("quad: %s", warning.message)
    # Roundoff warnings at the requested tolerance are fine; a large error is not.
    if not math.isfinite(value) or error > ERROR_CEILING:
        raise QuadratureError(
            f"quadrature did not converge: value={value}, error estimate={error:.3g}"
        )
    return value


def delta_t(curve: ParamCurve, t: float, m: float) -> float:
    """Parameter-space uncertainty |dp/dt|^-1 * dp at t."""
    _check_trials(m)
    slope = abs(curve.derivative(t))
    if slope == 0.0:
        raise PreconditionError(f"dp/dt vanishes at t={t}")
    return delta_p(curve.p_of_t(t), m) / slope


# --------------------------------------------------------------------------- #
# Packing counts
# --------------------------------------------------------------------------- #


def _next_distinguishable(p: float, m: float) -> float:
    """
    Smallest p' > p with p' - p >= dp + dp'. With c = p + dp this is the larger
    root of (1 + 1/m) p'^2 - (2c + 1/m) p' + c^2 = 0.
    """
    c = p + math.sqrt(p * (1.0 - p) / m)
    if c > 1.0:
        return math.inf
    inv_m = 1.0 / m
    disc = (4.0 * c * (1.0 - c) + inv_m) * inv_m
    root = ((2.0 * c + inv_m) + math.sqrt(disc)) / (2.0 * (1.0 + inv_m))
    # At p = 1 the root is p itself.
    return root if root > p else math.inf


def packing_count(p1: float, p2: float, m: float) -> int:
    """
    Greedy chain from p1: step to the nearest distinguishable point until past
    p2. count / sqrt(m) tends to bernoulli_distance(p1, p2).
    """
    _check_trials(m)
    p1, p2 = _point(p1).p, _point(p2).p
    if p1 > p2:
        raise PreconditionError(f"need p1 <= p2, got {p1} > {p2}")
    count = 0
    p = p1
    while True:
        p = _next_distinguishable(p, m)
        if p > p2:
            return count
        count += 1


def curve_packing_count(curve: ParamCurve, m: float) -> int:
    """
    Greedy chain in the curve's own parameter, using delta_t as the
    uncertainty. For a monotone curve this counts the same distinguishable
    points as packing_count does in probability space.
    """
    _check_trials(m)
    _check_monotone(curve)
    lo, hi = sorted((curve.t1, curve.t2))

    def gap(t: float, t_next: float) -> float:
        return (t_next - t) - delta_t(curve, t, m) - delta_t(curve, t_next, m)

    count = 0
    t = lo
    while True:
        dt = delta_t(curve, t, m)
        if t >= hi or t + dt > hi or gap(t, hi) < 0.0:
            return count
        # Expand a bracket from the point's own uncertainty, then refine.
        left, right = t, t + (dt if dt > 0.0 else 1e-12 * (hi - lo))
        while gap(t, right) < 0.0:
            left, right = right, min(hi, t + 2.0 * (right - t))
        if gap(t, left) >= 0.0:
            # dt = 0 where p is 0 or 1; nothing between t and right resolves better.
            t = right
        else:
            t = optimize.brentq(lambda u, t=t: gap(t, u), left, right, xtol=1e-14)
        count += 1


def distance_record(p1: float, p2: float, m: Optional[int] = None) -> DistanceRecord:
    lo, hi = sorted((p1, p2))
    min_trials: Optional[int] = None
    if lo == 0.0 and hi > 0.0:
        min_trials = min_trials_from_zero(hi)
    count: Optional[int] = None
    normalized: Optional[float] = None
    if m is not None:
        count = packing_count(lo, hi, m)
        normalized = count / math.sqrt(m)
    return DistanceRecord(
        p1=p1,
        p2=p2,
        m=m,
        distance_rad=bernoulli_distance(p1, p2),
        min_trials=min_trials,
        packing_count=count,
        normalized_count=normalized,
    )
