"""
Binomial entropy and rate functions, and the gamma-curve x -> h_p(x^(1/gamma)).

All public functions accept a float or a numpy array and return the same
shape. Endpoints of [0, 1] use the convention 0 log 0 = 0.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, special

from config import ROOT_MAXITER, ROOT_XTOL
from exceptions import DomainError
from schemas import GammaCurve

logger = logging.getLogger(__name__)

BRACKET_INSET = 1e-14


def _unwrap(a: np.ndarray):
    return float(a) if a.ndim == 0 else a


def _check_closed_unit(u, name: str = "u") -> np.ndarray:
    a = np.asarray(u, dtype=float)
    if np.any(np.isnan(a)) or np.any(a < 0.0) or np.any(a > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return a


def _check_open_unit(u, name: str = "u") -> np.ndarray:
    a = np.asarray(u, dtype=float)
    if np.any(np.isnan(a)) or np.any(a <= 0.0) or np.any(a >= 1.0):
        raise DomainError(f"{name} must lie in (0, 1)")
    return a


def entropy(u):
    """h(u) = u log u + (1 - u) log(1 - u)."""
    a = _check_closed_unit(u)
    return _unwrap(special.xlogy(a, a) + special.xlogy(1.0 - a, 1.0 - a))


def rate(u, p: float):
    """h_p(u), the relative entropy of Bernoulli(u) with respect to Bernoulli(p)."""
    a = _check_closed_unit(u)
    _check_open_unit(p, "p")
    return _unwrap(special.rel_entr(a, p) + special.rel_entr(1.0 - a, 1.0 - p))


def rate_d1(u, p: float):
    """h_p'(u) = log(u / (1 - u)) - log(p / (1 - p))."""
    a = _check_open_unit(u)
    _check_open_unit(p, "p")
    return _unwrap(special.logit(a) - special.logit(p))


def rate_d1_extended(u, p: float):
    """h_p'(u) on [0, 1], with -inf at u = 0 and +inf at u = 1."""
    a = _check_closed_unit(u)
    _check_open_unit(p, "p")
    with np.errstate(divide="ignore"):
        return _unwrap(special.logit(a) - special.logit(p))


def rate_d2(u):
    """h_p''(u) = 1 / (u (1 - u)); independent of p."""
    a = _check_open_unit(u)
    return _unwrap(1.0 / (a * (1.0 - a)))


# Gamma-curve
def _check_curve_domain(x, open_right: bool = False) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    bad = np.isnan(a) | (a < 0.0) | (a > 1.0)
    if open_right:
        bad |= (a <= 0.0) | (a >= 1.0)
    if np.any(bad):
        raise DomainError("x outside the curve domain")
    return a


def curve_value(c: GammaCurve, x):
    """h_p(x^(1/gamma)) for x in [0, 1]."""
    a = _check_curve_domain(x)
    return rate(np.power(a, 1.0 / c.gamma), c.p)


def curve_d1(c: GammaCurve, x):
    """(1/gamma) x^(1/gamma - 1) h_p'(x^(1/gamma)) for x in (0, 1)."""
    a = _check_curve_domain(x, open_right=True)
    q = np.power(a, 1.0 / c.gamma)
    return _unwrap(np.power(q, 1.0 - c.gamma) * (special.logit(q) - special.logit(c.p)) / c.gamma)


def curve_d1_extended(c: GammaCurve, x):
    """curve_d1 on [0, 1]: the slope diverges at both endpoints (to 0 from below at x = 0 when gamma < 1)."""
    a = _check_curve_domain(x)
    q = np.power(a, 1.0 / c.gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.power(q, 1.0 - c.gamma) * (special.logit(q) - special.logit(c.p)) / c.gamma
    if c.gamma < 1.0:
        out = np.where(q == 0.0, -0.0, out)
    else:
        out = np.where(q == 0.0, -np.inf, out)
    out = np.where(q == 1.0, np.inf, out)
    return _unwrap(out)


def _convexity_indicator(q, p: float, gamma: float):
    """Sign-carrying factor of the curve's second derivative at x = q^gamma."""
    return 1.0 / (1.0 - q) - (gamma - 1.0) * special.logit(q) + (gamma - 1.0) * special.logit(p)


def curve_d2(c: GammaCurve, x):
    """Second derivative q^(1-2 gamma)/gamma^2 * (1/(1-q) - (gamma-1) logit q + (gamma-1) logit p)."""
    a = _check_curve_domain(x, open_right=True)
    q = np.power(a, 1.0 / c.gamma)
    return _unwrap(np.power(q, 1.0 - 2.0 * c.gamma) / c.gamma ** 2 * _convexity_indicator(q, c.p, c.gamma))


def p0(gamma: float) -> float:
    """Critical density (gamma-1)/(gamma-1+e^(gamma/(gamma-1))); the curve is convex iff p >= p0."""
    if not gamma > 1.0:
        raise DomainError(f"p0 needs gamma > 1 (the curve is always convex otherwise), got {gamma!r}")
    g = gamma - 1.0
    # (g / (g + e^(gamma/g))) written as expit to stay finite as gamma -> 1
    return float(special.expit(math.log(g) - gamma / g))


def gamma_threshold_beta1(gamma: float) -> float:
    """log(gamma - 1) - gamma/(gamma - 1): beta1 below which the gamma-curve is non-convex."""
    if not gamma > 1.0:
        raise DomainError("the threshold needs gamma > 1")
    return math.log(gamma - 1.0) - gamma / (gamma - 1.0)


def is_convex(c: GammaCurve) -> bool:
    return c.gamma <= 1.0 or c.p >= p0(c.gamma)


def inflection_points(c: GammaCurve) -> Optional[Tuple[float, float]]:
    """Both inflection points (x_a, x_b) of a non-convex curve, or None when it is convex."""
    if is_convex(c):
        return None
    q_mid = (c.gamma - 1.0) / c.gamma
    if _convexity_indicator(q_mid, c.p, c.gamma) >= 0.0:
        return None

    def f(q):
        return _convexity_indicator(q, c.p, c.gamma)

    # the indicator decreases until q_mid and increases afterwards
    q_a = optimize.brentq(f, c.p, q_mid, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    q_b = optimize.brentq(f, q_mid, 1.0 - BRACKET_INSET, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    logger.debug(f"inflection points for p={c.p}, gamma={c.gamma}: q=({q_a:.12f}, {q_b:.12f})")
    return q_a ** c.gamma, q_b ** c.gamma
