"""
Convex minorant of the gamma-curve x -> h_p(x^(1/gamma)).

When the curve is not convex it runs convex / concave / convex, and its
convex minorant replaces the middle stretch by the lower common (double)
tangent. Touch points are reported in q-coordinates, q = x^(1/gamma).
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from config import ROOT_MAXITER, ROOT_XTOL, TANGENT_RESIDUAL_TOL
from exceptions import ConvergenceError, DomainError
from graphon import lp_norm, rate_functional
from rate_fn import curve_d1, curve_value, inflection_points, p0
from schemas import BoundaryRow, DoubleTangent, GammaCurve, StepGraphon

logger = logging.getLogger(__name__)

RIGHT_EDGE = 1.0 - 1e-15
R_HALF_BAND = 1e-8
BOUNDARY_P_FLOOR = 1e-6
LOG_SPAN = 700.0
T_CEILING = 1e6
BRACKET_WIDENINGS = 60
CHECK_GRID = 4001
LAST_BELOW_ONE = float(np.nextafter(1.0, 0.0))


def _logit(q: float) -> float:
    return math.log(q / (1.0 - q))


def _slope(q: float, p: float, gamma: float) -> float:
    """Slope of the gamma-curve at x = q^gamma."""
    return q ** (1.0 - gamma) * (_logit(q) - _logit(p)) / gamma


# Touch points are solved as delta = q - p (in log delta) and eps = 1 - q (in -log eps);
# either can sit below the float resolution of q itself.
def _left_value(delta: float, beta: float, p: float, gamma: float) -> float:
    """h_p(p + delta) - beta (p + delta)^gamma."""
    log_ratio = math.log1p(delta / p)
    hp = (p + delta) * log_ratio + (1.0 - p - delta) * math.log1p(-delta / (1.0 - p))
    return hp - beta * math.exp(gamma * (math.log(p) + log_ratio))


def _right_value(eps: float, beta: float, p: float, gamma: float) -> float:
    """h_p(1 - eps) - beta (1 - eps)^gamma."""
    log_q = math.log1p(-eps)
    hp = (1.0 - eps) * (log_q - math.log(p)) + float(special.xlogy(eps, eps)) - eps * math.log1p(-p)
    return hp - beta * math.exp(gamma * log_q)


def _left_touch(beta: float, p: float, gamma: float, q_a: float) -> float:
    """delta minimizing the left value over q in [p, q_a]."""
    if beta <= 0.0:
        return 0.0
    log_p = math.log(p)

    def stationarity(s: float) -> float:
        delta = math.exp(s)
        log_ratio = math.log1p(delta / p)
        return (
            log_ratio
            - math.log1p(-delta / (1.0 - p))
            - beta * gamma * math.exp((gamma - 1.0) * (log_p + log_ratio))
        )

    s_hi = math.log(q_a - p)
    if stationarity(s_hi) <= 0.0:
        return q_a - p
    s_lo = s_hi - LOG_SPAN
    if stationarity(s_lo) >= 0.0:
        return math.exp(s_lo)
    return math.exp(optimize.brentq(stationarity, s_lo, s_hi, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER))


def _right_touch(beta: float, p: float, gamma: float, q_b: float) -> float:
    """eps minimizing the right value over q in [q_b, 1)."""
    logit_p = _logit(p)

    def stationarity(t: float) -> float:
        log_q = math.log1p(-math.exp(-t))
        return log_q + t - logit_p - beta * gamma * math.exp((gamma - 1.0) * log_q)

    t_lo = -math.log1p(-q_b)
    if stationarity(t_lo) >= 0.0:
        return 1.0 - q_b
    t_hi = t_lo + 1.0
    while stationarity(t_hi) <= 0.0:
        t_hi *= 2.0
        if t_hi > T_CEILING:
            raise ConvergenceError(
                "right touch point is not bracketed", {"p": p, "gamma": gamma, "slope": beta}
            )
    t = optimize.brentq(stationarity, t_lo, t_hi, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    return math.exp(-t)


def double_tangent(c: GammaCurve) -> Optional[DoubleTangent]:
    """Lower common tangent of the curve, or None when the curve is convex.

    For a slope beta, L(beta) and R(beta) are the minima of h_p(q) - beta q^gamma
    over the two convex stretches; L - R is strictly increasing in beta and
    vanishes at the tangent slope. The residual is a value gap: |L - R| together
    with how far the line rises above the curve on a check grid.
    """
    inflections = inflection_points(c)
    if inflections is None:
        return None
    p, gamma = c.p, c.gamma
    q_a, q_b = (x ** (1.0 / gamma) for x in inflections)

    def gap(beta: float) -> float:
        left = _left_value(_left_touch(beta, p, gamma, q_a), beta, p, gamma)
        right = _right_value(_right_touch(beta, p, gamma, q_b), beta, p, gamma)
        return left - right

    beta_lo = max(_slope(q_b, p, gamma), 0.0)
    beta_hi = _slope(q_a, p, gamma)
    diagnostics = {"p": p, "gamma": gamma, "beta_bracket": (beta_lo, beta_hi)}
    width = max(beta_hi - beta_lo, 1e-12)
    for _ in range(BRACKET_WIDENINGS):
        if gap(beta_lo) < 0.0:
            break
        beta_lo = max(beta_lo - width, 0.0)
        width *= 2.0
    for _ in range(BRACKET_WIDENINGS):
        if gap(beta_hi) > 0.0:
            break
        beta_hi += width
        width *= 2.0
    try:
        beta, result = optimize.brentq(
            gap, beta_lo, beta_hi, xtol=1e-15, maxiter=ROOT_MAXITER, full_output=True, disp=False
        )
    except ValueError as e:
        diagnostics["gap_at_bracket"] = (gap(beta_lo), gap(beta_hi))
        raise ConvergenceError(f"double tangent slope is not bracketed: {e}", diagnostics)
    if not result.converged:
        diagnostics["iterations"] = result.iterations
        raise ConvergenceError("double tangent slope search did not converge", diagnostics)

    delta = _left_touch(beta, p, gamma, q_a)
    eps = _right_touch(beta, p, gamma, q_b)
    intercept = _left_value(delta, beta, p, gamma)
    value_gap = abs(intercept - _right_value(eps, beta, p, gamma))
    q_grid = np.linspace(0.0, 1.0, CHECK_GRID)
    above = intercept - float(np.min(curve_value(c, q_grid ** gamma) - beta * q_grid ** gamma))
    residual = max(value_gap, above, 0.0)
    q_lo = p + delta
    q_hi = min(1.0 - eps, LAST_BELOW_ONE)
    if residual > TANGENT_RESIDUAL_TOL:
        diagnostics.update({"slope": beta, "q_lo": q_lo, "q_hi": q_hi, "residual": residual})
        raise ConvergenceError(f"tangency residual {residual:.3e} exceeds tolerance", diagnostics)
    logger.debug(
        f"double tangent p={p}, gamma={gamma}: slope={beta:.12f}, q-p={delta:.3e}, 1-q={eps:.3e}"
    )
    return DoubleTangent(q_lo=q_lo, q_hi=q_hi, slope=beta, intercept=intercept, residual=residual)


def d2_touch_points(p: float) -> Optional[Tuple[float, float]]:
    """Zeros other than 1/2 of log(x/(1-x)) - (1-2x) log(p/(1-p)); None for p >= p0(2)."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    inflections = inflection_points(GammaCurve(p=p, gamma=2.0))
    if inflections is None:
        return None
    lp = _logit(p)

    def derivative(x: float) -> float:
        return _logit(x) - (1.0 - 2.0 * x) * lp

    q_a, q_b = (math.sqrt(x) for x in inflections)
    q_lo = optimize.brentq(derivative, p, q_a, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    q_hi = optimize.brentq(derivative, q_b, RIGHT_EDGE, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)
    return q_lo, q_hi


def minorant_value(c: GammaCurve, x, tangent: Optional[DoubleTangent] = None):
    """Convex minorant of the curve at x in [0, 1]; pass `tangent` to reuse a solved tangent."""
    values = np.asarray(curve_value(c, x), dtype=float)
    if tangent is None:
        tangent = double_tangent(c)
    if tangent is None:
        return float(values) if values.ndim == 0 else values
    a = np.asarray(x, dtype=float)
    inside = (a > tangent.q_lo ** c.gamma) & (a < tangent.q_hi ** c.gamma)
    out = np.where(inside, tangent.slope * a + tangent.intercept, values)
    return float(out) if out.ndim == 0 else out


def on_minorant(c: GammaCurve, q: float, tangent: Optional[DoubleTangent] = None) -> bool:
    """True iff (q^gamma, h_p(q)) lies on the convex minorant."""
    if not 0.0 <= q <= 1.0:
        raise DomainError("q must lie in [0, 1]")
    if tangent is None:
        tangent = double_tangent(c)
    if tangent is None:
        return True
    return not tangent.q_lo < q < tangent.q_hi


def b_region_test(p: float, q: float, gamma: float) -> bool:
    """Membership of (p, q) in B_gamma: the point sits strictly above the minorant."""
    return not on_minorant(GammaCurve(p=p, gamma=gamma), q)


def d2_boundary_p(r: float) -> float:
    """Critical p = [1 + (1/r - 1)^(1/(1-2r))]^-1 of the gamma = 2 region, continuous at r = 1/2."""
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    if abs(r - 0.5) < R_HALF_BAND:
        return p0(2.0)
    exponent = math.log(1.0 / r - 1.0) / (1.0 - 2.0 * r)
    if exponent > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(exponent))


def critical_p(gamma: float, r: float) -> float:
    """Largest p with (p, r) in B_gamma (0 when the region misses r down to p = 1e-6)."""
    if not 0.0 < r < 1.0:
        raise DomainError("r must lie in (0, 1)")
    if gamma <= 1.0:
        return 0.0

    def margin(p: float) -> float:
        tangent = double_tangent(GammaCurve(p=p, gamma=gamma))
        if tangent is None:
            return -abs(r - (gamma - 1.0) / gamma)
        return min(r - tangent.q_lo, tangent.q_hi - r)

    # margin decreases in p: the region is rotated-V shaped
    lo, hi = BOUNDARY_P_FLOOR, p0(gamma) * (1.0 - 1e-7)
    if margin(hi) >= 0.0:
        return p0(gamma)
    if margin(lo) <= 0.0:
        logger.debug(f"r={r} is outside B_{gamma} down to p={lo}")
        return 0.0
    return optimize.brentq(margin, lo, hi, xtol=1e-12, maxiter=ROOT_MAXITER)


def boundary_curve(gamma: float, r_grid: Sequence[float]) -> List[BoundaryRow]:
    """Phase boundary (r, p_critical) of B_gamma over the given r values, in input order."""
    rows = [BoundaryRow(r=r, p_critical=critical_p(gamma, r), gamma=gamma) for r in r_grid]
    logger.info(f"boundary curve for gamma={gamma}: {len(rows)} points")
    return rows


def chord_below_curve(c: GammaCurve, q1: float, q2: float, samples: int = 400) -> bool:
    """Whether the chord between (q1^gamma, h_p(q1)) and (q2^gamma, h_p(q2)) lies strictly
    below the curve between its ends and is tangent at neither end."""
    if not 0.0 < q1 < q2 < 1.0:
        raise DomainError("need 0 < q1 < q2 < 1")
    x1, x2 = q1 ** c.gamma, q2 ** c.gamma
    y1, y2 = curve_value(c, x1), curve_value(c, x2)
    chord_slope = (y2 - y1) / (x2 - x1)
    xs = np.linspace(x1, x2, samples + 2)[1:-1]
    below = np.all(curve_value(c, xs) - (y1 + chord_slope * (xs - x1)) > 0.0)
    tangent_at_end = (
        abs(curve_d1(c, x1) - chord_slope) < 1e-9 or abs(curve_d1(c, x2) - chord_slope) < 1e-9
    )
    return bool(below) and not tangent_at_end


def jensen_rate_bound(f: StepGraphon, p: float, d: int) -> Tuple[float, float]:
    """(h_p(f), minorant at ||f||_d^d); the first is never below the second."""
    c = GammaCurve(p=p, gamma=float(d))
    return rate_functional(f, p), minorant_value(c, lp_norm(f, d) ** d)
