"""
Two-term exponential random graph model: the scalar problem
sup_u (beta1 u + beta2 u^gamma - h(u)), its discontinuity curve, and the
symmetric / breaking classification.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from scipy import optimize, special

from config import BOUNDARY_BAND, ROOT_MAXITER, ROOT_XTOL
from exceptions import DomainError
from minorant import b_region_test, double_tangent
from rate_fn import curve_d1, entropy, gamma_threshold_beta1, inflection_points
from schemas import (
    ErgClassification,
    ErgKind,
    ErgModel,
    GammaCurve,
    PhaseCell,
    ScalarOptimum,
    SmallGraph,
    TrajectoryPoint,
)

logger = logging.getLogger(__name__)

U_FLOOR = 1e-300
U_CEIL = 1.0 - 1e-15
VALUE_TIE_TOL = 1e-11
SAME_POINT_TOL = 1e-9


def objective(u: float, beta1: float, beta2: float, gamma: float) -> float:
    """beta1 u + beta2 u^gamma - h(u) on [0, 1]."""
    if not 0.0 <= u <= 1.0:
        raise DomainError("u must lie in [0, 1]")
    return beta1 * u + beta2 * u ** gamma - entropy(u)


def _stationarity(u: float, beta1: float, beta2: float, gamma: float) -> float:
    # derivative of the objective; its sign is that of beta2 - (1/gamma) u^(1-gamma) h_p'(u)
    return beta1 + beta2 * gamma * u ** (gamma - 1.0) - special.logit(u)


def _segments(beta1: float, gamma: float) -> List[Tuple[float, float]]:
    """u-intervals on which the tangent-slope function is monotone."""
    cuts = [U_FLOOR]
    if gamma > 1.0:
        inflections = inflection_points(GammaCurve(p=float(special.expit(beta1)), gamma=gamma))
        if inflections is not None:
            cuts += [x ** (1.0 / gamma) for x in inflections]
    return list(zip(cuts, cuts[1:] + [U_CEIL]))


def scalar_maximize(beta1: float, beta2: float, gamma: float) -> ScalarOptimum:
    """All global maximizers of beta1 u + beta2 u^gamma - h(u) over [0, 1]."""
    if not gamma > 0.0:
        raise DomainError("gamma must be positive")
    candidates = [0.0, 1.0]
    for lo, hi in _segments(beta1, gamma):
        f_lo = _stationarity(lo, beta1, beta2, gamma)
        f_hi = _stationarity(hi, beta1, beta2, gamma)
        if f_lo * f_hi < 0.0:
            candidates.append(
                optimize.brentq(
                    _stationarity, lo, hi, args=(beta1, beta2, gamma), xtol=ROOT_XTOL, maxiter=ROOT_MAXITER
                )
            )
    scored = sorted((objective(u, beta1, beta2, gamma), u) for u in candidates)
    best = scored[-1][0]
    maximizers: List[float] = []
    for value, u in scored:
        if best - value <= VALUE_TIE_TOL and all(abs(u - m) > SAME_POINT_TOL for m in maximizers):
            maximizers.append(u)
    return ScalarOptimum(maximizers=sorted(maximizers), value=best)


@lru_cache(maxsize=4096)
def critical_beta2(beta1: float, gamma: float) -> Optional[float]:
    """Slope of the double tangent of the gamma-curve at p = 1/(1 + e^-beta1), if any."""
    if gamma <= 1.0:
        return None
    tangent = double_tangent(GammaCurve(p=float(special.expit(beta1)), gamma=gamma))
    return None if tangent is None else tangent.slope


@lru_cache(maxsize=4096)
def breaking_interval(beta1: float, gamma: float, d: int) -> Optional[Tuple[float, float]]:
    """(lower, upper) beta2 bounds built from the touch points of the d-curve, or None."""
    p = float(special.expit(beta1))
    tangent = double_tangent(GammaCurve(p=p, gamma=float(d)))
    if tangent is None:
        return None
    c = GammaCurve(p=p, gamma=gamma)
    return curve_d1(c, tangent.q_lo ** gamma), curve_d1(c, tangent.q_hi ** gamma)


def _two_phase_points(beta1: float, gamma: float) -> List[float]:
    tangent = double_tangent(GammaCurve(p=float(special.expit(beta1)), gamma=gamma))
    return [tangent.q_lo, tangent.q_hi]


def classify(model: ErgModel) -> ErgClassification:
    beta1, beta2, gamma, d = model.beta1, model.beta2, model.gamma, model.d
    optimum = scalar_maximize(beta1, beta2, gamma)
    payload = dict(beta1=beta1, beta2=beta2, gamma=gamma, d=d, psi=optimum.value)

    if beta2 <= 0.0:
        kind = ErgKind.SYMMETRIC_UNIQUE if gamma >= d else ErgKind.INDETERMINATE
        return ErgClassification(kind=kind, u_star=optimum.maximizers[:1], case="beta2<=0", **payload)

    if gamma >= d:
        critical = critical_beta2(beta1, gamma)
        if critical is not None and abs(beta2 - critical) <= BOUNDARY_BAND:
            return ErgClassification(
                kind=ErgKind.SYMMETRIC_TWO_PHASE, u_star=_two_phase_points(beta1, gamma), case="a", **payload
            )
        return ErgClassification(kind=ErgKind.SYMMETRIC_UNIQUE, u_star=optimum.maximizers[:1], case="a", **payload)

    if beta1 >= gamma_threshold_beta1(float(d)):
        return ErgClassification(kind=ErgKind.SYMMETRIC_UNIQUE, u_star=optimum.maximizers[:1], case="b", **payload)

    interval = breaking_interval(beta1, gamma, d)
    if interval is not None and interval[0] < beta2 < interval[1]:
        logger.info(f"ERG breaks symmetry at (beta1, beta2)=({beta1}, {beta2}), gamma={gamma}, d={d}")
        return ErgClassification(
            kind=ErgKind.BREAKING, u_star=optimum.maximizers, beta2_interval=interval, case="c", **payload
        )
    return ErgClassification(kind=ErgKind.INDETERMINATE, u_star=optimum.maximizers, case="c", **payload)


def _check_sorted(grid: Sequence[float], name: str):
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"{name} must be sorted")


def u_star_trajectory(beta1: float, gamma: float, beta2_grid: Sequence[float]) -> List[TrajectoryPoint]:
    """Maximizer u* along increasing beta2; both maximizers on the discontinuity curve."""
    _check_sorted(beta2_grid, "beta2 grid")
    critical = critical_beta2(beta1, gamma)
    points = []
    for beta2 in beta2_grid:
        if critical is not None and abs(beta2 - critical) <= BOUNDARY_BAND:
            u_lo, u_hi = _two_phase_points(beta1, gamma)
            points.append(TrajectoryPoint(beta2=beta2, u_star=u_lo, u_star2=u_hi))
            continue
        maximizers = scalar_maximize(beta1, beta2, gamma).maximizers
        points.append(
            TrajectoryPoint(
                beta2=beta2,
                u_star=maximizers[0],
                u_star2=maximizers[1] if len(maximizers) > 1 else None,
            )
        )
    return points


def region_trajectory(beta1: float, gamma: float, d: int, beta2_grid: Sequence[float]) -> List[TrajectoryPoint]:
    """u* trajectory flagged with membership of (p, u*) in the breaking region of the d-curve."""
    p = float(special.expit(beta1))
    flagged = []
    for point in u_star_trajectory(beta1, gamma, beta2_grid):
        inside = 0.0 < point.u_star < 1.0 and b_region_test(p, point.u_star, float(d))
        flagged.append(
            TrajectoryPoint(beta2=point.beta2, u_star=point.u_star, u_star2=point.u_star2, in_region=inside)
        )
    return flagged


def phase_plot_data(
    H: SmallGraph,
    alpha: float,
    beta1_grid: Sequence[float],
    beta2_grid: Sequence[float],
) -> List[PhaseCell]:
    """Classification of every (beta1, beta2) grid cell, beta1-major."""
    _check_sorted(beta1_grid, "beta1 grid")
    _check_sorted(beta2_grid, "beta2 grid")
    cells = []
    for beta1 in beta1_grid:
        for beta2 in beta2_grid:
            result = classify(ErgModel(H=H, alpha=alpha, beta1=beta1, beta2=beta2))
            cells.append(
                PhaseCell(
                    beta1=beta1,
                    beta2=beta2,
                    kind=result.kind,
                    u_star=result.u_star[0],
                    u_star2=result.u_star[1] if len(result.u_star) > 1 else None,
                )
            )
    breaking = sum(cell.kind == ErgKind.BREAKING for cell in cells)
    logger.info(f"ERG phase grid: {len(cells)} cells, {breaking} breaking")
    return cells
