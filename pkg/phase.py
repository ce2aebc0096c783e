"""
Upper- and lower-tail phase classification for subgraph counts and the
spectral radius, with the constructive symmetry-breaking witnesses.
"""

import logging
import math
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
from scipy import optimize

from config import BOUNDARY_BAND, ROOT_MAXITER, ROOT_XTOL, WITNESS_MARGIN, eps_schedule as default_eps_schedule
from exceptions import DomainError, PreconditionError, UnsupportedGraphError, WitnessSearchError
from graphon import apply_kernel, dumps_step_graphon, hom_density, operator_norm, rate_functional
from graphs import circulant_graph, complete_graph, is_bipartite, is_d_regular, to_networkx
from minorant import double_tangent
from rate_fn import rate
from schemas import (
    BreakWitness,
    GammaCurve,
    PhaseClassification,
    SmallGraph,
    SpectralCertificate,
    StepGraphon,
    Verdict,
)

logger = logging.getLogger(__name__)


def _check_upper(p: float, r: float):
    if not 0.0 < p <= r < 1.0:
        raise DomainError(f"upper tail needs 0 < p <= r < 1, got p={p}, r={r}")


def _check_lower(p: float, r: float):
    if not 0.0 < r <= p < 1.0:
        raise DomainError(f"lower tail needs 0 < r <= p < 1, got p={p}, r={r}")


def default_regular_graph(d: int) -> SmallGraph:
    """K3 for d = 2, K4 for d = 3, otherwise a small non-complete circulant of degree d."""
    if d < 2:
        raise DomainError("degree must be at least 2")
    if d == 2:
        return complete_graph(3)
    if d == 3:
        return complete_graph(4)
    half = d // 2
    if d % 2 == 0:
        return circulant_graph(d + 2, range(1, half + 1))
    n = d + 3
    return circulant_graph(n, list(range(1, half + 1)) + [n // 2])


class BreakingChord(NamedTuple):
    """Touch chord through (r^d, h_p(r)): r^d = s r1^d + (1 - s) r2^d."""

    r1: float
    r2: float
    s: float
    rate_gap: float
    rate_rise: float

    def excess_mass(self, epsilon: float, capped: bool = False) -> float:
        """eps^3; capped, at most eps^2 gap / (2 rise) so the rate gain keeps half its eps^2 term."""
        if not capped:
            return epsilon ** 3
        return min(epsilon ** 3, epsilon ** 2 * self.rate_gap / (2.0 * self.rate_rise))


def witness_attempts(
    chord: BreakingChord, eps_schedule: Optional[Sequence[float]] = None
) -> Iterator[Tuple[float, float]]:
    """(epsilon, excess) pairs: the schedule with excess eps^3, then once more with the capped excess."""
    schedule = list(eps_schedule or default_eps_schedule())
    for epsilon in schedule:
        yield epsilon, chord.excess_mass(epsilon)
    logger.warning(
        f"⚠️ eps^3 construction exhausted the schedule (chord gap {chord.rate_gap:.3e}); retrying with capped excess"
    )
    for epsilon in schedule:
        excess = chord.excess_mass(epsilon, capped=True)
        if excess < epsilon ** 3:
            yield epsilon, excess


def breaking_chord(d: int, p: float, r: float) -> BreakingChord:
    """Chord between the double-tangent touch points of the d-curve, strictly below (r^d, h_p(r))."""
    tangent = double_tangent(GammaCurve(p=p, gamma=float(d)))
    if tangent is None or not tangent.q_lo < r < tangent.q_hi:
        raise PreconditionError(
            f"(p, r) = ({p}, {r}) lies on the convex minorant for d={d}; no breaking witness exists"
        )
    r1, r2 = tangent.q_lo, tangent.q_hi
    s = (r2 ** d - r ** d) / (r2 ** d - r1 ** d)
    target_hp = rate(r, p)
    return BreakingChord(
        r1=r1,
        r2=r2,
        s=s,
        rate_gap=target_hp - (s * rate(r1, p) + (1.0 - s) * rate(r2, p)),
        rate_rise=rate(r2, p) - target_hp,
    )


def break_graphon(
    r: float,
    r1: float,
    r2: float,
    s: float,
    epsilon: float,
    excess_mass: Optional[float] = None,
) -> StepGraphon:
    """Blocks I1 | I0 | I2 of measures (a, 1 - a - b, b), a = s eps^2, b = (1 - s) eps^2 + excess.

    I1 x I0 carries r1, I0 x I2 carries r2, every other cell carries r.
    """
    if excess_mass is None:
        excess_mass = epsilon ** 3
    a = s * epsilon ** 2
    b = (1.0 - s) * epsilon ** 2 + excess_mass
    if not (0.0 < a and 0.0 < b and a + b < 1.0):
        raise DomainError(f"epsilon={epsilon} leaves no room for the middle block")
    values = [
        [r, r1, r],
        [r1, r, r2],
        [r, r2, r],
    ]
    return StepGraphon(weights=[a, 1.0 - a - b, b], values=values)


def build_break_witness(
    H: SmallGraph,
    p: float,
    r: float,
    eps_schedule: Optional[Sequence[float]] = None,
) -> BreakWitness:
    """First epsilon of the schedule whose three-block graphon beats the constant r strictly."""
    _check_upper(p, r)
    d = is_d_regular(H)
    if d is None or d < 2:
        raise PreconditionError("H must be d-regular with d >= 2")
    chord = breaking_chord(d, p, r)
    r1, r2, s = chord.r1, chord.r2, chord.s
    target_t = r ** H.num_edges
    target_hp = rate(r, p)

    defects: List[dict] = []
    for epsilon, excess in witness_attempts(chord, eps_schedule):
        try:
            f = break_graphon(r, r1, r2, s, epsilon, excess)
        except DomainError:
            defects.append({"epsilon": epsilon, "excess": excess, "t_defect": math.nan, "hp_defect": math.nan})
            continue
        t_value = hom_density(H, f)
        hp_value = rate_functional(f, p)
        defects.append({"epsilon": epsilon, "excess": excess, "t_defect": t_value - target_t, "hp_defect": hp_value - target_hp})
        if t_value > target_t + WITNESS_MARGIN and hp_value < target_hp - WITNESS_MARGIN:
            logger.info(f"✅ Break witness for d={d}, (p, r)=({p}, {r}) at epsilon={epsilon:g}")
            return BreakWitness(
                d=d,
                r=r,
                r1=r1,
                r2=r2,
                s=s,
                epsilon=epsilon,
                excess_mass=excess,
                t_value=t_value,
                target_t=target_t,
                hp_value=hp_value,
                target_hp=target_hp,
                graphon=f,
            )
    raise WitnessSearchError(f"no epsilon in the schedule separates (p, r)=({p}, {r})", defects)


def dumps_witness(w: BreakWitness) -> str:
    """Step graphon text followed by a two-line key-value block."""
    keys = ["epsilon", "r1", "r2", "s", "t_value", "target_t", "hp_value", "target_hp"]
    values = [repr(getattr(w, key)) for key in keys]
    return dumps_step_graphon(w.graphon) + ",".join(keys) + "\n" + ",".join(values) + "\n"


def upper_tail_verdict(d: int, p: float, r: float) -> Verdict:
    """Position of (r^d, h_p(r)) relative to the convex minorant of the d-curve."""
    _check_upper(p, r)
    if d < 2:
        raise DomainError("degree must be at least 2")
    tangent = double_tangent(GammaCurve(p=p, gamma=float(d)))
    if tangent is not None and min(abs(r - tangent.q_lo), abs(tangent.q_hi - r)) <= BOUNDARY_BAND:
        logger.info(f"d={d}, (p, r)=({p}, {r}) sits on the phase boundary")
        return Verdict.BOUNDARY
    if tangent is None or not tangent.q_lo < r < tangent.q_hi:
        return Verdict.REPLICA_SYMMETRIC
    return Verdict.SYMMETRY_BREAKING


def classify_upper_tail(d: int, p: float, r: float, H: Optional[SmallGraph] = None) -> PhaseClassification:
    """Upper tail of t(H, G(n, p)) >= r^e(H) for a d-regular H."""
    _check_upper(p, r)
    if d < 2:
        raise DomainError("degree must be at least 2")
    if H is not None and is_d_regular(H) != d:
        raise PreconditionError(f"H is not {d}-regular")
    verdict = upper_tail_verdict(d, p, r)
    if verdict != Verdict.SYMMETRY_BREAKING:
        return PhaseClassification(verdict=verdict, p=p, r=r, d=d, rate=rate(r, p))
    witness = build_break_witness(H if H is not None else default_regular_graph(d), p, r)
    logger.info(f"d={d}, (p, r)=({p}, {r}) breaks symmetry")
    return PhaseClassification(verdict=verdict, p=p, r=r, d=d, witness=witness)


# Spectral radius
def spectral_break_certificate(
    p: float, r: float, eps_schedule: Optional[Sequence[float]] = None
) -> SpectralCertificate:
    """Three-block graphon with a positive test vector u such that T u > r u blockwise."""
    _check_upper(p, r)
    chord = breaking_chord(2, p, r)
    r1, r2, s = chord.r1, chord.r2, chord.s
    target_hp = rate(r, p)

    defects: List[dict] = []
    for epsilon, excess in witness_attempts(chord, eps_schedule):
        try:
            f = break_graphon(r, r1, r2, s, epsilon, excess)
        except DomainError:
            continue
        middle = f.weights[1]
        u = [middle * r1, r, middle * r2]
        action = apply_kernel(f, u)
        norm = operator_norm(f)
        hp_value = rate_functional(f, p)
        slack = min(action[i] - r * u[i] for i in range(3))
        defects.append({"epsilon": epsilon, "excess": excess, "action_slack": slack, "hp_defect": hp_value - target_hp})
        if slack > 0.0 and norm > r + WITNESS_MARGIN and hp_value < target_hp - WITNESS_MARGIN:
            logger.info(f"✅ Spectral certificate for (p, r)=({p}, {r}) at epsilon={epsilon:g}, norm={norm:.12f}")
            return SpectralCertificate(
                graphon=f,
                epsilon=epsilon,
                excess_mass=excess,
                r=r,
                test_vector=u,
                action=action.tolist(),
                operator_norm=norm,
                hp_value=hp_value,
                target_hp=target_hp,
                verified=True,
            )
    raise WitnessSearchError(f"no epsilon in the schedule certifies (p, r)=({p}, {r})", defects)


def classify_spectral(p: float, r: float) -> PhaseClassification:
    """Upper tail of lambda_1(G(n, p)) >= r n; same boundary as the d = 2 subgraph problem."""
    verdict = upper_tail_verdict(2, p, r)
    if verdict != Verdict.SYMMETRY_BREAKING:
        return PhaseClassification(verdict=verdict, p=p, r=r, d=2, tail="spectral", rate=rate(r, p))
    return PhaseClassification(
        verdict=Verdict.SYMMETRY_BREAKING,
        p=p,
        r=r,
        d=2,
        tail="spectral",
        certificate=spectral_break_certificate(p, r),
    )


def classify_lower_tail_spectral(p: float, r: float) -> PhaseClassification:
    """The lower tail of the spectral radius is always replica symmetric."""
    _check_lower(p, r)
    return PhaseClassification(
        verdict=Verdict.REPLICA_SYMMETRIC, p=p, r=r, d=2, tail="lower-spectral", rate=rate(r, p)
    )


# Lower tail of subgraph counts
def _sidorenko_family(H: SmallGraph) -> Optional[str]:
    g = to_networkx(H)
    if H.num_edges == 0 or not nx.is_connected(g):
        return None
    if nx.is_tree(g):
        return "tree"
    if is_d_regular(H) == 2 and H.n % 2 == 0:
        return "even cycle"
    sides = is_bipartite(H)
    if sides is not None and H.num_edges == len(sides[0]) * len(sides[1]):
        return "complete bipartite"
    return None


def lower_tail_sidorenko_note(H: SmallGraph, p: float, r: float) -> PhaseClassification:
    """Lower tail for trees, even cycles and complete bipartite H: always replica symmetric."""
    _check_lower(p, r)
    family = _sidorenko_family(H)
    if family is None:
        raise UnsupportedGraphError("H is not a tree, an even cycle or a complete bipartite graph")
    return PhaseClassification(
        verdict=Verdict.REPLICA_SYMMETRIC,
        p=p,
        r=r,
        d=max(H.degrees()),
        tail="lower",
        rate=rate(r, p),
        note=f"Sidorenko holds for H ({family})",
    )


def lower_tail_nonbipartite_r0(p: float) -> float:
    """r0 in (0, p) with h_p(r0) = h_p(0) / 2."""
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie in (0, 1)")
    half = rate(0.0, p) / 2.0
    return optimize.brentq(lambda x: rate(x, p) - half, 0.0, p, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)


def checkerboard_graphon(p: float) -> StepGraphon:
    return StepGraphon(weights=[0.5, 0.5], values=[[0.0, p], [p, 0.0]])


def lower_tail_checkerboard(p: float, r: float, H: SmallGraph) -> PhaseClassification:
    """Lower tail for non-bipartite H below r0: the checkerboard graphon beats the constant r."""
    _check_lower(p, r)
    if is_bipartite(H) is not None:
        raise PreconditionError("the checkerboard certificate needs a non-bipartite H")
    r0 = lower_tail_nonbipartite_r0(p)
    if not r < r0:
        raise PreconditionError(f"r={r} is not below r0={r0:.6f}")
    f = checkerboard_graphon(p)
    t_value = hom_density(H, f)
    hp_value = rate_functional(f, p)
    symmetric_rate = rate(r, p)
    if not (t_value <= r ** H.num_edges and hp_value < symmetric_rate - WITNESS_MARGIN):
        raise WitnessSearchError(
            "checkerboard graphon failed verification",
            [{"t_value": t_value, "hp_value": hp_value, "target_hp": symmetric_rate}],
        )
    logger.info(f"Lower tail breaks for (p, r)=({p}, {r}): h_p(f)={hp_value:.6f} < {symmetric_rate:.6f}")
    return PhaseClassification(
        verdict=Verdict.SYMMETRY_BREAKING,
        p=p,
        r=r,
        d=max(H.degrees()),
        tail="lower",
        note=f"checkerboard: t(H,f)={t_value:.3g}, h_p(f)={hp_value:.12g}, h_p(r)={symmetric_rate:.12g}",
    )
