"""
k-uniform hypergraphs: built-in linear examples, densities against step
k-kernels, and the hypergraph upper-tail classification with its witness.
"""

import functools
import itertools
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from config import HOM_SIZE_CAP, WITNESS_MARGIN
from exceptions import DomainError, PreconditionError, WitnessSearchError
from graphon import hom_sum, monte_carlo_hom
from phase import breaking_chord, upper_tail_verdict, witness_attempts
from rate_fn import rate
from schemas import (
    HyperBreakWitness,
    Hypergraph,
    InequalityReport,
    LinearHypergraph,
    PhaseClassification,
    StepKernelK,
    Verdict,
)

logger = logging.getLogger(__name__)

HOLDER_TOL = 1e-12
WITNESS_BLOCKS = 3


# Built-in hypergraphs
def fano_plane() -> LinearHypergraph:
    lines = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]
    return LinearHypergraph(k=3, n=7, hyperedges=lines)


def loose_cycle(k: int, length: int) -> LinearHypergraph:
    """Consecutive hyperedges share exactly one vertex."""
    if length < 3:
        raise DomainError("a linear loose cycle needs at least 3 hyperedges")
    n = length * (k - 1)
    edges = [tuple((i * (k - 1) + j) % n for j in range(k)) for i in range(length)]
    return LinearHypergraph(k=k, n=n, hyperedges=edges)


def tight_cycle(k: int, n: int) -> Hypergraph:
    """Hyperedges {i, ..., i + k - 1} mod n; not linear once k >= 3."""
    if n <= k:
        raise DomainError("a tight cycle needs more than k vertices")
    return Hypergraph(k=k, n=n, hyperedges=[tuple((i + j) % n for j in range(k)) for i in range(n)])


def star_dual(k: int) -> LinearHypergraph:
    """Vertices are the edges of K_{k+1}; one hyperedge per vertex star. 2-regular and linear."""
    pairs = list(itertools.combinations(range(k + 1), 2))
    index = {pair: i for i, pair in enumerate(pairs)}
    edges = [tuple(index[pair] for pair in pairs if v in pair) for v in range(k + 1)]
    return LinearHypergraph(k=k, n=len(pairs), hyperedges=edges)


def grid_hypergraph(k: int, d: int) -> LinearHypergraph:
    """Axis-parallel lines of [k]^d: d-regular, linear and k-uniform."""
    points = list(itertools.product(range(k), repeat=d))
    index = {point: i for i, point in enumerate(points)}
    edges = []
    for axis in range(d):
        for rest in itertools.product(range(k), repeat=d - 1):
            line = [rest[:axis] + (x,) + rest[axis:] for x in range(k)]
            edges.append(tuple(index[point] for point in line))
    return LinearHypergraph(k=k, n=len(points), hyperedges=edges)


def is_d_regular_hyper(H: Hypergraph) -> Optional[int]:
    degrees = set(H.degrees())
    return degrees.pop() if len(degrees) == 1 else None


def default_hypergraph(d: int, k: int) -> Optional[LinearHypergraph]:
    """Smallest built-in d-regular linear k-graph whose witness density is computable, if any."""
    if d == 2:
        candidate = star_dual(k)
    elif d == 3 and k == 3:
        candidate = fano_plane()
    else:
        candidate = grid_hypergraph(k, d)
    if candidate.n * math.log10(WITNESS_BLOCKS) > math.log10(HOM_SIZE_CAP):
        return None
    return candidate


# Kernels
def _product_weights(weights: np.ndarray, k: int) -> np.ndarray:
    return functools.reduce(np.multiply.outer, [weights] * k)


def hom_density_hyper(H: Hypergraph, f: StepKernelK) -> float:
    """t(H, f), exact over block assignments."""
    if H.k != f.k:
        raise DomainError(f"{H.k}-uniform hypergraph against a {f.k}-kernel")
    return hom_sum(H.hyperedges, H.n, f.tensor, f.weight_vector)


def hom_density_hyper_monte_carlo(H: Hypergraph, f: StepKernelK, samples: int = 1_000_000, seed: int = 0):
    return monte_carlo_hom(H.hyperedges, H.n, f.tensor, f.weight_vector, samples, seed)


def rate_functional_k(f: StepKernelK, p: float) -> float:
    return float(np.sum(_product_weights(f.weight_vector, f.k) * np.asarray(rate(f.tensor, p))))


def lp_norm_k(f: StepKernelK, d: float) -> float:
    if d < 1:
        raise DomainError("the L^d norm needs d >= 1")
    mass = np.sum(_product_weights(f.weight_vector, f.k) * np.abs(f.tensor) ** d)
    return float(mass ** (1.0 / d))


def constant_kernel(k: int, c: float, blocks: int = 1) -> StepKernelK:
    return StepKernelK(k=k, weights=[1.0 / blocks] * blocks, values=np.full((blocks,) * k, c).tolist())


def product_kernel(g: Sequence[float], k: int, weights: Optional[Sequence[float]] = None) -> StepKernelK:
    """f(x_1, ..., x_k) = g(x_1) ... g(x_k)."""
    g = np.asarray(g, dtype=float)
    if weights is None:
        weights = [1.0 / len(g)] * len(g)
    return StepKernelK(k=k, weights=list(weights), values=_product_weights(g, k).tolist())


def random_step_kernel(rng: np.random.Generator, k: int, blocks: int) -> StepKernelK:
    raw = rng.random((blocks,) * k)
    perms = list(itertools.permutations(range(k)))
    symmetric = sum(np.transpose(raw, perm) for perm in perms) / len(perms)
    weights = rng.dirichlet(np.ones(blocks)) + 1e-3
    return StepKernelK(k=k, weights=(weights / weights.sum()).tolist(), values=symmetric.tolist())


def break_kernel(
    k: int,
    r: float,
    r1: float,
    r2: float,
    s: float,
    epsilon: float,
    excess_mass: Optional[float] = None,
) -> StepKernelK:
    """Blocks I1 | I0 | I2 as in the graph construction.

    A tuple takes r1 when exactly one coordinate is in I1 and the rest in I0,
    r2 when exactly one is in I2 and the rest in I0, and r otherwise.
    """
    if excess_mass is None:
        excess_mass = epsilon ** 3
    a = s * epsilon ** 2
    b = (1.0 - s) * epsilon ** 2 + excess_mass
    if not (0.0 < a and 0.0 < b and a + b < 1.0):
        raise DomainError(f"epsilon={epsilon} leaves no room for the middle block")
    tensor = np.full((WITNESS_BLOCKS,) * k, r)
    for cell in itertools.product(range(WITNESS_BLOCKS), repeat=k):
        if cell.count(1) == k - 1:
            if cell.count(0) == 1:
                tensor[cell] = r1
            elif cell.count(2) == 1:
                tensor[cell] = r2
    return StepKernelK(k=k, weights=[a, 1.0 - a - b, b], values=tensor.tolist())


def build_hyper_break_witness(
    H: LinearHypergraph,
    p: float,
    r: float,
    eps_schedule: Optional[Sequence[float]] = None,
) -> HyperBreakWitness:
    if not 0.0 < p <= r < 1.0:
        raise DomainError(f"upper tail needs 0 < p <= r < 1, got p={p}, r={r}")
    d = is_d_regular_hyper(H)
    if d is None or d < 2:
        raise PreconditionError("H must be d-regular with d >= 2")
    chord = breaking_chord(d, p, r)
    target_t = r ** H.num_edges
    target_hp = rate(r, p)

    defects: List[dict] = []
    for epsilon, excess in witness_attempts(chord, eps_schedule):
        try:
            f = break_kernel(H.k, r, chord.r1, chord.r2, chord.s, epsilon, excess)
        except DomainError:
            continue
        t_value = hom_density_hyper(H, f)
        hp_value = rate_functional_k(f, p)
        defects.append({"epsilon": epsilon, "excess": excess, "t_defect": t_value - target_t, "hp_defect": hp_value - target_hp})
        if t_value > target_t + WITNESS_MARGIN and hp_value < target_hp - WITNESS_MARGIN:
            logger.info(f"✅ Hypergraph witness for k={H.k}, d={d}, (p, r)=({p}, {r}) at epsilon={epsilon:g}")
            return HyperBreakWitness(
                d=d,
                k=H.k,
                r=r,
                r1=chord.r1,
                r2=chord.r2,
                s=chord.s,
                epsilon=epsilon,
                excess_mass=excess,
                t_value=t_value,
                target_t=target_t,
                hp_value=hp_value,
                target_hp=target_hp,
                kernel=f,
            )
    raise WitnessSearchError(f"no epsilon in the schedule separates (p, r)=({p}, {r})", defects)


def classify_upper_tail_hyper(
    d: int, k: int, p: float, r: float, H: Optional[LinearHypergraph] = None
) -> PhaseClassification:
    """Same minorant criterion as for graphs; only the witness is built on a k-kernel."""
    if k < 2:
        raise DomainError("uniformity must be at least 2")
    if H is not None and (H.k != k or is_d_regular_hyper(H) != d):
        raise PreconditionError(f"H is not a {d}-regular {k}-uniform hypergraph")
    verdict = upper_tail_verdict(d, p, r)
    if verdict != Verdict.SYMMETRY_BREAKING:
        return PhaseClassification(verdict=verdict, p=p, r=r, d=d, rate=rate(r, p), note=f"k={k}")
    if H is None:
        H = default_hypergraph(d, k)
    if H is None:
        logger.warning(f"⚠️ No built-in {d}-regular {k}-graph is small enough; witness omitted")
        return PhaseClassification(
            verdict=verdict, p=p, r=r, d=d, note=f"k={k}; no built-in hypergraph small enough for a witness"
        )
    witness = build_hyper_break_witness(H, p, r)
    return PhaseClassification(verdict=verdict, p=p, r=r, d=d, witness=witness, note=f"k={k}")


def hyper_holder_check(H: Hypergraph, f: StepKernelK) -> InequalityReport:
    """t(H, f) <= ||f||_d^e(H), d the maximum degree; tight for product kernels on regular H."""
    d = max(H.degrees())
    lhs = hom_density_hyper(H, f)
    rhs = lp_norm_k(f, d) ** H.num_edges
    return InequalityReport(
        name="hypergraph_holder",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + HOLDER_TOL,
        tight=abs(lhs - rhs) <= 1e-9,
    )


# Hyperedge-list text: "k n m" header, then m lines of k vertices
def dumps_hyperedge_list(H: Hypergraph) -> str:
    lines = [f"{H.k} {H.n} {H.num_edges}"] + [" ".join(map(str, edge)) for edge in H.hyperedges]
    return "\n".join(lines) + "\n"


def loads_hyperedge_list(text: str, linear: bool = True) -> Hypergraph:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise DomainError("hyperedge list is empty")
    try:
        k, n, m = (int(x) for x in rows[0])
        edges: List[Tuple[int, ...]] = [tuple(int(x) for x in row) for row in rows[1:]]
    except ValueError as e:
        raise DomainError(f"malformed hyperedge list: {e}")
    if len(edges) != m:
        raise DomainError(f"header announces {m} hyperedges, found {len(edges)}")
    model = LinearHypergraph if linear else Hypergraph
    try:
        return model(k=k, n=n, hyperedges=edges)
    except ValidationError as e:
        raise DomainError(f"invalid hypergraph: {e}")


def read_hyperedge_list(path: Union[str, Path], linear: bool = True) -> Hypergraph:
    return loads_hyperedge_list(Path(path).read_text(), linear=linear)
