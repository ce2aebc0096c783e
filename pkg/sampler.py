"""
Desk-scale empirical checks: G(n, p) samples, exact small-n enumeration of
upper-tail conditionals and of the ERG law, single-edge Glauber dynamics,
and cut distance of a sampled graph to a constant.

Every random draw goes through numpy's default Generator (PCG64 bit
generator, SeedSequence seeding), so a seed fixes a run bit for bit.
"""

import csv
import io
import logging
import math
from typing import Iterator, List, Optional, Tuple

import numpy as np
from scipy import special

from config import DEFAULT_SEED, EXACT_CUT_MAX_VERTICES, EXACT_TAIL_MAX_VERTICES
from exceptions import DomainError, SamplerStateError, SizeLimitError
from graphon import max_box_mass
from schemas import (
    ConditionalTailReport,
    CutDistanceEstimate,
    McmcRun,
    SmallGraph,
    TrajectoryRow,
    model_to_dict,
)

logger = logging.getLogger(__name__)

PRNG_NAME = "PCG64"
ENUMERATION_CHUNK = 1 << 15
DRAW_BATCH = 1 << 16
CHECKSUM_EVERY = 10_000
LOCAL_SEARCH_RESTARTS = 64


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_gnp(n: int, p: float, seed: int = DEFAULT_SEED) -> SmallGraph:
    """Each pair i < j, in lexicographic order, is kept when a uniform draw falls below p."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    rows, cols = np.triu_indices(n, 1)
    keep = _rng(seed).random(len(rows)) < p
    return SmallGraph(n=n, edges=[(int(i), int(j)) for i, j in zip(rows[keep], cols[keep])])


# Exact enumeration over all labeled graphs on n vertices
def _check_enumerable(n: int):
    if n > EXACT_TAIL_MAX_VERTICES:
        raise SizeLimitError(f"exact enumeration supports at most {EXACT_TAIL_MAX_VERTICES} vertices, got {n}")
    if n < 2:
        raise DomainError("enumeration needs at least 2 vertices")


def _adjacency_batches(n: int) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """(codes, bits, adjacency) per chunk; bit b of a code is the b-th pair in lexicographic order."""
    rows, cols = np.triu_indices(n, 1)
    pairs = len(rows)
    for start in range(0, 2 ** pairs, ENUMERATION_CHUNK):
        codes = np.arange(start, min(start + ENUMERATION_CHUNK, 2 ** pairs), dtype=np.int64)
        bits = ((codes[:, None] >> np.arange(pairs)[None, :]) & 1).astype(float)
        adjacency = np.zeros((len(codes), n, n))
        adjacency[:, rows, cols] = bits
        adjacency[:, cols, rows] = bits
        yield codes, bits, adjacency


def _batched_hom_density(H: SmallGraph, adjacency: np.ndarray) -> np.ndarray:
    n = adjacency.shape[1]
    if H.num_edges == 0:
        return np.ones(len(adjacency))
    letters = "abcdefghijklmnopqrstuvwxy"
    if H.n > len(letters):
        raise SizeLimitError("pattern graph too large for batched densities")
    used = sorted({v for edge in H.edges for v in edge})
    subscripts = ",".join("z" + letters[u] + letters[v] for u, v in H.edges)
    counts = np.einsum(subscripts + "->z", *([adjacency] * H.num_edges), optimize="greedy")
    isolated = H.n - len(used)
    return counts * float(n) ** isolated / float(n) ** H.n


def _batched_cycle_density(k: int, adjacency: np.ndarray) -> np.ndarray:
    n = adjacency.shape[1]
    return np.trace(np.linalg.matrix_power(adjacency, k), axis1=1, axis2=2) / float(n) ** k


def exact_conditional_upper_tail(n: int, p: float, H: SmallGraph, r: float) -> ConditionalTailReport:
    """Edge-count law of G(n, p) conditioned on t(H, G) >= r^e(H), by full enumeration."""
    _check_enumerable(n)
    if not 0.0 < p < 1.0 or not 0.0 <= r <= 1.0:
        raise DomainError("need 0 < p < 1 and 0 <= r <= 1")
    pairs = n * (n - 1) // 2
    threshold = r ** H.num_edges
    conditional = np.zeros(pairs + 1)
    unconditional = np.zeros(pairs + 1)
    for _, bits, adjacency in _adjacency_batches(n):
        edges = bits.sum(axis=1).astype(int)
        weight = p ** edges * (1.0 - p) ** (pairs - edges)
        event = _batched_hom_density(H, adjacency) >= threshold - 1e-12
        unconditional += np.bincount(edges, weights=weight, minlength=pairs + 1)
        conditional += np.bincount(edges[event], weights=weight[event], minlength=pairs + 1)
    event_probability = float(conditional.sum())
    if event_probability == 0.0:
        raise DomainError(f"t(H, G) >= {threshold:g} is impossible on {n} vertices")
    density = np.arange(pairs + 1) / pairs
    report = ConditionalTailReport(
        n=n,
        p=p,
        r=r,
        threshold=threshold,
        graphs_enumerated=2 ** pairs,
        event_probability=event_probability,
        conditional_mean_edge_density=float(density @ conditional) / event_probability,
        unconditional_mean_edge_density=float(density @ unconditional) / float(unconditional.sum()),
        conditional_edge_count_distribution=(conditional / event_probability).tolist(),
    )
    logger.info(
        f"n={n}, p={p}, r={r}: P(event)={event_probability:.6g}, "
        f"conditional edge density {report.conditional_mean_edge_density:.6f}"
    )
    return report


def _hamiltonian(n: int, edge_counts: np.ndarray, hom_densities: np.ndarray, alpha: float, beta1: float, beta2: float):
    return n * (n - 1) / 2.0 * (beta1 * 2.0 * edge_counts / n ** 2 + beta2 * hom_densities ** alpha)


def exact_erg_distribution(
    n: int,
    kind: str,
    alpha: float,
    beta1: float,
    beta2: float,
    cycle_length: Optional[int] = None,
) -> np.ndarray:
    """Probability of every labeled graph (indexed by its pair-bit code) under the ERG law."""
    _check_enumerable(n)
    log_weights = []
    for _, bits, adjacency in _adjacency_batches(n):
        if kind == "triangle":
            hom = _batched_cycle_density(3, adjacency)
        elif kind == "cycle" and cycle_length and cycle_length >= 3:
            hom = _batched_cycle_density(cycle_length, adjacency)
        else:
            raise DomainError(f"unsupported H-kind {kind!r}")
        log_weights.append(_hamiltonian(n, bits.sum(axis=1), hom, alpha, beta1, beta2))
    log_weights = np.concatenate(log_weights)
    return np.exp(log_weights - special.logsumexp(log_weights))


# Glauber dynamics
def flip_probability(delta: float) -> float:
    """Heat-bath probability of the edge being present, delta = H(with) - H(without)."""
    return float(special.expit(delta))


class GlauberChain:
    """Single-edge heat-bath chain for exp(C(n,2) (beta1 t(K2) + beta2 t(H)^alpha))."""

    def __init__(self, run: McmcRun):
        self.run = run
        self.n = run.n
        rows, cols = np.triu_indices(run.n, 1)
        self.pairs = [(int(i), int(j)) for i, j in zip(rows, cols)]
        self.scale = self.n * (self.n - 1) / 2.0
        self.rng = _rng(run.seed)

        start = self.rng.random(len(self.pairs)) < special.expit(run.beta1)
        self.neighbours = [0] * self.n
        self.adjacency = np.zeros((self.n, self.n))
        self.code = 0
        self.edges = 0
        for index, present in enumerate(start):
            if present:
                self._toggle(index)
        self.triangles = self._count_triangles()

    def _toggle(self, index: int):
        i, j = self.pairs[index]
        self.neighbours[i] ^= 1 << j
        self.neighbours[j] ^= 1 << i
        self.adjacency[i, j] = self.adjacency[j, i] = 1.0 - self.adjacency[i, j]
        self.code ^= 1 << index
        self.edges += 1 if self.adjacency[i, j] else -1

    def _count_triangles(self) -> int:
        return int(round(np.trace(np.linalg.matrix_power(self.adjacency, 3)) / 6.0))

    def _cycle_density_with(self, index: int, present: bool) -> float:
        i, j = self.pairs[index]
        a = self.adjacency.copy()
        a[i, j] = a[j, i] = 1.0 if present else 0.0
        k = self.run.cycle_length
        return float(np.trace(np.linalg.matrix_power(a, k))) / self.n ** k

    def edge_density(self) -> float:
        return self.edges / self.scale

    def hom_density(self) -> float:
        if self.run.kind == "triangle":
            return 6.0 * self.triangles / self.n ** 3
        return float(np.trace(np.linalg.matrix_power(self.adjacency, self.run.cycle_length))) / self.n ** self.run.cycle_length

    def is_present(self, index: int) -> bool:
        return bool(self.code >> index & 1)

    def delta_hamiltonian(self, index: int) -> float:
        """H(G + e) - H(G - e) for the pair with the given index."""
        alpha, beta1, beta2 = self.run.alpha, self.run.beta1, self.run.beta2
        if self.run.kind == "triangle":
            i, j = self.pairs[index]
            common = bin(self.neighbours[i] & self.neighbours[j]).count("1")
            without = self.triangles - (common if self.is_present(index) else 0)
            t_with = 6.0 * (without + common) / self.n ** 3
            t_without = 6.0 * without / self.n ** 3
        else:
            t_with = self._cycle_density_with(index, True)
            t_without = self._cycle_density_with(index, False)
        return self.scale * (beta1 * 2.0 / self.n ** 2 + beta2 * (t_with ** alpha - t_without ** alpha))

    def update(self, index: int, uniform: float):
        """Heat-bath move on one pair."""
        present = uniform < flip_probability(self.delta_hamiltonian(index))
        if present != self.is_present(index):
            if self.run.kind == "triangle":
                i, j = self.pairs[index]
                common = bin(self.neighbours[i] & self.neighbours[j]).count("1")
                self.triangles += common if present else -common
            self._toggle(index)

    def verify_counts(self):
        triangles = self._count_triangles()
        edges = int(self.adjacency.sum()) // 2
        if (self.run.kind == "triangle" and triangles != self.triangles) or edges != self.edges:
            raise SamplerStateError(
                f"incremental counts drifted: triangles {self.triangles} vs {triangles}, edges {self.edges} vs {edges}"
            )

    def walk(self, flips: int) -> Iterator[int]:
        """Run `flips` updates, yielding the 1-based step number after each."""
        step = 0
        while step < flips:
            batch = min(DRAW_BATCH, flips - step)
            indices = self.rng.integers(0, len(self.pairs), size=batch)
            uniforms = self.rng.random(batch)
            for index, uniform in zip(indices.tolist(), uniforms.tolist()):
                self.update(index, uniform)
                step += 1
                if step % CHECKSUM_EVERY == 0:
                    self.verify_counts()
                yield step


def erg_glauber(run: McmcRun) -> McmcRun:
    """Copy of `run` with its trajectory: burn_in flips, then one row every `thinning` of `steps` flips."""
    chain = GlauberChain(run)
    rows: List[TrajectoryRow] = []
    for step in chain.walk(run.burn_in + run.steps):
        if step > run.burn_in and (step - run.burn_in) % run.thinning == 0:
            rows.append(TrajectoryRow(step=step, edge_density=chain.edge_density(), hom_density=chain.hom_density()))
    logger.info(f"Glauber run n={run.n}, seed={run.seed}: {len(rows)} rows recorded")
    data = model_to_dict(run)
    data["trajectory"] = rows
    return McmcRun(**data)


def glauber_occupancy(run: McmcRun) -> np.ndarray:
    """Fraction of post-burn-in steps spent in each labeled graph (indexed by pair-bit code)."""
    if run.n > EXACT_TAIL_MAX_VERTICES:
        raise SizeLimitError("occupancy is tracked for enumerable n only")
    chain = GlauberChain(run)
    counts = np.zeros(2 ** len(chain.pairs))
    for step in chain.walk(run.burn_in + run.steps):
        if step > run.burn_in:
            counts[chain.code] += 1
    return counts / max(counts.sum(), 1.0)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# Cut distance of a graph to a constant
def _local_search_box_mass(mass: np.ndarray, seed: int) -> float:
    """Alternating best-response search over (S, T); a lower bound on max_box_mass."""
    rng = _rng(seed)
    n = mass.shape[0]
    best = 0.0
    for sign in (1.0, -1.0):
        signed = sign * mass
        for _ in range(LOCAL_SEARCH_RESTARTS):
            s = rng.random(n) < 0.5
            value = -math.inf
            while True:
                t = signed[s].sum(axis=0) > 0.0
                s = signed[:, t].sum(axis=1) > 0.0
                current = float(signed[np.ix_(s, t)].sum())
                if current <= value:
                    break
                value = current
            best = max(best, value)
    return best


def empirical_cut_distance_to_constant(G: SmallGraph, u: float, seed: int = DEFAULT_SEED) -> CutDistanceEstimate:
    """max over vertex sets A, B of |e_G(A, B) - u |A||B|| / n^2."""
    mass = (G.adjacency().astype(float) - u) / G.n ** 2
    if G.n <= EXACT_CUT_MAX_VERTICES:
        return CutDistanceEstimate(lower_bound=max_box_mass(mass), exact=True)
    return CutDistanceEstimate(lower_bound=_local_search_box_mass(mass, seed), exact=False)


# Output
def trajectory_csv(run: McmcRun) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["step", "edge_density", "hom_density"])
    for row in run.trajectory:
        writer.writerow([row.step, repr(row.edge_density), repr(row.hom_density)])
    return buffer.getvalue()


def run_metadata(run: McmcRun) -> str:
    """key=value lines with every run parameter and the generator name."""
    data = model_to_dict(run, exclude={"trajectory"})
    data["prng"] = PRNG_NAME
    return "".join(f"{key}={value}\n" for key, value in data.items())
