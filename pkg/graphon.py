"""
Step-graphon arithmetic: the h_p functional, L^d, cut and operator norms,
and homomorphism densities of small graphs.
"""

import logging
import math
import string
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from config import CUT_NORM_MAX_BLOCKS, HOM_SIZE_CAP
from exceptions import DomainError, SizeLimitError
from rate_fn import rate
from schemas import SignedKernel, StepGraphon

if TYPE_CHECKING:
    from schemas import SmallGraph

logger = logging.getLogger(__name__)

_LETTERS = string.ascii_letters


def constant_graphon(c: float, k: int = 1) -> StepGraphon:
    return StepGraphon(weights=[1.0 / k] * k, values=[[c] * k for _ in range(k)])


def rate_functional(f: StepGraphon, p: float) -> float:
    """h_p(f) = sum_ij w_i w_j h_p(M_ij)."""
    w = f.weight_vector
    return float(w @ np.asarray(rate(f.matrix, p)) @ w)


def lp_norm(f: SignedKernel, d: float) -> float:
    if d < 1:
        raise DomainError("the L^d norm needs d >= 1")
    w = f.weight_vector
    return float((w @ np.abs(f.matrix) ** d @ w) ** (1.0 / d))


def hom_sum(edges: Sequence[Tuple[int, ...]], num_vertices: int, tensor: np.ndarray, weights: np.ndarray) -> float:
    """Sum over block maps phi of prod_edges tensor[phi(e)] * prod_vertices w[phi(v)].

    Works for graphs (2-index tensor, loops allowed) and k-uniform hypergraphs alike.
    """
    blocks = len(weights)
    if num_vertices > len(_LETTERS):
        raise SizeLimitError(f"at most {len(_LETTERS)} pattern vertices are supported")
    if num_vertices * math.log10(max(blocks, 1)) > math.log10(HOM_SIZE_CAP):
        raise SizeLimitError(
            f"{blocks}^{num_vertices} block assignments exceed the cap of {HOM_SIZE_CAP:g}"
        )
    letters = _LETTERS[:num_vertices]
    subscripts = [letters[v] for v in range(num_vertices)]
    operands = [weights] * num_vertices
    for edge in edges:
        subscripts.append("".join(letters[v] for v in edge))
        operands.append(tensor)
    expression = ",".join(subscripts) + "->"
    return float(np.einsum(expression, *operands, optimize="greedy"))


def hom_density(H: "SmallGraph", f: SignedKernel) -> float:
    """t(H, f): exact sum over maps V(H) -> blocks."""
    return hom_sum(H.edges, H.n, f.matrix, f.weight_vector)


def monte_carlo_hom(
    edges: Sequence[Tuple[int, ...]],
    num_vertices: int,
    tensor: np.ndarray,
    weights: np.ndarray,
    samples: int,
    seed: int,
) -> Tuple[float, float]:
    """Naive Monte Carlo estimate of a homomorphism density and its standard error."""
    rng = np.random.default_rng(seed)
    labels = rng.choice(len(weights), size=(samples, num_vertices), p=weights)
    values = np.ones(samples)
    for edge in edges:
        values *= tensor[tuple(labels[:, v] for v in edge)]
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def hom_density_monte_carlo(H: "SmallGraph", f: SignedKernel, samples: int = 1_000_000, seed: int = 0):
    return monte_carlo_hom(H.edges, H.n, f.matrix, f.weight_vector, samples, seed)


def cut_norm(g: SignedKernel) -> float:
    """max over block subsets S, T of |sum_{i in S, j in T} w_i w_j g_ij|.

    Exact: the objective is bilinear in fractional block inclusions, so some
    vertex of the cube is optimal. For fixed S the best T takes the columns of
    one sign, so only S is enumerated.
    """
    if g.k > CUT_NORM_MAX_BLOCKS:
        raise SizeLimitError(f"cut norm enumeration supports at most {CUT_NORM_MAX_BLOCKS} blocks, got {g.k}")
    w = g.weight_vector
    return max_box_mass(w[:, None] * g.matrix * w[None, :])


def max_box_mass(mass: np.ndarray, chunk: int = 1 << 14) -> float:
    """max over index sets S, T of |sum_{i in S, j in T} mass_ij|, enumerating S in chunks."""
    k = mass.shape[0]
    best = 0.0
    for start in range(0, 2 ** k, chunk):
        codes = np.arange(start, min(start + chunk, 2 ** k))
        masks = ((codes[:, None] >> np.arange(k)[None, :]) & 1).astype(float)
        rows = masks @ mass
        best = max(
            best,
            float(np.clip(rows, 0.0, None).sum(axis=1).max()),
            float(np.clip(-rows, 0.0, None).sum(axis=1).max()),
        )
    return best


def cut_distance_to_constant(f: StepGraphon, c: float) -> float:
    """||f - c||_cut; no rearrangement is needed against a constant."""
    shifted = SignedKernel(weights=f.weights, values=(f.matrix - c).tolist())
    return cut_norm(shifted)


def operator_norm(g: SignedKernel) -> float:
    """Largest |eigenvalue| of D^(1/2) M D^(1/2), the spectrum of the kernel operator."""
    root = np.sqrt(g.weight_vector)
    symmetric = root[:, None] * g.matrix * root[None, :]
    return float(np.max(np.abs(np.linalg.eigvalsh(symmetric))))


def apply_kernel(g: SignedKernel, u: Sequence[float]) -> np.ndarray:
    """(T_g u) on each block for a block-constant u."""
    return g.matrix @ (g.weight_vector * np.asarray(u, dtype=float))


# Generators
def _random_weights(rng: np.random.Generator, k: int) -> List[float]:
    w = rng.dirichlet(np.ones(k)) + 1e-3
    return (w / w.sum()).tolist()


def random_step_graphon(rng: np.random.Generator, k: int) -> StepGraphon:
    upper = np.triu(rng.random((k, k)))
    values = upper + np.triu(upper, 1).T
    return StepGraphon(weights=_random_weights(rng, k), values=values.tolist())


def random_signed_kernel(rng: np.random.Generator, k: int) -> SignedKernel:
    upper = np.triu(rng.uniform(-1.0, 1.0, (k, k)))
    values = upper + np.triu(upper, 1).T
    return SignedKernel(weights=_random_weights(rng, k), values=values.tolist())


def product_graphon(g: Sequence[float], weights: Optional[Sequence[float]] = None) -> StepGraphon:
    """M_ij = g_i g_j, the equality case of the generalized Hoelder bound."""
    g = np.asarray(g, dtype=float)
    if weights is None:
        weights = [1.0 / len(g)] * len(g)
    return StepGraphon(weights=list(weights), values=np.outer(g, g).tolist())


# Plain-text format: k, then k weights, then k rows of k values
def dumps_step_graphon(f: StepGraphon) -> str:
    lines = [str(f.k), " ".join(repr(w) for w in f.weights)]
    lines += [" ".join(repr(x) for x in row) for row in f.values]
    return "\n".join(lines) + "\n"


def loads_step_graphon(text: str) -> StepGraphon:
    tokens = text.split()
    if not tokens:
        raise DomainError("empty step graphon text")
    try:
        k = int(tokens[0])
        numbers = [float(t) for t in tokens[1:]]
    except ValueError as e:
        raise DomainError(f"malformed step graphon text: {e}")
    if k < 1 or len(numbers) != k + k * k:
        raise DomainError(f"expected {k} weights and {k * k} values after k={k}")
    weights = numbers[:k]
    values = [numbers[k + i * k: k + (i + 1) * k] for i in range(k)]
    try:
        return StepGraphon(weights=weights, values=values)
    except ValidationError as e:
        raise DomainError(f"invalid step graphon: {e}")
