"""
Small graphs: named constructors, regularity and bipartiteness, exact
homomorphism counts, spectra and the Galvin-Tetali inequality.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
import numpy as np
from pydantic import ValidationError

from config import HOM_SIZE_CAP
from exceptions import DomainError, PreconditionError, SizeLimitError
from graphon import hom_density
from schemas import InequalityReport, SignedKernel, SmallGraph, StepGraphon

logger = logging.getLogger(__name__)

SPECTRAL_MAX_VERTICES = 2000
GT_TOL = 1e-12


# networkx bridge
def from_networkx(g: nx.Graph, loops: bool = False) -> SmallGraph:
    g = nx.convert_node_labels_to_integers(g, ordering="sorted")
    return SmallGraph(n=g.number_of_nodes(), loops=loops, edges=list(g.edges()))


def to_networkx(G: SmallGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(G.n))
    g.add_edges_from(G.edges)
    return g


def complete_graph(n: int) -> SmallGraph:
    return from_networkx(nx.complete_graph(n))


def cycle_graph(n: int) -> SmallGraph:
    if n < 3:
        raise DomainError("a simple cycle needs at least 3 vertices")
    return from_networkx(nx.cycle_graph(n))


def path_graph(n: int) -> SmallGraph:
    """Path on n vertices (n - 1 edges)."""
    return from_networkx(nx.path_graph(n))


def complete_bipartite_graph(a: int, b: int) -> SmallGraph:
    return from_networkx(nx.complete_bipartite_graph(a, b))


def cube_graph() -> SmallGraph:
    return from_networkx(nx.hypercube_graph(3))


def petersen_graph() -> SmallGraph:
    return from_networkx(nx.petersen_graph())


def circulant_graph(n: int, offsets: Sequence[int]) -> SmallGraph:
    return from_networkx(nx.circulant_graph(n, list(offsets)))


def looped_edge() -> SmallGraph:
    """Target whose homomorphisms from G are the independent sets of G."""
    return SmallGraph(n=2, loops=True, edges=[(0, 1), (1, 1)])


def graphon_of_graph(G: SmallGraph) -> StepGraphon:
    """n-block uniform-weight step graphon of the adjacency matrix."""
    return StepGraphon(weights=[1.0 / G.n] * G.n, values=G.adjacency().astype(float).tolist())


# Structure
def is_d_regular(G: SmallGraph) -> Optional[int]:
    degrees = set(G.degrees())
    return degrees.pop() if len(degrees) == 1 else None


def is_bipartite(G: SmallGraph) -> Optional[Tuple[List[int], List[int]]]:
    """Two-colouring (left, right) of G, or None when G has an odd cycle or a loop."""
    if any(u == w for u, w in G.edges):
        return None
    g = to_networkx(G)
    if not nx.is_bipartite(g):
        return None
    colour = nx.bipartite.color(g)
    left = sorted(v for v, c in colour.items() if c == 0)
    right = sorted(v for v, c in colour.items() if c == 1)
    return left, right


# Homomorphisms
def _neighbour_sets(G: SmallGraph) -> List[Set[int]]:
    adj: List[Set[int]] = [set() for _ in range(G.n)]
    for u, w in G.edges:
        adj[u].add(w)
        adj[w].add(u)
    return adj


def _check_hom_size(source_vertices: int, target_vertices: int):
    if source_vertices * math.log10(max(target_vertices, 1)) > math.log10(HOM_SIZE_CAP):
        raise SizeLimitError(
            f"{target_vertices}^{source_vertices} vertex maps exceed the cap of {HOM_SIZE_CAP:g}"
        )


def hom_count(H: SmallGraph, G: SmallGraph) -> int:
    """|hom(H, G)| by backtracking in breadth-first order of H.

    A loop in H at v forces a loop at the image of v.
    """
    _check_hom_size(H.n, G.n)
    h_adj, g_adj = _neighbour_sets(H), _neighbour_sets(G)
    order: List[int] = []
    for component in nx.connected_components(to_networkx(H)):
        root = min(component)
        order += [root] + [w for _, w in nx.bfs_edges(to_networkx(H), root)]
    position = {v: i for i, v in enumerate(order)}
    earlier = [[w for w in h_adj[v] if position[w] < position[v]] for v in order]
    looped = [v in h_adj[v] for v in order]
    image: Dict[int, int] = {}

    def extend(i: int) -> int:
        if i == len(order):
            return 1
        if earlier[i]:
            candidates = set.intersection(*(g_adj[image[w]] for w in earlier[i]))
        else:
            candidates = range(G.n)
        total = 0
        for x in candidates:
            if looped[i] and x not in g_adj[x]:
                continue
            image[order[i]] = x
            total += extend(i + 1)
        return total

    return extend(0)


def hom_density_graph(H: SmallGraph, G: SmallGraph) -> float:
    """t(H, G) = |hom(H, G)| / n(G)^v(H)."""
    return hom_count(H, G) / G.n ** H.n


def cycle_density_trace(k: int, G: SmallGraph) -> float:
    """t(C_k, G) = tr(A^k) / n^k."""
    if k < 3:
        raise DomainError("cycles have length at least 3")
    a = G.adjacency().astype(float)
    return float(np.trace(np.linalg.matrix_power(a, k))) / G.n ** k


def spectral_radius(G: SmallGraph) -> float:
    """Largest adjacency eigenvalue."""
    if G.n > SPECTRAL_MAX_VERTICES:
        raise SizeLimitError(f"spectral radius supports at most {SPECTRAL_MAX_VERTICES} vertices")
    return float(np.linalg.eigvalsh(G.adjacency().astype(float))[-1])


# Galvin-Tetali
def _require_bipartite_regular(G: SmallGraph) -> int:
    d = is_d_regular(G)
    if d is None or d == 0:
        raise PreconditionError("G must be d-regular with d >= 1")
    if is_bipartite(G) is None:
        raise PreconditionError("G must be bipartite; use galvin_tetali_counterexample for other graphs")
    return d


def _gt_report(name: str, lhs: float, rhs: float) -> InequalityReport:
    return InequalityReport(
        name=name,
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + GT_TOL,
        tight=abs(lhs - rhs) <= GT_TOL,
    )


def galvin_tetali_check(G: SmallGraph, f: SignedKernel) -> InequalityReport:
    """t(G, f) <= t(K_{d,d}, f)^(v(G)/(2d)) for bipartite d-regular G."""
    d = _require_bipartite_regular(G)
    lhs = hom_density(G, f)
    rhs = hom_density(complete_bipartite_graph(d, d), f) ** (G.n / (2.0 * d))
    return _gt_report("galvin_tetali", lhs, rhs)


def galvin_tetali_counterexample(G: SmallGraph, f: SignedKernel) -> InequalityReport:
    """Both sides of the Galvin-Tetali bound without the bipartite requirement."""
    d = is_d_regular(G)
    if not d:
        raise PreconditionError("G must be d-regular with d >= 1")
    lhs = hom_density(G, f)
    rhs = hom_density(complete_bipartite_graph(d, d), f) ** (G.n / (2.0 * d))
    report = _gt_report("galvin_tetali_counterexample", lhs, rhs)
    if not report.holds:
        logger.info(f"Galvin-Tetali fails for non-bipartite G: {lhs:.6f} > {rhs:.6f}")
    return report


def galvin_tetali_graph_check(G: SmallGraph, H: SmallGraph) -> InequalityReport:
    """hom(G, H) <= hom(K_{d,d}, H)^(v(G)/(2d)); H may carry loops."""
    d = _require_bipartite_regular(G)
    lhs = float(hom_count(G, H))
    rhs = float(hom_count(complete_bipartite_graph(d, d), H)) ** (G.n / (2.0 * d))
    # counts are large integers, compare relatively
    report = InequalityReport(
        name="galvin_tetali_counting",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs * (1.0 + 1e-12),
        tight=abs(lhs - rhs) <= 1e-12 * max(rhs, 1.0),
    )
    return report


def independent_set_count(G: SmallGraph) -> int:
    """Number of independent sets of G, the empty set included."""
    return hom_count(G, looped_edge())


def kahn_bound(G: SmallGraph) -> InequalityReport:
    """i(G) <= i(K_{d,d})^(v(G)/(2d)) for bipartite d-regular G."""
    return galvin_tetali_graph_check(G, looped_edge())


# Edge-list text: "n m" header, then m lines "u v"
def dumps_edge_list(G: SmallGraph) -> str:
    lines = [f"{G.n} {G.num_edges}"] + [f"{u} {w}" for u, w in G.edges]
    return "\n".join(lines) + "\n"


def loads_edge_list(text: str, loops: bool = False) -> SmallGraph:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise DomainError("edge list is empty")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(u), int(w)) for u, w in rows[1:]]
    except ValueError as e:
        raise DomainError(f"malformed edge list: {e}")
    if len(edges) != m:
        raise DomainError(f"header announces {m} edges, found {len(edges)}")
    try:
        return SmallGraph(n=n, loops=loops, edges=edges)
    except ValidationError as e:
        raise DomainError(f"invalid graph: {e}")


def read_edge_list(path: Union[str, Path], loops: bool = False) -> SmallGraph:
    return loads_edge_list(Path(path).read_text(), loops=loops)
