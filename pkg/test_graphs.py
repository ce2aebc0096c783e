import networkx as nx
import numpy as np
import pytest

from exceptions import DomainError, PreconditionError, SizeLimitError
from graphon import hom_density, random_step_graphon
from graphs import (
    circulant_graph,
    complete_bipartite_graph,
    complete_graph,
    cube_graph,
    cycle_density_trace,
    cycle_graph,
    dumps_edge_list,
    from_networkx,
    galvin_tetali_check,
    galvin_tetali_counterexample,
    galvin_tetali_graph_check,
    graphon_of_graph,
    hom_count,
    hom_density_graph,
    independent_set_count,
    is_bipartite,
    is_d_regular,
    kahn_bound,
    loads_edge_list,
    looped_edge,
    path_graph,
    petersen_graph,
    read_edge_list,
    spectral_radius,
    to_networkx,
)
from schemas import SmallGraph, StepGraphon


@pytest.fixture
def identity():
    return StepGraphon(weights=[0.5, 0.5], values=[[1.0, 0.0], [0.0, 1.0]])


class TestStructure:
    """Test regularity and bipartiteness"""

    def test_regularity(self):
        """Test K3, Petersen and a path"""
        assert is_d_regular(complete_graph(3)) == 2
        assert is_d_regular(petersen_graph()) == 3
        assert is_d_regular(cube_graph()) == 3
        assert is_d_regular(path_graph(4)) is None

    def test_circulant_degree(self):
        """Test the circulant constructor"""
        assert is_d_regular(circulant_graph(6, [1, 2])) == 4

    def test_bipartite(self):
        """Test that C5 has no bipartition and C4 splits 2 + 2"""
        assert is_bipartite(cycle_graph(5)) is None
        left, right = is_bipartite(cycle_graph(4))
        assert len(left) == 2 and len(right) == 2
        assert sorted(left + right) == [0, 1, 2, 3]

    def test_loops_are_not_bipartite(self):
        """Test that a looped target is never bipartite"""
        assert is_bipartite(looped_edge()) is None

    def test_simple_graph_rejects_loops(self):
        """Test SmallGraph validation"""
        with pytest.raises(ValueError):
            SmallGraph(n=2, edges=[(1, 1)])
        with pytest.raises(ValueError):
            SmallGraph(n=2, edges=[(0, 2)])
        with pytest.raises(ValueError):
            SmallGraph(n=3, edges=[(0, 1), (1, 0)])

    def test_networkx_bridge(self):
        """Test that converting through networkx keeps the graph"""
        G = petersen_graph()
        g = to_networkx(G)
        assert g.number_of_nodes() == 10 and g.number_of_edges() == 15
        assert sorted(from_networkx(g).edges) == sorted(G.edges)

    def test_cycle_needs_three_vertices(self):
        """Test the cycle constructor guard"""
        with pytest.raises(DomainError):
            cycle_graph(2)


class TestHomomorphisms:
    """Test homomorphism counts and densities"""

    def test_small_counts(self):
        """Test a few counts by hand"""
        assert hom_count(complete_graph(2), complete_graph(3)) == 6
        assert hom_count(complete_graph(3), complete_graph(3)) == 6
        assert hom_count(cycle_graph(4), complete_graph(2)) == 2
        assert hom_count(complete_graph(3), complete_bipartite_graph(2, 3)) == 0

    def test_density(self):
        """Test t(K2, K3) = 6/9"""
        assert hom_density_graph(complete_graph(2), complete_graph(3)) == pytest.approx(6 / 9)

    def test_disconnected_pattern(self):
        """Test that isolated pattern vertices map anywhere"""
        H = SmallGraph(n=3, edges=[(0, 1)])
        assert hom_count(H, complete_graph(4)) == 12 * 4

    def test_loops_force_looped_images(self):
        """Test that independent sets are homomorphisms into the looped edge"""
        assert independent_set_count(path_graph(3)) == 5
        assert independent_set_count(cycle_graph(4)) == 7
        assert independent_set_count(cycle_graph(6)) == 18

    def test_density_matches_graphon(self):
        """Test that a graph and its step graphon give the same density"""
        G = petersen_graph()
        assert hom_density(cycle_graph(5), graphon_of_graph(G)) == pytest.approx(hom_density_graph(cycle_graph(5), G))

    def test_size_cap(self):
        """Test that huge vertex-map spaces are refused"""
        with pytest.raises(SizeLimitError):
            hom_count(cycle_graph(20), complete_graph(10))


class TestSpectra:
    """Test cycle densities from traces and the spectral radius"""

    def test_triangle_density(self):
        """Test t(C3, K3) = 6/27 and 0 for a triangle-free graph"""
        assert cycle_density_trace(3, complete_graph(3)) == pytest.approx(6 / 27)
        assert cycle_density_trace(3, cube_graph()) == 0.0

    def test_trace_matches_count(self):
        """Test the trace formula against homomorphism counting"""
        G = petersen_graph()
        for k in (3, 4, 5):
            assert cycle_density_trace(k, G) == pytest.approx(hom_density_graph(cycle_graph(k), G))

    def test_spectral_radius(self):
        """Test K_n and C_n"""
        assert spectral_radius(complete_graph(6)) == pytest.approx(5.0)
        assert spectral_radius(cycle_graph(7)) == pytest.approx(2.0)

    def test_spectral_radius_random_graph(self):
        """Test a random graph against networkx's adjacency spectrum"""
        G = from_networkx(nx.gnp_random_graph(20, 0.5, seed=3))
        expected = max(abs(np.linalg.eigvals(nx.to_numpy_array(to_networkx(G)))))
        assert spectral_radius(G) == pytest.approx(expected, abs=1e-6)


class TestGalvinTetali:
    """Test the Galvin-Tetali inequality and its failure off bipartite graphs"""

    def test_tight_on_complete_bipartite(self):
        """Test equality for G = K_{d,d}"""
        f = random_step_graphon(np.random.default_rng(1), 3)
        report = galvin_tetali_check(complete_bipartite_graph(3, 3), f)
        assert report.holds and report.tight

    def test_holds_on_even_cycle(self):
        """Test C6 against random graphons"""
        rng = np.random.default_rng(5)
        for _ in range(25):
            assert galvin_tetali_check(cycle_graph(6), random_step_graphon(rng, 4)).holds

    def test_requires_bipartite_regular(self, identity):
        """Test that K3 and a path are refused"""
        with pytest.raises(PreconditionError):
            galvin_tetali_check(complete_graph(3), identity)
        with pytest.raises(PreconditionError):
            galvin_tetali_check(path_graph(4), identity)

    def test_triangle_counterexample(self, identity):
        """Test t(K3, identity) = 0.25 > 0.125^(3/4)"""
        report = galvin_tetali_counterexample(complete_graph(3), identity)
        assert not report.holds
        assert report.lhs == pytest.approx(0.25)
        assert report.rhs == pytest.approx(0.125 ** 0.75)
        assert report.rhs == pytest.approx(0.210224, abs=1e-6)

    def test_counting_version(self):
        """Test hom(C6, K3) <= hom(K22, K3)^(3/2)"""
        assert galvin_tetali_graph_check(cycle_graph(6), complete_graph(3)).holds
        assert galvin_tetali_graph_check(complete_bipartite_graph(2, 2), complete_graph(3)).tight

    def test_kahn_bound(self):
        """Test the independent set bound on the cube and C6"""
        assert kahn_bound(cube_graph()).holds
        assert kahn_bound(cycle_graph(6)).holds
        assert kahn_bound(complete_bipartite_graph(3, 3)).tight


class TestEdgeListFormat:
    """Test the edge-list text format"""

    def test_dumps(self):
        """Test the header and edge lines"""
        assert dumps_edge_list(complete_graph(3)) == "3 3\n0 1\n0 2\n1 2\n"

    def test_loads_with_comments(self):
        """Test that comment lines are skipped"""
        G = loads_edge_list("# triangle\n3 3\n0 1\n1 2\n0 2\n")
        assert is_d_regular(G) == 2

    def test_loads_rejects_bad_input(self):
        """Test count mismatches, loops and garbage"""
        with pytest.raises(DomainError):
            loads_edge_list("3 2\n0 1\n")
        with pytest.raises(DomainError):
            loads_edge_list("2 1\n1 1\n")
        with pytest.raises(DomainError):
            loads_edge_list("three 3\n")
        with pytest.raises(DomainError):
            loads_edge_list("")

    def test_loops_allowed_on_request(self):
        """Test a looped target read from text"""
        G = loads_edge_list("2 2\n0 1\n1 1\n", loops=True)
        assert G == looped_edge()

    def test_read_file(self, tmp_path):
        """Test reading from disk"""
        path = tmp_path / "petersen.txt"
        path.write_text(dumps_edge_list(petersen_graph()))
        assert read_edge_list(path) == petersen_graph()
