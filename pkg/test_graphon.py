import math

import numpy as np
import pytest

from exceptions import DomainError, SizeLimitError
from graphon import (
    apply_kernel,
    constant_graphon,
    cut_distance_to_constant,
    cut_norm,
    dumps_step_graphon,
    hom_density,
    hom_density_monte_carlo,
    loads_step_graphon,
    lp_norm,
    max_box_mass,
    operator_norm,
    product_graphon,
    random_signed_kernel,
    random_step_graphon,
    rate_functional,
)
from graphs import complete_bipartite_graph, complete_graph, cycle_graph
from rate_fn import rate
from schemas import SignedKernel, StepGraphon


@pytest.fixture
def identity():
    """Two equal blocks, 1 on the diagonal blocks and 0 across"""
    return StepGraphon(weights=[0.5, 0.5], values=[[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


class TestStepGraphonModel:
    """Test validation of step graphons and signed kernels"""

    def test_weights_must_sum_to_one(self):
        """Test that weights far from a partition are rejected"""
        with pytest.raises(ValueError):
            StepGraphon(weights=[0.5, 0.6], values=[[0.1, 0.2], [0.2, 0.1]])

    def test_values_must_be_symmetric(self):
        """Test that an asymmetric matrix is rejected"""
        with pytest.raises(ValueError):
            StepGraphon(weights=[0.5, 0.5], values=[[0.1, 0.2], [0.3, 0.1]])

    def test_graphon_values_in_unit_interval(self):
        """Test that a graphon refuses negative values while a signed kernel accepts them"""
        with pytest.raises(ValueError):
            StepGraphon(weights=[1.0], values=[[-0.1]])
        assert SignedKernel(weights=[1.0], values=[[-0.1]]).k == 1

    def test_random_generators(self, rng):
        """Test that generated kernels are valid and of the requested size"""
        f = random_step_graphon(rng, 5)
        g = random_signed_kernel(rng, 4)
        assert f.k == 5 and g.k == 4
        assert np.allclose(f.matrix, f.matrix.T)
        assert math.fsum(f.weights) == pytest.approx(1.0)


class TestRateFunctional:
    """Test h_p(f) for step graphons"""

    def test_constant(self):
        """Test that a constant graphon c gives h_p(c)"""
        assert rate_functional(constant_graphon(0.4), 0.2) == pytest.approx(rate(0.4, 0.2))
        assert rate_functional(constant_graphon(0.3, k=3), 0.3) == pytest.approx(0.0, abs=1e-15)

    def test_checkerboard_is_half_of_empty(self):
        """Test that [[0, p], [p, 0]] costs h_p(0)/2"""
        p = 0.5
        f = StepGraphon(weights=[0.5, 0.5], values=[[0.0, p], [p, 0.0]])
        assert rate_functional(f, p) == pytest.approx(rate(0.0, p) / 2.0, rel=1e-14)


class TestNorms:
    """Test L^d, cut and operator norms"""

    def test_lp_norm_constant(self):
        """Test that a constant has every L^d norm equal to itself"""
        for d in (1, 2, 3):
            assert lp_norm(constant_graphon(0.35), d) == pytest.approx(0.35)

    def test_lp_norm_identity(self, identity):
        """Test the L^1 and L^2 norms of the identity 2-block graphon"""
        assert lp_norm(identity, 1) == pytest.approx(0.5)
        assert lp_norm(identity, 2) == pytest.approx(1.0 / math.sqrt(2.0))

    def test_lp_norm_domain(self, identity):
        """Test that d < 1 is rejected"""
        with pytest.raises(DomainError):
            lp_norm(identity, 0.5)

    def test_cut_norm_constant(self):
        """Test that a nonnegative constant has cut norm equal to itself"""
        assert cut_norm(constant_graphon(0.7, k=3)) == pytest.approx(0.7)

    def test_cut_distance_identity(self, identity):
        """Test ||identity - 1/2||_cut = 1/8"""
        shifted = SignedKernel(weights=[0.5, 0.5], values=[[0.5, -0.5], [-0.5, 0.5]])
        assert cut_norm(shifted) == pytest.approx(0.125)
        assert cut_distance_to_constant(identity, 0.5) == pytest.approx(0.125)
        assert cut_distance_to_constant(constant_graphon(0.3, k=2), 0.3) == pytest.approx(0.0, abs=1e-15)

    def test_cut_norm_block_limit(self):
        """Test the subset enumeration cap"""
        with pytest.raises(SizeLimitError):
            cut_norm(constant_graphon(0.5, k=13))

    def test_max_box_mass_chunks(self, rng):
        """Test that chunked enumeration matches a single pass"""
        mass = rng.uniform(-1.0, 1.0, (6, 6))
        assert max_box_mass(mass, chunk=5) == pytest.approx(max_box_mass(mass))

    def test_operator_norm(self):
        """Test constants and the 2-block swap kernel"""
        assert operator_norm(constant_graphon(0.6, k=2)) == pytest.approx(0.6)
        swap = StepGraphon(weights=[0.5, 0.5], values=[[0.0, 1.0], [1.0, 0.0]])
        assert operator_norm(swap) == pytest.approx(0.5)

    def test_operator_norm_between_l1_and_l2(self, rng):
        """Test ||f||_1 <= ||f||_op <= ||f||_2 for random graphons"""
        for _ in range(20):
            f = random_step_graphon(rng, int(rng.integers(1, 7)))
            assert lp_norm(f, 1) <= operator_norm(f) + 1e-12
            assert operator_norm(f) <= lp_norm(f, 2) + 1e-12

    def test_apply_kernel(self, identity):
        """Test T_f on a block-constant function"""
        assert apply_kernel(identity, [2.0, 4.0]).tolist() == pytest.approx([1.0, 2.0])


class TestHomDensity:
    """Test exact homomorphism densities"""

    def test_constant(self):
        """Test t(H, c) = c^e(H)"""
        for H in (complete_graph(3), cycle_graph(5), complete_graph(4)):
            assert hom_density(H, constant_graphon(0.3, k=2)) == pytest.approx(0.3 ** H.num_edges)

    def test_identity(self, identity):
        """Test t(K3, identity) = 1/4 and t(K22, identity) = 1/8"""
        assert hom_density(complete_graph(3), identity) == pytest.approx(0.25)
        assert hom_density(complete_bipartite_graph(2, 2), identity) == pytest.approx(0.125)

    def test_product_graphon_is_tight(self):
        """Test t(C4, g x g) = ||g x g||_2^4"""
        f = product_graphon([0.2, 0.9, 0.5])
        assert hom_density(cycle_graph(4), f) == pytest.approx(lp_norm(f, 2) ** 4, rel=1e-12)

    def test_size_cap(self):
        """Test that too many block assignments are refused"""
        with pytest.raises(SizeLimitError):
            hom_density(cycle_graph(30), constant_graphon(0.5, k=10))

    def test_monte_carlo_agrees(self, rng):
        """Test the Monte Carlo estimate against the exact density"""
        f = random_step_graphon(rng, 4)
        exact = hom_density(complete_graph(3), f)
        mean, se = hom_density_monte_carlo(complete_graph(3), f, samples=200_000, seed=11)
        assert abs(mean - exact) <= 5 * se + 1e-12


class TestTextFormat:
    """Test the plain-text step graphon format"""

    def test_dumps_layout(self, identity):
        """Test k, weights and rows appear in order"""
        lines = dumps_step_graphon(identity).splitlines()
        assert lines[0] == "2"
        assert lines[1] == "0.5 0.5"
        assert lines[2] == "1.0 0.0"

    def test_loads_restores_values(self, rng):
        """Test that parsing the text restores the same graphon"""
        f = random_step_graphon(rng, 3)
        g = loads_step_graphon(dumps_step_graphon(f))
        assert np.allclose(g.matrix, f.matrix, atol=0.0, rtol=1e-15)

    def test_loads_rejects_bad_text(self):
        """Test empty, short and invalid inputs"""
        with pytest.raises(DomainError):
            loads_step_graphon("")
        with pytest.raises(DomainError):
            loads_step_graphon("2\n0.5 0.5\n1 0\n")
        with pytest.raises(DomainError):
            loads_step_graphon("1\n1.0\n1.5\n")
