import logging

import numpy as np
import pytest

from verify import (
    SUITES,
    cut_suite,
    gt_suite,
    holder_suite,
    jensen_suite,
    nesting_suite,
    run_suites,
    sandwich_suite,
)


@pytest.fixture
def rng():
    return np.random.default_rng(99)


class TestSuites:
    """Test each property suite on a small sample"""

    def test_holder(self, rng):
        """Test four patterns per sample plus the product kernels"""
        result = holder_suite(rng, 20)
        assert result.passed
        assert result.checked == 4 * 20 + 4

    def test_sandwich(self, rng):
        """Test the L1 / operator / L2 sandwich"""
        assert sandwich_suite(rng, 30).passed

    def test_cut(self, rng):
        """Test both operator-cut inequalities"""
        result = cut_suite(rng, 10)
        assert result.passed and result.checked == 20

    def test_gt_records_counterexample(self, rng, caplog):
        """Test that the corpus passes while the K3 counterexample fails"""
        with caplog.at_level(logging.INFO):
            result = gt_suite(rng, 25)
        assert result.passed
        assert result.checked == 5 + 5 + 1
        assert "K3 counterexample fails as expected" in caplog.text

    def test_nesting(self, rng):
        """Test 20 values of p for each gamma pair"""
        result = nesting_suite(rng, 0)
        assert result.passed and result.checked == 60

    def test_jensen(self, rng):
        """Test the Jensen bound on random graphons"""
        assert jensen_suite(rng, 30).passed


class TestRunSuites:
    """Test the suite runner"""

    def test_single_suite(self):
        """Test running one suite by name"""
        results = run_suites("sandwich", samples=10, seed=1)
        assert [r.name for r in results] == ["sandwich"]

    def test_all_suites(self):
        """Test that 'all' runs every suite in order"""
        results = run_suites("all", samples=5, seed=2)
        assert [r.name for r in results] == list(SUITES)
        assert all(r.passed for r in results)

    def test_unknown_suite(self):
        """Test that an unknown name is refused"""
        with pytest.raises(KeyError):
            run_suites("fourier")
