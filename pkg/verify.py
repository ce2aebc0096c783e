#!/usr/bin/env python3
"""
Property suites for the inequalities the library relies on
"""

import logging
import sys
from typing import Callable, Dict, List

import numpy as np

from config import DEFAULT_SEED, VERIFY_SAMPLES
from graphon import (
    cut_norm,
    hom_density,
    lp_norm,
    operator_norm,
    product_graphon,
    random_signed_kernel,
    random_step_graphon,
)
from graphs import (
    complete_bipartite_graph,
    complete_graph,
    cube_graph,
    cycle_graph,
    galvin_tetali_check,
    galvin_tetali_counterexample,
    kahn_bound,
)
from minorant import double_tangent, jensen_rate_bound
from rate_fn import p0
from schemas import GammaCurve, StepGraphon, SuiteResult

logger = logging.getLogger(__name__)

HOLDER_TOL = 1e-12
NORM_TOL = 1e-10
MAX_BLOCKS = 6


def _random_graphon(rng: np.random.Generator) -> StepGraphon:
    return random_step_graphon(rng, int(rng.integers(1, MAX_BLOCKS + 1)))


def holder_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """t(H, f) <= ||f||_d^e(H) with d the maximum degree; equality for product kernels."""
    patterns = {"K3": complete_graph(3), "C4": cycle_graph(4), "C5": cycle_graph(5), "K4": complete_graph(4)}
    checked, details = 0, []
    for _ in range(samples):
        f = _random_graphon(rng)
        for name, H in patterns.items():
            lhs, rhs = hom_density(H, f), lp_norm(f, max(H.degrees())) ** H.num_edges
            checked += 1
            if lhs > rhs + HOLDER_TOL:
                details.append(f"{name}: {lhs!r} > {rhs!r} on k={f.k}")
    g = rng.random(4)
    product = product_graphon(g)
    for name, H in patterns.items():
        lhs, rhs = hom_density(H, product), lp_norm(product, max(H.degrees())) ** H.num_edges
        checked += 1
        if abs(lhs - rhs) > 1e-9:
            details.append(f"{name}: product kernel not tight, {lhs!r} vs {rhs!r}")
    return SuiteResult(name="holder", checked=checked, violations=len(details), details=details)


def sandwich_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """||f||_1 <= ||f||_op <= ||f||_2."""
    details = []
    for _ in range(samples):
        f = _random_graphon(rng)
        one, op, two = lp_norm(f, 1), operator_norm(f), lp_norm(f, 2)
        if not (one <= op + NORM_TOL and op <= two + NORM_TOL):
            details.append(f"k={f.k}: {one!r}, {op!r}, {two!r}")
    return SuiteResult(name="sandwich", checked=samples, violations=len(details), details=details)


def cut_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """||g||_op^4 <= 4 ||g||_cut for signed kernels, without the 4 for [0, 1]-valued ones."""
    details = []
    for _ in range(samples):
        g = random_signed_kernel(rng, int(rng.integers(1, MAX_BLOCKS + 1)))
        if operator_norm(g) ** 4 > 4.0 * cut_norm(g) + NORM_TOL:
            details.append(f"signed k={g.k}: {operator_norm(g) ** 4!r} > 4 * {cut_norm(g)!r}")
        f = _random_graphon(rng)
        if operator_norm(f) ** 4 > cut_norm(f) + NORM_TOL:
            details.append(f"graphon k={f.k}: {operator_norm(f) ** 4!r} > {cut_norm(f)!r}")
    return SuiteResult(name="cut", checked=2 * samples, violations=len(details), details=details)


def gt_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """Galvin-Tetali on bipartite regular graphs; the K3 counterexample must fail."""
    corpus = [
        cycle_graph(4),
        cycle_graph(6),
        complete_bipartite_graph(2, 2),
        complete_bipartite_graph(3, 3),
        cube_graph(),
    ]
    checked, details = 0, []
    runs = max(samples // 5, 1)
    for index in range(runs):
        G = corpus[index % len(corpus)]
        report = galvin_tetali_check(G, _random_graphon(rng))
        checked += 1
        if not report.holds:
            details.append(f"n={G.n}: {report.lhs!r} > {report.rhs!r}")
    for G in corpus:
        checked += 1
        if not kahn_bound(G).holds:
            details.append(f"independent sets of n={G.n} exceed the Kahn bound")

    identity = StepGraphon(weights=[0.5, 0.5], values=[[1.0, 0.0], [0.0, 1.0]])
    report = galvin_tetali_counterexample(complete_graph(3), identity)
    checked += 1
    if report.holds:
        details.append(f"K3 counterexample unexpectedly holds: {report.lhs!r} <= {report.rhs!r}")
    else:
        logger.info(f"K3 counterexample fails as expected: {report.lhs:.6f} > {report.rhs:.6f}")
    return SuiteResult(name="gt", checked=checked, violations=len(details), details=details)


def nesting_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """For gamma' < gamma the touch interval of gamma' sits strictly inside that of gamma."""
    details = []
    checked = 0
    for smaller, larger in [(1.8, 2.0), (2.0, 3.0), (3.0, 6.0)]:
        for p in np.linspace(0.05, 0.95, 20) * p0(smaller):
            inner = double_tangent(GammaCurve(p=p, gamma=smaller))
            outer = double_tangent(GammaCurve(p=p, gamma=larger))
            checked += 1
            if not (outer.q_lo < inner.q_lo < inner.q_hi < outer.q_hi):
                details.append(f"gamma {smaller} vs {larger} at p={p:.6g}")
    return SuiteResult(name="nesting", checked=checked, violations=len(details), details=details)


def jensen_suite(rng: np.random.Generator, samples: int) -> SuiteResult:
    """h_p(f) is never below the minorant of the d-curve at ||f||_d^d."""
    details = []
    for _ in range(samples):
        f = _random_graphon(rng)
        p = float(rng.uniform(0.02, 0.98))
        d = int(rng.integers(2, 4))
        value, bound = jensen_rate_bound(f, p, d)
        if value < bound - HOLDER_TOL:
            details.append(f"p={p:.4f}, d={d}: {value!r} < {bound!r}")
    return SuiteResult(name="jensen", checked=samples, violations=len(details), details=details)


SUITES: Dict[str, Callable[[np.random.Generator, int], SuiteResult]] = {
    "holder": holder_suite,
    "gt": gt_suite,
    "nesting": nesting_suite,
    "sandwich": sandwich_suite,
    "cut": cut_suite,
    "jensen": jensen_suite,
}


def run_suites(name: str = "all", samples: int = VERIFY_SAMPLES, seed: int = DEFAULT_SEED) -> List[SuiteResult]:
    """Run one suite (or all of them) and log a verdict per suite."""
    if name != "all" and name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {sorted(SUITES)} or 'all'")
    names = list(SUITES) if name == "all" else [name]
    results = []
    logger.info("📊 Property suites:")
    logger.info("=" * 50)
    for suite in names:
        result = SUITES[suite](np.random.default_rng(seed), samples)
        if result.passed:
            logger.info(f"✅ {suite} - {result.checked} checks")
        else:
            logger.error(f"❌ {suite} - {result.violations} of {result.checked} checks violated")
            for line in result.details[:10]:
                logger.error(f"     - {line}")
        results.append(result)
    return results


if __name__ == "__main__":
    sys.exit(0 if all(result.passed for result in run_suites()) else 1)
