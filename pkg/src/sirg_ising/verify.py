"""Invariant suites run by ``sirg verify``.

Each suite returns a :class:`SuiteResult`; none of them raise on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import TiltSpec, h_tilde, radon_nikodym_forms, sample_graph
from .measures import empirical_measures, rate_function, reference_pair_measure
from .model import ConstantKernel, ModelParams, effective_kernel
from .partition import boltzmann_distribution_exact, glauber_transition_matrix
from .rng import make_rng


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def random_tilt(rng, bound=1.0) -> TiltSpec:
    f = rng.uniform(-bound, bound, 2)
    g = rng.uniform(-bound, bound, 3)
    return TiltSpec.from_values(f[0], f[1], g[0], g[1], g[2])


def suite_rn(seed=0, rn_tol=1e-9, graphs=100, n=50) -> SuiteResult:
    """Direct and empirical-measure likelihood ratios agree on random tilts."""
    kernel, params = ConstantKernel(2.0), ModelParams(0.0)
    rng = make_rng(seed, 1_000_001)
    worst = 0.0
    for i in range(graphs):
        tilt = random_tilt(rng)
        q = float(rng.uniform(0.2, 0.8))
        graph = sample_graph(n, kernel, params, (1 - q, q), seed, stream=i)
        a, b = radon_nikodym_forms(graph, kernel, params, (1 - q, q), tilt)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1.0))
    ok = worst <= rn_tol
    return SuiteResult("rn", ok, f"max relative gap {worst:.3g} over {graphs} graphs (tol {rn_tol:g})")


def suite_rate(seed=0, trials=1000) -> SuiteResult:
    """Rate function is nonnegative and vanishes only at its minimizer."""
    rng = make_rng(seed, 1_000_002)
    eff = effective_kernel(ConstantKernel(2.0), ModelParams(0.0))
    ell = np.array([0.5, 0.5])
    lowest = math.inf
    for _ in range(trials):
        x = rng.uniform()
        omega = np.array([1 - x, x])
        off = rng.uniform(0, 3)
        pi = np.array([[rng.uniform(0, 3), off], [off, rng.uniform(0, 3)]])
        lowest = min(lowest, rate_function(omega, pi, ell, eff))
    zero_pi = reference_pair_measure(ell, eff)
    at_zero = rate_function(ell, zero_pi, ell, eff)
    bumped = zero_pi.copy()
    bumped[1, 1] += 0.01
    perturbed = rate_function(ell, bumped, ell, eff)
    ok = lowest >= 0 and abs(at_zero) <= 1e-14 and perturbed > 0
    return SuiteResult("rate", ok, f"min over {trials} draws {lowest:.3g}; at zero {at_zero:.3g}; perturbed {perturbed:.3g}")


def euler_errors(ns, gs, cs):
    """Max over the (g, C) grid of ``|h_tilde(n, C/n, g) - (1 - e^g) C|`` per ``n``."""
    out = []
    for n in ns:
        out.append(max(abs(h_tilde(n, c / n, g) - (1 - math.exp(g)) * c) for g in gs for c in cs))
    return np.array(out)


def suite_euler() -> SuiteResult:
    """``h_tilde`` converges to its Euler limit at rate 1/n."""
    ns = np.array([10**k for k in range(2, 7)], dtype=float)
    errs = euler_errors(ns.astype(int), np.linspace(-2, 2, 9), np.linspace(0, 5, 11))
    slope = float(np.polyfit(np.log(ns), np.log(errs), 1)[0])
    scaled = errs * ns
    k_const = float(np.max(scaled))
    # n * error must settle to a constant, not merely stay bounded
    settled = abs(scaled[-1] - scaled[-2]) <= 0.01 * scaled[-1]
    ok = -1.05 <= slope <= -0.95 and settled
    return SuiteResult("euler", ok, f"log-log slope {slope:.4f}; max n*error {k_const:.3g}")


def suite_balance(seed=0, max_n=4) -> SuiteResult:
    """Each single-site heat-bath kernel is reversible for the Boltzmann law."""
    rng = make_rng(seed, 1_000_003)
    worst = 0.0
    for n in range(1, max_n + 1):
        for trial in range(3):
            graph = sample_graph(n, ConstantKernel(float(n)), ModelParams(0.0), rng_seed=seed, stream=10 * n + trial)
            params = ModelParams(float(rng.uniform(0, 1.5)), float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
            mu = boltzmann_distribution_exact(graph, params).probs
            for site in [*range(n), None]:
                P = glauber_transition_matrix(graph, params, site=site)
                flow = mu[:, None] * P
                worst = max(worst, float(np.max(np.abs(flow - flow.T))))
    ok = worst <= 1e-15
    return SuiteResult("balance", ok, f"max |mu P - (mu P)^T| {worst:.3g} for n <= {max_n}")


def suite_mass(seed=0, graphs=1000) -> SuiteResult:
    """``|L2| = 2|E|/n`` in exact rational arithmetic."""
    rng = make_rng(seed, 1_000_004)
    failures = 0
    for i in range(graphs):
        n = int(rng.integers(2, 201))
        lam = float(rng.uniform(0, 6))
        q = float(rng.uniform(0, 1))
        graph = sample_graph(n, ConstantKernel(lam), ModelParams(0.0), (1 - q, q), seed, stream=i)
        _, l2, _ = empirical_measures(graph)
        if l2.mass != Fraction(2 * graph.num_edges, n):
            failures += 1
    return SuiteResult("mass", failures == 0, f"{failures} failures in {graphs} graphs")


SUITES = {
    "rn": suite_rn,
    "rate": suite_rate,
    "euler": suite_euler,
    "balance": suite_balance,
    "mass": suite_mass,
}


def run_suites(names=None, seed=0, rn_tol=1e-9) -> list[SuiteResult]:
    results = []
    for name in names or list(SUITES):
        if name == "rn":
            results.append(suite_rn(seed=seed, rn_tol=rn_tol))
        elif name == "euler":
            results.append(suite_euler())
        else:
            results.append(SUITES[name](seed=seed))
    return results
