"""Empirical measures, relative entropies and the large-deviation rate function.

Measures keep integer counts; exact masses are available as fractions and
real values are produced only when an entropy is evaluated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import EstimateDegenerate
from .model import EffectiveKernel, Kernel, ModelParams


@dataclass(frozen=True)
class SpinMeasure:
    """Empirical spin measure: counts ``(n_minus, n_plus)`` out of ``n`` sites."""

    counts: tuple
    n: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != 2 or min(counts) < 0 or sum(counts) != self.n:
            raise ValueError(f"spin counts {self.counts!r} do not sum to n={self.n}")
        object.__setattr__(self, "counts", counts)

    @property
    def probabilities(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.counts[0], self.n), Fraction(self.counts[1], self.n)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n


@dataclass(frozen=True)
class PairMeasure:
    """Symmetric measure on spin pairs, stored as oriented-pair counts over ``n``."""

    counts: tuple
    n: int

    def __post_init__(self):
        counts = tuple(tuple(int(c) for c in row) for row in self.counts)
        if counts[0][1] != counts[1][0]:
            raise ValueError("pair counts must be symmetric")
        object.__setattr__(self, "counts", counts)

    @property
    def mass(self) -> Fraction:
        return Fraction(sum(map(sum, self.counts)), self.n)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n


def empirical_measures(graph) -> tuple[SpinMeasure, PairMeasure, PairMeasure]:
    """``(L1, L2, L1_diag)`` of a spinned graph.

    ``L2`` counts every edge once in each orientation. ``L1_diag`` puts the
    spin counts on the diagonal.
    """
    pos = graph.spin_positions()
    n_plus = int(pos.sum())
    l1 = SpinMeasure((graph.n - n_plus, n_plus), graph.n)
    oriented = np.zeros((2, 2), dtype=np.int64)
    if graph.num_edges:
        a, b = pos[graph.edges[:, 0]], pos[graph.edges[:, 1]]
        np.add.at(oriented, (a, b), 1)
        np.add.at(oriented, (b, a), 1)
    l2 = PairMeasure(oriented.tolist(), graph.n)
    diag = PairMeasure(((l1.counts[0], 0), (0, l1.counts[1])), graph.n)
    return l1, l2, diag


def relative_entropy(omega, ell) -> float:
    """``sum omega log(omega / ell)`` with ``0 log 0 = 0``; ``inf`` without absolute continuity."""
    omega = np.asarray(omega, dtype=float)
    ell = np.asarray(ell, dtype=float)
    total = 0.0
    for w, l in zip(omega.ravel(), ell.ravel()):
        if w == 0:
            continue
        if l == 0:
            return math.inf
        total += w * (math.log(w) - math.log(l))
    return total


def reference_pair_measure(omega, eff: EffectiveKernel) -> np.ndarray:
    """``C omega x omega`` as a 2x2 array."""
    omega = np.asarray(omega, dtype=float)
    return eff.matrix() * np.outer(omega, omega)


def hC_divergence(pi, omega, eff: EffectiveKernel) -> float:
    """``H(pi || mu) + |mu| - |pi|`` for ``mu = C omega x omega``.

    Equivalently ``sum mu * xi(pi / mu)`` with ``xi(x) = x log x - x + 1``.
    """
    pi = np.asarray(pi, dtype=float)
    mu = reference_pair_measure(omega, eff)
    total = 0.0
    for p, m in zip(pi.ravel(), mu.ravel()):
        if m == 0:
            if p > 0:
                return math.inf
            continue
        total += (p * (math.log(p) - math.log(m)) if p > 0 else 0.0) - p + m
    return total


def rate_function(omega, pi, ell, eff: EffectiveKernel) -> float:
    """Joint rate ``H(omega || ell) + hC_divergence(pi, omega) / 2``."""
    return relative_entropy(omega, ell) + 0.5 * hC_divergence(pi, omega, eff)


def total_variation(a, b) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(a, float) - np.asarray(b, float))))


@dataclass(frozen=True)
class ProbeRow:
    n: int
    log_prob_over_n: float
    stderr: float
    hits: int
    samples: int


@dataclass(frozen=True)
class ProbeResult:
    rows: tuple
    slope: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "log_prob_over_n", "stderr", "hits", "samples"])
        for r in self.rows:
            writer.writerow([r.n, f"{r.log_prob_over_n:.17g}", f"{r.stderr:.17g}", r.hits, r.samples])
        return buf.getvalue()


Event = Callable[[SpinMeasure, PairMeasure], bool]


def ldp_decay_probe(
    event: Event,
    kernel: Kernel,
    params: ModelParams,
    spin_law: Sequence[float] = (0.5, 0.5),
    n_list: Sequence[int] = (50, 100, 200),
    samples: int = 1000,
    tilt=None,
    rng_seed: int = 0,
    method: str = "pairwise",
) -> ProbeResult:
    """Estimate ``(1/n) log P{(L1, L2) in event}`` for each ``n``.

    Without a tilt the probability is the plain hit frequency. With a tilt,
    graphs come from the tilted law and each hit is weighted by
    ``exp(-log dP~/dP)``. Sample ``j`` at the ``i``-th size uses RNG stream
    ``(i << 32) | j``, so results do not depend on evaluation order.
    """
    from .graph import radon_nikodym_log, sample_graph, sample_tilted_graph

    if samples < 100:
        raise ValueError("samples must be >= 100")
    rows = []
    for i, n in enumerate(n_list):
        log_w = []
        for j in range(samples):
            stream = (i << 32) | j
            if tilt is None:
                graph = sample_graph(n, kernel, params, spin_law, rng_seed, method, stream)
            else:
                graph = sample_tilted_graph(n, kernel, params, spin_law, tilt, rng_seed, method, stream)
            l1, l2, _ = empirical_measures(graph)
            if event(l1, l2):
                if tilt is None:
                    log_w.append(0.0)
                else:
                    log_w.append(-radon_nikodym_log(graph, kernel, params, spin_law, tilt))
        hits = len(log_w)
        if hits == 0:
            bound = -math.log(samples) / n
            raise EstimateDegenerate(
                f"no hits in {samples} samples at n={n}; log P / n is below about {bound:.4g}",
                n=n,
                log_prob_bound=bound,
            )
        log_w = np.array(log_w)
        log_mean = float(logsumexp(log_w)) - math.log(samples)
        # relative standard error of the weighted mean, computed on a shifted scale
        w = np.zeros(samples)
        w[:hits] = np.exp(log_w - log_w.max())
        rel_se = float(np.std(w, ddof=1) / math.sqrt(samples) / w.mean())
        rows.append(ProbeRow(int(n), log_mean / n, rel_se / n, hits, samples))
    if len(rows) >= 2:
        ns = np.array([r.n for r in rows], dtype=float)
        slope = float(np.polyfit(ns, ns * np.array([r.log_prob_over_n for r in rows]), 1)[0])
    else:
        slope = rows[0].log_prob_over_n
    return ProbeResult(tuple(rows), slope)
