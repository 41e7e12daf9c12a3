"""Hamiltonian, exact partition functions and Glauber dynamics.

The Boltzmann weight of a configuration ``eta`` on a graph is
``exp(beta * sum_{uv in E} eta_u eta_v + sum_u B(eta_u) eta_u)``: a plus site
contributes ``B(+1)`` to the exponent and a minus site ``-B(-1)``. Taking this
simplified form directly keeps it well defined at ``beta = 0`` and at zero
fields.

Configurations are enumerated in binary order: bit ``u`` of the index is 1
exactly when site ``u`` carries spin +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ShapeError, SizeLimit
from .graph import SpinnedGraph
from .model import Kernel, ModelParams, effective_kernel, pair_probabilities
from .rng import make_rng

QUENCHED_MAX_N = 30
ANNEALED_MAX_N = 26
DISTRIBUTION_MAX_N = 16


def _field_terms(params: ModelParams):
    # B(eta) * eta == h0 + h1 * eta for eta in {-1, +1}
    return 0.5 * (params.field_plus - params.field_minus), 0.5 * (params.field_plus + params.field_minus)


def hamiltonian(graph: SpinnedGraph, config: Sequence[int], params: ModelParams) -> float:
    """Exponent of the Boltzmann weight of ``config`` on ``graph``."""
    eta = np.asarray(config)
    if eta.shape != (graph.n,):
        raise ShapeError(f"config has shape {eta.shape}, graph has {graph.n} sites")
    h0, h1 = _field_terms(params)
    bonds = 0.0
    if graph.num_edges:
        bonds = float(np.sum(eta[graph.edges[:, 0]] * eta[graph.edges[:, 1]]))
    return params.beta * bonds + graph.n * h0 + h1 * float(np.sum(eta))


def all_configs(n: int) -> np.ndarray:
    """Every configuration on ``n`` sites as a ``(2**n, n)`` array of +-1."""
    idx = np.arange(1 << n, dtype=np.int64)[:, None]
    return (((idx >> np.arange(n)) & 1) * 2 - 1).astype(np.int8)


def _config_energies(configs: np.ndarray, edges: np.ndarray, params: ModelParams, n: int) -> np.ndarray:
    h0, h1 = _field_terms(params)
    c = configs.astype(float)
    out = n * h0 + h1 * c.sum(axis=1)
    if edges.size:
        out += params.beta * np.sum(c[:, edges[:, 0]] * c[:, edges[:, 1]], axis=1)
    return out


def quenched_log_partition(graph: SpinnedGraph, params: ModelParams, max_n: int = QUENCHED_MAX_N) -> float:
    """``log Z`` by exhaustive enumeration.

    Sites are split into a low block of at most 14 and a high block; the
    energies of all configurations in a chunk of high-block configurations
    are produced by one matrix product and reduced with a running
    log-sum-exp.
    """
    n = graph.n
    if n > max_n:
        raise SizeLimit(f"exact enumeration is capped at n={max_n}; use glauber_sample for n={n}")
    k = min(n, 14)
    low = all_configs(k)
    edges = graph.edges
    if not edges.size:
        edges = np.empty((0, 2), dtype=np.int64)
    in_low = edges < k
    ll = edges[in_low[:, 0] & in_low[:, 1]]
    hh = edges[~in_low[:, 0] & ~in_low[:, 1]] - k
    cross = edges[in_low[:, 0] & ~in_low[:, 1]]
    e_low = _config_energies(low, ll, params, k)
    nh = n - k
    if nh == 0:
        return float(logsumexp(e_low))
    coupling = np.zeros((k, nh))
    np.add.at(coupling, (cross[:, 0], cross[:, 1] - k), 1.0)
    low_coupled = params.beta * (low.astype(float) @ coupling)
    total = -math.inf
    chunk = 256
    for start in range(0, 1 << nh, chunk):
        idx = np.arange(start, min(start + chunk, 1 << nh), dtype=np.int64)[:, None]
        high = (((idx >> np.arange(nh)) & 1) * 2 - 1).astype(float)
        e_high = _config_energies(high, hh, params, nh)
        block = e_low[:, None] + e_high[None, :] + low_coupled @ high.T
        total = np.logaddexp(total, logsumexp(block))
    return float(total)


def pressure_finite(graph: SpinnedGraph, params: ModelParams) -> float:
    """Finite-size pressure ``log Z / n``."""
    return quenched_log_partition(graph, params) / graph.n


def _edge_log_factors(n, kernel, params):
    # log(1 - p + p e^{beta*sigma}) per spin-pair class, sigma = +1 for equal spins
    p = pair_probabilities(effective_kernel(kernel, params), n)
    sigma = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return np.log1p(p * np.expm1(params.beta * sigma))


def annealed_log_partition_exact(n: int, kernel: Kernel, params: ModelParams, max_n: int = ANNEALED_MAX_N) -> float:
    """``(1/n) log sum_eta E_edges[exp(H(eta))]`` with bonds drawn at the same ``eta``.

    The summand depends on ``eta`` only through the number of plus sites, so
    the sum has ``n + 1`` terms weighted by binomial coefficients.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > max_n:
        raise SizeLimit(f"annealed evaluation is capped at n={max_n}")
    lf = _edge_log_factors(n, kernel, params)
    k = np.arange(n + 1, dtype=float)
    m = n - k
    terms = (
        gammaln(n + 1) - gammaln(k + 1) - gammaln(m + 1)
        + 0.5 * k * (k - 1) * lf[1, 1]
        + 0.5 * m * (m - 1) * lf[0, 0]
        + k * m * lf[0, 1]
        + k * params.field_plus
        - m * params.field_minus
    )
    return float(logsumexp(terms)) / n


def annealed_log_partition_naive(n: int, kernel: Kernel, params: ModelParams) -> float:
    """Same quantity as :func:`annealed_log_partition_exact` by brute force over ``2**n`` configurations and all pairs."""
    if n > 14:
        raise SizeLimit("the brute-force annealed sum is capped at n=14")
    lf = _edge_log_factors(n, kernel, params)
    h0, h1 = _field_terms(params)
    configs = all_configs(n)
    pos = (configs > 0).astype(np.intp)
    u, v = np.triu_indices(n, 1)
    logs = lf[pos[:, u], pos[:, v]].sum(axis=1) + n * h0 + h1 * configs.sum(axis=1)
    return float(logsumexp(logs)) / n


@dataclass(frozen=True)
class BoltzmannTable:
    configs: np.ndarray
    probs: np.ndarray

    def marginals(self) -> np.ndarray:
        """``P(eta_u = +1)`` for every site."""
        return self.probs @ (self.configs > 0)


def boltzmann_distribution_exact(graph: SpinnedGraph, params: ModelParams, max_n: int = DISTRIBUTION_MAX_N) -> BoltzmannTable:
    if graph.n > max_n:
        raise SizeLimit(f"the exact distribution is capped at n={max_n}")
    configs = all_configs(graph.n)
    logw = _config_energies(configs, graph.edges, params, graph.n)
    probs = np.exp(logw - logsumexp(logw))
    return BoltzmannTable(configs, probs)


def _adjacency(graph: SpinnedGraph):
    n = graph.n
    if graph.num_edges:
        both = np.concatenate([graph.edges, graph.edges[:, ::-1]])
        both = both[np.lexsort((both[:, 1], both[:, 0]))]
        indices = both[:, 1].astype(np.int64)
        indptr = np.concatenate([[0], np.cumsum(np.bincount(both[:, 0], minlength=n))]).astype(np.int64)
    else:
        indices = np.empty(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
    return indptr, indices


@numba.njit(cache=True)
def _heat_bath_sweeps(spins, indptr, indices, two_beta, h_sum, uniforms, first_sweep, burn_in, site_acc, mag_out, bond_out):
    n = spins.shape[0]
    for s in range(uniforms.shape[0]):
        for u in range(n):
            local = 0.0
            for q in range(indptr[u], indptr[u + 1]):
                local += spins[indices[q]]
            p_plus = 1.0 / (1.0 + math.exp(-(two_beta * local + h_sum)))
            spins[u] = 1 if uniforms[s, u] < p_plus else -1
        total = 0.0
        bonds = 0.0
        for u in range(n):
            total += spins[u]
            nb = 0.0
            for q in range(indptr[u], indptr[u + 1]):
                nb += spins[indices[q]]
            bonds += spins[u] * nb
        mag_out[s] = total / n
        bond_out[s] = 0.5 * bonds / n
        if first_sweep + s >= burn_in:
            for u in range(n):
                site_acc[u] += spins[u]


@dataclass(frozen=True)
class GlauberResult:
    """Time averages after burn-in.

    ``energy`` is the mean of ``-(1/n) sum_{uv in E} eta_u eta_v``, the
    per-site counterpart of ``-d(log Z)/d(beta) / n``. ``marginals`` holds
    ``P(eta_u = +1)`` per site.
    """

    magnetization: float
    magnetization_stderr: float
    energy: float
    energy_stderr: float
    marginals: np.ndarray
    sweeps: int
    burn_in: int


def _batch_stderr(series, batches=50):
    if series.size < 2 * batches:
        return float(np.std(series, ddof=1) / math.sqrt(series.size)) if series.size > 1 else math.nan
    means = np.array([b.mean() for b in np.array_split(series, batches)])
    return float(np.std(means, ddof=1) / math.sqrt(batches))


def glauber_sample(
    graph: SpinnedGraph,
    params: ModelParams,
    sweeps: int,
    burn_in: Optional[int] = None,
    rng_seed: int = 0,
    stream: int = 0,
    chunk: int = 65536,
) -> GlauberResult:
    """Heat-bath dynamics with systematic site order.

    Site ``u`` is set to +1 with probability
    ``1 / (1 + exp(-(2 beta sum_{v~u} eta_v + B(+1) + B(-1))))``, the exact
    two-state conditional of the Boltzmann law. ``burn_in`` defaults to 10%
    of ``sweeps``.
    """
    if burn_in is None:
        burn_in = sweeps // 10
    if not sweeps > burn_in >= 0:
        raise ValueError("need sweeps > burn_in >= 0")
    rng = make_rng(rng_seed, stream)
    n = graph.n
    spins = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int64)
    indptr, indices = _adjacency(graph)
    site_acc = np.zeros(n)
    mags = np.empty(sweeps)
    bonds = np.empty(sweeps)
    h_sum = params.field_plus + params.field_minus
    for start in range(0, sweeps, chunk):
        size = min(chunk, sweeps - start)
        uniforms = rng.random((size, n))
        _heat_bath_sweeps(
            spins, indptr, indices, 2.0 * params.beta, h_sum, uniforms, start, burn_in,
            site_acc, mags[start:start + size], bonds[start:start + size],
        )
    kept = sweeps - burn_in
    mag, bond = mags[burn_in:], bonds[burn_in:]
    return GlauberResult(
        magnetization=float(mag.mean()),
        magnetization_stderr=_batch_stderr(mag),
        energy=float(-bond.mean()),
        energy_stderr=_batch_stderr(bond),
        marginals=0.5 * (1.0 + site_acc / kept),
        sweeps=sweeps,
        burn_in=burn_in,
    )


def glauber_transition_matrix(graph: SpinnedGraph, params: ModelParams, site: Optional[int] = None, order: str = "random") -> np.ndarray:
    """Transition matrix of the heat-bath chain over all ``2**n`` configurations.

    With ``site`` given, the single-site update at that site. Otherwise
    ``order="random"`` averages the single-site kernels (random scan) and
    ``order="systematic"`` composes them in site order (one full sweep).
    """
    n = graph.n
    if n > 10:
        raise SizeLimit("transition matrices are capped at n=10")
    configs = all_configs(n)
    indptr, indices = _adjacency(graph)
    size = 1 << n

    def single(u):
        mat = np.zeros((size, size))
        for i in range(size):
            local = float(configs[i, indices[indptr[u]:indptr[u + 1]]].sum())
            p_plus = 1.0 / (1.0 + math.exp(-(2 * params.beta * local + params.field_plus + params.field_minus)))
            mat[i, i | (1 << u)] += p_plus
            mat[i, i & ~(1 << u)] += 1.0 - p_plus
        return mat

    if site is not None:
        return single(site)
    kernels = [single(u) for u in range(n)]
    if order == "random":
        return sum(kernels) / n
    if order == "systematic":
        out = np.eye(size)
        for mat in kernels:
            out = out @ mat
        return out
    raise ValueError(f"unknown order {order!r}")
