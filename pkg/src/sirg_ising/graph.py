"""Spinned random graphs: base and exponentially tilted samplers.

A graph on ``n`` sites first draws i.i.d. spin labels from a spin law
``(l(-1), l(+1))`` and then links every pair ``u < v`` independently with a
probability that depends only on the two labels. The tilted law reweights the
spin law by ``exp(f)`` and each bond probability by ``exp(g)``;
:func:`radon_nikodym_log` evaluates the exact log-likelihood ratio between
the two laws.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyGraph, IdentityViolation
from .model import Kernel, ModelParams, effective_kernel, pair_probabilities
from .rng import make_rng


@dataclass(frozen=True, eq=False)
class SpinnedGraph:
    """Sites ``0..n-1`` with labels in {-1, +1} and an undirected edge list.

    ``edges`` is an ``(m, 2)`` integer array with ``u < v`` in every row,
    sorted lexicographically. ``seed`` records provenance only.
    """

    n: int
    spins: np.ndarray
    edges: np.ndarray
    seed: int = 0

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=np.int8).reshape(-1)
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise EmptyGraph("a graph needs at least one site")
        if spins.shape[0] != self.n:
            raise ValueError(f"expected {self.n} spins, got {spins.shape[0]}")
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be -1 or +1")
        if edges.size:
            u, v = edges[:, 0], edges[:, 1]
            if np.any(u < 0) or np.any(v >= self.n) or np.any(u >= v):
                raise ValueError("edges must satisfy 0 <= u < v < n")
            keys = u * self.n + v
            if np.any(np.diff(keys) <= 0):
                order = np.argsort(keys, kind="stable")
                keys = keys[order]
                if np.any(np.diff(keys) == 0):
                    raise ValueError("duplicate edge")
                edges = edges[order]
        spins.setflags(write=False)
        edges.setflags(write=False)
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def spin_positions(self) -> np.ndarray:
        """Spin labels mapped to table positions (0 for -1, 1 for +1)."""
        return (self.spins > 0).astype(np.intp)

    def to_dict(self) -> dict:
        return {
            "n": int(self.n),
            "seed": int(self.seed),
            "spins": [int(s) for s in self.spins],
            "edges": [[int(u), int(v)] for u, v in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SpinnedGraph":
        return cls(int(data["n"]), data["spins"], data.get("edges", []), int(data.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "SpinnedGraph":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, SpinnedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.seed == other.seed
            and np.array_equal(self.spins, other.spins)
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None


@dataclass(frozen=True)
class TiltSpec:
    """Vertex tilt ``f`` on {-1, +1} and symmetric edge tilt ``g``.

    ``f`` is ``(f(-1), f(+1))``; ``g`` is a 2x2 nested sequence indexed by
    spin position.
    """

    f: tuple = (0.0, 0.0)
    g: tuple = ((0.0, 0.0), (0.0, 0.0))

    def __post_init__(self):
        f = tuple(float(v) for v in self.f)
        g = tuple(tuple(float(v) for v in row) for row in self.g)
        if len(f) != 2 or len(g) != 2 or any(len(row) != 2 for row in g):
            raise ValueError("f must have 2 entries and g must be 2x2")
        if not all(math.isfinite(v) for v in f + g[0] + g[1]):
            raise ValueError("tilt values must be finite")
        if g[0][1] != g[1][0]:
            raise ValueError("edge tilt g must be symmetric")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)

    @classmethod
    def from_values(cls, f_minus=0.0, f_plus=0.0, g_mm=0.0, g_pm=0.0, g_pp=0.0) -> "TiltSpec":
        return cls((f_minus, f_plus), ((g_mm, g_pm), (g_pm, g_pp)))

    def f_array(self) -> np.ndarray:
        return np.array(self.f)

    def g_array(self) -> np.ndarray:
        return np.array(self.g)


def _check_spin_law(spin_law) -> np.ndarray:
    ell = np.asarray(spin_law, dtype=float)
    if ell.shape != (2,) or np.any(ell < 0) or not math.isclose(ell.sum(), 1.0, abs_tol=1e-12):
        raise ValueError(f"spin law must be two nonnegative numbers summing to 1, got {spin_law!r}")
    return ell


def tilted_spin_law(spin_law, f) -> tuple[np.ndarray, float]:
    """Tilted spin law ``l~(a) = exp(f(a) - U) l(a)`` and ``U = log sum exp(f) l``."""
    ell = _check_spin_law(spin_law)
    f = np.asarray(f, dtype=float)
    support = ell > 0
    top = f[support].max()
    norm = top + math.log(float(np.sum(ell[support] * np.exp(f[support] - top))))
    tilted = np.where(support, np.exp(f - norm) * ell, 0.0)
    return tilted, norm


def tilted_edge_probability(p, g_ab):
    """``p e^g / (1 - p + p e^g)``, elementwise; exact identity when ``g == 0``."""
    p = np.asarray(p, dtype=float)
    g_ab = np.asarray(g_ab, dtype=float)
    w = p * np.exp(g_ab)
    out = np.where(g_ab == 0, p, w / (1.0 - p + w))
    return out if out.ndim else float(out)


def h_tilde(n: int, p: float, g_ab: float) -> float:
    """``-n log(1 - p + p e^g)``; tends to ``(1 - e^g) C`` when ``p = C / n``."""
    arg = p * math.expm1(g_ab)
    if not arg > -1.0:
        raise DomainError(f"1 - p + p e^g = {1 + arg} is not positive")
    return -n * math.log1p(arg)


def _h_tilde_table(n, p, g):
    arg = p * np.expm1(g)
    if np.any(arg <= -1.0):
        raise DomainError("1 - p + p e^g must be positive")
    return -n * np.log1p(arg)


def _draw(n, ell, ptable, seed, method, stream):
    if n < 1:
        raise EmptyGraph("a graph needs at least one site")
    rng = make_rng(seed, stream)
    spins = np.where(rng.random(n) < ell[1], 1, -1).astype(np.int8)
    pos = (spins > 0).astype(np.intp)
    if method == "pairwise":
        chunks = []
        for u in range(n - 1):
            probs = ptable[pos[u], pos[u + 1:]]
            hits = np.flatnonzero(rng.random(n - u - 1) < probs)
            if hits.size:
                chunks.append(np.column_stack([np.full(hits.size, u), hits + u + 1]))
        edges = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    elif method == "block":
        edges = _draw_block(rng, pos, ptable)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    return SpinnedGraph(n, spins, edges, seed)


def _unrank_within(rng, ids, p):
    m = ids.size
    total = m * (m - 1) // 2
    if total == 0 or p <= 0:
        return np.empty((0, 2), dtype=np.int64)
    k = rng.binomial(total, min(p, 1.0))
    flat = rng.choice(total, size=k, replace=False) if k < total else np.arange(total)
    rows = np.arange(m - 1, dtype=np.int64)
    offsets = rows * m - rows * (rows + 1) // 2
    i = np.searchsorted(offsets, flat, side="right") - 1
    j = i + 1 + flat - offsets[i]
    return np.column_stack([ids[i], ids[j]])


def _unrank_across(rng, a_ids, b_ids, p):
    total = a_ids.size * b_ids.size
    if total == 0 or p <= 0:
        return np.empty((0, 2), dtype=np.int64)
    k = rng.binomial(total, min(p, 1.0))
    flat = rng.choice(total, size=k, replace=False) if k < total else np.arange(total)
    u, v = a_ids[flat // b_ids.size], b_ids[flat % b_ids.size]
    return np.column_stack([np.minimum(u, v), np.maximum(u, v)])


def _draw_block(rng, pos, ptable):
    # one binomial count per spin-pair class, then distinct pairs uniformly
    minus = np.flatnonzero(pos == 0).astype(np.int64)
    plus = np.flatnonzero(pos == 1).astype(np.int64)
    parts = [
        _unrank_within(rng, minus, ptable[0, 0]),
        _unrank_across(rng, minus, plus, ptable[0, 1]),
        _unrank_within(rng, plus, ptable[1, 1]),
    ]
    edges = np.concatenate(parts)
    n = pos.size
    return edges[np.argsort(edges[:, 0] * n + edges[:, 1], kind="stable")]


def sample_graph(
    n: int,
    kernel: Kernel,
    params: ModelParams,
    spin_law: Sequence[float] = (0.5, 0.5),
    rng_seed: int = 0,
    method: str = "pairwise",
    stream: int = 0,
) -> SpinnedGraph:
    """Draw a spinned graph from the base law.

    ``method="pairwise"`` flips one coin per pair (O(n^2)); ``"block"`` draws a
    binomial edge count per spin-pair class and then that many distinct pairs,
    which has the same distribution in O(n + |E|) expected time.
    """
    ell = _check_spin_law(spin_law)
    ptable = pair_probabilities(effective_kernel(kernel, params), max(n, 1))
    return _draw(n, ell, ptable, rng_seed, method, stream)


def sample_tilted_graph(
    n: int,
    kernel: Kernel,
    params: ModelParams,
    spin_law: Sequence[float],
    tilt: TiltSpec,
    rng_seed: int = 0,
    method: str = "pairwise",
    stream: int = 0,
) -> SpinnedGraph:
    """Draw a spinned graph from the tilted law defined by ``tilt``."""
    ell_t, _ = tilted_spin_law(spin_law, tilt.f)
    ptable = pair_probabilities(effective_kernel(kernel, params), max(n, 1))
    return _draw(n, ell_t, tilted_edge_probability(ptable, tilt.g_array()), rng_seed, method, stream)


def _safe_log_ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(num) - np.log(den)
    return np.where(num == den, 0.0, out)


def radon_nikodym_forms(graph: SpinnedGraph, kernel: Kernel, params: ModelParams, spin_law, tilt: TiltSpec):
    """Return ``(direct, measure_form)`` evaluations of ``log dP~/dP(graph)``.

    The direct form multiplies the likelihood ratio of every vertex, every
    edge and every absent pair. The measure form uses only the spin counts,
    the oriented edge counts per spin class and ``h_tilde``.
    """
    n = graph.n
    ell = _check_spin_law(spin_law)
    ell_t, norm = tilted_spin_law(ell, tilt.f)
    p = pair_probabilities(effective_kernel(kernel, params), n)
    g = tilt.g_array()
    p_t = tilted_edge_probability(p, g)
    pos = graph.spin_positions()

    # direct product over vertices, edges and absent pairs
    vertex_log = _safe_log_ratio(ell_t, ell)
    edge_log = _safe_log_ratio(p_t, p)
    absent_log = _safe_log_ratio(1.0 - p_t, 1.0 - p)
    direct = float(np.sum(vertex_log[pos]))
    if graph.num_edges:
        eu, ev = pos[graph.edges[:, 0]], pos[graph.edges[:, 1]]
        direct += float(np.sum(edge_log[eu, ev] - absent_log[eu, ev]))
    for u in range(n - 1):
        direct += float(np.sum(absent_log[pos[u], pos[u + 1:]]))
    if not math.isfinite(direct):
        raise DomainError("graph has zero probability under one of the two laws")

    # empirical-measure form
    from .measures import empirical_measures

    l1, l2, _ = empirical_measures(graph)
    counts1 = np.array(l1.counts, dtype=float)
    counts2 = np.array(l2.counts, dtype=float)
    h = _h_tilde_table(n, p, g)
    f = tilt.f_array()
    occupied = counts1 > 0
    measure = float(np.sum(counts1[occupied] * (f[occupied] - norm)))
    measure += 0.5 * float(np.sum(counts2 * g))
    measure += float(counts1 @ h @ counts1) / (2 * n)
    measure -= float(np.sum(counts1 * np.diag(h))) / (2 * n)
    return direct, measure


def radon_nikodym_log(
    graph: SpinnedGraph,
    kernel: Kernel,
    params: ModelParams,
    spin_law,
    tilt: TiltSpec,
    rtol: float = 1e-9,
) -> float:
    """``log dP~/dP`` at ``graph``, cross-checked between two independent forms.

    Raises :class:`IdentityViolation` if the forms differ by more than
    ``rtol * max(|a|, |b|, 1)``.
    """
    direct, measure = radon_nikodym_forms(graph, kernel, params, spin_law, tilt)
    if abs(direct - measure) > rtol * max(abs(direct), abs(measure), 1.0):
        raise IdentityViolation(
            f"likelihood-ratio forms disagree: direct={direct!r}, measure={measure!r}"
        )
    return direct
