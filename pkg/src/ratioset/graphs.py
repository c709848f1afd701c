"""Ratio graphs, their component decompositions, and exact event probabilities.

The graph for n and a reduced fraction r/s has vertices 1..n and directed
edges rt -> st for t <= n/s. Every component is a directed path of at most
floor(log n / log s) + 1 vertices, which is what makes the closed-form
membership probability a product over path lengths. Power graphs overlay
the graphs of (r/s)^e for e in an exponent set; unions of graphs for
several fractions can have grid-like components, for which no closed form
is attempted: the probability is assembled exactly from per-component
weighted independent-set sums.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exact import (
    ComponentTooLargeError,
    ENUMERATION_VERTEX_BOUND,
    ProbabilityValue,
    ReducedFraction,
    _neumaier_sum,
    product_bound,
)
from .recurrences import Alpha, ExponentSet, Number

__all__ = [
    "RatioGraph",
    "ComponentDecomposition",
    "UnionFind",
    "build_graph",
    "build_power_graph",
    "build_union_graph",
    "components",
    "independence_probability",
    "independence_probability_enumerate",
    "prob_any_of",
    "export_graph",
]


class UnionFind:
    """Array union-find with path compression and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, v: int) -> int:
        root = v
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass(frozen=True)
class RatioGraph:
    """Directed graph on {1, ..., n}; edges always point small -> large."""

    n: int
    kind: str  # "single" | "power" | "union"
    edges: tuple[tuple[int, int], ...]
    fractions: tuple[ReducedFraction, ...]
    exponents: ExponentSet | None = None

    @property
    def base(self) -> ReducedFraction:
        return self.fractions[0]


@dataclass(frozen=True)
class Component:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class ComponentDecomposition:
    """Connected components plus the path/component count vectors.

    c[i-1] counts components with exactly i vertices. For single-fraction
    graphs d[j-1] counts directed subpaths of j vertices and the closed
    forms d_j = floor(n / s^(j-1)) and c_i = d_i - 2 d_{i+1} + d_{i+2}
    hold; both are validated at construction time.
    """

    n: int
    kind: str
    components: tuple[Component, ...]
    c: tuple[int, ...]
    d: tuple[int, ...] | None
    k: int | None

    def component_count(self, size: int) -> int:
        return self.c[size - 1] if size <= len(self.c) else 0

    def path_count(self, length: int) -> int:
        if self.d is None:
            raise ValueError("path counts are defined for single-fraction graphs only")
        return self.d[length - 1] if length <= len(self.d) else 0


def _validate_base(n: int, q: ReducedFraction) -> None:
    if n < 1:
        raise ValueError("n must be positive")
    if q.s < 2:
        raise ValueError("ratio graphs require s >= 2; the diagonal has no graph")


def build_graph(n: int, q: ReducedFraction) -> RatioGraph:
    """The graph with edges rt -> st for t = 1, ..., floor(n/s)."""
    _validate_base(n, q)
    edges = tuple((q.r * t, q.s * t) for t in range(1, n // q.s + 1))
    return RatioGraph(n=n, kind="single", edges=edges, fractions=(q,))


def build_power_graph(n: int, q: ReducedFraction, exponents: ExponentSet) -> RatioGraph:
    """Overlay of the graphs of (r/s)^e over all e in E with s^e <= n.

    Higher powers only ever join vertices already connected through the
    base graph, so the component partition is unchanged.
    """
    _validate_base(n, q)
    edge_set = set()
    for e in exponents.members_up_to(product_bound(n, q.s)):
        edge_set.update(build_graph(n, q.power(e)).edges)
    return RatioGraph(n=n, kind="power", edges=tuple(sorted(edge_set)), fractions=(q,), exponents=exponents)


def build_union_graph(n: int, qs: Sequence[ReducedFraction]) -> RatioGraph:
    """Union of the graphs of several fractions; duplicates and fractions
    with s > n contribute nothing and are dropped."""
    if not qs:
        raise ValueError("at least one fraction is required")
    kept: list[ReducedFraction] = []
    edge_set = set()
    for q in qs:
        _validate_base(n, q)
        if q.s > n or q in kept:
            continue
        kept.append(q)
        edge_set.update(build_graph(n, q).edges)
    return RatioGraph(n=n, kind="union", edges=tuple(sorted(edge_set)), fractions=tuple(kept))


def components(g: RatioGraph) -> ComponentDecomposition:
    """Connected components of the underlying undirected graph, canonically
    ordered by minimum vertex."""
    uf = UnionFind(g.n + 1)
    for u, v in g.edges:
        uf.union(u, v)
    members: dict[int, list[int]] = {}
    for v in range(1, g.n + 1):
        members.setdefault(uf.find(v), []).append(v)
    edges_of: dict[int, list[tuple[int, int]]] = {}
    for u, v in g.edges:
        edges_of.setdefault(uf.find(u), []).append((u, v))

    comps = tuple(
        Component(vertices=tuple(verts), edges=tuple(sorted(edges_of.get(root, ()))))
        for root, verts in sorted(members.items(), key=lambda kv: kv[1][0])
    )

    max_size = max((c.size for c in comps), default=0)
    c_counts = [0] * max_size
    for comp in comps:
        c_counts[comp.size - 1] += 1

    d_counts = None
    k = None
    if g.kind == "single":
        s = g.base.s
        k = product_bound(g.n, s) + 1
        d_counts = [0] * (k + 2)
        for comp in comps:
            for j in range(1, comp.size + 1):
                d_counts[j - 1] += comp.size - j + 1
        _validate_single_counts(g.n, s, k, c_counts, d_counts)

    return ComponentDecomposition(
        n=g.n,
        kind=g.kind,
        components=comps,
        c=tuple(c_counts),
        d=tuple(d_counts) if d_counts is not None else None,
        k=k,
    )


def _validate_single_counts(n: int, s: int, k: int, c_counts: list[int], d_counts: list[int]) -> None:
    # Self-check of the closed forms; a failure would mean the construction
    # does not produce disjoint directed paths.
    for j in range(1, k + 1):
        expected = n // s ** (j - 1)
        if d_counts[j - 1] != expected:
            raise AssertionError(f"path count d_{j} = {d_counts[j - 1]}, expected {expected}")
    for i in range(1, k + 1):
        d_i = d_counts[i - 1]
        d_i1 = d_counts[i] if i < len(d_counts) else 0
        d_i2 = d_counts[i + 1] if i + 1 < len(d_counts) else 0
        expected = d_i - 2 * d_i1 + d_i2
        actual = c_counts[i - 1] if i <= len(c_counts) else 0
        if actual != expected:
            raise AssertionError(f"component count c_{i} = {actual}, expected {expected}")


# --- weighted independent-set evaluation -------------------------------------


def _canonical_shape(vertices: Sequence[int], edges: Sequence[tuple[int, int]]) -> tuple[int, tuple[tuple[int, int], ...]]:
    order = {v: j for j, v in enumerate(sorted(vertices))}
    relabeled = tuple(sorted(tuple(sorted((order[u], order[v]))) for u, v in edges))
    return len(vertices), relabeled


@lru_cache(maxsize=None)
def _shape_avoidance(size: int, edges: tuple[tuple[int, int], ...], alpha_value: Number) -> Number:
    a = alpha_value
    b = 1 - a
    one = Fraction(1) if isinstance(a, Fraction) else 1.0
    adjacency = [0] * size
    for u, v in edges:
        adjacency[u] |= 1 << v
        adjacency[v] |= 1 << u

    memo: dict[int, Number] = {}

    def solve(remaining: int) -> Number:
        if remaining == 0:
            return one
        cached = memo.get(remaining)
        if cached is not None:
            return cached
        v = (remaining & -remaining).bit_length() - 1
        rest = remaining & ~(1 << v)
        # v unselected, or v selected with its surviving neighbours forced out
        blocked = adjacency[v] & rest
        result = b * solve(rest) + a * b ** blocked.bit_count() * solve(rest & ~blocked)
        memo[remaining] = result
        return result

    return solve((1 << size) - 1)


def independence_probability(vertices: Sequence[int], edges: Sequence[tuple[int, int]], alpha: Alpha) -> Number:
    """Probability that no edge of the component has both endpoints selected:
    the weighted independent-set sum, evaluated by branch-on-a-vertex
    elimination with memoization. For a directed path of i vertices this
    equals beta_i."""
    if len(vertices) > ENUMERATION_VERTEX_BOUND:
        raise ComponentTooLargeError(
            f"component has {len(vertices)} vertices (bound {ENUMERATION_VERTEX_BOUND}); "
            "use the Monte Carlo engine instead"
        )
    vset = set(vertices)
    for u, v in edges:
        if u not in vset or v not in vset:
            raise ValueError("edge endpoint outside the component")
    size, shape = _canonical_shape(vertices, edges)
    return _shape_avoidance(size, shape, alpha.value)


def independence_probability_enumerate(vertices: Sequence[int], edges: Sequence[tuple[int, int]], alpha: Alpha) -> Number:
    """Naive oracle for the independent-set sum: iterate all vertex subsets.
    Kept deliberately free of the elimination logic; bounded at 20 vertices."""
    if len(vertices) > 20:
        raise ComponentTooLargeError("naive enumeration is limited to 20 vertices")
    size, shape = _canonical_shape(vertices, edges)
    masks = [(1 << u) | (1 << v) for u, v in shape]
    counts = [0] * (size + 1)
    for subset in range(1 << size):
        if any(subset & m == m for m in masks):
            continue
        counts[subset.bit_count()] += 1
    a = alpha.value
    b = 1 - a
    one = alpha.one()
    return sum((one * cnt) * a**k * b ** (size - k) for k, cnt in enumerate(counts) if cnt)


def prob_any_of(n: int, qs: Sequence[ReducedFraction], alpha: Alpha, mode: str | None = None) -> ProbabilityValue:
    """P(some q_i lies in A/A), exactly, for an arbitrary finite family.

    No closed form is attempted: the union graph is decomposed and the
    avoidance probability is the product of per-component independent-set
    sums. Invariant under permutation and duplication of the family.
    """
    if mode is None:
        mode = "exact" if alpha.is_exact else "log"
    if mode == "exact" and not alpha.is_exact:
        raise ValueError("cannot compute exactly from a float alpha")
    g = build_union_graph(n, qs)
    decomposition = components(g)
    factors = [
        independence_probability(comp.vertices, comp.edges, alpha)
        for comp in decomposition.components
        if comp.edges
    ]
    if mode == "exact":
        avoid = Fraction(1)
        for f in factors:
            avoid *= f
        return ProbabilityValue.from_exact(1 - avoid, "component-product")
    log1mp = _neumaier_sum(math.log(float(f)) for f in factors)
    return ProbabilityValue.from_log_complement(log1mp, "component-product")


def export_graph(g: RatioGraph, format: str = "json") -> str:
    """Deterministic text form: vertices ascending, edges sorted."""
    edges = sorted(g.edges)
    if format == "dot":
        lines = [f"digraph ratio_{g.kind} {{"]
        lines.extend(f"  {v};" for v in range(1, g.n + 1))
        lines.extend(f"  {u} -> {v};" for u, v in edges)
        lines.append("}")
        return "\n".join(lines) + "\n"
    if format == "json":
        payload: dict = {
            "kind": g.kind,
            "n": g.n,
            "fractions": [[q.r, q.s] for q in g.fractions],
            "vertices": list(range(1, g.n + 1)),
            "edges": [list(e) for e in edges],
        }
        if g.exponents is not None:
            payload["exponents"] = g.exponents.label()
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    raise ValueError(f"unknown export format {format!r}")
