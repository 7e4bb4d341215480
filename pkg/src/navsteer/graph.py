"""Weighted directed graphs backed by sparse adjacency matrices.

Convention used throughout the package: ``adjacency[i, j]`` holds the total
weight of links pointing from node ``j`` to node ``i``. Columns therefore
describe a node's outgoing links and rows its incoming links.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np
from scipy.sparse import coo_array, csc_array
from scipy.sparse.csgraph import connected_components

from .errors import EdgeListParseError, EmptyGraphError, ValidationError

logger = logging.getLogger(__name__)

METADATA_SUFFIX = ".meta.json"


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Immutable weighted digraph.

    ``adjacency`` is a CSC matrix so a node's out-links (one column) are
    retrievable in time proportional to its out-degree. Stored weights are
    strictly positive and the diagonal is empty (no self-loops).
    """

    n: int
    adjacency: csc_array
    node_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        a = self.adjacency
        if a.shape != (self.n, self.n):
            raise ValidationError(
                f"adjacency shape {a.shape} does not match n={self.n}")
        if self.node_labels is not None and len(self.node_labels) != self.n:
            raise ValidationError("node_labels length does not match n")
        if a.nnz:
            if not np.all(np.isfinite(a.data)):
                raise ValidationError("adjacency weights must be finite")
            if np.any(a.data <= 0):
                raise ValidationError("stored adjacency weights must be positive")
            if np.any(a.indices == _column_of_entries(a)):
                raise ValidationError("adjacency must not contain self-loops")

    @classmethod
    def from_edges(
        cls,
        n: int,
        sources: Iterable[int],
        destinations: Iterable[int],
        weights: Iterable[float] | None = None,
        node_labels: tuple[str, ...] | None = None,
    ) -> "WeightedDigraph":
        """Build a graph from parallel edge arrays, summing duplicate links.

        Self-loops are dropped (with a counted warning) and zero-weight
        entries are eliminated, matching the edge-list loading rules.
        """
        src = np.asarray(list(sources) if not isinstance(sources, np.ndarray) else sources,
                         dtype=np.int64)
        dst = np.asarray(list(destinations) if not isinstance(destinations, np.ndarray) else destinations,
                         dtype=np.int64)
        if weights is None:
            w = np.ones(len(src), dtype=np.float64)
        else:
            w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights,
                           dtype=np.float64)
        if not (len(src) == len(dst) == len(w)):
            raise ValidationError("edge arrays must have equal length")
        if len(w) and (not np.all(np.isfinite(w)) or np.any(w < 0)):
            raise ValidationError("edge weights must be finite and non-negative")
        loops = src == dst
        dropped = int(loops.sum())
        if dropped:
            logger.warning("dropped %d self-loop link(s)", dropped)
            keep = ~loops
            src, dst, w = src[keep], dst[keep], w[keep]
        adj = coo_array((w, (dst, src)), shape=(n, n)).tocsc()
        adj.sum_duplicates()
        adj.eliminate_zeros()
        adj.sort_indices()
        return cls(n=n, adjacency=adj, node_labels=node_labels)

    def out_weight(self, j: int) -> float:
        """Total weight leaving node ``j`` (O(out-degree) column slice)."""
        a = self.adjacency
        lo, hi = a.indptr[j], a.indptr[j + 1]
        return float(a.data[lo:hi].sum())

    def out_weights(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=0)).ravel()

    def in_weights(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def total_weight(self) -> float:
        return float(self.adjacency.data.sum()) if self.adjacency.nnz else 0.0

    def edge_count(self) -> int:
        return int(self.adjacency.nnz)

    def label_for(self, i: int) -> str:
        return self.node_labels[i] if self.node_labels is not None else str(i)

    def label_index(self) -> dict[str, int]:
        """Map from node label to internal index (built on demand)."""
        if self.node_labels is None:
            return {str(i): i for i in range(self.n)}
        return {lab: i for i, lab in enumerate(self.node_labels)}

    def with_adjacency(self, adjacency: csc_array) -> "WeightedDigraph":
        """A copy of this graph with a replaced adjacency matrix."""
        return WeightedDigraph(n=self.n, adjacency=adjacency,
                               node_labels=self.node_labels)


@dataclass(frozen=True)
class DegreeSummary:
    """Weighted per-node degrees plus the graph-wide average degree."""

    in_degree: np.ndarray
    out_degree: np.ndarray
    average_degree: float


def _column_of_entries(a: csc_array) -> np.ndarray:
    """Column index of every stored entry of a CSC matrix."""
    return np.repeat(np.arange(a.shape[1]), np.diff(a.indptr))


def _iter_lines(source) -> Iterator[str]:
    if hasattr(source, "read"):
        yield from source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh


def load_edge_list(source: str | Path | IO[str]) -> WeightedDigraph:
    """Parse a tab-separated edge list into a :class:`WeightedDigraph`.

    Each data line is ``source<TAB>destination[<TAB>weight]`` with weight
    defaulting to 1.0. Lines whose first non-blank character is ``#`` and
    blank lines are skipped. Node identifiers are arbitrary strings and are
    assigned dense indices in order of first appearance. Parallel links are
    summed; self-loops are dropped with a counted warning. Malformed lines
    raise :class:`EdgeListParseError` carrying the 1-based line number.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    srcs: list[int] = []
    dsts: list[int] = []
    wts: list[float] = []

    def node_id(label: str) -> int:
        idx = index.get(label)
        if idx is None:
            idx = len(labels)
            index[label] = idx
            labels.append(label)
        return idx

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise EdgeListParseError(
                f"expected 2 or 3 tab-separated fields, got {len(fields)}",
                line_number=lineno)
        src_label, dst_label = fields[0], fields[1]
        if not src_label or not dst_label:
            raise EdgeListParseError("empty node identifier", line_number=lineno)
        if len(fields) == 3:
            try:
                weight = float(fields[2])
            except ValueError:
                raise EdgeListParseError(
                    f"weight {fields[2]!r} is not a number", line_number=lineno)
            if not math.isfinite(weight):
                raise EdgeListParseError(
                    f"weight {fields[2]!r} is not finite", line_number=lineno)
            if weight < 0:
                raise EdgeListParseError(
                    f"weight {weight} is negative", line_number=lineno)
        else:
            weight = 1.0
        srcs.append(node_id(src_label))
        dsts.append(node_id(dst_label))
        wts.append(weight)

    return WeightedDigraph.from_edges(
        n=len(labels), sources=srcs, destinations=dsts, weights=wts,
        node_labels=tuple(labels))


def _edge_pairs(g: WeightedDigraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(src, dst, weight) arrays of all stored links."""
    a = g.adjacency
    cols = _column_of_entries(a)
    return cols, a.indices.copy(), a.data.copy()


def _emission_order(g: WeightedDigraph) -> list[tuple[int, int]]:
    """Edge emission order such that reloading reproduces node indices.

    First-appearance indexing means the writer must introduce node j only
    after 0..j-1 (or jointly with j+1, the pattern a fresh source/dest pair
    creates). A small introduction block per node achieves that; remaining
    edges follow in sorted order.
    """
    src, dst, _ = _edge_pairs(g)
    out_by_node: dict[int, list[int]] = {}
    in_by_node: dict[int, list[int]] = {}
    for s, d in zip(src.tolist(), dst.tolist()):
        out_by_node.setdefault(s, []).append(d)
        in_by_node.setdefault(d, []).append(s)

    introduced = [False] * g.n
    intro: list[tuple[int, int]] = []
    skipped: list[int] = []
    for j in range(g.n):
        if introduced[j]:
            continue
        in_small = [s for s in in_by_node.get(j, ()) if introduced[s]]
        out_small = [d for d in out_by_node.get(j, ()) if introduced[d]]
        if in_small:
            edge = (min(in_small), j)
        elif out_small:
            edge = (j, min(out_small))
        elif j + 1 < g.n and (j + 1) in out_by_node.get(j, ()):
            edge = (j, j + 1)
        elif out_by_node.get(j):
            # Not producible by first-appearance indexing; emit something
            # sensible, at the cost of index-exact round-tripping.
            edge = (j, min(out_by_node[j]))
        elif in_by_node.get(j):
            edge = (min(in_by_node[j]), j)
        else:
            skipped.append(j)
            continue
        intro.append(edge)
        introduced[edge[0]] = True
        introduced[edge[1]] = True
    if skipped:
        logger.warning(
            "%d node(s) without links cannot be represented in an edge list "
            "and were omitted: %s", len(skipped), skipped[:10])
    seen = set(intro)
    rest = sorted((int(s), int(d)) for s, d in zip(src, dst)
                  if (int(s), int(d)) not in seen)
    return intro + rest


def _format_weight(w: float) -> str:
    # repr round-trips float64 exactly; integral weights print without ".0"
    return str(int(w)) if w == int(w) and abs(w) < 2 ** 53 else repr(w)


def write_edge_list(
    g: WeightedDigraph,
    path: str | Path,
    metadata: dict | None = None,
) -> Path:
    """Serialize a graph as a tab-separated edge list plus metadata sidecar.

    The sidecar (``<path>.meta.json``) records node count, total weight and
    any provenance entries passed by the caller. Edge order is chosen so
    that loading the written file reproduces the same internal indexing
    (round-trip identity).
    """
    path = Path(path)
    src, dst, wts = _edge_pairs(g)
    weight_of = {(int(s), int(d)): float(w) for s, d, w in zip(src, dst, wts)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s, d in _emission_order(g):
            fh.write(f"{g.label_for(s)}\t{g.label_for(d)}\t"
                     f"{_format_weight(weight_of[(s, d)])}\n")
    meta = {
        "nodes": g.n,
        "links": g.edge_count(),
        "total_weight": g.total_weight(),
    }
    if metadata:
        meta.update(metadata)
    sidecar = Path(str(path) + METADATA_SUFFIX)
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def largest_scc(g: WeightedDigraph) -> tuple[WeightedDigraph, dict[int, int]]:
    """Largest strongly connected component and its old->new index mapping.

    Component size ties break toward the component containing the lowest
    original index. Applying the operation to its own output is a no-op.
    """
    if g.n == 0:
        raise EmptyGraphError("cannot extract a component from an empty graph")
    # SCCs are invariant under edge reversal, so the in-link orientation of
    # the adjacency does not matter here.
    n_comp, labels = connected_components(
        g.adjacency, directed=True, connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    first_seen = np.full(n_comp, g.n, dtype=np.int64)
    np.minimum.at(first_seen, labels, np.arange(g.n))
    best = max(range(n_comp), key=lambda c: (sizes[c], -first_seen[c]))
    keep = np.flatnonzero(labels == best)
    mapping = {int(old): new for new, old in enumerate(keep)}
    sub = g.adjacency.tocsr()[keep, :][:, keep].tocsc()
    sub.sort_indices()
    sub_labels = (tuple(g.node_labels[i] for i in keep)
                  if g.node_labels is not None else None)
    return WeightedDigraph(n=len(keep), adjacency=sub, node_labels=sub_labels), mapping


def degree_summary(g: WeightedDigraph) -> DegreeSummary:
    """Weighted in/out degree per node and the average degree (Σ W / n)."""
    if g.n == 0:
        raise EmptyGraphError("degree summary of an empty graph is undefined")
    out_deg = g.out_weights()
    in_deg = g.in_weights()
    return DegreeSummary(in_degree=in_deg, out_degree=out_deg,
                         average_degree=g.total_weight() / g.n)
