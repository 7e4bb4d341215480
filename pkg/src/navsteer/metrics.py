"""Scalar measures of how much a modification favors the target set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import WeightedDigraph


@dataclass(frozen=True)
class TargetMetrics:
    """Per-run summary of target energy and degree structure.

    ``degree_ratio`` is ``+inf`` when the targets have no incoming weight;
    that is a flagged value, not an error.
    """

    energy_before: float
    energy_after: float
    influence_potential: float
    in_degree: float
    out_degree: float
    degree_ratio: float


def energy(pi: np.ndarray, t: np.ndarray) -> float:
    """Total stationary probability sitting on the targets: sum(pi * t)."""
    pi = np.asarray(pi, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if pi.shape != t.shape:
        raise ValidationError("pi and t must have the same length")
    return float(np.dot(pi, t))


def influence_potential(energy_before: float, energy_after: float) -> float:
    """Multiplicative gain of target energy, tau = after / before."""
    if energy_before <= 0:
        raise ValidationError(
            f"baseline target energy must be positive, got {energy_before!r}")
    return energy_after / energy_before


def target_degrees(g: WeightedDigraph, t: np.ndarray) -> tuple[float, float, float]:
    """Weighted in-degree, out-degree and their ratio for the target set.

    In-degree sums the target rows of the adjacency (weight flowing into
    targets), out-degree the target columns (weight leaving them).
    """
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (g.n,):
        raise ValidationError("target vector length must equal the node count")
    d_in = float(np.dot(g.in_weights(), t))
    d_out = float(np.dot(g.out_weights(), t))
    ratio = d_out / d_in if d_in > 0 else math.inf
    return d_in, d_out, ratio


def target_metrics(
    g: WeightedDigraph,
    t: np.ndarray,
    pi_before: np.ndarray,
    pi_after: np.ndarray,
) -> TargetMetrics:
    """Bundle the before/after energies, their ratio and the degrees of t.

    Degrees are measured on ``g`` as passed; hand in the unmodified graph to
    get the usual "structure before modification" reading.
    """
    before = energy(pi_before, t)
    after = energy(pi_after, t)
    d_in, d_out, ratio = target_degrees(g, t)
    return TargetMetrics(
        energy_before=before,
        energy_after=after,
        influence_potential=influence_potential(before, after),
        in_degree=d_in,
        out_degree=d_out,
        degree_ratio=ratio,
    )
