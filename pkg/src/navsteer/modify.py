"""Link-modification strategies that steer the surfer toward target pages.

All operations are pure: they leave the input graph untouched and return a
new graph. Weight accounting follows a single budget currency, the total
link weight added to the graph, so that click bias, link insertion and the
combined strategy are comparable at equal cost.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_array, csc_array

from .errors import EmptySupportError, ValidationError
from .graph import WeightedDigraph, _column_of_entries
from .util import round_half_up

# Relative slack when testing whether one more indivisible link still fits
# into the remaining bias budget; absorbs accumulation order effects so the
# alpha=1 endpoint biases every eligible link exactly.
_BUDGET_FIT_SLACK = 1e-9


class Strategy(str, enum.Enum):
    """Available modification strategies."""

    CLICK_BIAS = "bias"
    LINK_INSERTION = "insert"
    COMBINED = "combined"


@dataclass(frozen=True)
class ModificationSpec:
    """Declarative description of one modification run."""

    strategy: Strategy
    bias_strength: float
    alpha: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if not isinstance(self.strategy, Strategy):
            object.__setattr__(self, "strategy", Strategy(self.strategy))
        b = self.bias_strength
        if not (math.isfinite(b) and b >= 1.0):
            raise ValidationError(f"bias_strength must be finite and >= 1, got {b!r}")
        if self.strategy is Strategy.COMBINED:
            if self.alpha is None or not (0.0 <= self.alpha <= 1.0):
                raise ValidationError("combined strategy needs alpha in [0, 1]")
            if self.seed is None:
                raise ValidationError("combined strategy needs an RNG seed")
        else:
            if self.alpha is not None:
                raise ValidationError("alpha only applies to the combined strategy")
            if self.seed is not None:
                raise ValidationError("seed only applies to the combined strategy")


@dataclass(frozen=True)
class LinkBudget:
    """Accounting of the weight a modification added to the graph.

    ``total_weight`` is the realized Σ W' - Σ W. ``parallel_inserted``
    counts inserted unit links that landed on an already-present link
    (pre-existing or placed earlier in the same operation, which covers
    wrap-around passes).
    """

    total_weight: float
    inserted_count: int
    biased_weight: float
    parallel_inserted: int

    def __post_init__(self):
        if self.total_weight < 0 or self.biased_weight < 0:
            raise ValidationError("budget weights cannot be negative")
        if self.inserted_count < 0 or self.parallel_inserted < 0:
            raise ValidationError("budget counts cannot be negative")


def _target_mask(t: np.ndarray, n: int) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (n,):
        raise ValidationError("target vector length must equal the node count")
    mask = t > 0.5
    if not mask.any():
        raise ValidationError("target vector selects no nodes")
    return mask


def _check_pi(pi: np.ndarray, n: int) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (n,):
        raise ValidationError("pi length must equal the node count")
    if not np.all(np.isfinite(pi)) or np.any(pi < 0):
        raise ValidationError("pi must be finite and non-negative")
    return pi


def weight_budget(g: WeightedDigraph, t: np.ndarray, b: float) -> float:
    """Weight budget l(b) = (b - 1) x (weighted in-degree of the targets).

    This is the extra weight click bias at strength ``b`` would pour onto
    the targets' in-links; the other strategies spend the same budget.
    """
    if not (math.isfinite(b) and b >= 1.0):
        raise ValidationError(f"bias strength must be finite and >= 1, got {b!r}")
    mask = _target_mask(t, g.n)
    return (b - 1.0) * float(g.in_weights()[mask].sum())


def link_budget(original: WeightedDigraph, modified: WeightedDigraph) -> float:
    """Realized budget of a modification: Σ W' - Σ W."""
    if original.n != modified.n:
        raise ValidationError("graphs must have the same node count")
    return modified.total_weight() - original.total_weight()


def click_bias(g: WeightedDigraph, t: np.ndarray, b: float) -> WeightedDigraph:
    """Multiply the weight of every link pointing at a target by ``b``.

    Models targets becoming ``b`` times as attractive to click. ``b = 1``
    returns an identical graph. Support never changes, so the result is
    exactly B W with B = I + (b - 1) diag(t).
    """
    if not (math.isfinite(b) and b >= 1.0):
        raise ValidationError(f"bias strength must be finite and >= 1, got {b!r}")
    mask = _target_mask(t, g.n)
    scaled = g.adjacency.copy()
    if scaled.nnz:
        factors = np.where(mask[scaled.indices], b, 1.0)
        scaled.data = scaled.data * factors
    return g.with_adjacency(scaled)


def insert_links(
    g: WeightedDigraph,
    t: np.ndarray,
    pi_original: np.ndarray,
    budget_count: int,
) -> tuple[WeightedDigraph, LinkBudget]:
    """Insert ``budget_count`` unit links from popular pages to the targets.

    Sources are the top ceil(budget_count / |targets|) nodes by original
    stationary probability (ties broken toward the lower index). Links are
    placed source-major, targets in descending original probability;
    self-loops are skipped without consuming budget. When every
    source-target pair is used, placement restarts over the source list,
    stacking parallel weight. Links onto pre-existing pairs add parallel
    weight as well.
    """
    if not isinstance(budget_count, (int, np.integer)) or budget_count < 1:
        raise ValidationError(
            f"budget_count must be an integer >= 1, got {budget_count!r}")
    budget_count = int(budget_count)
    mask = _target_mask(t, g.n)
    pi = _check_pi(pi_original, g.n)

    tgt_idx = np.flatnonzero(mask)
    tgt_order = tgt_idx[np.argsort(-pi[tgt_idx], kind="stable")]
    k_t = len(tgt_order)
    n_sources = min(-(-budget_count // k_t), g.n)
    sources = np.argsort(-pi, kind="stable")[:n_sources]

    src = np.repeat(sources, k_t).astype(np.int64)
    dst = np.tile(tgt_order, n_sources).astype(np.int64)
    off_diagonal = src != dst
    src, dst = src[off_diagonal], dst[off_diagonal]
    if src.size == 0:
        raise ValidationError(
            "no insertable source-to-target pairs (all candidates are self-loops)")

    # One full pass adds a unit to every pair in order; the remainder goes
    # to the leading pairs. Equivalent to sequential placement with
    # wrap-around, without the loop.
    full, rem = divmod(budget_count, src.size)
    added = np.full(src.size, float(full))
    added[:rem] += 1.0
    hit = added > 0
    src, dst, added = src[hit], dst[hit], added[hit]

    addition = coo_array((added, (dst, src)), shape=(g.n, g.n)).tocsc()
    new_adj = csc_array(g.adjacency + addition)
    new_adj.sort_indices()

    a = g.adjacency
    existing_keys = a.indices.astype(np.int64) * g.n + _column_of_entries(a)
    pair_keys = dst * g.n + src
    pre_existing = np.isin(pair_keys, existing_keys)
    parallel = int(added[pre_existing].sum() + (added[~pre_existing] - 1.0).sum())

    budget = LinkBudget(
        total_weight=float(budget_count),
        inserted_count=budget_count,
        biased_weight=0.0,
        parallel_inserted=parallel,
    )
    return g.with_adjacency(new_adj), budget


def _eligible_entries(
    g: WeightedDigraph, t: np.ndarray, pi: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stored-entry view of the links eligible for bias weight.

    Returns (data positions, rows, cols, weights, unnormalized masses) of
    all existing links that point at a target.
    """
    a = g.adjacency
    rows = a.indices
    cols = _column_of_entries(a)
    mask = _target_mask(t, g.n)
    eligible = mask[rows]
    if not eligible.any():
        raise EmptySupportError("no existing link points at any target")
    pos = np.flatnonzero(eligible)
    rows, cols = rows[pos], cols[pos]
    weights = a.data[pos]
    masses = pi[rows] * weights * pi[cols]
    total = float(masses.sum())
    if total <= 0:
        raise EmptySupportError("eligible links carry zero probability mass")
    return pos, rows, cols, weights, masses


def eligible_link_distribution(
    g: WeightedDigraph, t: np.ndarray, pi: np.ndarray
) -> csc_array:
    """Probability of picking each existing target in-link for extra weight.

    Entry (i, j) is proportional to pi[i] * t[i] * W[i, j] * pi[j]: heavily
    visited endpoints make a link a more plausible recipient of bias. The
    returned matrix sums to exactly 1 over the eligible support.
    """
    pi = _check_pi(pi, g.n)
    pos, rows, cols, _, masses = _eligible_entries(g, t, pi)
    probs = masses / masses.sum()
    dist = coo_array((probs, (rows, cols)), shape=(g.n, g.n)).tocsc()
    dist.sort_indices()
    return dist


def combine(
    g: WeightedDigraph,
    t: np.ndarray,
    pi: np.ndarray,
    b: float,
    alpha: float,
    rng: np.random.Generator,
) -> tuple[WeightedDigraph, LinkBudget]:
    """Split the budget l(b): a fraction ``alpha`` biases existing links,
    the rest is spent on link insertion.

    Bias phase: links are drawn sequentially without replacement from the
    eligible-link distribution (renormalized after each draw) and their
    weight is multiplied by ``b``, consuming (b - 1) x weight of budget.
    Links are indivisible; the first drawn link whose full consumption does
    not fit ends the phase, and whatever budget is left (rounded half-up to
    a unit-link count) is inserted on the partially modified graph using
    the original stationary vector.
    """
    if not (math.isfinite(b) and b > 1.0):
        raise ValidationError(f"combined strategy needs bias strength > 1, got {b!r}")
    if not (0.0 <= alpha <= 1.0):
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    pi = _check_pi(pi, g.n)
    pos, rows, cols, weights, masses = _eligible_entries(g, t, pi)

    mask = _target_mask(t, g.n)
    l_b = (b - 1.0) * float(g.in_weights()[mask].sum())
    bias_budget = alpha * l_b
    slack = _BUDGET_FIT_SLACK * max(1.0, l_b)

    adj = g.adjacency.copy()
    adj.data = adj.data.copy()
    active = masses.astype(np.float64).copy()
    consumed = 0.0
    while bias_budget - consumed > slack:
        remaining_mass = active.sum()
        if remaining_mass <= 0:
            break
        cum = np.cumsum(active)
        k = int(np.searchsorted(cum, rng.random() * remaining_mass, side="right"))
        k = min(k, active.size - 1)
        cost = (b - 1.0) * weights[k]
        if cost > bias_budget - consumed + slack:
            break  # indivisible link does not fit; leftover goes to insertion
        adj.data[pos[k]] *= b
        consumed += cost
        active[k] = 0.0

    partially_modified = g.with_adjacency(adj)
    insert_count = round_half_up(l_b - consumed)
    if insert_count >= 1:
        modified, ins = insert_links(partially_modified, t, pi, insert_count)
        parallel = ins.parallel_inserted
    else:
        modified, parallel = partially_modified, 0
        insert_count = 0

    budget = LinkBudget(
        total_weight=consumed + insert_count,
        inserted_count=insert_count,
        biased_weight=consumed,
        parallel_inserted=parallel,
    )
    return modified, budget


def apply_modification(
    g: WeightedDigraph,
    spec: ModificationSpec,
    t: np.ndarray,
    pi: np.ndarray,
) -> tuple[WeightedDigraph, LinkBudget]:
    """Run one strategy described by ``spec`` against graph ``g``.

    ``pi`` must be the stationary vector of the unmodified graph; insertion
    source ranking and the eligible-link distribution are defined on it.
    """
    b = spec.bias_strength
    if spec.strategy is Strategy.CLICK_BIAS:
        l_b = weight_budget(g, t, b)
        modified = click_bias(g, t, b)
        return modified, LinkBudget(total_weight=l_b, inserted_count=0,
                                    biased_weight=l_b, parallel_inserted=0)
    if spec.strategy is Strategy.LINK_INSERTION:
        count = round_half_up(weight_budget(g, t, b))
        return insert_links(g, t, pi, count)
    rng = np.random.default_rng(spec.seed)
    return combine(g, t, pi, b, spec.alpha, rng)
