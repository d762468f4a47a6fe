"""Truncation error control: split graphs, bad components, sandwich bounds.

Truncating an initial state is not monotone (an extra vertex can trigger an
extra deletion and leave *less* mass), so the full and truncated runs are
bracketed between two spanned subgraphs built from the shared clocks: one
inside both survivor graphs, one containing both.  The coupled distance is
then at most three times the square root of the bracket's squared-norm gap,
and the gap itself admits an explicit two-term conditional bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clock_field import ClockField
from .errors import InvalidInput, InvariantViolation
from .graphical import (
    GraphRealization,
    _components_from_edges,
    _UnionFind,
    realize,
    truncated_realization,
)
from .mass_state import dist
from .multigraph import ComponentMultigraph
from .multigraph import classify_bad as _classify_multigraph

__all__ = [
    "SplitRealization",
    "SandwichGraphs",
    "TruncationReport",
    "split",
    "component_multigraph",
    "classify_bad",
    "sandwich_graphs",
    "good_component_check",
    "truncation_report",
    "bipartite_bound",
    "truncation_bound",
    "truncation_bound_terms",
    "feller_budget",
    "tail_truncation_index",
    "BipartiteStudy",
    "bipartite_s2_samples",
    "GapStudy",
    "frozen_split_gap_samples",
]

SANDWICH_TOL = 1e-9


# ---------------------------------------------------------------------------
# split realizations


@dataclass(frozen=True)
class SplitRealization:
    """Full and truncated runs plus the level-m component split."""

    level: int
    full: GraphRealization
    truncated: GraphRealization
    lower_components: tuple[tuple[int, ...], ...]
    upper_components: tuple[tuple[int, ...], ...]
    alpha: float
    beta: float

    @property
    def n(self) -> int:
        return self.full.n


def _component_s2(masses: tuple[float, ...], comps) -> float:
    weights = [math.fsum(masses[v - 1] for v in c) for c in comps]
    return math.fsum(w * w for w in weights)


def split(masses, clocks: ClockField, lam: float, t: float, m: int) -> SplitRealization:
    """Run the full and level-m truncated processes under the same clocks."""
    full = realize(masses, clocks, lam, t)
    return split_from_realization(full, m)


def split_from_realization(full: GraphRealization, m: int) -> SplitRealization:
    """Same as :func:`split` when the full realization is already available."""
    if m < 0 or m > full.n:
        raise InvalidInput(f"truncation level must be in [0, {full.n}]")
    trunc = truncated_realization(full, m)
    lower = tuple(c for c in trunc.components if c[0] <= m)
    upper_mask = full.edge_i > m
    upper = _components_from_edges(
        full.n,
        full.edge_i[upper_mask],
        full.edge_j[upper_mask],
        members=np.arange(m + 1, full.n + 1, dtype=np.int64),
    )
    alpha = _component_s2(full.masses, lower)
    beta = _component_s2(full.masses, upper)
    return SplitRealization(
        level=m,
        full=full,
        truncated=trunc,
        lower_components=lower,
        upper_components=upper,
        alpha=alpha,
        beta=beta,
    )


def component_multigraph(sr: SplitRealization) -> ComponentMultigraph:
    """Cross edges of the full graph as parallel edges between the two
    component families; a component is damaged when any member was struck."""
    m = sr.level
    full = sr.full
    lower_id = {}
    for idx, comp in enumerate(sr.lower_components):
        for v in comp:
            lower_id[v] = idx
    upper_id = {}
    for idx, comp in enumerate(sr.upper_components):
        for v in comp:
            upper_id[v] = idx
    cross = (full.edge_i <= m) & (full.edge_j > m)
    edges = tuple(
        (lower_id[a], upper_id[b])
        for a, b in zip(full.edge_i[cross].tolist(), full.edge_j[cross].tolist())
    )
    struck = set(full.strike_vertex.tolist())
    damaged_lower = tuple(
        any(v in struck for v in comp) for comp in sr.lower_components
    )
    damaged_upper = tuple(
        any(v in struck for v in comp) for comp in sr.upper_components
    )
    return ComponentMultigraph(
        n_lower=len(sr.lower_components),
        n_upper=len(sr.upper_components),
        edges=edges,
        damaged_lower=damaged_lower,
        damaged_upper=damaged_upper,
    )


def classify_bad(sr: SplitRealization, cm: ComponentMultigraph) -> frozenset[int]:
    """Indices of bad lower components (edge-simple walk reaches damage)."""
    if cm.n_lower != len(sr.lower_components) or cm.n_upper != len(sr.upper_components):
        raise InvalidInput("multigraph does not match the split realization")
    return _classify_multigraph(cm)


# ---------------------------------------------------------------------------
# sandwich graphs


@dataclass(frozen=True)
class SandwichGraphs:
    v_hat: frozenset[int]
    v_check: frozenset[int]
    s2_hat: float
    s2_check: float


def _s2_spanned(full: GraphRealization, vertices: frozenset[int]) -> float:
    members = np.array(sorted(vertices), dtype=np.int64)
    keep = np.isin(full.edge_i, members) & np.isin(full.edge_j, members)
    comps = _components_from_edges(
        full.n, full.edge_i[keep], full.edge_j[keep], members=members
    )
    return _component_s2(full.masses, comps)


def sandwich_graphs(
    sr: SplitRealization,
    bad: frozenset[int],
    intact_full: frozenset[int],
    intact_trunc: frozenset[int],
) -> SandwichGraphs:
    """Inner and outer spanned subgraphs bracketing both survivor graphs.

    Outer: good components cut to the truncated run's intact set, bad
    components whole, plus every vertex above the level.  Inner: only the
    good components cut to the truncated run's intact set.  Raises when the
    bracketing inclusions fail, since that can only be a construction bug.
    """
    m = sr.level
    v_hat: set[int] = set()
    v_check: set[int] = set(range(m + 1, sr.n + 1))
    for idx, comp in enumerate(sr.lower_components):
        if idx in bad:
            v_check.update(comp)
        else:
            kept = intact_trunc.intersection(comp)
            v_hat.update(kept)
            v_check.update(kept)
    v_hat_f, v_check_f = frozenset(v_hat), frozenset(v_check)

    for name, inner, outer in (
        ("inner vs truncated-intact", v_hat_f, intact_trunc),
        ("truncated-intact vs outer", intact_trunc, v_check_f),
        ("inner vs full-intact", v_hat_f, intact_full),
        ("full-intact vs outer", intact_full, v_check_f),
    ):
        if not inner.issubset(outer):
            raise InvariantViolation(f"sandwich inclusion failed: {name}")

    return SandwichGraphs(
        v_hat=v_hat_f,
        v_check=v_check_f,
        s2_hat=_s2_spanned(sr.full, v_hat_f),
        s2_check=_s2_spanned(sr.full, v_check_f),
    )


def good_component_check(
    sr: SplitRealization,
    bad: frozenset[int],
    intact_full: frozenset[int],
    intact_trunc: frozenset[int],
) -> list[int]:
    """Good components must meet both intact sets identically; returns the
    indices that violate this (expected empty)."""
    violations = []
    for idx, comp in enumerate(sr.lower_components):
        if idx in bad:
            continue
        members = set(comp)
        if members & intact_trunc != members & intact_full:
            violations.append(idx)
    return violations


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class TruncationReport:
    m: int
    alpha: float
    beta: float
    s2_hat: float
    s2_check: float
    s2_survivor_full: float
    s2_spanned_truncated_intact: float
    gap: float
    distance: float
    bound_terms: tuple[float, float] | None
    holds: bool

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "alpha": self.alpha,
            "beta": self.beta,
            "s2_hat": self.s2_hat,
            "s2_check": self.s2_check,
            "gap": self.gap,
            "distance": self.distance,
            "bound_terms": list(self.bound_terms) if self.bound_terms else None,
            "holds": self.holds,
        }


def truncation_report(
    masses, clocks: ClockField, lam: float, t: float, m: int
) -> TruncationReport:
    """End-to-end sandwich computation for one seed and one level."""
    sr = split(masses, clocks, lam, t, m)
    return report_from_split(sr)


def report_from_split(sr: SplitRealization) -> TruncationReport:
    cm = component_multigraph(sr)
    bad = classify_bad(sr, cm)
    sw = sandwich_graphs(sr, bad, sr.full.intact, sr.truncated.intact)

    s2_h = _s2_spanned(sr.full, sr.full.intact)
    s2_hm = _s2_spanned(sr.full, sr.truncated.intact)
    for mid, label in ((s2_h, "survivor"), (s2_hm, "truncated-intact spanned")):
        if not (sw.s2_hat - SANDWICH_TOL <= mid <= sw.s2_check + SANDWICH_TOL):
            raise InvariantViolation(
                f"squared-norm chain violated for the {label} graph"
            )

    gap = max(sw.s2_check - sw.s2_hat, 0.0)
    distance = dist(sr.full.state, sr.truncated.state)
    t, lam = sr.full.horizon, sr.full.lam
    if t * t * sr.alpha * sr.beta <= 0.5:
        terms = truncation_bound_terms(sr.alpha, sr.beta, t, lam)
    else:
        terms = None
    return TruncationReport(
        m=sr.level,
        alpha=sr.alpha,
        beta=sr.beta,
        s2_hat=sw.s2_hat,
        s2_check=sw.s2_check,
        s2_survivor_full=s2_h,
        s2_spanned_truncated_intact=s2_hm,
        gap=gap,
        distance=distance,
        bound_terms=terms,
        holds=bool(distance <= 3.0 * math.sqrt(gap) + SANDWICH_TOL),
    )


# ---------------------------------------------------------------------------
# analytic bounds


def bipartite_bound(a: float, b: float, t: float, n_lower: int) -> float:
    """Bound on the expected squared-norm excess of a weighted bipartite
    random graph over its left side; needs finitely many left vertices and
    t^2*a*b <= 1/2."""
    if n_lower < 1:
        raise InvalidInput("the left vertex class must be finite and nonempty")
    if a < 0 or b < 0 or t < 0:
        raise InvalidInput("a, b, t must be nonnegative")
    if t * t * a * b > 0.5:
        raise InvalidInput("hypothesis t^2*a*b <= 1/2 violated")
    return 2.0 * b * (1.0 + t * a) ** 2


def truncation_bound_terms(
    alpha: float, beta: float, t: float, lam: float
) -> tuple[float, float]:
    if alpha < 0 or beta < 0 or t < 0 or lam < 0:
        raise InvalidInput("alpha, beta, t, lam must be nonnegative")
    if t * t * alpha * beta > 0.5:
        raise InvalidInput("hypothesis t^2*alpha*beta <= 1/2 violated")
    term_bipartite = 2.0 * beta * (1.0 + t * alpha) ** 2
    term_bad = 2.0 * t * t * lam * beta * (1.0 + t * alpha) * alpha ** 1.5
    return term_bipartite, term_bad


def truncation_bound(alpha: float, beta: float, t: float, lam: float) -> float:
    """Conditional bound on the expected sandwich gap given the split graphs."""
    b1, b2 = truncation_bound_terms(alpha, beta, t, lam)
    return b1 + b2


def _budget_constant(lam: float, t: float) -> float:
    return 2.0 * max(1.0, lam * t * t)


def feller_budget(eps: float, M: float, t: float, lam: float) -> float:
    """Largest tail squared-norm budget compatible with both constraints of
    the truncation argument at accuracy ``eps`` and head bound ``M``."""
    if eps <= 0 or M <= 0 or t <= 0:
        raise InvalidInput("eps, M, t must be positive")
    if lam < 0:
        raise InvalidInput("deletion rate must be nonnegative")
    c = _budget_constant(lam, t)
    first = 0.5 / (t * t * M)
    second = eps ** 3 / (9.0 * c * ((1.0 + t * M) ** 2 + (1.0 + t * M) * M ** 1.5))
    return min(first, second)


def tail_truncation_index(masses, delta: float) -> int:
    """Smallest level whose tail squared norm is at most ``delta``."""
    if delta < 0:
        raise InvalidInput("delta must be nonnegative")
    arr = np.asarray(
        masses.masses if hasattr(masses, "masses") else masses, dtype=np.float64
    )
    sq = arr * arr
    # suffix[m] = squared norm of everything beyond the first m entries
    suffix = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
    return int(np.argmax(suffix <= delta))


# ---------------------------------------------------------------------------
# Monte Carlo studies backing the bound checks


@dataclass(frozen=True)
class BipartiteStudy:
    a: float
    b: float
    bound: float
    mean_excess: float
    sem: float
    replicas: int


def bipartite_s2_samples(
    x, y, t: float, base_seed: int, replicas: int
) -> BipartiteStudy:
    """Empirical mean of the bipartite squared-norm excess against its bound.

    Left vertices carry the ``x`` weights, right vertices the ``y`` weights;
    the edge between left i and right j appears when the shared pair clock
    is below t*x_i*y_j.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    a = float(np.sum(x * x))
    b = float(np.sum(y * y))
    bound = bipartite_bound(a, b, t, len(x))
    nl, nr = len(x), len(y)
    li = np.repeat(np.arange(1, nl + 1), nr)
    rj = np.tile(np.arange(nl + 1, nl + nr + 1), nl)
    thresholds = t * np.repeat(x, nr) * np.tile(y, nl)
    base = ClockField(base_seed)
    samples = np.empty(replicas)
    for r in range(replicas):
        exps = base.child(r).pair_exps(li, rj)
        present = exps <= thresholds
        uf = _UnionFind(nl + nr)
        for u, v in zip(li[present].tolist(), rj[present].tolist()):
            uf.union(u, v)
        weights: dict[int, float] = {}
        for v in range(1, nl + nr + 1):
            w = x[v - 1] if v <= nl else y[v - nl - 1]
            root = uf.find(v)
            weights[root] = weights.get(root, 0.0) + w
        samples[r] = math.fsum(w * w for w in weights.values())
    excess = samples - a
    mean = float(np.mean(excess))
    sem = float(np.std(excess, ddof=1) / math.sqrt(replicas))
    return BipartiteStudy(
        a=a, b=b, bound=bound, mean_excess=mean, sem=sem, replicas=replicas
    )


class _SplitResampleField(ClockField):
    """Pair clocks within each side frozen; cross pairs and all vertex clocks
    taken from a per-replica field.  Test device for the conditional bound."""

    __slots__ = ("_frozen", "_resample", "_level")

    def __init__(self, frozen: ClockField, resample: ClockField, level: int):
        super().__init__(resample.seed)
        self._frozen = frozen
        self._resample = resample
        self._level = level

    def _pair_hash(self, i, j):
        cross = (i <= np.uint64(self._level)) & (j > np.uint64(self._level))
        return np.where(
            cross, self._resample._pair_hash(i, j), self._frozen._pair_hash(i, j)
        )

    def _vertex_hash(self, i):
        return self._resample._vertex_hash(i)


@dataclass(frozen=True)
class GapStudy:
    alpha: float
    beta: float
    bound: float
    mean_gap: float
    sem: float
    replicas: int


def frozen_split_gap_samples(
    masses, lam: float, t: float, m: int, base_seed: int, replicas: int
) -> GapStudy:
    """Resample lightning and cross edges with the split graphs held fixed;
    the mean sandwich gap is compared against the conditional bound."""
    frozen = ClockField(base_seed)
    gaps = np.empty(replicas)
    alpha = beta = None
    for r in range(replicas):
        field = _SplitResampleField(frozen, frozen.child(r), m)
        sr = split(masses, field, lam, t, m)
        if alpha is None:
            alpha, beta = sr.alpha, sr.beta
            if t * t * alpha * beta > 0.5:
                raise InvalidInput(
                    "realized split graphs violate t^2*alpha*beta <= 1/2; "
                    "choose lighter masses"
                )
        elif abs(sr.alpha - alpha) > 1e-9 or abs(sr.beta - beta) > 1e-9:
            raise InvariantViolation("split graphs were supposed to be frozen")
        rep = report_from_split(sr)
        gaps[r] = rep.gap
    bound = truncation_bound(alpha, beta, t, lam)
    mean = float(np.mean(gaps))
    sem = float(np.std(gaps, ddof=1) / math.sqrt(replicas))
    return GapStudy(
        alpha=float(alpha),
        beta=float(beta),
        bound=bound,
        mean_gap=mean,
        sem=sem,
        replicas=replicas,
    )
