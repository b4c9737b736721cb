"""Topological entropy of (possibly noncompact) subsets via outer covers.

The construction: a cover element B carries the largest span N(B) for which
every image of B up to that span still fits inside one element of the
reference cover (N = 0 if it never fits, infinite if it always does), and
the weight D(B) = exp(-N(B)).  For a family of elements covering the target
set, the order-alpha sum is sum D^alpha; the entropy estimate at a given
refinement depth is the critical alpha where that sum crosses 1, and the
reported value is the critical alpha at the deepest refinement, bracketed by
the spread over the last few depths.

On shift spaces the refinement at depth n is the family of admissible
n-cylinders meeting the target set, so everything reduces to counting words
under constraints.  Two independent routes are kept deliberately separate:
the float backends here (log-gamma sums, log-scaled matrix powers and
dynamic programs) and the exact big-integer counts in `word_count_rate`,
which also drive the spanning-set growth estimate.  Tests compare the
routes; neither calls the other.

Suspension flows are handled for word-independent roofs: each depth-n
cylinder times a half-roof fiber interval is a cover body whose span is
read off the rolled-out flow-box geometry (the span of ([w], [a,b)) under a
constant roof c is |w| c + c/4 - b).  Rotation flows and rotation maps have
zero expansion, so every span is infinite and the entropy is exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .systems import (
    BudgetExhausted,
    CircleMult, CircleRotation, CircleRotationFlow, DisjointUnion, FullShift,
    MarkovShift, Point, Suspension, TimeTMap, TorusTranslation, alphabet_of,
    symbolic_kind,
)

__all__ = [
    "WholeSpace", "FrequencyWindow", "OscillationWindows", "ComponentWindow",
    "SampleCloud", "CylinderBody", "ArcBody", "ProductBody", "CoverElement",
    "cover_weight", "caratheodory_sum", "EntropyEstimate", "bowen_entropy_symbolic",
    "bowen_entropy_flow", "spanning_entropy", "word_count_rate", "WordCount",
]


# ---------------------------------------------------------------------------
# target-set descriptions


@dataclass(frozen=True)
class WholeSpace:
    pass


@dataclass(frozen=True)
class FrequencyWindow:
    """Points whose asymptotic frequency of `symbol` lies in [lo, hi]."""

    symbol: int
    lo: float
    hi: float
    component: Optional[int] = None

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError("need 0 <= lo <= hi <= 1")


@dataclass(frozen=True)
class OscillationWindows:
    """Points whose running frequency of `symbol` visits [lo_j, hi_j] at each
    scale n_j: windows = ((n_1, lo_1, hi_1), ...) with increasing scales."""

    symbol: int
    windows: Tuple[Tuple[int, float, float], ...]

    def __post_init__(self):
        ws = self.windows
        if not ws:
            raise ValueError("need at least one window")
        if any(a[0] >= b[0] for a, b in zip(ws[:-1], ws[1:])):
            raise ValueError("window scales must be strictly increasing")
        if any(not (0.0 <= lo <= hi <= 1.0) for _, lo, hi in ws):
            raise ValueError("windows must satisfy 0 <= lo <= hi <= 1")


@dataclass(frozen=True)
class ComponentWindow:
    """Points of a disjoint union whose fraction of time in the second
    component lies in [lo, hi].  Orbits never switch sides, so the only
    admissible fractions are 0 and 1."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError("need 0 <= lo <= hi <= 1")


@dataclass(frozen=True)
class SampleCloud:
    """A finite set of sample points; covering them gives an upper bound."""

    points: Tuple[Point, ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("sample cloud must be nonempty")


SubsetSpec = object


# ---------------------------------------------------------------------------
# cover bodies and weights


@dataclass(frozen=True)
class CylinderBody:
    word: Tuple[int, ...]
    component: Optional[int] = None


@dataclass(frozen=True)
class ArcBody:
    center: float
    radius: float


@dataclass(frozen=True)
class ProductBody:
    """Cylinder times the fiber interval [lo, hi) of a suspension."""

    word: Tuple[int, ...]
    lo: float
    hi: float


@dataclass(frozen=True)
class CoverElement:
    body: object
    span: float            # N: how long every image stays inside one reference element
    weight: float          # D = exp(-span)


_FORCED_CAP_EXTRA = None   # computed per system: alphabet size + 1


def _forced_extension(adjacency, state: int, cap: int) -> int:
    """Extra steps the cylinder keeps determining symbols (forced transitions)."""
    extra = 0
    cur = state
    while extra < cap:
        row = adjacency[cur]
        if sum(row) != 1:
            return extra
        cur = row.index(1)
        extra += 1
    return cap


def _cylinder_span(system, word) -> float:
    if not word:
        return 0.0    # the whole space is not inside any single cover member
    if isinstance(system, FullShift):
        return float(len(word))
    if isinstance(system, MarkovShift):
        cap = system.k + 1
        return float(len(word) + _forced_extension(system.adjacency, word[-1], cap))
    raise TypeError(f"no cylinder span for {type(system).__name__}")


def _flow_body_span(flow: Suspension, word, hi: float) -> float:
    """Span of ([word], fiber below hi) under the rolled flow-box cover.

    The last flow box certain from the word alone runs to the accumulated
    roof time plus a quarter of the final roof; past that the base shadow is
    no longer a single cylinder.
    """
    roof = flow.roof
    if roof.depth > 0:
        raise TypeError("flow spans are implemented for word-independent roofs only")
    c = roof.roof_max
    if not (0.0 <= hi <= c):
        raise ValueError("fiber interval must sit under the roof")
    return len(word) * c + 0.25 * c - hi


def cover_weight(system, body, cover=None) -> CoverElement:
    """Attach the span and weight to a cover body.

    `cover` names the reference open cover; None selects the canonical one
    (depth-1 cylinders on shifts, half-roof boxes over them on suspensions,
    same-scale arcs on the circle), which is the only kind implemented.
    """
    if cover is not None:
        raise TypeError("only the canonical reference cover is implemented")
    if isinstance(body, CylinderBody):
        target = system
        if isinstance(system, DisjointUnion):
            if body.component is None:
                raise ValueError("cylinder bodies on a disjoint union need a component")
            target = system.side(body.component)
        if isinstance(system, TimeTMap) and isinstance(system.flow, Suspension):
            base = system.flow.base
            sp = _cylinder_span(base, body.word)
            stride = _integer_stride(system, strict=False)
            if stride is not None:
                span = math.ceil(sp / stride)
            else:
                c = system.flow.roof.roof_max
                span = max(math.ceil((sp * c - 0.75 * c) / system.t), 0)
            return CoverElement(body, float(span), math.exp(-span))
        span = _cylinder_span(target, body.word)
        return CoverElement(body, span, math.exp(-span))
    if isinstance(body, ProductBody):
        if not isinstance(system, Suspension):
            raise TypeError("product bodies live on suspension spaces")
        span = _flow_body_span(system, body.word, body.hi)
        return CoverElement(body, span, math.exp(-span))
    if isinstance(body, ArcBody):
        if isinstance(system, CircleRotation) or (
            isinstance(system, TimeTMap)
            and isinstance(system.flow, (CircleRotationFlow, TorusTranslation))
        ) or isinstance(system, (CircleRotationFlow, TorusTranslation)):
            return CoverElement(body, math.inf, 0.0)   # isometries never expand
        if isinstance(system, CircleMult):
            if body.radius <= 0:
                raise ValueError("arc radius must be positive")
            # arc doubles by factor n each step; span ends when it outgrows an arc of the same scale
            span = max(1, math.ceil(math.log(1.0 / (2.0 * body.radius)) / math.log(system.n)))
            return CoverElement(body, float(span), math.exp(-span))
    raise TypeError(f"no weight rule for {type(body).__name__} on {type(system).__name__}")


def caratheodory_sum(elements: Sequence[CoverElement], alpha: float) -> float:
    """Order-alpha sum of the weights; weight-0 elements contribute nothing
    at every order, so the sum is nonincreasing in alpha."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    total = 0.0
    for el in elements:
        if el.weight > 0.0:
            total += el.weight ** alpha
    return total


# ---------------------------------------------------------------------------
# counting backends (float route)

_LOG_EMPTY = -math.inf


def _logsumexp(values) -> float:
    arr = np.asarray(values, dtype=float)
    arr = arr[arr > _LOG_EMPTY]
    if arr.size == 0:
        return _LOG_EMPTY
    m = arr.max()
    return float(m + math.log(np.exp(arr - m).sum()))


def _log_binom(n: int, m: int) -> float:
    if m < 0 or m > n:
        return _LOG_EMPTY
    return math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)


def _count_range(n: int, lo: float, hi: float) -> range:
    lo_m = math.ceil(lo * n - 1e-9)
    hi_m = math.floor(hi * n + 1e-9)
    return range(max(lo_m, 0), min(hi_m, n) + 1)


def _log_window_count_full(k: int, n: int, lo: float, hi: float) -> float:
    """log of the number of length-n words over k symbols whose count of one
    fixed symbol m satisfies m/n in [lo, hi]."""
    other = math.log(k - 1) if k > 1 else _LOG_EMPTY
    terms = []
    for m in _count_range(n, lo, hi):
        t = _log_binom(n, m)
        if m < n:
            t += (n - m) * other if k > 1 else _LOG_EMPTY
        terms.append(t)
    return _logsumexp(terms)


def _log_oscillation_count(k: int, depth: int, windows) -> float:
    """Log count of words whose running symbol frequency passes through each
    window at its scale, free beyond the last scale."""
    other = math.log(k - 1) if k > 1 else _LOG_EMPTY
    prev_n = 0
    prev = {0: 0.0}                     # count-at-boundary -> log ways
    for n_j, lo, hi in windows:
        if n_j > depth:
            raise ValueError("window scale exceeds the requested depth")
        allowed = _count_range(n_j, lo, hi)
        step = n_j - prev_n
        nxt = {}
        for m2 in allowed:
            terms = []
            for m1, lw in prev.items():
                d = m2 - m1
                if d < 0 or d > step:
                    continue
                t = lw + _log_binom(step, d)
                if step - d > 0:
                    t += (step - d) * other if k > 1 else _LOG_EMPTY
                terms.append(t)
            v = _logsumexp(terms)
            if v > _LOG_EMPTY:
                nxt[m2] = v
        if not nxt:
            return _LOG_EMPTY
        prev, prev_n = nxt, n_j
    tail = (depth - prev_n) * math.log(k)
    return _logsumexp(list(prev.values())) + tail


def _markov_state_log_counts(system: MarkovShift, n: int) -> np.ndarray:
    """log of the number of admissible length-n words ending in each state."""
    A = system.adjacency_array().astype(float)
    v = np.ones(system.k)
    scale = 0.0
    for _ in range(n - 1):
        v = v @ A
        m = v.max()
        if m <= 0:
            return np.full(system.k, _LOG_EMPTY)
        v /= m
        scale += math.log(m)
    with np.errstate(divide="ignore"):
        return np.where(v > 0, np.log(np.maximum(v, 1e-300)) + scale, _LOG_EMPTY)


def _markov_window_log_counts(system: MarkovShift, n: int, symbol: int,
                              lo: float, hi: float) -> np.ndarray:
    """Per-end-state log counts of admissible words with the symbol frequency
    in the window.  O(n^2 k^2), fine for the depths used on vertex shifts."""
    k = system.k
    A = system.adjacency
    L = np.full((k, n + 1), _LOG_EMPTY)
    for s in range(k):
        L[s, 1 if s == symbol else 0] = 0.0
    for _ in range(n - 1):
        nxt = np.full((k, n + 1), _LOG_EMPTY)
        for s in range(k):
            for s2 in range(k):
                if A[s][s2] == 0:
                    continue
                if s2 == symbol:
                    nxt[s2, 1:] = np.logaddexp(nxt[s2, 1:], L[s, :-1])
                else:
                    nxt[s2, :] = np.logaddexp(nxt[s2, :], L[s, :])
        L = nxt
    allowed = list(_count_range(n, lo, hi))
    out = np.full(k, _LOG_EMPTY)
    for s in range(k):
        out[s] = _logsumexp([L[s, m] for m in allowed])
    return out


# groups: list of (log_count, span) pairs; the critical alpha solves
# sum count_i * exp(-alpha * span_i) = 1


def _critical_alpha(groups, alpha_tol: float = 1e-12) -> float:
    groups = [(lc, sp) for lc, sp in groups if lc > _LOG_EMPTY and math.isfinite(sp)]
    if not groups:
        return 0.0
    if len(groups) == 1:
        lc, sp = groups[0]
        return max(lc / sp, 0.0)
    hi = max(max(lc / sp for lc, sp in groups), 0.0) + 1.0
    lo = 0.0
    if _logsumexp([lc for lc, _ in groups]) <= 0.0:
        return 0.0
    for _ in range(200):
        if hi - lo <= alpha_tol:
            break
        mid = 0.5 * (lo + hi)
        s = _logsumexp([lc - mid * sp for lc, sp in groups])
        if s > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _map_groups(system, subset, depth: int):
    """(log_count, span) groups for the depth-n cylinder cover of the subset,
    plus flags."""
    flags = []
    if isinstance(system, FullShift):
        k = system.k
        if isinstance(subset, WholeSpace):
            return [(depth * math.log(k), float(depth))], flags
        if isinstance(subset, FrequencyWindow):
            if subset.component is not None:
                raise ValueError("component windows need a disjoint union")
            lc = _log_window_count_full(k, depth, subset.lo, subset.hi)
            if lc == _LOG_EMPTY:
                flags.append("empty-cover")
            return [(lc, float(depth))], flags
        if isinstance(subset, OscillationWindows):
            lc = _log_oscillation_count(k, depth, subset.windows)
            if lc == _LOG_EMPTY:
                flags.append("empty-cover")
            return [(lc, float(depth))], flags
        if isinstance(subset, SampleCloud):
            flags.append("upper-bound-only")
            return [(math.log(_distinct_prefixes(subset, depth)), float(depth))], flags
    if isinstance(system, MarkovShift):
        cap = system.k + 1
        spans = [
            float(depth + _forced_extension(system.adjacency, s, cap))
            for s in range(system.k)
        ]
        if isinstance(subset, WholeSpace):
            lcs = _markov_state_log_counts(system, depth)
        elif isinstance(subset, FrequencyWindow):
            if subset.component is not None:
                raise ValueError("component windows need a disjoint union")
            lcs = _markov_window_log_counts(system, depth, subset.symbol, subset.lo, subset.hi)
        elif isinstance(subset, SampleCloud):
            flags.append("upper-bound-only")
            return [(math.log(_distinct_prefixes(subset, depth)), float(depth))], flags
        else:
            raise TypeError(
                f"no counting backend for {type(subset).__name__} on a vertex shift"
            )
        if all(lc == _LOG_EMPTY for lc in lcs):
            flags.append("empty-cover")
        return list(zip(lcs, spans)), flags
    if isinstance(system, DisjointUnion):
        return _union_groups(system, subset, depth)
    raise TypeError(f"no cylinder backend for {type(system).__name__}")


def _union_groups(system: DisjointUnion, subset, depth: int):
    flags = []
    if isinstance(subset, WholeSpace):
        gl, fl = _map_groups(system.left, WholeSpace(), depth)
        gr, fr = _map_groups(system.right, WholeSpace(), depth)
        return gl + gr, flags + fl + fr
    if isinstance(subset, ComponentWindow):
        groups = []
        if subset.lo <= 0.0:
            g, f = _map_groups(system.left, WholeSpace(), depth)
            groups += g
            flags += f
        if subset.hi >= 1.0:
            g, f = _map_groups(system.right, WholeSpace(), depth)
            groups += g
            flags += f
        if not groups:
            flags.append("empty-cover")
        return groups, flags
    if isinstance(subset, FrequencyWindow):
        if subset.component is None:
            raise ValueError("frequency windows on a disjoint union need a component tag")
        side = system.side(subset.component)
        inner = FrequencyWindow(subset.symbol, subset.lo, subset.hi)
        return _map_groups(side, inner, depth)
    if isinstance(subset, SampleCloud):
        return [(math.log(_distinct_prefixes(subset, depth)), float(depth))], ["upper-bound-only"]
    raise TypeError(f"no counting backend for {type(subset).__name__} on a disjoint union")


def _distinct_prefixes(subset: SampleCloud, depth: int) -> int:
    seen = set()
    for p in subset.points:
        if not p.is_symbolic:
            raise TypeError("sample-cloud backend needs symbolic points")
        seen.add((p.component,) + tuple(int(s) for s in p.prefix(depth)))
    return len(seen)


def _integer_stride(system: TimeTMap, strict: bool = True):
    """The map time as a whole number of roof crossings, or None when the
    time is fractional (only allowed with strict=False)."""
    flow = system.flow
    roof = flow.roof
    if roof.depth > 0:
        raise TypeError("time-t maps are handled for word-independent roofs only")
    m = system.t / roof.roof_max
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        if strict:
            raise ValueError("the map time must be a positive multiple of the roof height")
        if system.t <= 0:
            raise ValueError("the map time must be positive")
        return None
    return int(round(m))


# ---------------------------------------------------------------------------
# entropy estimates


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    lower: float
    upper: float
    depths: Tuple[int, ...]
    alphas: Tuple[float, ...]
    flags: Tuple[str, ...] = ()
    details: Optional[dict] = field(default=None, compare=False)


_DEFAULT_DEPTHS = (16, 24, 36, 54, 80, 120)


def _finish(depths, alphas, flags, details=None) -> EntropyEstimate:
    tail = alphas[-3:] if len(alphas) >= 3 else alphas
    return EntropyEstimate(
        value=alphas[-1], lower=min(tail), upper=max(tail),
        depths=tuple(depths), alphas=tuple(alphas),
        flags=tuple(dict.fromkeys(flags)), details=details,
    )


def bowen_entropy_symbolic(system, subset=WholeSpace(),
                           depths: Optional[Sequence[int]] = None,
                           alpha_tol: float = 1e-12) -> EntropyEstimate:
    """Entropy of the subset under a discrete system, from the critical
    exponent of the cylinder covers at each refinement depth.  The reported
    value is the deepest critical exponent; lower/upper give the spread over
    the last three depths (a stability report, not a certificate)."""
    if isinstance(system, (CircleRotation,)) or (
        isinstance(system, TimeTMap)
        and isinstance(system.flow, (CircleRotationFlow, TorusTranslation))
    ):
        return EntropyEstimate(0.0, 0.0, 0.0, (), (0.0,), ("zero-expansion",))
    if isinstance(system, CircleMult):
        return _mult_entropy(system, subset, depths)
    if isinstance(system, TimeTMap) and isinstance(system.flow, Suspension):
        roof = system.flow.roof
        if roof.depth > 0:
            raise TypeError("time-t maps are handled for word-independent roofs only")
        c = roof.roof_max
        stride = _integer_stride(system, strict=False)
        inner = system.flow.base
        depths = tuple(depths) if depths else _DEFAULT_DEPTHS
        alphas, flags = [], []
        for n in depths:
            groups, f = _map_groups(inner, subset, n)
            if stride is not None:
                # t is a whole number of roofs: the map is a shift power
                scaled = [(lc, math.ceil(sp / stride)) for lc, sp in groups]
            else:
                # fractional time: count map steps until the flow box escapes
                scaled = [
                    (lc, max(math.ceil((sp * c + 0.25 * c - hi) / system.t), 1))
                    for lc, sp in groups
                    for hi in (0.5 * c, c)
                ]
            alphas.append(_critical_alpha(scaled, alpha_tol))
            flags += f
        return _finish(depths, alphas, flags)
    if not symbolic_kind(system):
        raise TypeError(f"no entropy backend for {type(system).__name__}")
    depths = tuple(depths) if depths else _DEFAULT_DEPTHS
    alphas, flags = [], []
    for n in depths:
        groups, f = _map_groups(system, subset, n)
        alphas.append(_critical_alpha(groups, alpha_tol))
        flags += f
    return _finish(depths, alphas, flags)


def _mult_entropy(system: CircleMult, subset, depths) -> EntropyEstimate:
    if not isinstance(subset, WholeSpace):
        raise TypeError("circle multiplication entropy is implemented for the whole space")
    depths = tuple(depths) if depths else _DEFAULT_DEPTHS
    # n-adic arcs at depth j: n^j of them, each surviving j - O(1) steps
    slack = max(1, math.ceil(math.log(4.0) / math.log(system.n)))
    alphas = [
        _critical_alpha([(j * math.log(system.n), float(max(j - slack, 1)))])
        for j in depths
    ]
    return _finish(depths, alphas, [])


def bowen_entropy_flow(flow, subset=WholeSpace(),
                       depths: Optional[Sequence[int]] = None) -> EntropyEstimate:
    """Entropy of the subset under a flow, per unit time.

    Rotation-type flows are isometric: every span is infinite and the value
    is exactly 0.  Suspensions with word-independent roofs are covered by
    cylinder-times-half-roof flow boxes whose spans come from the rolled-out
    box geometry; the critical exponent then carries units of 1/time."""
    if isinstance(flow, (CircleRotationFlow, TorusTranslation)):
        return EntropyEstimate(0.0, 0.0, 0.0, (), (0.0,), ("zero-expansion",))
    if not isinstance(flow, Suspension):
        raise TypeError(f"no flow entropy backend for {type(flow).__name__}")
    roof = flow.roof
    if roof.depth > 0:
        raise TypeError("flow entropy is implemented for word-independent roofs only")
    c = roof.roof_max
    depths = tuple(depths) if depths else _DEFAULT_DEPTHS
    alphas, flags = [], []
    for n in depths:
        groups, f = _map_groups(flow.base, subset, n)
        boxed = []
        for lc, sp in groups:
            for hi in (0.5 * c, c):
                boxed.append((lc, sp * c + 0.25 * c - hi))
        alphas.append(_critical_alpha(boxed))
        flags += f
    details = {"time_scale": c}
    return _finish(depths, alphas, flags, details)


# ---------------------------------------------------------------------------
# exact counting route (big integers; independent of the float backends)


@dataclass(frozen=True)
class WordCount:
    depth: int
    count: int
    rate: float            # log(count)/depth, 0 for an empty count


def word_count_rate(system, subset, depth: int) -> WordCount:
    """Exact number of depth-n cylinders meeting the subset, by integer
    arithmetic only.  This is the oracle route the float backends are tested
    against; keep it free of floating-point counting."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    count = _exact_count(system, subset, depth)
    rate = math.log(count) / depth if count > 0 else 0.0
    return WordCount(depth, count, rate)


def _exact_count(system, subset, depth: int) -> int:
    if isinstance(system, FullShift):
        k = system.k
        if isinstance(subset, WholeSpace):
            return k ** depth
        if isinstance(subset, FrequencyWindow):
            return sum(
                math.comb(depth, m) * (k - 1) ** (depth - m)
                for m in _count_range(depth, subset.lo, subset.hi)
            )
        if isinstance(subset, OscillationWindows):
            return _exact_oscillation_count(k, depth, subset.windows)
        if isinstance(subset, SampleCloud):
            return _distinct_prefixes(subset, depth)
    if isinstance(system, MarkovShift):
        if isinstance(subset, WholeSpace):
            return _exact_markov_count(system, depth)
        if isinstance(subset, FrequencyWindow):
            if depth > 400:
                raise ValueError("exact windowed Markov counts are limited to depth 400")
            return _exact_markov_window_count(system, depth, subset)
        if isinstance(subset, SampleCloud):
            return _distinct_prefixes(subset, depth)
    if isinstance(system, DisjointUnion):
        if isinstance(subset, WholeSpace):
            return _exact_count(system.left, subset, depth) + _exact_count(system.right, subset, depth)
        if isinstance(subset, ComponentWindow):
            total = 0
            if subset.lo <= 0.0:
                total += _exact_count(system.left, WholeSpace(), depth)
            if subset.hi >= 1.0:
                total += _exact_count(system.right, WholeSpace(), depth)
            return total
        if isinstance(subset, FrequencyWindow):
            if subset.component is None:
                raise ValueError("frequency windows on a disjoint union need a component tag")
            side = system.side(subset.component)
            return _exact_count(side, FrequencyWindow(subset.symbol, subset.lo, subset.hi), depth)
        if isinstance(subset, SampleCloud):
            return _distinct_prefixes(subset, depth)
    raise TypeError(
        f"no exact count for {type(subset).__name__} on {type(system).__name__}"
    )


def _exact_markov_count(system: MarkovShift, depth: int) -> int:
    counts = [1] * system.k
    A = system.adjacency
    for _ in range(depth - 1):
        counts = [
            sum(counts[i] for i in range(system.k) if A[i][j]) for j in range(system.k)
        ]
    return sum(counts)


def _exact_markov_window_count(system: MarkovShift, depth: int, subset: FrequencyWindow) -> int:
    k = system.k
    A = system.adjacency
    table = [[0] * (depth + 1) for _ in range(k)]
    for s in range(k):
        table[s][1 if s == subset.symbol else 0] = 1
    for _ in range(depth - 1):
        nxt = [[0] * (depth + 1) for _ in range(k)]
        for s in range(k):
            row = table[s]
            for s2 in range(k):
                if not A[s][s2]:
                    continue
                tgt = nxt[s2]
                if s2 == subset.symbol:
                    for m in range(depth):
                        if row[m]:
                            tgt[m + 1] += row[m]
                else:
                    for m in range(depth + 1):
                        if row[m]:
                            tgt[m] += row[m]
        table = nxt
    return sum(
        table[s][m] for s in range(k) for m in _count_range(depth, subset.lo, subset.hi)
    )


def _exact_oscillation_count(k: int, depth: int, windows) -> int:
    prev = {0: 1}
    prev_n = 0
    for n_j, lo, hi in windows:
        if n_j > depth:
            raise ValueError("window scale exceeds the requested depth")
        step = n_j - prev_n
        nxt = {}
        for m2 in _count_range(n_j, lo, hi):
            total = 0
            for m1, ways in prev.items():
                d = m2 - m1
                if 0 <= d <= step:
                    total += ways * math.comb(step, d) * (k - 1) ** (step - d)
            if total:
                nxt[m2] = total
        if not nxt:
            return 0
        prev, prev_n = nxt, n_j
    return sum(prev.values()) * k ** (depth - prev_n)


# ---------------------------------------------------------------------------
# spanning-growth route


def spanning_entropy(system, subset=WholeSpace(),
                     depths: Optional[Sequence[int]] = None,
                     resolution_bits: int = 6,
                     budget: int = 100_000) -> EntropyEstimate:
    """Entropy from the growth rate of minimal (n, eps)-spanning sets at
    eps = 2**-resolution_bits.  On a shift space every (n, eps)-ball is a
    cylinder of length n + resolution_bits, so the minimal spanning count is
    the exact word count at that depth; the growth rate is the slope of its
    logarithm in n, fitted by least squares.  Isometric circle systems have
    n-independent spanning counts, so their rate is exactly 0.  Independent
    of the critical-exponent route."""
    if isinstance(system, CircleRotation) or (
        isinstance(system, TimeTMap)
        and isinstance(system.flow, (CircleRotationFlow, TorusTranslation))
    ):
        if not isinstance(subset, (WholeSpace, SampleCloud)):
            raise TypeError("rotation spanning counts cover the whole space or a cloud")
        # orbit metric equals the base metric, so one eps-grid spans every n
        eps = 2.0 ** -resolution_bits
        count = math.ceil(1.0 / (2.0 * eps))
        depths = tuple(depths) if depths else (20, 30, 40, 50, 60)
        per_depth = tuple(math.log(count) / n for n in depths)
        return EntropyEstimate(
            value=0.0, lower=0.0, upper=max(per_depth),
            depths=tuple(depths), alphas=per_depth,
            flags=("zero-expansion",), details={"resolution_bits": resolution_bits},
        )
    if not symbolic_kind(system):
        raise TypeError("the spanning route is implemented for shift spaces")
    depths = tuple(depths) if depths else (20, 30, 40, 50, 60)
    if max(depths) + resolution_bits > budget:
        raise BudgetExhausted("spanning depth grid exceeds the counting budget")
    if len(depths) < 2:
        raise ValueError("need at least two depths to fit a growth rate")
    m = resolution_bits
    logs = []
    for n in depths:
        count = _exact_count(system, subset, n + m)
        if count == 0:
            return EntropyEstimate(0.0, 0.0, 0.0, tuple(depths), (0.0,), ("empty-cover",))
        logs.append(_log_of_big(count))
    xs = np.asarray(depths, dtype=float)
    ys = np.asarray(logs)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    spread = float(np.abs(resid).max())
    per_depth = tuple(float(y / (x + m)) for x, y in zip(xs, ys))
    return EntropyEstimate(
        value=float(slope), lower=float(slope - spread), upper=float(slope + spread),
        depths=tuple(depths), alphas=per_depth,
        details={"resolution_bits": m},
    )


def _log_of_big(count: int) -> float:
    # log of a possibly huge integer without overflowing float conversion
    if count.bit_length() <= 900:
        return math.log(count)
    shift = count.bit_length() - 64
    return math.log(count >> shift) + shift * math.log(2.0)
