"""Orbit averages along checkpoint schedules, empirical measures, and the
classification of points as generic / not generic / irregular.

Map averages are computed in one vectorised pass per orbit (cumulative sums
of the observable along the materialised orbit), so a whole geometric
schedule of checkpoints costs the same as its largest entry.  Flow averages
are exact: closed-form antiderivatives on rotation flows, and a
segment-by-segment decomposition under the roof on suspensions.

Classification never trusts a single horizon.  A point is declared generic
for a measure only when every test observable sits within tolerance at the
last two checkpoints; it is declared not generic only when some observable
is far (three tolerances) at both.  Everything in between is inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .systems import (
    BudgetExhausted, CircleMult, CircleRotation, CircleRotationFlow,
    Coordinate, DisjointUnion, FullShift, MarkovShift, Point, Suspension,
    TimeTMap, TorusTranslation, alphabet_of, symbolic_kind, time_t_map,
)
from .measures import (
    Atomic, Constant, CylinderIndicator, FiberProfile, Harmonic,
    SymbolFrequency, TestFamily, evaluate, evaluate_on_circle, integrate,
)

__all__ = [
    "Schedule", "Verdict", "LimitClass", "birkhoff_average_map",
    "birkhoff_profile", "birkhoff_average_flow", "flow_average_profile",
    "empirical_measure", "limit_point_set", "classify_generic",
    "classify_irregular",
]


@dataclass(frozen=True)
class Schedule:
    """Ascending checkpoints at which running averages are reported."""

    checkpoints: Tuple[float, ...]

    def __post_init__(self):
        cps = self.checkpoints
        if not cps or any(c <= 0 for c in cps):
            raise ValueError("checkpoints must be positive")
        if any(a >= b for a, b in zip(cps[:-1], cps[1:])):
            raise ValueError("checkpoints must be strictly increasing")

    @classmethod
    def geometric(cls, start, stop, ratio: float = 2.0) -> "Schedule":
        if ratio <= 1.0:
            raise ValueError("ratio must exceed 1")
        out = [start]
        while out[-1] * ratio < stop:
            out.append(out[-1] * ratio)
        out.append(stop)
        if isinstance(start, int) and isinstance(stop, int):
            out = [int(c) if float(c).is_integer() else c for c in out]
        return cls(tuple(out))

    @classmethod
    def for_map(cls) -> "Schedule":
        return cls.geometric(1_000, 1_000_000, 2.0)

    @classmethod
    def for_flow(cls) -> "Schedule":
        return cls.geometric(100.0, 10_000.0, 2.0)

    def integer_checkpoints(self) -> Tuple[int, ...]:
        return tuple(int(round(c)) for c in self.checkpoints)

    @property
    def horizon(self):
        return self.checkpoints[-1]


@dataclass(frozen=True)
class Verdict:
    label: str                       # Generic / NotGeneric / Regular / Irregular / Inconclusive
    gap: float
    witness: Optional[object] = None
    checkpoint: Optional[float] = None
    profile: Optional[tuple] = None  # per-checkpoint diagnostics when requested


# ---------------------------------------------------------------------------
# orbit materialisation


def _orbit_coords(system, x: Point, n: int) -> np.ndarray:
    if isinstance(system, CircleRotation):
        return (x.coords[0] + system.theta * np.arange(n)) % 1.0
    if isinstance(system, CircleMult):
        # chaotic; this is the usual shadow orbit in double precision
        out = np.empty(n)
        c = x.coords[0]
        for j in range(n):
            out[j] = c
            c = (c * system.n) % 1.0
        return out
    if isinstance(system, TimeTMap) and isinstance(system.flow, (CircleRotationFlow, TorusTranslation)):
        speed = 1.0 if isinstance(system.flow, CircleRotationFlow) else system.flow.velocity[0]
        return (x.coords[0] + system.t * speed * np.arange(n)) % 1.0
    raise TypeError(f"no coordinate orbit for {type(system).__name__}")


def _symbol_view(system, x: Point, n: int, extra: int):
    """(symbols array, base-index array) for a symbolic orbit.

    idx[j] is the base coordinate the orbit reads at map step j: j itself for
    shifts, and the roof-crossing count for time-t maps of suspensions, where
    one application may consume a whole or a fractional number of base steps.
    """
    if symbolic_kind(system):
        return np.asarray(x.prefix(n + extra)), np.arange(n)
    if isinstance(system, TimeTMap) and isinstance(system.flow, Suspension):
        roof = system.flow.roof
        f0 = x.fiber if x.fiber is not None else 0.0
        times = f0 + system.t * np.arange(n, dtype=float)
        if roof.depth == 0:
            idx = np.floor(times / roof.roof_max + 1e-12).astype(np.int64)
        else:
            crossings = int(times[-1] / roof.roof_min) + 2
            vals = roof.values_along(np.asarray(x.prefix(crossings + roof.depth)), crossings)
            entry_times = np.concatenate(([0.0], np.cumsum(vals)))
            idx = np.searchsorted(entry_times, times, side="right") - 1
        return np.asarray(x.prefix(int(idx[-1]) + extra + 1)), idx
    raise TypeError(f"no symbolic orbit for {type(system).__name__}")


def _is_symbolic_path(system, x: Point) -> bool:
    if symbolic_kind(system):
        return True
    return isinstance(system, TimeTMap) and isinstance(system.flow, Suspension)


def _match_array(arr: np.ndarray, word, idx: np.ndarray) -> np.ndarray:
    """Boolean hits of `word` read at positions idx[j]."""
    hit = arr[idx] == word[0]
    for i, s in enumerate(word[1:], start=1):
        hit = hit & (arr[idx + i] == s)
    return hit


def _word_of(phi):
    if isinstance(phi, CylinderIndicator):
        return phi.word, phi.component
    if isinstance(phi, SymbolFrequency):
        return (phi.symbol,), phi.component
    return None, None


# ---------------------------------------------------------------------------
# map averages


def birkhoff_profile(system, x: Point, phi, schedule: Schedule) -> np.ndarray:
    """Running averages of phi along the orbit at each checkpoint."""
    cps = schedule.integer_checkpoints()
    n_max = cps[-1]
    if isinstance(phi, Constant):
        return np.full(len(cps), phi.value)
    if _is_symbolic_path(system, x):
        word, comp = _word_of(phi)
        if word is None:
            raise TypeError(f"{type(phi).__name__} does not read symbols")
        if comp is not None and x.component != comp:
            return np.zeros(len(cps))
        arr, idx = _symbol_view(system, x, n_max, len(word))
        hits = _match_array(arr, word, idx)
        cs = np.cumsum(hits, dtype=float)
        return np.array([cs[n - 1] / n for n in cps])
    coords = _orbit_coords(system, x, n_max)
    values = evaluate_on_circle(phi, coords)
    cs = np.cumsum(values)
    return np.array([cs[n - 1] / n for n in cps])


def birkhoff_average_map(system, x: Point, phi, n: int) -> float:
    """Average of phi over the first n points of the orbit."""
    if n < 1:
        raise ValueError("need n >= 1")
    return float(birkhoff_profile(system, x, phi, Schedule((n,)))[0])


def _family_profiles(system, x: Point, fam: TestFamily, schedule: Schedule) -> np.ndarray:
    """Matrix A[c, i]: average of observable i at checkpoint c.

    Symbolic families share one pass: sliding word codes at the maximal depth
    are histogrammed once per checkpoint and marginalised down to each word
    length, so a hundred cylinder observables cost little more than one.
    """
    cps = schedule.integer_checkpoints()
    obs = fam.observables
    if _is_symbolic_path(system, x):
        return _family_profiles_symbolic(system, x, obs, cps)
    n_max = cps[-1]
    coords = _orbit_coords(system, x, n_max)
    out = np.empty((len(cps), len(obs)))
    for i, phi in enumerate(obs):
        cs = np.cumsum(evaluate_on_circle(phi, coords))
        out[:, i] = [cs[n - 1] / n for n in cps]
    return out


def _family_profiles_symbolic(system, x, obs, cps) -> np.ndarray:
    n_max = cps[-1]
    words = []
    for phi in obs:
        word, comp = _word_of(phi)
        if word is None:
            raise TypeError(f"{type(phi).__name__} does not read symbols")
        words.append((word, comp))
    depth = max(len(w) for w, _ in words)
    k = _alphabet_for_profiles(system, x)
    arr, idx = _symbol_view(system, x, n_max, depth)
    codes = np.zeros(n_max, dtype=np.int64)
    for i in range(depth):
        codes = codes * k + arr[idx + i]
    out = np.empty((len(cps), len(obs)))
    for ci, n in enumerate(cps):
        counts = np.bincount(codes[:n], minlength=k ** depth).astype(float)
        per_depth = {depth: counts}
        for d in range(depth - 1, 0, -1):
            per_depth[d] = per_depth[d + 1].reshape(-1, k).sum(axis=1)
        for oi, (word, comp) in enumerate(words):
            if comp is not None and x.component != comp:
                out[ci, oi] = 0.0
                continue
            code = 0
            ok = True
            for s in word:
                if s < 0 or s >= k:
                    ok = False
                    break
                code = code * k + s
            out[ci, oi] = per_depth[len(word)][code] / n if ok else 0.0
    return out


def _alphabet_for_profiles(system, x: Point) -> int:
    if isinstance(system, DisjointUnion):
        return alphabet_of(system.side(x.component))
    if isinstance(system, TimeTMap):
        base = system.flow.base
        if isinstance(base, DisjointUnion):
            return alphabet_of(base.side(x.component))
        return alphabet_of(base)
    return alphabet_of(system)


# ---------------------------------------------------------------------------
# flow averages


def birkhoff_average_flow(flow, x: Point, phi, T: float, receipt: Optional[dict] = None) -> float:
    """(1/T) * integral of phi along the flow orbit of x over [0, T].  Exact
    for harmonics under rotation flows and for symbolic/fiber observables
    under suspensions."""
    if T <= 0:
        raise ValueError("need T > 0")
    if isinstance(phi, Constant):
        return phi.value
    if isinstance(flow, (CircleRotationFlow, TorusTranslation)):
        speed = 1.0 if isinstance(flow, CircleRotationFlow) else flow.velocity[0]
        if isinstance(phi, Harmonic):
            return _harmonic_line_average(phi, x.coords[0], speed, T)
        raise TypeError(f"{type(phi).__name__} is not a rotation-flow observable")
    if isinstance(flow, Suspension):
        return _suspension_flow_average(flow, x, phi, T, receipt)
    raise TypeError(f"no flow average for {type(flow).__name__}")


def _harmonic_line_average(phi: Harmonic, x0: float, speed: float, T: float) -> float:
    q = phi.frequency
    w = 2.0 * math.pi * q
    a = w * (x0 + phi.offset)
    if abs(speed) < 1e-15:
        return math.cos(a) if phi.phase == "cos" else math.sin(a)
    b = w * speed
    if phi.phase == "cos":
        return (math.sin(a + b * T) - math.sin(a)) / (b * T)
    return (math.cos(a) - math.cos(a + b * T)) / (b * T)


def _suspension_flow_average(flow: Suspension, x: Point, phi, T: float, receipt) -> float:
    roof = flow.roof
    u0 = x.fiber if x.fiber is not None else 0.0
    count = int(T / roof.roof_min) + 3
    roofs = roof.values_along(np.asarray(x.prefix(count + roof.depth)), count)
    if u0 < 0 or u0 >= roofs[0]:
        raise ValueError("fiber coordinate out of range")
    # segment j spends time (start_j, end_j) of fiber in copy j of the base
    starts = np.zeros(count)
    starts[0] = u0
    lengths = roofs - starts
    ends = np.cumsum(lengths)
    last = int(np.searchsorted(ends, T, side="left"))
    if last >= count:
        raise BudgetExhausted("flow horizon exceeds the prepared roof window")
    base_phi = phi.base if isinstance(phi, FiberProfile) else phi
    word, comp = _word_of(base_phi) if not isinstance(base_phi, Constant) else ((), None)
    if word is None:
        raise TypeError(f"{type(phi).__name__} is not a suspension observable")
    if comp is not None and x.component != comp:
        return 0.0
    if isinstance(base_phi, Constant):
        base_vals = np.full(last + 1, base_phi.value)
    elif len(word) == 0:
        base_vals = np.ones(last + 1)
    else:
        arr = np.asarray(x.prefix(last + 1 + len(word)))
        base_vals = _match_array(arr, word, np.arange(last + 1)).astype(float)
    seg_lo = starts[:last + 1].copy()
    seg_hi = roofs[:last + 1].copy()
    seg_hi[last] = seg_lo[last] + (T - (ends[last] - lengths[last]))
    if isinstance(phi, FiberProfile):
        vals = np.empty(last + 1)
        if last > 1:
            # every full sweep starts at fiber 0, so one integral per roof value
            uniq, inv = np.unique(seg_hi[1:last], return_inverse=True)
            vals[1:last] = np.array([phi.profile_integral(0.0, h) for h in uniq])[inv]
        vals[0] = phi.profile_integral(seg_lo[0], seg_hi[0])
        if last > 0:
            vals[last] = phi.profile_integral(seg_lo[last], seg_hi[last])
        total = float(np.dot(base_vals, vals))
    else:
        total = float(np.dot(base_vals, seg_hi - seg_lo))
    if receipt is not None:
        receipt["segments"] = last + 1
    return total / T


def flow_average_profile(flow, x: Point, phi, schedule: Schedule) -> np.ndarray:
    return np.array([birkhoff_average_flow(flow, x, phi, T) for T in schedule.checkpoints])


# ---------------------------------------------------------------------------
# empirical measures and limit sets

_EMPIRICAL_KEY_DEPTH = 32
_EMPIRICAL_BUDGET = 1 << 17


def empirical_measure(system, x: Point, n: int) -> Atomic:
    """The orbit-average measure (1/n) * sum of point masses along the orbit,
    with visits merged when they agree to the resolution of the key (32
    symbols, or 1e-12 in coordinates)."""
    if n < 1:
        raise ValueError("need n >= 1")
    if _is_symbolic_path(system, x):
        arr, idx = _symbol_view(system, x, n, _EMPIRICAL_KEY_DEPTH)
        steps = np.diff(idx)
        if idx[0] != 0 or (steps.size and (steps != steps[0]).any()):
            # fractional strides revisit base coordinates at changing fibers;
            # the symbol-window key cannot tell those orbit points apart
            raise TypeError("empirical measures need whole-base-step orbits")
        windows = np.lib.stride_tricks.sliding_window_view(
            arr, _EMPIRICAL_KEY_DEPTH
        )[idx]
        uniq, first, counts = np.unique(
            windows, axis=0, return_index=True, return_counts=True
        )
        if len(uniq) > _EMPIRICAL_BUDGET:
            raise BudgetExhausted(
                f"empirical measure needs {len(uniq)} atoms (budget {_EMPIRICAL_BUDGET})"
            )
        pts = tuple(
            Point(x.rule, x.offset + int(idx[j]), x.component, x.fiber) for j in first
        )
        return Atomic(pts, tuple(counts / n))
    coords = _orbit_coords(system, x, n)
    keys = np.round(coords * 1e12).astype(np.int64)
    uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
    if len(uniq) > _EMPIRICAL_BUDGET:
        raise BudgetExhausted(
            f"empirical measure needs {len(uniq)} atoms (budget {_EMPIRICAL_BUDGET})"
        )
    pts = tuple(Point(Coordinate((coords[int(j)],))) for j in first)
    return Atomic(pts, tuple(counts / n))


@dataclass(frozen=True)
class LimitClass:
    """A cluster of checkpoint averages: one candidate limit measure, seen
    through the integrals of the test family."""

    integrals: Tuple[float, ...]
    checkpoints: Tuple[float, ...]

    def distance_to(self, other: Sequence[float], weights: np.ndarray) -> float:
        gaps = np.abs(np.asarray(self.integrals) - np.asarray(other))
        return float(np.dot(weights, gaps / (1.0 + gaps)))


def limit_point_set(system, x: Point, fam: TestFamily, schedule: Schedule = None,
                    tol: float = 0.01) -> Tuple[LimitClass, ...]:
    """Cluster the tail checkpoint averages by single linkage at `tol` (in
    the weighted family metric).  One cluster whose checkpoints extend to the
    horizon is the signature of a convergent (generic-type) orbit."""
    if schedule is None:
        schedule = Schedule.for_map()
    A = _profiles_any(system, x, fam, schedule)
    cps = schedule.checkpoints
    tail = len(cps) // 2
    A = A[tail:]
    cps = cps[tail:]
    w = fam.weights()
    m = len(cps)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            gaps = np.abs(A[i] - A[j])
            if float(np.dot(w, gaps / (1.0 + gaps))) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        integrals = tuple(np.mean([A[i] for i in members], axis=0))
        out.append(LimitClass(integrals, tuple(cps[i] for i in members)))
    out.sort(key=lambda c: c.checkpoints[-1], reverse=True)
    return tuple(out)


def _profiles_any(system, x, fam: TestFamily, schedule: Schedule) -> np.ndarray:
    if _is_flow(system):
        return np.stack([
            flow_average_profile(system, x, phi, schedule) for phi in fam.observables
        ], axis=1)
    return _family_profiles(system, x, fam, schedule)


def _is_flow(system) -> bool:
    return isinstance(system, (CircleRotationFlow, TorusTranslation, Suspension))


# ---------------------------------------------------------------------------
# classification


def classify_generic(system, x: Point, mu, fam: Optional[TestFamily] = None,
                     schedule: Optional[Schedule] = None, tol: float = 0.02,
                     keep_profile: bool = False) -> Verdict:
    """Is x generic for mu?  Answers only when the last two checkpoints agree:
    Generic when every observable is within tol at both, NotGeneric when some
    observable is at least 3*tol away at both (the first such observable in
    family order is the witness), Inconclusive otherwise."""
    if fam is None:
        fam = TestFamily.default_for(system)
    if schedule is None:
        schedule = Schedule.for_flow() if _is_flow(system) else Schedule.for_map()
    if len(schedule.checkpoints) < 2:
        raise ValueError("classification needs at least two checkpoints")
    A = _profiles_any(system, x, fam, schedule)
    targets = np.array([integrate(mu, phi) for phi in fam.observables])
    g_last = np.abs(A[-1] - targets)
    g_prev = np.abs(A[-2] - targets)
    gap = float(g_last.max())
    profile = tuple(map(tuple, A)) if keep_profile else None
    if (g_last < tol).all() and (g_prev < tol).all():
        return Verdict("Generic", gap, None, schedule.checkpoints[-1], profile)
    far = (g_last >= 3.0 * tol) & (g_prev >= 3.0 * tol)
    if far.any():
        i = int(np.argmax(far))
        return Verdict(
            "NotGeneric", float(g_last[i]), fam.observables[i],
            schedule.checkpoints[-1], profile,
        )
    return Verdict("Inconclusive", gap, None, schedule.checkpoints[-1], profile)


def classify_irregular(system, x: Point, phi, schedule: Optional[Schedule] = None,
                       tol: float = 0.02, keep_profile: bool = False) -> Verdict:
    """Does the average of phi along the orbit converge?  The oscillation of
    the running average over the tail half of the schedule decides: Regular
    below tol, Irregular above 3*tol, Inconclusive between."""
    if schedule is None:
        schedule = Schedule.for_flow() if _is_flow(system) else Schedule.for_map()
    if _is_flow(system):
        prof = flow_average_profile(system, x, phi, schedule)
    else:
        prof = birkhoff_profile(system, x, phi, schedule)
    tail = prof[len(prof) // 2:]
    osc = float(tail.max() - tail.min())
    out_profile = tuple(prof) if keep_profile else None
    last = schedule.checkpoints[-1]
    if osc > 3.0 * tol:
        return Verdict("Irregular", osc, phi, last, out_profile)
    if osc < tol:
        return Verdict("Regular", osc, None, last, out_profile)
    return Verdict("Inconclusive", osc, None, last, out_profile)
