"""Command line entry point: `ergode run <config.json>`.

One config file is one experiment.  The command writes
`<experiment_id>.csv` (and, for constructions, a point spec JSON) into the
output directory and prints a one-line summary.  Exit codes: 0 on success,
2 for any config problem, 3 when a computation budget was exhausted (the
partial CSV is still written, marked incomplete).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .systems import (
    BlockSchedule, BudgetExhausted, CircleRotationFlow, Coordinate,
    DisjointUnion, ExplicitWord, FullShift, Point, SeededIID, Suspension,
    TimeTMap, TorusTranslation, alphabet_of, random_point,
)
from .measures import (
    Bernoulli, Markov, Mixture, SymbolFrequency, TestFamily, integrate,
    metric_entropy, time_average_measure,
)
from .birkhoff import (
    Schedule, birkhoff_profile, classify_generic, classify_irregular,
    flow_average_profile, limit_point_set,
)
from .entropy import (
    ComponentWindow, FrequencyWindow, WholeSpace, bowen_entropy_flow,
    bowen_entropy_symbolic, spanning_entropy,
)
from .constructions import generic_point, glue_orbits, irregular_point
from .config import (
    COMMANDS, ConfigError, build_measure, build_mistake_function,
    build_observable, build_point, build_schedule, build_subset, build_system,
    config_digest, load_config, require,
)
from .reporting import Row, timed, write_csv

__all__ = ["main"]


def _is_flow(system) -> bool:
    return isinstance(system, (CircleRotationFlow, TorusTranslation, Suspension))


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _resolve_point(obj, system, rng):
    if obj.get("kind") == "random":
        return random_point(system, rng)
    return build_point(obj)


def _invariant_measure_for(system, mu):
    """Wrap a base measure so its integrals make sense under a flow."""
    if isinstance(system, Suspension) and isinstance(mu, (Bernoulli, Markov, Mixture)):
        return time_average_measure(system, mu, 16)
    return mu


def _point_json(p: Point) -> dict:
    rule = p.rule
    if isinstance(rule, BlockSchedule):
        out = {"kind": "block-schedule",
               "blocks": [[list(pat), reps] for pat, reps in rule.blocks]}
    elif isinstance(rule, ExplicitWord):
        out = {"kind": "explicit-word", "symbols": list(rule.symbols)}
    elif isinstance(rule, SeededIID):
        out = {"kind": "seeded-iid", "seed": rule.seed, "probs": list(rule.probs)}
    elif isinstance(rule, Coordinate):
        out = {"kind": "coordinate", "coords": list(rule.coords)}
    else:
        raise TypeError(f"cannot serialise rule {type(rule).__name__}")
    if p.offset:
        out["offset"] = p.offset
    if p.component is not None:
        out["component"] = p.component
    if p.fiber is not None:
        out["fiber"] = p.fiber
    return out


def _witness_name(obs) -> str:
    if obs is None:
        return ""
    return repr(obs)


# ---------------------------------------------------------------------------
# command handlers (each appends Row objects to `rows` as it goes)


def _cmd_entropy(cfg, ctx, rows):
    system = build_system(cfg["system"])
    subset = build_subset(cfg["subset"]) if "subset" in cfg else WholeSpace()
    depths = tuple(cfg["depths"]) if "depths" in cfg else None
    method = cfg.get("method", "caratheodory")
    eid = cfg["experiment_id"]
    params = {"subset": cfg.get("subset", {"kind": "whole"})["kind"]}
    if method in ("caratheodory", "both"):
        with timed() as t:
            est = (bowen_entropy_flow(system, subset, depths) if _is_flow(system)
                   else bowen_entropy_symbolic(system, subset, depths))
        p = dict(params)
        if est.flags:
            p["flags"] = list(est.flags)
        rows.append(Row(eid, "bowen_entropy", est.value, est.lower, est.upper, p, t.ms))
        if ctx["diagnostics"]:
            for d, a in zip(est.depths, est.alphas):
                rows.append(Row(eid, "alpha_at_depth", a, None, None,
                                {**params, "depth": d}, 0.0))
    if method in ("spanning", "both"):
        with timed() as t:
            est = spanning_entropy(system, subset, depths)
        rows.append(Row(eid, "spanning_entropy", est.value, est.lower, est.upper,
                        dict(params), t.ms))


def _cmd_birkhoff(cfg, ctx, rows):
    system = build_system(cfg["system"])
    point = _resolve_point(require(cfg, "point"), system, ctx["rng"])
    phi = build_observable(require(cfg, "observable"))
    schedule = build_schedule(cfg.get("schedule"), _is_flow(system))
    eid = cfg["experiment_id"]
    with timed() as t:
        prof = (flow_average_profile(system, point, phi, schedule)
                if _is_flow(system) else birkhoff_profile(system, point, phi, schedule))
    per = t.ms / len(prof)
    for c, v in zip(schedule.checkpoints, prof):
        rows.append(Row(eid, "birkhoff_average", float(v), None, None,
                        {"checkpoint": c}, per))


def _cmd_classify(cfg, ctx, rows):
    system = build_system(cfg["system"])
    point = _resolve_point(require(cfg, "point"), system, ctx["rng"])
    schedule = build_schedule(cfg.get("schedule"), _is_flow(system))
    tol = cfg.get("tolerance", 0.02)
    mode = cfg.get("mode", "generic")
    eid = cfg["experiment_id"]
    if mode == "generic":
        mu = _invariant_measure_for(system, build_measure(require(cfg, "measure")))
        fam = TestFamily.default_for(system, depth=cfg.get("family_depth", 4))
        with timed() as t:
            verdict = classify_generic(system, point, mu, fam, schedule, tol,
                                       keep_profile=ctx["diagnostics"])
    else:
        phi = build_observable(require(cfg, "observable"))
        with timed() as t:
            verdict = classify_irregular(system, point, phi, schedule, tol,
                                         keep_profile=ctx["diagnostics"])
    rows.append(Row(eid, "classification", verdict.gap, None, None,
                    {"label": verdict.label, "witness": _witness_name(verdict.witness),
                     "checkpoint": verdict.checkpoint, "tolerance": tol}, t.ms))
    if ctx["diagnostics"] and verdict.profile:
        for c, entry in zip(schedule.checkpoints, verdict.profile):
            v = float(np.max(entry)) if np.ndim(entry) else float(entry)
            rows.append(Row(eid, "profile_at_checkpoint", v, None, None,
                            {"checkpoint": c}, 0.0))


def _cmd_construct(cfg, ctx, rows):
    system = build_system(cfg["system"])
    what = require(cfg, "construction")
    eid = cfg["experiment_id"]
    out_path = os.path.join(ctx["out"], f"{eid}.point.json")
    if what == "generic-point":
        mu = build_measure(require(cfg, "measure"))
        kind = cfg.get("construction_kind", "deterministic-blocks")
        with timed() as t:
            p = generic_point(system, mu, kind, seed=ctx["seed"],
                              horizon=cfg.get("horizon", 1 << 21))
        verdict = classify_generic(system, p, mu,
                                   TestFamily.default_for(system, depth=4),
                                   build_schedule(cfg.get("schedule"), False),
                                   cfg.get("tolerance", 0.02))
        rows.append(Row(eid, "construction_gap", verdict.gap, None, None,
                        {"label": verdict.label, "kind": kind}, t.ms))
        _write_point(out_path, p)
        return
    if what == "irregular-point":
        with timed() as t:
            rec = irregular_point(
                system, cfg.get("symbol", 0), cfg.get("lo", 0.2), cfg.get("hi", 0.65),
                cfg.get("first_block", 8), cfg.get("block_ratio", 4),
                cfg.get("horizon", 1 << 21),
            )
        verdict = classify_irregular(system, rec.point,
                                     build_observable({"kind": "symbol-frequency",
                                                       "symbol": rec.symbol}),
                                     rec.schedule(), cfg.get("tolerance", 0.02))
        rows.append(Row(eid, "oscillation_gap", verdict.gap, None, None,
                        {"label": verdict.label,
                         "block_ends": list(rec.block_ends[:6])}, t.ms))
        _write_point(out_path, rec.point)
        return
    if what == "glued-orbit":
        segs = [(build_point(p), int(n)) for p, n in require(cfg, "segments")]
        g = build_mistake_function(cfg.get("mistake_function"))
        with timed() as t:
            glued = glue_orbits(system, segs, cfg.get("eps", 0.75), g)
        for i, (T, c) in enumerate(zip(glued.junction_times, glued.connector_lengths)):
            rows.append(Row(eid, "connector_length", float(c), None, None,
                            {"junction": i, "time": T}, 0.0))
        for i, m in enumerate(glued.segment_mismatches):
            rows.append(Row(eid, "segment_mismatches", float(m), None, None,
                            {"segment": i}, 0.0))
        rows.append(Row(eid, "within_budget", 1.0 if glued.within_budget else 0.0,
                        None, None, {}, t.ms))
        _write_point(out_path, glued.point)
        return
    raise ConfigError(f"unknown construction '{what}'")


def _write_point(path: str, p: Point) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_point_json(p), fh)
        fh.write("\n")


def _cmd_verify_thm_a(cfg, ctx, rows):
    flow = build_system(cfg["system"])
    if not isinstance(flow, Suspension):
        raise ConfigError("verify-thm-a expects a suspension flow system")
    subset = build_subset(cfg["subset"]) if "subset" in cfg else WholeSpace()
    depths = tuple(cfg["depths"]) if "depths" in cfg else (60, 120, 240)
    times = cfg.get("times", [0.5, 1.0, 2.0])
    eid = cfg["experiment_id"]
    with timed() as t:
        base_est = bowen_entropy_flow(flow, subset, depths)
    rows.append(Row(eid, "flow_entropy", base_est.value, base_est.lower,
                    base_est.upper, {}, t.ms))

    def at_time(tt):
        with timed() as tm:
            est = bowen_entropy_symbolic(TimeTMap(flow, tt), subset, depths)
        return tt, est, tm.ms

    scaled = []
    for tt, est, ms in _pmap(at_time, times, ctx["threads"]):
        scaled.append(est.value / tt)
        rows.append(Row(eid, "scaled_time_t_entropy", est.value / tt,
                        est.lower / tt, est.upper / tt, {"t": tt}, ms))
    dev = max(abs(s - base_est.value) for s in scaled)
    rows.append(Row(eid, "max_scaled_deviation", dev, None, None,
                    {"times": times}, 0.0))


def _cmd_verify_thm_b(cfg, ctx, rows):
    system = build_system(cfg["system"])
    mu = build_measure(require(cfg, "measure"))
    eid = cfg["experiment_id"]
    tol = cfg.get("tolerance", 0.02)
    depths = tuple(cfg["depths"]) if "depths" in cfg else (500, 1000, 2000)
    flow = _is_flow(system)
    inner = system.base if isinstance(system, Suspension) else system
    with timed() as t:
        h_mu = metric_entropy(mu, inner)
    rows.append(Row(eid, "metric_entropy", h_mu, h_mu, h_mu, {}, t.ms))
    if isinstance(mu, Mixture) and isinstance(inner, DisjointUnion):
        # nonergodic strict case: the generic set is empty
        window = ComponentWindow(0.25, 0.75)
        with timed() as t:
            est = (bowen_entropy_flow(system, window, depths) if flow
                   else bowen_entropy_symbolic(system, window, depths))
        rows.append(Row(eid, "generic_set_entropy", est.value, est.lower, est.upper,
                        {"flags": list(est.flags)}, t.ms))
        n_samples = cfg.get("sample_count", 100)
        fam = TestFamily.default_for(inner, depth=cfg.get("family_depth", 3))
        schedule = build_schedule(cfg.get("schedule"), False)

        def one(i):
            x = random_point(inner, np.random.default_rng(ctx["seed"] + i))
            return classify_generic(inner, x, mu, fam, schedule, tol)

        verdicts = _pmap(one, range(n_samples), ctx["threads"])
        bad = sum(1 for v in verdicts if v.label == "NotGeneric")
        rows.append(Row(eid, "not_generic_count", float(bad), None, None,
                        {"sample_count": n_samples}, 0.0))
        return
    # ergodic route: window the dominant symbol frequency around its mean
    if not isinstance(mu, (Bernoulli, Markov)):
        raise ConfigError("verify-thm-b handles Bernoulli, Markov, or the mixture case")
    delta = cfg.get("lo", 0.005)   # window half-width
    freq0 = (mu.probs[0] if isinstance(mu, Bernoulli) else mu.stationary[0])
    window = FrequencyWindow(0, max(freq0 - delta, 0.0), min(freq0 + delta, 1.0))
    with timed() as t:
        est = (bowen_entropy_flow(system, window, depths) if flow
               else bowen_entropy_symbolic(system, window, depths))
    scale = system.roof.roof_max if flow else 1.0
    rows.append(Row(eid, "generic_set_entropy_bound", est.value, est.lower, est.upper,
                    {"window_halfwidth": delta}, t.ms))
    rows.append(Row(eid, "entropy_vs_metric_gap", est.value * scale - h_mu,
                    None, None, {"tolerance": tol}, 0.0))


def _cmd_verify_irregular(cfg, ctx, rows):
    system = build_system(cfg["system"])
    eid = cfg["experiment_id"]
    with timed() as t:
        rec = irregular_point(
            system, cfg.get("symbol", 0), cfg.get("lo", 0.2), cfg.get("hi", 0.65),
            cfg.get("first_block", 8), cfg.get("block_ratio", 4),
            cfg.get("horizon", 1 << 21),
        )
    verdict = classify_irregular(
        system, rec.point,
        build_observable({"kind": "symbol-frequency", "symbol": rec.symbol}),
        rec.schedule(), cfg.get("tolerance", 0.02),
    )
    rows.append(Row(eid, "oscillation_gap", verdict.gap, None, None,
                    {"label": verdict.label}, t.ms))
    depth = max(tuple(cfg["depths"])) if "depths" in cfg else 2000
    windows = rec.oscillation_windows(scales=4, slack=0.1)
    s_max = windows.windows[-1][0]
    depths = tuple(sorted({max(d, s_max) for d in (depth // 4, depth // 2, depth)}))
    with timed() as t:
        est = bowen_entropy_symbolic(system, windows, depths=depths)
    k = alphabet_of(system)
    rows.append(Row(eid, "irregular_set_entropy", est.value, est.lower, est.upper,
                    {"depth": depth}, t.ms))
    rows.append(Row(eid, "entropy_fraction_of_max", est.value / math.log(k),
                    None, None, {}, 0.0))


def _cmd_verify_inclusions(cfg, ctx, rows):
    system = build_system(cfg["system"])
    if isinstance(system, Suspension):
        _inclusions_flow_suite(cfg, ctx, rows, system)
        return
    mu = build_measure(require(cfg, "measure"))
    eid = cfg["experiment_id"]
    tol = cfg.get("tolerance", 0.02)
    n_samples = cfg.get("sample_count", 50)
    fam = TestFamily.default_for(system, depth=cfg.get("family_depth", 4))
    schedule = build_schedule(cfg.get("schedule"), False)

    def mu_sample(i):
        x = _sample_from(system, mu, ctx["seed"] + i)
        return classify_generic(system, x, mu, fam, schedule, tol)

    verdicts = _pmap(mu_sample, range(n_samples), ctx["threads"])
    counts = {"Generic": 0, "NotGeneric": 0, "Inconclusive": 0}
    for v in verdicts:
        counts[v.label] += 1
    for label, n in counts.items():
        rows.append(Row(eid, f"mu_sample_{label.lower()}", float(n), None, None,
                        {"sample_count": n_samples, "suite": "samples-of-mu"}, 0.0))
    # limit sets of mu samples should form one cluster at mu's integrals
    targets = np.array([integrate(mu, phi) for phi in fam.observables])
    w = fam.weights()
    good_limit = 0
    for i in range(min(n_samples, 10)):
        x = _sample_from(system, mu, ctx["seed"] + i)
        classes = limit_point_set(system, x, fam, schedule, tol)
        if len(classes) == 1 and classes[0].distance_to(targets, w) <= tol:
            good_limit += 1
    rows.append(Row(eid, "single_limit_class_count", float(good_limit), None, None,
                    {"sample_count": min(n_samples, 10), "suite": "limit-sets"}, 0.0))
    # points generic for a different measure must be caught
    other = _different_measure(mu)
    if other is not None:
        def other_sample(i):
            x = _sample_from(system, other, ctx["seed"] + 7919 + i)
            return classify_generic(system, x, mu, fam, schedule, tol)
        rejected = sum(
            1 for v in _pmap(other_sample, range(n_samples), ctx["threads"])
            if v.label == "NotGeneric"
        )
        rows.append(Row(eid, "foreign_rejected_count", float(rejected), None, None,
                        {"sample_count": n_samples, "suite": "samples-of-other"}, 0.0))


def _inclusion_suite_points(base, mu_base, seed: int, n_total: int):
    """Generic constructions, oscillating constructions, and random points,
    each lifted to the zero fiber.  Yields (tag, point, irregular_schedule)."""
    out = []
    p = generic_point(base, mu_base, "deterministic-blocks", seed=seed)
    out.append(("constructed-generic", p.with_fiber(0.0), None))
    for symbol in (0, 1):
        for lo, hi in ((0.2, 0.65), (0.3, 0.7)):
            rec = irregular_point(base, symbol, lo, hi)
            out.append(("constructed-irregular", rec.point.with_fiber(0.0),
                        rec.schedule()))
    n_generic = max(4, n_total // 5)
    for i in range(n_generic):
        q = Point(SeededIID(seed + 100 + i, mu_base.probs), fiber=0.0)
        out.append(("generic-for-mu", q, None))
    while len(out) < n_total:
        i = len(out)
        q = Point(SeededIID(seed + 1000 + i, mu_base.probs), fiber=0.0)
        out.append(("random", q, None))
    return out


def _inclusions_flow_suite(cfg, ctx, rows, flow):
    """Cross-check classifications under the time-c map against the flow.

    The inclusion being tested: a point generic under the map cannot be
    non-generic under the flow, and a point whose map averages oscillate
    cannot have convergent flow averages.
    """
    eid = cfg["experiment_id"]
    tol = cfg.get("tolerance", 0.02)
    n_total = cfg.get("sample_count", 50)
    base = flow.base
    if not isinstance(base, FullShift):
        raise ConfigError("the flow inclusion suite runs over full-shift suspensions")
    c = flow.roof.roof_max
    tmap = TimeTMap(flow, 1.0)
    mu_base = (build_measure(cfg["measure"]) if "measure" in cfg
               else Bernoulli(tuple(1.0 / base.k for _ in range(base.k))))
    mubar = time_average_measure(flow, mu_base, 16)
    # a family both dynamics can read: the fiber foliation is invariant under
    # the time-1 map, so fiber-graded observables would make the map side vacuous
    fam = TestFamily.default_for(base, depth=cfg.get("family_depth", 3))
    # config checkpoints count base steps; base step j happens at time j*c,
    # which is j*c steps of the time-1 map
    base_sched = build_schedule(cfg.get("schedule"), False)

    def in_time_units(sched, integral):
        cps = tuple(cp * c for cp in sched.checkpoints)
        return Schedule(tuple(int(round(cp)) for cp in cps) if integral else cps)

    map_sched = in_time_units(base_sched, True)
    flow_sched = in_time_units(base_sched, False)
    freq = SymbolFrequency(0)

    def judge(item):
        tag, x, blocks = item
        vg_map = classify_generic(tmap, x, mubar, fam, map_sched, tol)
        vg_flow = classify_generic(flow, x, mubar, fam, flow_sched, tol)
        isched = blocks or base_sched
        vi_map = classify_irregular(tmap, x, freq, in_time_units(isched, True), tol)
        vi_flow = classify_irregular(flow, x, freq, in_time_units(isched, False), tol)
        return tag, vg_map.label, vg_flow.label, vi_map.label, vi_flow.label

    results = _pmap(judge, _inclusion_suite_points(base, mu_base, ctx["seed"], n_total),
                    ctx["threads"])
    generic_breaks = sum(1 for _, gm, gf, _, _ in results
                         if gm == "Generic" and gf == "NotGeneric")
    irregular_breaks = sum(1 for _, _, _, im, if_ in results
                           if im == "Irregular" and if_ == "Regular")
    agree_generic = sum(1 for _, gm, gf, _, _ in results if gm == gf)
    agree_irregular = sum(1 for _, _, _, im, if_ in results if im == if_)
    n = len(results)
    rows.append(Row(eid, "suite_size", float(n), None, None,
                    {"suite": "map-vs-flow"}, 0.0))
    rows.append(Row(eid, "generic_inclusion_breaks", float(generic_breaks), None, None,
                    {"suite": "map-vs-flow"}, 0.0))
    rows.append(Row(eid, "irregular_inclusion_breaks", float(irregular_breaks), None,
                    None, {"suite": "map-vs-flow"}, 0.0))
    rows.append(Row(eid, "generic_label_agreement", float(agree_generic), None, None,
                    {"suite": "map-vs-flow"}, 0.0))
    rows.append(Row(eid, "irregular_label_agreement", float(agree_irregular), None,
                    None, {"suite": "map-vs-flow"}, 0.0))


def _sample_from(system, mu, seed: int) -> Point:
    if isinstance(mu, Bernoulli):
        comp = mu.component
        return Point(SeededIID(seed, mu.probs), component=comp)
    if isinstance(mu, Markov):
        from .constructions import _sample_markov
        word = _sample_markov(mu, seed, 1 << 21)
        return Point(ExplicitWord(tuple(int(s) for s in word)), component=mu.component)
    if isinstance(mu, Mixture):
        rng = np.random.default_rng(seed)
        weights = [w for _, w in mu.components]
        idx = int(rng.choice(len(weights), p=weights))
        return _sample_from(system, mu.components[idx][0], seed + 1)
    raise ConfigError("sampling is implemented for Bernoulli, Markov and mixtures")


def _different_measure(mu):
    if isinstance(mu, Bernoulli):
        k = mu.k
        shifted = tuple((p + 1.0 / k) for p in mu.probs)
        total = sum(shifted)
        other = Bernoulli(tuple(p / total for p in shifted), mu.component)
        if max(abs(a - b) for a, b in zip(other.probs, mu.probs)) < 0.05:
            bump = [p for p in mu.probs]
            bump[0] = min(bump[0] + 0.3, 0.95)
            rest = (1.0 - bump[0]) / (sum(mu.probs[1:]) or 1.0)
            other = Bernoulli(
                tuple([bump[0]] + [p * rest for p in mu.probs[1:]]), mu.component,
            )
        return other
    return None


_HANDLERS = {
    "entropy": _cmd_entropy,
    "birkhoff": _cmd_birkhoff,
    "classify": _cmd_classify,
    "construct": _cmd_construct,
    "verify-thm-a": _cmd_verify_thm_a,
    "verify-thm-b": _cmd_verify_thm_b,
    "verify-irregular": _cmd_verify_irregular,
    "verify-inclusions": _cmd_verify_inclusions,
}

assert set(_HANDLERS) == set(COMMANDS)


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ergode",
                                     description="orbit-average and entropy experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("config", help="path to the experiment config JSON")
    run.add_argument("--out", default=".", help="output directory (default: .)")
    run.add_argument("--diagnostics", action="store_true",
                     help="emit per-depth / per-checkpoint detail rows")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads for independent sub-tasks")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    seed = int(os.environ.get("ERGODE_SEED", cfg.get("seed", 0)))
    ctx = {
        "seed": seed,
        "rng": np.random.default_rng(seed),
        "diagnostics": args.diagnostics,
        "threads": max(args.threads, 1),
        "out": args.out,
    }
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{cfg['experiment_id']}.csv")
    rows = []
    try:
        _HANDLERS[cfg["command"]](cfg, ctx, rows)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExhausted as exc:
        write_csv(csv_path, rows, config_sha256=config_digest(cfg), seed=seed,
                  incomplete=True)
        print(f"budget exhausted: {exc}", file=sys.stderr)
        print(f"{cfg['command']}: {len(rows)} rows (incomplete) -> {csv_path}")
        return 3
    write_csv(csv_path, rows, config_sha256=config_digest(cfg), seed=seed)
    print(f"{cfg['command']}: {len(rows)} rows -> {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
