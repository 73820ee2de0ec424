"""Randomized and exhaustive cross-checks between the independent implementations.

Each suite returns a :class:`SuiteResult`; the CLI ``check`` command and the
acceptance tests both drive these functions.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from importlib import resources

from . import lsc
from .gen import all_values, random_closed, random_value
from .machine import MAD, SMAD, Machine, check_bounds, check_bounds_with_flesh
from .skeleton import (
    Up,
    alg_steps,
    disc_value,
    initial,
    mark_skeleton,
    marked_white_size,
    skeldec_value,
    split,
    store_marks,
    substitute_flesh,
    unmarked_count,
    up_count,
    white_size,
)
from .syntax import Fresh, Lam, SkTerm, Var, alpha_eq, from_store, fv, parse_sk, show, size, subterms, to_store
from .terms import Term

DEFAULT_SEED = 20240601
SUITES = ("skeleton", "diamond", "determinism", "bisim", "audit")


@dataclass
class SuiteResult:
    name: str
    seed: int
    cases: int = 0
    failures: list[str] = field(default_factory=list)
    skipped: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        # keep reports short; the count of the first 20 is what matters
        if len(self.failures) < 20:
            self.failures.append(msg)
        elif len(self.failures) == 20:
            self.failures.append("...")

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        extra = f", skipped={self.skipped}" if self.skipped else ""
        return f"{status} {self.name}: cases={self.cases}, failures={len(self.failures)}{extra}, seed={self.seed}"


def _deep():
    if sys.getrecursionlimit() < 20000:
        sys.setrecursionlimit(20000)


# -- skeleton ---------------------------------------------------------------------------


def check_value(v: Lam) -> list[str]:
    """Compare the store algorithm with the definitional oracles on one value."""
    problems = []
    store, root = to_store(v)
    tv = from_store(store, root)
    steps = mark_skeleton(store, root)
    ws = white_size(store, root)
    expected = disc_value(tv)
    if store_marks(store, root) != expected:
        problems.append(f"marks differ from the marked skeleton on {show(tv)}")
    if steps != ws:
        problems.append(f"step count {steps} != white size {ws} on {show(tv)}")
    if ws != marked_white_size(expected):
        problems.append(f"white size {ws} != oracle {marked_white_size(expected)} on {show(tv)}")
    dec = split(store, root)
    skel = from_store(store, dec.skeleton)
    flesh = [(store.name[d], from_store(store, b)) for d, b in dec.flesh]
    # the white part is the skeleton minus its free leaves (flesh and untouched variables)
    free_leaves = sum(1 for u in subterms(skel) if isinstance(u, Var) and u.name in fv(skel))
    if size(skel) - free_leaves != ws:
        problems.append(f"skeleton white part {size(skel) - free_leaves} != white size {ws} on {show(tv)}")
    o_skel, o_flesh = skeldec_value(tv, Fresh.avoiding(tv, skel))
    if not _same_decomposition(skel, flesh, o_skel, o_flesh):
        problems.append(f"split disagrees with the oracle on {show(tv)}")
    if not alpha_eq(substitute_flesh(skel, flesh), tv):
        problems.append(f"flesh does not recover {show(tv)}")
    vs = size(tv)
    if size(skel) > vs or any(size(b) > vs for _, b in flesh):
        problems.append(f"skeleton or flesh larger than {show(tv)}")
    if any(store.mark[n] for n in store.nodes(dec.skeleton)):
        problems.append("marks left after splitting")
    return problems


def _same_decomposition(s1: SkTerm, f1: list, s2: SkTerm, f2: list) -> bool:
    if len(f1) != len(f2):
        return False
    w1, w2 = s1, s2
    for (x, _), (y, _) in zip(f1, f2):
        w1, w2 = Lam(x, w1), Lam(y, w2)
    return alpha_eq(w1, w2) and all(alpha_eq(a, b) for (_, a), (_, b) in zip(f1, f2))


def suite_skeleton(seed: int = DEFAULT_SEED, cases: int = 1000, max_size: int = 40) -> SuiteResult:
    res = SuiteResult("skeleton", seed)
    rng = random.Random(seed)
    for _ in range(cases):
        v = random_value(rng, max_size)
        res.cases += 1
        for p in check_value(v):
            res.fail(p)
    return res


# -- diamond ------------------------------------------------------------------------------


def check_diamond(v: Lam) -> list[str]:
    """Explore every marked term reachable from the initial one.

    Every peak must join in one step on each side, every step must decrease
    the termination measure, and the only normal form must be the marked
    skeleton under an up-arrow.
    """
    problems = []
    goal = Up(disc_value(v))
    succ: dict = {}

    def reducts(m):
        if m not in succ:
            succ[m] = frozenset(r for _, r in alg_steps(m))
        return succ[m]

    start = initial(v)
    seen = {start}
    todo = [start]
    while todo:
        m = todo.pop()
        targets = reducts(m)
        if not targets:
            if m != goal:
                problems.append(f"unexpected normal form from {show(v)}")
            continue
        measure = (unmarked_count(m), up_count(m))
        for r in targets:
            if (unmarked_count(r), up_count(r)) >= measure:
                problems.append(f"measure does not decrease on {show(v)}")
            if r not in seen:
                seen.add(r)
                todo.append(r)
        ordered = list(targets)
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if not (reducts(a) & reducts(b)):
                    problems.append(f"peak does not close in one step on {show(v)}")
    return problems


def suite_diamond(seed: int = DEFAULT_SEED, max_size: int = 10) -> SuiteResult:
    res = SuiteResult("diamond", seed)
    for v in all_values(max_size):
        res.cases += 1
        for p in check_diamond(v):
            res.fail(p)
    return res


# -- determinism ----------------------------------------------------------------------


def suite_determinism(seed: int = DEFAULT_SEED, cases: int = 300, max_size: int = 12) -> SuiteResult:
    """Brute-force redex enumeration finds at most one redex, the located one."""
    res = SuiteResult("determinism", seed)
    rng = random.Random(seed)
    for _ in range(cases):
        t0 = lsc.well_bound(random_closed(rng, max_size))
        for strategy in lsc.STRATEGIES:
            ev = lsc.evaluate(t0, strategy, fuel=30, trace=True, ink=False)
            for t in [t0] + [u for _, u in ev.trace]:
                if size(t) > max_size:
                    continue
                res.cases += 1
                found = lsc.all_redexes(t, strategy)
                r = lsc.locate(t, strategy)
                if len(found) > 1:
                    res.fail(f"{len(found)} redexes in {show(t)}")
                elif (r is None) != (not found):
                    res.fail(f"search and enumeration disagree on {show(t)}")
                elif r is not None and found[0][0] != r.label:
                    res.fail(f"labels {found[0][0]} and {r.label} differ on {show(t)}")
    return res


# -- bisimulation -------------------------------------------------------------------


_MACHINE_TO_CALCULUS = {"beta": "dB", "sub": "lsnd", "sk": "sk", "ss": "ss"}


def compare_runs(t: SkTerm, variant: str, calc_fuel: int = 10**4, machine_fuel: int = 10**6) -> tuple[str, str | None]:
    """Run machine and calculus on a closed term.

    Returns ("ok" | "diverged" | "fail", message).
    """
    strategy = lsc.SKNEED if variant == SMAD else lsc.NEED
    ev = lsc.evaluate(t, strategy, fuel=calc_fuel, ink=False)
    if ev.stats.exhausted:
        return "diverged", None
    store, root = to_store(t)
    m = Machine(Term(store, root), variant=variant)
    labels: list[str] = []
    stats = m.run(machine_fuel, on_step=lambda lab, _m: labels.append(lab))
    if stats.exhausted:
        return "fail", f"machine out of fuel on {show(t)}"
    principal = [_MACHINE_TO_CALCULUS[lab] for lab in labels if lab in _MACHINE_TO_CALCULUS]
    if principal != ev.labels:
        return "fail", f"{variant} labels differ on {show(t)}: {principal} vs {ev.labels}"
    mine, theirs = lsc.canonicalize(m.readback()), lsc.canonicalize(ev.final)
    if not alpha_eq(mine, theirs):
        return "fail", f"{variant} final states differ on {show(t)}: {show(mine)} vs {show(theirs)}"
    return "ok", None


def suite_bisim(seed: int = DEFAULT_SEED, cases: int = 500, max_size: int = 15, max_attempts: int = 20000) -> SuiteResult:
    """Compare label sequences and final states on ``cases`` terminating terms."""
    _deep()
    res = SuiteResult("bisim", seed)
    rng = random.Random(seed)
    attempts = 0
    while res.cases < cases and attempts < max_attempts:
        attempts += 1
        t = lsc.well_bound(random_closed(rng, max_size))
        outcomes = [compare_runs(t, v) for v in (MAD, SMAD)]
        if any(o == "diverged" for o, _ in outcomes):
            res.skipped += 1
            continue
        res.cases += 1
        for o, msg in outcomes:
            if o == "fail":
                res.fail(msg)
    if res.cases < cases:
        res.fail(f"only {res.cases} terminating samples in {attempts} attempts")
    return res


# -- audits -------------------------------------------------------------------------


def golden_input() -> SkTerm:
    """The administrative encoding of the third family member shipped in ``data/``."""
    text = resources.files("skelmad").joinpath("data", "family_3.lambda").read_text(encoding="utf-8")
    return lsc.well_bound(parse_sk(text))


def audited_run(t: SkTerm, variant: str, fuel: int = 10**6):
    """Run with per-transition audits; returns (stats, initial size, error or None)."""
    store, root = to_store(t)
    m = Machine(Term(store, root), variant=variant)
    try:
        stats = m.run(fuel, audit=True)
    except AssertionError as exc:
        return m.stats, m.initial_size, str(exc)
    return stats, m.initial_size, None


def suite_audit(seed: int = DEFAULT_SEED, cases: int = 150, max_size: int = 15, family_mad: int = 6, family_smad: int = 10) -> SuiteResult:
    """Per-transition invariant audits plus the transition-count bounds."""
    _deep()
    res = SuiteResult("audit", seed)
    runs: list[tuple[str, str, SkTerm]] = [("family_3.lambda", v, golden_input()) for v in (SMAD, MAD)]
    for n in range(family_smad + 1):
        runs.append((f"family {n}", SMAD, lsc.family_term(n)))
    for n in range(family_mad + 1):
        runs.append((f"family {n}", MAD, lsc.family_term(n)))
    rng = random.Random(seed)
    sampled = 0
    while sampled < cases:
        t = lsc.well_bound(random_closed(rng, max_size))
        if lsc.evaluate(t, lsc.SKNEED, fuel=2000, ink=False).stats.exhausted:
            res.skipped += 1
            continue
        if lsc.evaluate(t, lsc.NEED, fuel=2000, ink=False).stats.exhausted:
            res.skipped += 1
            continue
        sampled += 1
        runs.append((show(t), SMAD, t))
        runs.append((show(t), MAD, t))
    for what, variant, t in runs:
        res.cases += 1
        stats, init_size, err = audited_run(t, variant)
        if err:
            res.fail(f"{variant} audit on {what}: {err}")
            continue
        literal = check_bounds(stats, init_size, variant)
        for b in literal:
            res.fail(f"{variant} bound on {what}: {b}")
        if literal:
            corrected = check_bounds_with_flesh(stats, init_size, variant)
            if corrected:
                res.notes.append(f"{variant} on {what}: {'; '.join(corrected)} even counting flesh")
            else:
                res.notes.append(f"{variant} on {what}: holds once flesh entries are counted")
    return res


def run_suite(name: str, seed: int = DEFAULT_SEED, cases: int | None = None, max_size: int | None = None) -> SuiteResult:
    kwargs = {}
    if cases is not None and name != "diamond":
        kwargs["cases"] = cases
    if max_size is not None:
        kwargs["max_size"] = max_size
    match name:
        case "skeleton":
            return suite_skeleton(seed, **kwargs)
        case "diamond":
            return suite_diamond(seed, **kwargs)
        case "determinism":
            return suite_determinism(seed, **kwargs)
        case "bisim":
            return suite_bisim(seed, **kwargs)
        case "audit":
            return suite_audit(seed, **kwargs)
    raise ValueError(f"unknown suite {name!r}")
