"""Small-step reducers for call-by-need and skeletal call-by-need.

Terms are immutable trees (:mod:`skelmad.syntax`) kept well-bound at all
times: every copy of a value gets fresh binder names, so no rule ever needs
to rename on the fly.  Redexes are located by walking the evaluation context
from the root; the walk jumps into the argument of ``t[x\\u]`` exactly when
``x`` is the demanded variable of ``t``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .skeleton import skeldec_value
from .syntax import ES, App, Fresh, Lam, SkES, SkTerm, Var, binders, fv, is_pure, rename, size, subterms

NEED = "need"
SKNEED = "skneed"
STRATEGIES = (NEED, SKNEED)


class StrategyError(ValueError):
    pass


# frames: ("app", arg) | ("es", x, arg) | ("sk", x, val) | ("esa", x, body_frames)


def plug(frames: list, t: SkTerm) -> SkTerm:
    for fr in reversed(frames):
        match fr:
            case ("app", a):
                t = App(t, a)
            case ("es", x, a):
                t = ES(t, x, a)
            case ("sk", x, v):
                t = SkES(t, x, v)
            case ("esa", x, body):
                t = ES(plug(body, Var(x)), x, t)
    return t


@dataclass
class Redex:
    label: str
    frames: list
    index: int
    focus: SkTerm


def locate(t: SkTerm, strategy: str = SKNEED) -> Redex | None:
    """Find the unique redex of ``t``, or None if ``t`` is normal."""
    skeletal = strategy == SKNEED
    frames: list = []
    cur = t
    while True:
        match cur:
            case App(f, a):
                frames.append(("app", a))
                cur = f
            case ES(b, x, a):
                frames.append(("es", x, a))
                cur = b
            case SkES(b, x, v):
                if not skeletal:
                    raise StrategyError("skeletal substitution in a plain need term")
                frames.append(("sk", x, v))
                cur = b
            case Lam():
                i = len(frames) - 1
                while i >= 0 and frames[i][0] in ("es", "sk"):
                    i -= 1
                if i < 0:
                    return None
                if frames[i][0] == "app":
                    return Redex("dB", frames, i, cur)
                return Redex("sk" if skeletal else "lsnd", frames, i, cur)
            case Var(x):
                j = len(frames) - 1
                while j >= 0 and not (frames[j][0] in ("es", "sk") and frames[j][1] == x):
                    j -= 1
                if j < 0:
                    return None
                if frames[j][0] == "sk":
                    return Redex("ss", frames, j, cur)
                arg = frames[j][2]
                frames = frames[:j] + [("esa", x, frames[j + 1 :])]
                cur = arg
            case _:
                raise TypeError(cur)


def _wrap(t: SkTerm, subs: list[tuple[str, SkTerm]]) -> SkTerm:
    for x, u in subs:
        t = ES(t, x, u)
    return t


def _peel(t: SkTerm) -> tuple[list, SkTerm]:
    frames: list = []
    while True:
        match t:
            case ES(b, x, a):
                frames.append(("es", x, a))
                t = b
            case SkES(b, x, v):
                frames.append(("sk", x, v))
                t = b
            case _:
                return frames, t


def contract(r: Redex, fresh: Fresh) -> SkTerm:
    """Rewrite the located redex and rebuild the whole term."""
    outer, hit, inner = r.frames[: r.index], r.frames[r.index], r.frames[r.index + 1 :]
    match r.label:
        case "dB":
            lam, arg = r.focus, hit[1]
            if fv(arg) & {fr[1] for fr in inner}:
                # rename the substitution context apart from the argument
                inner, lam = _peel(rename(plug(inner, lam), fresh))
            new = plug(inner, ES(lam.body, lam.var, arg))
        case "lsnd":
            _, x, body = hit
            v = r.focus
            new = plug(inner, ES(plug(body, rename(v, fresh)), x, v))
        case "sk":
            _, x, body = hit
            skel, flesh = skeldec_value(r.focus, fresh)
            new = plug(inner, _wrap(SkES(plug(body, Var(x)), x, skel), flesh))
        case "ss":
            # the focus is the variable itself; everything above stays
            return plug(r.frames, rename(hit[2], fresh))
        case _:
            raise ValueError(r.label)
    return plug(outer, new)


def step(t: SkTerm, strategy: str = SKNEED, fresh: Fresh | None = None) -> tuple[str, SkTerm] | None:
    if strategy not in STRATEGIES:
        raise StrategyError(f"unknown strategy {strategy!r}")
    r = locate(t, strategy)
    if r is None:
        return None
    return r.label, contract(r, fresh if fresh is not None else Fresh.avoiding(t))


def step_need(t: SkTerm, fresh: Fresh | None = None):
    return step(t, NEED, fresh)


def step_skneed(t: SkTerm, fresh: Fresh | None = None):
    return step(t, SKNEED, fresh)


@dataclass
class EvalStats:
    counts: dict[str, int] = field(default_factory=dict)
    steps: int = 0
    ink_space: int = 0
    exhausted: bool = False

    @property
    def beta(self) -> int:
        return self.counts.get("dB", 0)


@dataclass
class Evaluation:
    final: SkTerm
    stats: EvalStats
    labels: list[str]
    trace: list[tuple[str, SkTerm]] | None = None


def evaluate(t: SkTerm, strategy: str = SKNEED, fuel: int = 10**6, trace: bool = False, ink: bool = True) -> Evaluation:
    """Reduce to normal form or until ``fuel`` steps have been taken."""
    fresh = Fresh.avoiding(t)
    stats = EvalStats(ink_space=size(t) if ink else 0)
    labels: list[str] = []
    steps: list[tuple[str, SkTerm]] | None = [] if trace else None
    while True:
        r = locate(t, strategy)
        if r is None:
            break
        if stats.steps >= fuel:
            stats.exhausted = True
            break
        t = contract(r, fresh)
        stats.steps += 1
        stats.counts[r.label] = stats.counts.get(r.label, 0) + 1
        labels.append(r.label)
        if ink:
            stats.ink_space = max(stats.ink_space, size(t))
        if steps is not None:
            steps.append((r.label, t))
    return Evaluation(t, stats, labels, steps)


# -- brute-force redex enumeration ----------------------------------------------------


def _decompositions(t: SkTerm):
    """All (frames, sub-term) splits of ``t`` along evaluation contexts."""
    todo = [([], t)]
    while todo:
        frames, u = todo.pop()
        yield frames, u
        match u:
            case App(f, a):
                todo.append((frames + [("app", a)], f))
            case ES(b, x, a):
                todo.append((frames + [("es", x, a)], b))
                for body in _holes_at(b, x):
                    todo.append((frames + [("esa", x, body)], a))
            case SkES(b, x, v):
                todo.append((frames + [("sk", x, v)], b))


def _holes_at(t: SkTerm, x: str) -> list[list]:
    """Evaluation contexts E, not capturing x, with t = E<x>."""
    out = []
    for frames, u in _decompositions(t):
        if u == Var(x) and not _captures(frames, x):
            out.append(frames)
    return out


def _captures(frames: list, x: str) -> bool:
    return any(fr[0] in ("es", "sk") and fr[1] == x for fr in frames)


def _strip_subs(t: SkTerm, allow_sk: bool) -> SkTerm:
    while isinstance(t, ES) or (allow_sk and isinstance(t, SkES)):
        t = t.body
    return t


def root_redex_label(t: SkTerm, strategy: str = SKNEED) -> str | None:
    """Label of the root rule matching ``t`` exactly at its top, if any."""
    sk = strategy == SKNEED
    match t:
        case App(f, _):
            if isinstance(_strip_subs(f, sk), Lam):
                return "dB"
        case ES(b, x, a):
            if isinstance(_strip_subs(a, sk), Lam) and _holes_at(b, x):
                return "sk" if sk else "lsnd"
        case SkES(b, x, _):
            if sk and _holes_at(b, x):
                return "ss"
    return None


def all_redexes(t: SkTerm, strategy: str = SKNEED) -> list[tuple[str, SkTerm]]:
    """Every (label, context-with-hole) pair such that a root rule applies.

    The context is returned plugged with a marker variable so that distinct
    decompositions compare distinct.
    """
    out = []
    hole = Var("□")
    for frames, u in _decompositions(t):
        label = root_redex_label(u, strategy)
        if label is not None:
            out.append((label, plug(frames, hole)))
    return out


# -- structural equivalence ---------------------------------------------------------


def demanded(t: SkTerm) -> str | None:
    """The variable in the hole of the evaluation context of ``t``, if free."""
    cur = t
    while True:
        match cur:
            case App(f, _):
                cur = f
            case ES(b, x, a):
                y = demanded(b)
                if y != x:
                    return y
                cur = a
            case SkES(b, x, _):
                y = demanded(b)
                return None if y == x else y
            case Var(x):
                return x
            case _:
                return None


def _spine_domain(t: SkTerm) -> set[str]:
    out = set()
    cur = t
    while True:
        match cur:
            case App(f, _):
                cur = f
            case ES(b, x, _) | SkES(b, x, _):
                out.add(x)
                cur = b
            case _:
                return out


def _float(t: SkTerm) -> tuple[SkTerm, list]:
    """Split ``t`` into a core and the substitutions that may float above it.

    Substitutions are (kind, var, payload) triples listed innermost first.
    They cross application frames and leave the argument of a demanded
    substitution when the side conditions allow; their relative order is
    never changed.
    """
    match t:
        case App(f, a):
            core, subs = _float(f)
            return App(core, a), subs
        case ES(b, x, a):
            core, subs = _float(b)
            if demanded(b) != x:
                return core, subs + [("es", x, a)]
            acore, asubs = _float(a)
            body = _wrap_subs(core, subs)
            blocked = _spine_domain(body) | {x}
            body_fv = fv(body)
            stay, leave = [], []
            stuck: set[str] = set()
            for kind, y, u in reversed(asubs):
                if y in body_fv or (fv(u) & (blocked | stuck)):
                    stay.append((kind, y, u))
                    stuck.add(y)
                else:
                    leave.append((kind, y, u))
            stay.reverse()
            leave.reverse()
            return core, subs + [("es", x, _wrap_subs(acore, stay))] + leave
        case SkES(b, x, v):
            core, subs = _float(b)
            return core, subs + [("sk", x, v)]
    return t, []


def _wrap_subs(t: SkTerm, subs: list) -> SkTerm:
    for kind, x, u in subs:
        t = ES(t, x, u) if kind == "es" else SkES(t, x, u)
    return t


def alpha_normalize(t: SkTerm) -> SkTerm:
    """Rename binders to ``v0, v1, ...`` in preorder; free names stay."""
    counter = itertools.count()

    def go(u: SkTerm, env: dict[str, str]) -> SkTerm:
        match u:
            case Var(x):
                return Var(env.get(x, x))
            case Lam(x, b):
                y = f"v{next(counter)}"
                return Lam(y, go(b, {**env, x: y}))
            case App(f, a):
                return App(go(f, env), go(a, env))
            case ES(b, x, a):
                y = f"v{next(counter)}"
                return ES(go(b, {**env, x: y}), y, go(a, env))
            case SkES(b, x, v):
                y = f"v{next(counter)}"
                return SkES(go(b, {**env, x: y}), y, go(v, env))
        raise TypeError(u)

    return go(t, {})


def canonicalize(t: SkTerm) -> SkTerm:
    """Float substitutions outwards along evaluation contexts, then alpha-normalize."""
    core, subs = _float(t)
    return alpha_normalize(_wrap_subs(core, subs))


# -- the benchmark family -----------------------------------------------------------


def identity(x: str = "x") -> SkTerm:
    return Lam(x, Var(x))


def family_term(n: int) -> SkTerm:
    """``(\\x. x I (x I)) u_n`` with ``u_0 = I`` and ``u_{k+1} = gamma u_k``.

    Here ``gamma = \\y.\\z. y I (y I) z``.  Binder names are made distinct by
    numbering.
    """
    if n < 0:
        raise ValueError("family index must be non-negative")
    fresh = Fresh()
    ident = identity("a")

    def gamma() -> SkTerm:
        y, z = Var("y"), Var("z")
        return Lam("y", Lam("z", App(App(App(y, ident), App(y, ident)), z)))

    u = ident
    for _ in range(n):
        u = App(gamma(), u)
    x = Var("x")
    head = Lam("x", App(App(x, ident), App(x, ident)))
    return well_bound(App(head, u), fresh)


def well_bound(t: SkTerm, fresh: Fresh | None = None) -> SkTerm:
    """Rename binders whose name was already used or is free."""
    fresh = fresh or Fresh.avoiding(t)
    used = set(fv(t))

    def pick(x: str) -> str:
        y = x
        while y in used:
            y = fresh(x)
        used.add(y)
        return y

    def go(u: SkTerm, env: dict[str, str]) -> SkTerm:
        match u:
            case Var(x):
                return Var(env.get(x, x))
            case Lam(x, b):
                y = pick(x)
                return Lam(y, go(b, {**env, x: y}))
            case App(f, a):
                return App(go(f, env), go(a, env))
            case ES(b, x, a):
                y = pick(x)
                return ES(go(b, {**env, x: y}), y, go(a, env))
            case SkES(b, x, v):
                y = pick(x)
                return SkES(go(b, {**env, x: y}), y, go(v, env))
        raise TypeError(u)

    return go(t, {})


def substitution_count(t: SkTerm) -> int:
    """Number of explicit and skeletal substitutions in ``t``."""
    return sum(1 for u in subterms(t) if isinstance(u, (ES, SkES)))


def skeletal_payloads_ok(t: SkTerm) -> bool:
    """Every skeletal substitution holds a value equal to its own skeleton."""
    for u in subterms(t):
        if isinstance(u, SkES):
            v = u.val
            if not isinstance(v, Lam) or not is_pure(v):
                return False
            skel, flesh = skeldec_value(v, Fresh.avoiding(v))
            if flesh:
                return False
    return True


__all__ = [
    "NEED",
    "SKNEED",
    "EvalStats",
    "Evaluation",
    "Redex",
    "StrategyError",
    "all_redexes",
    "alpha_normalize",
    "binders",
    "canonicalize",
    "contract",
    "demanded",
    "evaluate",
    "family_term",
    "identity",
    "locate",
    "plug",
    "root_redex_label",
    "skeletal_payloads_ok",
    "step",
    "step_need",
    "step_skneed",
    "substitution_count",
    "well_bound",
]
