"""Skeletal decomposition of values.

The production path works on a :class:`~skelmad.terms.TermStore`:
:func:`mark_skeleton` marks the skeleton of a value by walking upwards from
the frontier, jumping from each newly marked abstraction to all the
occurrences of its variable, and :func:`split` then cuts the unmarked
sub-terms out as flesh.  Both run in time linear in the size of the skeleton.

The tree-level functions (:func:`skeldec`, :func:`disc`, the reified marked
terms and :func:`alg_steps`) are direct transcriptions of the definitions and
serve as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .syntax import App, Fresh, Lam, SkTerm, Var, fv
from .terms import ABS, APP, NIL, VAR, TermStore


class SkeletonError(RuntimeError):
    pass


@dataclass
class Decomposition:
    """A skeleton plus its flesh, as (declaration, body) pairs, innermost first."""

    skeleton: int
    flesh: list[tuple[int, int]]


def mark_skeleton(store: TermStore, v: int) -> int:
    """Mark the skeleton of the value ``v`` in place; return the step count.

    Every frontier entry stands for one up-arrow of the rewriting system.  A
    step either marks a fresh application or abstraction (propagation) or
    drops an entry that reached an already marked node (absorption), so the
    count equals the number of marked constructors.
    """
    kind, fst, parent, mark, occ = store.kind, store.fst, store.parent, store.mark, store.occ
    if kind[v] != ABS:
        raise SkeletonError("skeletons are defined for abstractions only")
    if mark[v]:
        raise SkeletonError("value is already marked")
    steps = 1
    mark[v] = True
    frontier = []
    for o in reversed(list(occ[fst[v]] or ())):
        mark[o] = True
        frontier.append(o)
    while frontier:
        n = frontier.pop()
        if n == v:
            continue
        p = parent[n]
        if p == NIL:
            raise SkeletonError("frontier escaped the value")
        steps += 1
        if mark[p]:
            continue
        mark[p] = True
        if kind[p] == ABS:
            frontier.append(p)
            for o in reversed(list(occ[fst[p]] or ())):
                mark[o] = True
                frontier.append(o)
        else:
            frontier.append(p)
    return steps


def white_size(store: TermStore, v: int) -> int:
    """Number of marked constructors below ``v``."""
    if not store.mark[v]:
        return 0
    count = 0
    todo = [v]
    mark = store.mark
    while todo:
        n = todo.pop()
        count += 1
        for c in store.children(n):
            if mark[c]:
                todo.append(c)
    return count


def split(store: TermStore, v: int, flesh_name: str = "p") -> Decomposition:
    """Cut the flesh out of a marked value in place and clear all marks.

    Unmarked non-variable children of marked nodes are replaced by fresh
    variables; the cut sub-terms become the flesh, ordered left to right.
    Unmarked sub-terms are recognised by their top constructor only.
    """
    kind, fst, snd, mark = store.kind, store.fst, store.snd, store.mark
    if not mark[v]:
        raise SkeletonError("split needs a marked value")
    flesh: list[tuple[int, int]] = []
    mark[v] = False
    # (parent, child) pairs, popped left to right
    todo = [(v, snd[v])]
    while todo:
        p, c = todo.pop()
        if mark[c]:
            mark[c] = False
            k = kind[c]
            if k == ABS:
                todo.append((c, snd[c]))
            elif k == APP:
                todo.append((c, snd[c]))
                todo.append((c, fst[c]))
        elif kind[c] != VAR:
            d = store.fresh_decl(flesh_name)
            store.replace_child(p, c, store.new_var(d))
            store.parent[c] = NIL
            flesh.append((d, c))
    return Decomposition(v, flesh)


def skeletonize(store: TermStore, v: int) -> tuple[Decomposition, int]:
    """Mark then split ``v``; returns the decomposition and the marking steps."""
    steps = mark_skeleton(store, v)
    return split(store, v), steps


# -- tree-level oracles -----------------------------------------------------------


def skeldec(t: SkTerm, theta: frozenset[str], fresh: Fresh) -> tuple[SkTerm, list[tuple[str, SkTerm]]]:
    """Skeletal decomposition of a pure term relative to ``theta``.

    Flesh bindings are listed innermost first.
    """
    if isinstance(t, Var):
        return t, []
    if not (fv(t) & theta):
        p = fresh("p")
        return Var(p), [(p, t)]
    if isinstance(t, Lam):
        s, flesh = skeldec(t.body, theta | {t.var}, fresh)
        return Lam(t.var, s), flesh
    if isinstance(t, App):
        r, f1 = skeldec(t.fun, theta, fresh)
        p, f2 = skeldec(t.arg, theta, fresh)
        return App(r, p), f1 + f2
    raise TypeError("skeletal decompositions are defined on pure terms")


def skeldec_value(v: SkTerm, fresh: Fresh) -> tuple[SkTerm, list[tuple[str, SkTerm]]]:
    if not isinstance(v, Lam):
        raise TypeError("not a value")
    s, flesh = skeldec(v.body, frozenset((v.var,)), fresh)
    return Lam(v.var, s), flesh


def substitute_flesh(skel: SkTerm, flesh: list[tuple[str, SkTerm]]) -> SkTerm:
    """Plug every flesh body back in place of its variable."""
    table = dict(flesh)

    def go(u: SkTerm) -> SkTerm:
        match u:
            case Var(x):
                return table.get(x, u)
            case Lam(x, b):
                return Lam(x, go(b))
            case App(f, a):
                return App(go(f), go(a))
        raise TypeError(u)

    return go(skel)


# -- marked terms -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MVar:
    name: str
    marked: bool = False


@dataclass(frozen=True, slots=True)
class MLam:
    var: str
    body: "Marked"
    marked: bool = False


@dataclass(frozen=True, slots=True)
class MApp:
    fun: "Marked"
    arg: "Marked"
    marked: bool = False


@dataclass(frozen=True, slots=True)
class Up:
    term: "Marked"


Marked = Union[MVar, MLam, MApp, Up]


def unmarked(t: SkTerm) -> Marked:
    match t:
        case Var(x):
            return MVar(x)
        case Lam(x, b):
            return MLam(x, unmarked(b))
        case App(f, a):
            return MApp(unmarked(f), unmarked(a))
    raise TypeError(t)


def disc(t: SkTerm, theta: frozenset[str]) -> Marked:
    """Marked skeleton of ``t`` relative to ``theta``, by definition."""
    if not (fv(t) & theta):
        return unmarked(t)
    match t:
        case Var(x):
            return MVar(x, True)
        case Lam(x, b):
            return MLam(x, disc(b, theta | {x}), True)
        case App(f, a):
            return MApp(disc(f, theta), disc(a, theta), True)
    raise TypeError(t)


def disc_value(v: SkTerm) -> Marked:
    return MLam(v.var, disc(v.body, frozenset((v.var,))), True)


def initial(v: SkTerm) -> Marked:
    """Starting point of the algorithm: an up-arrow on the body."""
    return MLam(v.var, Up(unmarked(v.body)))


def marked_white_size(m: Marked) -> int:
    match m:
        case MVar(_, mk):
            return int(mk)
        case MLam(_, b, mk):
            return int(mk) + marked_white_size(b)
        case MApp(f, a, mk):
            return int(mk) + marked_white_size(f) + marked_white_size(a)
        case Up(b):
            return marked_white_size(b)
    raise TypeError(m)


def unmarked_count(m: Marked) -> int:
    match m:
        case MVar(_, mk):
            return int(not mk)
        case MLam(_, b, mk):
            return int(not mk) + unmarked_count(b)
        case MApp(f, a, mk):
            return int(not mk) + unmarked_count(f) + unmarked_count(a)
        case Up(b):
            return unmarked_count(b)
    raise TypeError(m)


def up_count(m: Marked) -> int:
    match m:
        case MVar():
            return 0
        case MLam(_, b, _):
            return up_count(b)
        case MApp(f, a, _):
            return up_count(f) + up_count(a)
        case Up(b):
            return 1 + up_count(b)
    raise TypeError(m)


def _raise_occurrences(m: Marked, x: str) -> Marked:
    match m:
        case MVar(y, False) if y == x:
            return Up(MVar(x, True))
        case MVar():
            return m
        case MLam(y, b, mk):
            return m if y == x else MLam(y, _raise_occurrences(b, x), mk)
        case MApp(f, a, mk):
            return MApp(_raise_occurrences(f, x), _raise_occurrences(a, x), mk)
        case Up(b):
            return Up(_raise_occurrences(b, x))
    raise TypeError(m)


def root_steps(m: Marked) -> list[tuple[str, Marked]]:
    """Root reducts of ``m`` with their rule names."""
    out = []
    match m:
        case MApp(f, a, False):
            if isinstance(f, Up):
                out.append(("pr1", Up(MApp(f.term, a, True))))
            if isinstance(a, Up):
                out.append(("pr2", Up(MApp(f, a.term, True))))
        case MApp(f, a, True):
            if isinstance(f, Up):
                out.append(("ab1", MApp(f.term, a, True)))
            if isinstance(a, Up):
                out.append(("ab2", MApp(f, a.term, True)))
        case MLam(x, Up(b), False):
            out.append(("pr3", Up(MLam(x, _raise_occurrences(b, x), True))))
        case MLam(x, Up(b), True):
            out.append(("ab3", MLam(x, b, True)))
    return out


def alg_steps(m: Marked) -> list[tuple[str, Marked]]:
    """All one-step reducts of ``m`` under any marked context."""
    out = list(root_steps(m))
    match m:
        case MLam(x, b, mk):
            out += [(r, MLam(x, b2, mk)) for r, b2 in alg_steps(b)]
        case MApp(f, a, mk):
            out += [(r, MApp(f2, a, mk)) for r, f2 in alg_steps(f)]
            out += [(r, MApp(f, a2, mk)) for r, a2 in alg_steps(a)]
        case Up(b):
            out += [(r, Up(b2)) for r, b2 in alg_steps(b)]
    return out


def alg_normal_form(m: Marked) -> tuple[Marked, int]:
    """Normalise with leftmost steps; returns the normal form and step count."""
    steps = 0
    while True:
        reducts = alg_steps(m)
        if not reducts:
            return m, steps
        m = reducts[0][1]
        steps += 1


def store_marks(store: TermStore, v: int) -> Marked:
    """Read the marks currently set below ``v`` as a marked tree."""
    name, kind, fst, snd, mark = store.name, store.kind, store.fst, store.snd, store.mark

    def go(n: int) -> Marked:
        k = kind[n]
        if k == VAR:
            return MVar(name[fst[n]], mark[n])
        if k == ABS:
            return MLam(name[fst[n]], go(snd[n]), mark[n])
        return MApp(go(fst[n]), go(snd[n]), mark[n])

    return go(v)
