"""Tree terms with explicit and skeletal substitutions.

These are plain immutable trees without sharing.  They are what the
calculus-level reducers operate on and what machine states read back to.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Union

from .terms import ABS, APP, VAR, ParseError, TermStore


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    var: str
    body: "SkTerm"


@dataclass(frozen=True, slots=True)
class App:
    fun: "SkTerm"
    arg: "SkTerm"


@dataclass(frozen=True, slots=True)
class ES:
    """``body[var\\arg]``"""

    body: "SkTerm"
    var: str
    arg: "SkTerm"


@dataclass(frozen=True, slots=True)
class SkES:
    """``body[var\\\\val]`` with a skeletal value."""

    body: "SkTerm"
    var: str
    val: "SkTerm"


SkTerm = Union[Var, Lam, App, ES, SkES]

_SUFFIX = re.compile(r"^(.*?)_(\d+)$")


def base_name(name: str) -> str:
    m = _SUFFIX.match(name)
    return m.group(1) if m else name


class Fresh:
    """Supply of names ``base_N`` with a shared counter."""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)

    def __call__(self, base: str) -> str:
        return f"{base_name(base)}_{next(self._counter)}"

    @classmethod
    def avoiding(cls, *terms: SkTerm) -> "Fresh":
        top = 0
        for t in terms:
            for n in names(t):
                m = _SUFFIX.match(n)
                if m:
                    top = max(top, int(m.group(2)))
        return cls(top + 1)


# -- traversals ------------------------------------------------------------------
# ES spines can be thousands of levels deep, so the traversals below are
# iterative.


def subterms(t: SkTerm):
    todo = [t]
    while todo:
        u = todo.pop()
        yield u
        match u:
            case Lam(_, b):
                todo.append(b)
            case App(f, a):
                todo.append(a)
                todo.append(f)
            case ES(b, _, a):
                todo.append(a)
                todo.append(b)
            case SkES(b, _, v):
                todo.append(v)
                todo.append(b)


def size(t: SkTerm) -> int:
    return sum(1 for _ in subterms(t))


def names(t: SkTerm) -> set[str]:
    out = set()
    for u in subterms(t):
        match u:
            case Var(x) | Lam(x, _) | ES(_, x, _) | SkES(_, x, _):
                out.add(x)
    return out


def binders(t: SkTerm) -> list[str]:
    out = []
    for u in subterms(t):
        match u:
            case Lam(x, _) | ES(_, x, _) | SkES(_, x, _):
                out.append(x)
    return out


def fv(t: SkTerm) -> frozenset[str]:
    # postorder with explicit stack
    out: dict[int, frozenset[str]] = {}
    todo: list[tuple[SkTerm, bool]] = [(t, False)]
    while todo:
        u, done = todo.pop()
        match u:
            case Var(x):
                out[id(u)] = frozenset((x,))
                continue
        if not done:
            todo.append((u, True))
            for c in _children(u):
                todo.append((c, False))
            continue
        match u:
            case Lam(x, b):
                out[id(u)] = out[id(b)] - {x}
            case App(f, a):
                out[id(u)] = out[id(f)] | out[id(a)]
            case ES(b, x, a):
                out[id(u)] = (out[id(b)] - {x}) | out[id(a)]
            case SkES(b, x, v):
                out[id(u)] = (out[id(b)] - {x}) | out[id(v)]
    return out[id(t)]


def _children(u: SkTerm) -> tuple[SkTerm, ...]:
    match u:
        case Lam(_, b):
            return (b,)
        case App(f, a):
            return (f, a)
        case ES(b, _, a):
            return (b, a)
        case SkES(b, _, v):
            return (b, v)
    return ()


def is_pure(t: SkTerm) -> bool:
    return not any(isinstance(u, (ES, SkES)) for u in subterms(t))


def is_well_bound(t: SkTerm) -> bool:
    """Binder names pairwise distinct and disjoint from the free names."""
    bs = binders(t)
    return len(bs) == len(set(bs)) and not (set(bs) & fv(t))


def rename(t: SkTerm, fresh: Fresh) -> SkTerm:
    """Alpha-copy of ``t`` with every binder given a fresh name."""

    def go(u: SkTerm, env: dict[str, str]) -> SkTerm:
        match u:
            case Var(x):
                return Var(env.get(x, x))
            case Lam(x, b):
                y = fresh(x)
                return Lam(y, go(b, {**env, x: y}))
            case App(f, a):
                return App(go(f, env), go(a, env))
            case ES(b, x, a):
                y = fresh(x)
                return ES(go(b, {**env, x: y}), y, go(a, env))
            case SkES(b, x, v):
                y = fresh(x)
                return SkES(go(b, {**env, x: y}), y, go(v, env))
        raise TypeError(u)

    return go(t, {})


def alpha_eq(t: SkTerm, u: SkTerm) -> bool:
    todo = [(t, u, {}, {}, 0)]
    while todo:
        a, b, ea, eb, depth = todo.pop()
        match a, b:
            case Var(x), Var(y):
                bx, by = ea.get(x), eb.get(y)
                if bx != by or (bx is None and x != y):
                    return False
            case Lam(x, p), Lam(y, q):
                todo.append((p, q, {**ea, x: depth}, {**eb, y: depth}, depth + 1))
            case App(f, p), App(g, q):
                todo.append((f, g, ea, eb, depth))
                todo.append((p, q, ea, eb, depth))
            case (ES(p, x, r), ES(q, y, s)) | (SkES(p, x, r), SkES(q, y, s)):
                todo.append((r, s, ea, eb, depth))
                todo.append((p, q, {**ea, x: depth}, {**eb, y: depth}, depth + 1))
            case _:
                return False
    return True


# -- printing --------------------------------------------------------------------


def show(t: SkTerm, unicode: bool = False) -> str:
    lam, dot = ("λ", ".") if unicode else ("\\", ". ")
    out: list[str] = []
    todo: list[SkTerm | str] = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, str):
            out.append(u)
            continue
        match u:
            case Var(x):
                out.append(x)
            case Lam(x, b):
                out.append(lam + x + dot)
                todo.append(b)
            case App(f, a):
                if isinstance(a, Var):
                    todo.append(a)
                else:
                    todo.extend([")", a, "("])
                todo.append(" ")
                if isinstance(f, (Lam,)):
                    todo.extend([")", f, "("])
                else:
                    todo.append(f)
            case ES(b, x, a) | SkES(b, x, a):
                sep = "\\" if isinstance(u, ES) else "\\\\"
                if not unicode and isinstance(a, Lam):
                    # keep [x\(\y. t)] apart from [x\\y. t]
                    todo.extend([")]", a, f"[{x}{sep}("])
                else:
                    todo.extend(["]", a, f"[{x}{sep}"])
                if isinstance(b, (App, Lam)):
                    todo.extend([")", b, "("])
                else:
                    todo.append(b)
    return "".join(out)


# -- parsing ---------------------------------------------------------------------
# Same grammar as pure terms, plus postfix substitutions ``t[x\u]`` and
# ``t[x\\u]`` binding tighter than application.

_TOKEN = re.compile(r"\s+|#[^\n]*|(\\\\|[\\λ().\[\]]|[A-Za-z_][A-Za-z0-9_']*)")


def parse_sk(text: str) -> SkTerm:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", 1, pos + 1)
        if m.group(1):
            toks.append(m.group(1))
        pos = m.end()
    toks.append("")
    i = 0

    def peek():
        return toks[i]

    def take(expected=None):
        nonlocal i
        tok = toks[i]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok or 'end of input'!r}", 1, i + 1)
        i += 1
        return tok

    def is_ident(tok):
        return bool(tok) and (tok[0].isalpha() or tok[0] == "_")

    def term():
        if peek() in ("\\", "λ"):
            take()
            x = take()
            take(".")
            return Lam(x, term())
        t = postfix()
        while is_ident(peek()) or peek() in ("(", "\\", "λ"):
            t = App(t, term() if peek() in ("\\", "λ") else postfix())
        return t

    def postfix():
        tok = peek()
        if tok == "(":
            take()
            t = term()
            take(")")
        elif is_ident(tok):
            t = Var(take())
        else:
            raise ParseError(f"expected a term, found {tok or 'end of input'!r}", 1, i + 1)
        while peek() == "[":
            take()
            x = take()
            sep = take()
            if sep not in ("\\", "\\\\"):
                raise ParseError("expected a substitution", 1, i)
            u = term()
            take("]")
            t = ES(t, x, u) if sep == "\\" else SkES(t, x, u)
        return t

    t = term()
    if peek():
        raise ParseError(f"unexpected {peek()!r}", 1, i + 1)
    return t


# -- conversions with the node store --------------------------------------------


def from_store(store: TermStore, root: int) -> SkTerm:
    """Read a pure store term as a tree, using display names."""
    kind, fst, snd, name = store.kind, store.fst, store.snd, store.name
    results: list[SkTerm] = []
    todo = [(root, False)]
    while todo:
        n, done = todo.pop()
        k = kind[n]
        if k == VAR:
            results.append(Var(name[fst[n]]))
        elif not done:
            todo.append((n, True))
            todo.extend((c, False) for c in reversed(store.children(n)))
        elif k == ABS:
            results.append(Lam(name[fst[n]], results.pop()))
        else:
            a = results.pop()
            results.append(App(results.pop(), a))
    return results[0]


def to_store(t: SkTerm, store: TermStore | None = None) -> tuple[TermStore, int]:
    """Build a pure tree into a store, keeping names and sharing free ones."""
    store = TermStore() if store is None else store
    free: dict[str, int] = {}
    top = 0
    for n in names(t):
        m = _SUFFIX.match(n)
        if m:
            top = max(top, int(m.group(2)))
    store.counter = max(store.counter, top + 1)
    taken = set(fv(t))

    def go(u: SkTerm, env: dict[str, int]) -> int:
        match u:
            case Var(x):
                d = env.get(x)
                if d is None:
                    d = free.get(x)
                    if d is None:
                        d = free[x] = store.new_decl(x, base_name(x))
                return store.new_var(d)
            case Lam(x, b):
                shown = x
                while shown in taken:
                    shown = store.fresh_name(base_name(x))
                taken.add(shown)
                d = store.new_decl(shown, base_name(x), binder=True)
                return store.new_abs(d, go(b, {**env, x: d}))
            case App(f, a):
                return store.new_app(go(f, env), go(a, env))
        raise ValueError("only pure terms can be stored")

    return store, go(t, {})
