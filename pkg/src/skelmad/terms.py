"""Node-store representation of pure lambda-terms.

Terms live in a :class:`TermStore`: an arena of nodes addressed by dense
integer ids, plus a parallel arena of variable declarations.  Every variable
occurrence points at one shared declaration; every declaration bound by a live
abstraction keeps the set of its occurrences so that an abstraction can reach
all of them in time proportional to their number.  Declarations also carry the
substitution slot and the doubly-linked environment pointers used by the
abstract machines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# node kinds
VAR, ABS, APP = 0, 1, 2
FREE = -1

# declaration substitution kinds
NOSUB, SUB, SKEL, HOLE, COPY = 0, 1, 2, 3, 4

NIL = -1

_SUFFIX = re.compile(r"^(.*?)_(\d+)$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class TermStore:
    """Arena of term nodes and variable declarations."""

    def __init__(self) -> None:
        # nodes: VAR -> (decl, -); ABS -> (decl, body); APP -> (head, arg)
        self.kind: list[int] = []
        self.fst: list[int] = []
        self.snd: list[int] = []
        self.parent: list[int] = []
        self.mark: list[bool] = []
        self._free_nodes: list[int] = []
        # declarations
        self.orig: list[str] = []
        self.name: list[str] = []
        self.sub_kind: list[int] = []
        self.sub: list[int] = []
        self.prev: list[int] = []
        self.next: list[int] = []
        # occurrence sets of declarations bound by a live abstraction, else None
        self.occ: list[dict[int, None] | None] = []
        self.counter = 1

    # -- allocation -------------------------------------------------------

    def _alloc(self, kind: int, fst: int, snd: int) -> int:
        if self._free_nodes:
            n = self._free_nodes.pop()
            self.kind[n] = kind
            self.fst[n] = fst
            self.snd[n] = snd
            self.parent[n] = NIL
            self.mark[n] = False
            return n
        self.kind.append(kind)
        self.fst.append(fst)
        self.snd.append(snd)
        self.parent.append(NIL)
        self.mark.append(False)
        return len(self.kind) - 1

    def new_decl(self, name: str, orig: str | None = None, binder: bool = False) -> int:
        self.orig.append(name if orig is None else orig)
        self.name.append(name)
        self.sub_kind.append(NOSUB)
        self.sub.append(NIL)
        self.prev.append(NIL)
        self.next.append(NIL)
        self.occ.append({} if binder else None)
        return len(self.name) - 1

    def fresh_name(self, orig: str) -> str:
        name = f"{orig}_{self.counter}"
        self.counter += 1
        return name

    def fresh_decl(self, orig: str, binder: bool = False) -> int:
        return self.new_decl(self.fresh_name(orig), orig, binder)

    def new_var(self, decl: int) -> int:
        n = self._alloc(VAR, decl, NIL)
        occ = self.occ[decl]
        if occ is not None:
            occ[n] = None
        return n

    def new_abs(self, decl: int, body: int) -> int:
        n = self._alloc(ABS, decl, body)
        self.parent[body] = n
        return n

    def new_app(self, head: int, arg: int) -> int:
        n = self._alloc(APP, head, arg)
        self.parent[head] = n
        self.parent[arg] = n
        return n

    def free_node(self, n: int) -> None:
        """Release a single node (not its children) to the free-list."""
        if self.kind[n] == VAR:
            occ = self.occ[self.fst[n]]
            if occ is not None:
                occ.pop(n, None)
        self.kind[n] = FREE
        self.parent[n] = NIL
        self._free_nodes.append(n)

    def live_nodes(self) -> int:
        return len(self.kind) - len(self._free_nodes)

    # -- accessors ----------------------------------------------------------

    def occurrences(self, abs_node: int) -> list[int]:
        occ = self.occ[self.fst[abs_node]]
        return [] if occ is None else list(occ)

    def children(self, n: int) -> tuple[int, ...]:
        k = self.kind[n]
        if k == VAR:
            return ()
        if k == ABS:
            return (self.snd[n],)
        return (self.fst[n], self.snd[n])

    def replace_child(self, parent: int, old: int, new: int) -> None:
        if self.kind[parent] == ABS:
            self.snd[parent] = new
        elif self.fst[parent] == old:
            self.fst[parent] = new
        else:
            self.snd[parent] = new
        self.parent[new] = parent

    def is_value(self, n: int) -> bool:
        return self.kind[n] == ABS

    # -- whole-term utilities -------------------------------------------------

    def nodes(self, root: int) -> list[int]:
        """Preorder list of the nodes of the term rooted at ``root``."""
        out = []
        todo = [root]
        kind, fst, snd = self.kind, self.fst, self.snd
        while todo:
            n = todo.pop()
            out.append(n)
            k = kind[n]
            if k == APP:
                todo.append(snd[n])
                todo.append(fst[n])
            elif k == ABS:
                todo.append(snd[n])
        return out

    def size(self, root: int) -> int:
        return len(self.nodes(root))

    def free_decls(self, root: int) -> set[int]:
        bound = set()
        free = set()
        for n in self.nodes(root):
            if self.kind[n] == ABS:
                bound.add(self.fst[n])
        for n in self.nodes(root):
            if self.kind[n] == VAR and self.fst[n] not in bound:
                free.add(self.fst[n])
        return free

    def bound_decls(self, root: int) -> list[int]:
        return [self.fst[n] for n in self.nodes(root) if self.kind[n] == ABS]

    def release(self, root: int) -> None:
        """Free every node of the term rooted at ``root``."""
        for n in self.nodes(root):
            self.free_node(n)

    def rename(self, root: int) -> int:
        """Copy ``root`` with fresh bound names, sharing free declarations.

        Each bound declaration is temporarily redirected to its copy through
        the ``COPY`` substitution slot, so every occurrence is resolved in
        O(1) and the whole copy takes time linear in the size of the term.
        """
        n_nodes = 0
        redirected = []
        kind, fst, snd = self.kind, self.fst, self.snd
        sub_kind, sub = self.sub_kind, self.sub
        # iterative postorder: (node, stage)
        results: list[int] = []
        todo = [(root, 0)]
        while todo:
            n, stage = todo.pop()
            k = kind[n]
            if k == VAR:
                d = fst[n]
                if sub_kind[d] == COPY:
                    d = sub[d]
                results.append(self.new_var(d))
                n_nodes += 1
            elif k == ABS:
                if stage == 0:
                    d = fst[n]
                    nd = self.fresh_decl(self.orig[d], binder=True)
                    redirected.append((d, sub_kind[d], sub[d]))
                    sub_kind[d] = COPY
                    sub[d] = nd
                    todo.append((n, 1))
                    todo.append((snd[n], 0))
                else:
                    body = results.pop()
                    results.append(self.new_abs(sub[fst[n]], body))
                    n_nodes += 1
            else:
                if stage == 0:
                    todo.append((n, 1))
                    todo.append((snd[n], 0))
                    todo.append((fst[n], 0))
                else:
                    arg = results.pop()
                    head = results.pop()
                    results.append(self.new_app(head, arg))
                    n_nodes += 1
        for d, sk, s in redirected:
            sub_kind[d] = sk
            sub[d] = s
        self.last_copy_size = n_nodes
        return results[0]

    # -- structural checks -----------------------------------------------------

    def audit(self, root: int) -> None:
        """Check parent links, occurrence sets and well-boundness below ``root``.

        Raises AssertionError on the first violation.
        """
        if self.parent[root] != NIL:
            p = self.parent[root]
            assert root in self.children(p), f"node {root}: parent {p} does not own it"
        seen_binders = set()
        for n in self.nodes(root):
            assert self.kind[n] != FREE, f"freed node {n} reachable"
            for c in self.children(n):
                assert self.parent[c] == n, f"node {c}: parent {self.parent[c]} != {n}"
            if self.kind[n] == ABS:
                d = self.fst[n]
                assert d not in seen_binders, f"declaration {self.name[d]} bound twice"
                seen_binders.add(d)
                occ = self.occ[d]
                assert occ is not None, f"binder {self.name[d]} lacks an occurrence set"
                found = {m for m in self.nodes(self.snd[n]) if self.kind[m] == VAR and self.fst[m] == d}
                assert found == set(occ), f"occurrence set of {self.name[d]} out of sync"
            assert not self.mark[n], f"node {n} left marked"


@dataclass
class Term:
    """A root node together with its store; convenient for tests and the CLI."""

    store: TermStore
    root: int

    def __str__(self) -> str:
        return to_text(self.store, self.root)


# -- parsing -------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def _tokenize(text: str):
    line, col = 1, 1
    i = 0
    toks = []
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if c in "\\λ":
            toks.append(("lam", c, line, col))
        elif c in "().":
            toks.append((c, c, line, col))
        else:
            m = _IDENT.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {c!r}", line, col)
            toks.append(("id", m.group(), line, col))
            i = m.end()
            col += len(m.group())
            continue
        i += 1
        col += 1
    toks.append(("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, store: TermStore):
        self.toks = _tokenize(text)
        self.pos = 0
        self.store = store
        self.scope: dict[str, list[int]] = {}
        self.free: dict[str, int] = {}
        self.used_names: set[str] = set()
        self.free_names = {t[1] for t in self.toks if t[0] == "id"}

    def peek(self):
        return self.toks[self.pos]

    def expect(self, kind: str):
        tok = self.toks[self.pos]
        if tok[0] != kind:
            what = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {what}", tok[2], tok[3])
        self.pos += 1
        return tok

    def term(self) -> int:
        if self.peek()[0] == "lam":
            return self.lam()
        return self.app()

    def lam(self) -> int:
        self.expect("lam")
        ident = self.expect("id")[1]
        self.expect(".")
        st = self.store
        name = ident
        if name in self.used_names:
            # keep bound names pairwise distinct
            while name in self.used_names or name in self.free_names:
                name = st.fresh_name(ident)
        self.used_names.add(name)
        d = st.new_decl(name, ident, binder=True)
        self.scope.setdefault(ident, []).append(d)
        body = self.term()
        self.scope[ident].pop()
        return st.new_abs(d, body)

    def atom(self) -> int:
        tok = self.peek()
        if tok[0] == "id":
            self.pos += 1
            stack = self.scope.get(tok[1])
            if stack:
                return self.store.new_var(stack[-1])
            d = self.free.get(tok[1])
            if d is None:
                d = self.free[tok[1]] = self.store.new_decl(tok[1])
            return self.store.new_var(d)
        if tok[0] == "(":
            self.pos += 1
            t = self.term()
            self.expect(")")
            return t
        what = "end of input" if tok[0] == "eof" else repr(tok[1])
        raise ParseError(f"expected a term, found {what}", tok[2], tok[3])

    def app(self) -> int:
        t = self.atom()
        while True:
            kind = self.peek()[0]
            if kind in ("id", "("):
                t = self.store.new_app(t, self.atom())
            elif kind == "lam":
                # a trailing abstraction extends to the right
                t = self.store.new_app(t, self.lam())
            else:
                return t


def parse(text: str, store: TermStore | None = None) -> Term:
    """Parse concrete syntax into ``store`` (a fresh one by default)."""
    store = TermStore() if store is None else store
    p = _Parser(text, store)
    root = p.term()
    tok = p.peek()
    if tok[0] != "eof":
        raise ParseError(f"unexpected {tok[1]!r}", tok[2], tok[3])
    # start the counter past any numeric suffix already present in the input
    for name in p.used_names | p.free_names:
        m = _SUFFIX.match(name)
        if m:
            store.counter = max(store.counter, int(m.group(2)) + 1)
    # a binder must not share its name with a free variable
    free_names = set(p.free)
    for d in store.bound_decls(root):
        if store.name[d] in free_names:
            name = store.fresh_name(store.orig[d])
            while name in p.used_names or name in p.free_names:
                name = store.fresh_name(store.orig[d])
            store.name[d] = name
    return Term(store, root)


# -- printing ------------------------------------------------------------------


def to_text(store: TermStore, root: int, unicode: bool = False) -> str:
    """Print a term.  ASCII style is ``\\x. x y``; unicode style is ``λx.x y``."""
    lam, dot = ("λ", ".") if unicode else ("\\", ". ")
    out: list[str] = []
    kind, fst, snd, name = store.kind, store.fst, store.snd, store.name
    # explicit stack of pending items: node ids or literal strings
    todo: list[int | str] = [root]
    while todo:
        item = todo.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        k = kind[item]
        if k == VAR:
            out.append(name[fst[item]])
        elif k == ABS:
            out.append(lam + name[fst[item]] + dot)
            todo.append(snd[item])
        else:
            head, arg = fst[item], snd[item]
            if kind[arg] == VAR:
                todo.append(arg)
            else:
                todo.append(")")
                todo.append(arg)
                todo.append("(")
            todo.append(" ")
            if kind[head] == ABS:
                todo.append(")")
                todo.append(head)
                todo.append("(")
            else:
                todo.append(head)
    return "".join(out)


# -- alpha-equivalence -----------------------------------------------------------


def alpha_eq(s1: TermStore, t1: int, s2: TermStore, t2: int) -> bool:
    """Equality up to renaming of bound variables.

    Free variables are compared by declaration identity when both terms live
    in the same store, by name otherwise.
    """
    same = s1 is s2
    env1: dict[int, int] = {}
    env2: dict[int, int] = {}
    todo = [(t1, t2)]
    depth = 0
    while todo:
        a, b = todo.pop()
        ka, kb = s1.kind[a], s2.kind[b]
        if ka != kb:
            return False
        if ka == VAR:
            da, db = s1.fst[a], s2.fst[b]
            ba, bb = env1.get(da), env2.get(db)
            if ba is not None or bb is not None:
                if ba != bb:
                    return False
            elif same:
                if da != db:
                    return False
            elif s1.name[da] != s2.name[db]:
                return False
        elif ka == ABS:
            depth += 1
            env1[s1.fst[a]] = depth
            env2[s2.fst[b]] = depth
            todo.append((s1.snd[a], s2.snd[b]))
        else:
            todo.append((s1.snd[a], s2.snd[b]))
            todo.append((s1.fst[a], s2.fst[b]))
    return True


def copy_into(src: TermStore, root: int, dst: TermStore, free_map: dict[str, int] | None = None) -> int:
    """Copy a term from ``src`` into ``dst`` keeping display names.

    Free declarations are shared by name through ``free_map``.
    """
    free_map = {} if free_map is None else free_map
    decl_map: dict[int, int] = {}

    def walk(n: int) -> int:
        k = src.kind[n]
        if k == VAR:
            d = src.fst[n]
            nd = decl_map.get(d)
            if nd is None:
                nm = src.name[d]
                nd = free_map.get(nm)
                if nd is None:
                    nd = free_map[nm] = dst.new_decl(nm, src.orig[d])
            return dst.new_var(nd)
        if k == ABS:
            d = src.fst[n]
            decl_map[d] = dst.new_decl(src.name[d], src.orig[d], binder=True)
            return dst.new_abs(decl_map[d], walk(src.snd[n]))
        return dst.new_app(walk(src.fst[n]), walk(src.snd[n]))

    out = walk(root)
    dst.counter = max(dst.counter, src.counter)
    return out
