"""The plain and the skeletal call-by-need abstract machines.

States are (chain, code, stack, environment) over a :class:`TermStore`.  Code
and stack entries are node ids; the environment is an intrusive doubly-linked
list of declarations whose substitution slot holds the entry.  A variable
occurrence reaches its entry in O(1) through its declaration, and cutting or
re-joining the environment at an entry is O(1) as well.

Every term node in a state has exactly one owner (the code, a stack slot or an
entry), so transitions may consume nodes destructively.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .skeleton import mark_skeleton, split
from .syntax import ES, App, SkES, SkTerm, Var, binders, from_store, fv
from .terms import ABS, APP, COPY, FREE, HOLE, NIL, NOSUB, SKEL, SUB, VAR, Term, TermStore, copy_into, to_text

MAD = "MAD"
SMAD = "SMAD"
VARIANTS = (MAD, SMAD)

LABELS = ("beta", "sk", "ss", "sub", "sea1", "sea2", "sea3")
PRINCIPAL = ("beta", "sk", "ss", "sub")


class MachineError(RuntimeError):
    pass


class OpenTermError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"free variable {name!r}: machines run closed terms only")
        self.name = name


class FuelExhausted(RuntimeError):
    pass


class AuditError(AssertionError):
    pass


@dataclass
class ChainItem:
    decl: int  # its slot holds HOLE while the item is on the chain
    stack: list[int]
    head: int  # first declaration of the saved prefix, or the decl itself
    occ: int  # the variable occurrence that triggered the jump


@dataclass
class RunStats:
    counts: dict[str, int] = field(default_factory=lambda: dict.fromkeys(LABELS, 0))
    max_state_size: int = 0
    final_env_len: int = 0
    wall_nanos: int = 0
    initial_size: int = 0
    exhausted: bool = False
    # entries created by sk, one per flesh sub-term
    flesh: int = 0

    @property
    def beta(self) -> int:
        return self.counts["beta"]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def principal_labels(self) -> int:
        return sum(self.counts[k] for k in PRINCIPAL)


def normalize_variant(variant: str) -> str:
    v = variant.upper()
    if v not in VARIANTS:
        raise ValueError(f"unknown machine {variant!r}")
    return v


class Machine:
    """One run of a machine on a closed term."""

    def __init__(self, term: Term | TermStore, root: int | None = None, variant: str = SMAD):
        if isinstance(term, Term):
            src, src_root = term.store, term.root
        else:
            src, src_root = term, root
        self.variant = normalize_variant(variant)
        free = src.free_decls(src_root)
        if free:
            raise OpenTermError(sorted(src.name[d] for d in free)[0])
        store = TermStore()
        self.code = copy_into(src, src_root, store)
        # match a fresh numbering starting from the input's counter
        store.counter = src.counter
        self.store = store
        self.chain: list[ChainItem] = []
        self.stack: list[int] = []
        self.env = NIL
        self.stats = RunStats()
        self.initial_size = store.size(self.code)
        self.stats.initial_size = self.initial_size
        self.state_size = self.initial_size
        self.stats.max_state_size = self.state_size

    # -- transitions -----------------------------------------------------------------

    def is_final(self) -> bool:
        s = self.store
        return s.kind[self.code] == ABS and not self.stack and not self.chain

    def step(self) -> str | None:
        """Apply the enabled transition; return its label or None if final."""
        s = self.store
        kind, fst, snd = s.kind, s.fst, s.snd
        code = self.code
        k = kind[code]
        if k == APP:
            # sea1: push the argument
            head, arg = fst[code], snd[code]
            s.parent[head] = NIL
            s.parent[arg] = NIL
            s.free_node(code)
            self.stack.append(arg)
            self.code = head
            self.state_size -= 1
            return self._count("sea1")
        if k == ABS:
            if self.stack:
                # beta: the abstraction's declaration becomes an entry
                d, body = fst[code], snd[code]
                u = self.stack.pop()
                s.sub_kind[d] = SUB
                s.sub[d] = u
                s.occ[d] = None
                self._push_env(d)
                s.parent[body] = NIL
                s.kind[code] = FREE
                s._free_nodes.append(code)
                self.code = body
                self.state_size -= 1
                return self._count("beta")
            if self.chain:
                # sea3: store the value and resume
                item = self.chain.pop()
                d = item.decl
                s.sub_kind[d] = SUB
                s.sub[d] = code
                nxt = self.env
                s.next[d] = nxt
                if nxt != NIL:
                    s.prev[nxt] = d
                self.env = item.head
                self.code = item.occ
                self.stack = item.stack
                self.state_size += 1
                return self._count("sea3")
            return None
        # variable
        d = fst[code]
        sk = s.sub_kind[d]
        if sk == SUB:
            t = s.sub[d]
            if kind[t] != ABS:
                # sea2: evaluate inside the entry
                head = self.env
                nxt = s.next[d]
                self.chain.append(ChainItem(d, self.stack, head, code))
                s.sub_kind[d] = HOLE
                s.sub[d] = NIL
                s.next[d] = NIL
                if nxt != NIL:
                    s.prev[nxt] = NIL
                self.env = nxt
                self.stack = []
                self.code = t
                self.state_size -= 1
                return self._count("sea2")
            if self.variant == MAD:
                self._substitute(code, t)
                return self._count("sub")
            # sk: split the value, flesh goes right after the entry
            mark_skeleton(s, t)
            dec = split(s, t)
            s.sub_kind[d] = SKEL
            after = s.next[d]
            last = d
            for pd, body in dec.flesh:
                s.sub_kind[pd] = SUB
                s.sub[pd] = body
                s.prev[pd] = last
                s.next[last] = pd
                last = pd
            s.next[last] = after
            if after != NIL:
                s.prev[after] = last
            self.state_size += len(dec.flesh)
            self.stats.flesh += len(dec.flesh)
            return self._count("sk")
        if sk == SKEL:
            self._substitute(code, s.sub[d])
            return self._count("ss")
        if sk == HOLE:
            raise MachineError(f"variable {s.name[d]} demanded while its entry is being evaluated")
        raise MachineError(f"variable {s.name[d]} has no entry")

    def _substitute(self, occ: int, v: int) -> None:
        s = self.store
        copy = s.rename(v)
        s.free_node(occ)
        self.code = copy
        self.state_size += s.last_copy_size - 1

    def _push_env(self, d: int) -> None:
        s = self.store
        head = self.env
        s.prev[d] = NIL
        s.next[d] = head
        if head != NIL:
            s.prev[head] = d
        self.env = d

    def _count(self, label: str) -> str:
        self.stats.counts[label] += 1
        if self.state_size > self.stats.max_state_size:
            self.stats.max_state_size = self.state_size
        return label

    def run(self, fuel: int = 10**7, audit: bool = False, on_step=None) -> RunStats:
        """Drive the machine to a final state or until ``fuel`` transitions."""
        start = time.perf_counter_ns()
        n = 0
        if audit:
            self.audit()
        while True:
            if n >= fuel:
                if not self.is_final():
                    self.stats.exhausted = True
                break
            label = self.step()
            if label is None:
                break
            n += 1
            if audit:
                self.audit()
            if on_step is not None:
                on_step(label, self)
        self.stats.wall_nanos = time.perf_counter_ns() - start
        self.stats.final_env_len = self.env_length()
        return self.stats

    # -- inspection ------------------------------------------------------------------

    def env_decls(self, head: int | None = None, stop: int = NIL) -> list[int]:
        s = self.store
        out = []
        d = self.env if head is None else head
        while d != NIL and d != stop:
            out.append(d)
            d = s.next[d]
        return out

    def env_length(self) -> int:
        return len(self.env_decls())

    def state_terms(self) -> list[int]:
        """Roots of every term in the state: code, stacks and entries."""
        s = self.store
        roots = [self.code, *self.stack]
        decls = self.env_decls()
        for item in self.chain:
            roots.extend(item.stack)
            decls.extend(self.env_decls(item.head, item.decl))
        for d in decls:
            if s.sub_kind[d] in (SUB, SKEL):
                roots.append(s.sub[d])
        return roots

    def measured_size(self) -> int:
        return sum(self.store.size(r) for r in self.state_terms())

    def readback(self) -> SkTerm:
        """Decode the state into a term with explicit and skeletal substitutions."""
        s = self.store

        def tree(n: int) -> SkTerm:
            return from_store(s, n)

        def with_stack(t: SkTerm, stack: list[int]) -> SkTerm:
            for u in reversed(stack):
                t = App(t, tree(u))
            return t

        def with_env(t: SkTerm, decls: list[int]) -> SkTerm:
            for d in decls:
                k = s.sub_kind[d]
                if k == SUB:
                    t = ES(t, s.name[d], tree(s.sub[d]))
                elif k == SKEL:
                    t = SkES(t, s.name[d], tree(s.sub[d]))
                else:
                    raise MachineError(f"entry {s.name[d]} has no content")
            return t

        pending = None
        for item in self.chain:
            inner = with_stack(Var(s.name[item.decl]), item.stack)
            if pending is not None:
                inner = ES(pending[0], pending[1], inner)
            prefix = self.env_decls(item.head, item.decl)
            pending = (with_env(inner, prefix), s.name[item.decl])
        t = with_stack(tree(self.code), self.stack)
        if pending is not None:
            t = ES(pending[0], pending[1], t)
        return with_env(t, self.env_decls())

    def result(self) -> SkTerm:
        return from_store(self.store, self.code)

    # -- audits ----------------------------------------------------------------------

    def audit(self) -> None:
        """Check closure, well-boundness, the sub-term property and the data structures."""
        s = self.store
        try:
            for r in self.state_terms():
                s.audit(r)
                size = s.size(r)
                if size > self.initial_size:
                    raise AuditError(f"term of size {size} exceeds the initial size {self.initial_size}")
            self._audit_env(self.env)
            for item in self.chain:
                if s.sub_kind[item.decl] != HOLE:
                    raise AuditError(f"chain variable {s.name[item.decl]} is not a hole")
                self._audit_env(item.head, item.decl)
            measured = self.measured_size()
            if measured != self.state_size:
                raise AuditError(f"state size drift: tracked {self.state_size}, measured {measured}")
            self._audit_closure()
        except AssertionError as exc:
            raise AuditError(str(exc)) from exc

    def _audit_env(self, head: int, stop: int = NIL) -> None:
        s = self.store
        if head == NIL or head == stop:
            return
        if s.prev[head] != NIL:
            raise AuditError(f"environment head {s.name[head]} has a predecessor")
        d = head
        while d != NIL and d != stop:
            nxt = s.next[d]
            if nxt != NIL and nxt != stop and s.prev[nxt] != d:
                raise AuditError(f"broken back link after {s.name[d]}")
            if s.sub_kind[d] not in (SUB, SKEL):
                raise AuditError(f"entry {s.name[d]} is not a substitution")
            d = nxt
        if stop != NIL and d != stop:
            raise AuditError("saved prefix does not reach its chain variable")

    def _audit_closure(self) -> None:
        """Every free variable is bound by an entry to its right; names are unique."""
        t = self.readback()
        free = fv(t)
        if free:
            raise AuditError(f"unbound variables {sorted(free)}")
        bs = binders(t)
        if len(bs) != len(set(bs)):
            raise AuditError("binder names are not pairwise distinct")
        # sk entries must hold skeletons: skeleton values are unaffected by splitting
        s = self.store
        for d in self._all_entries():
            if s.sub_kind[d] == SKEL and not _is_skeletal(s, s.sub[d]):
                raise AuditError(f"skeletal entry {s.name[d]} holds a value with flesh")

    def _all_entries(self) -> list[int]:
        decls = self.env_decls()
        for item in self.chain:
            decls.extend(self.env_decls(item.head, item.decl))
        return decls

    # -- tracing ---------------------------------------------------------------------

    def render_row(self, unicode: bool = True) -> str:
        """One row in the chain | code | stack | env layout."""
        s = self.store

        def show(n: int) -> str:
            return to_text(s, n, unicode)

        def payload(n: int) -> str:
            # in ASCII, an abstraction right after the separator would read as a skeletal entry
            text = show(n)
            return text if unicode or s.kind[n] != ABS else f"({text})"

        def entry(d: int) -> str:
            k = s.sub_kind[d]
            if k == SUB:
                return f"[{s.name[d]}\\{payload(s.sub[d])}]"
            if k == SKEL:
                return f"[{s.name[d]}\\\\{payload(s.sub[d])}]"
            return f"[{s.name[d]}\\.]"

        def stack_text(stack: list[int]) -> str:
            return ":".join(show(u) for u in reversed(stack))

        items = []
        for item in self.chain:
            prefix = [entry(d) for d in self.env_decls(item.head, item.decl)] + [entry(item.decl)]
            items.append(f"({s.name[item.decl]},{stack_text(item.stack)},{':'.join(prefix)})")
        env = ":".join(entry(d) for d in self.env_decls())
        return f"{':'.join(items)} | {show(self.code)} | {stack_text(self.stack)} | {env}"


def _is_skeletal(s: TermStore, v: int) -> bool:
    mark_skeleton(s, v)
    todo = [v]
    ok = True
    while todo:
        n = todo.pop()
        for c in s.children(n):
            if s.mark[c]:
                todo.append(c)
            elif s.kind[c] != VAR:
                ok = False
    # clear the marks without splitting
    for n in s.nodes(v):
        s.mark[n] = False
    return ok


@dataclass
class Run:
    machine: Machine
    stats: RunStats
    trace: list[tuple[str, str]] | None
    labels: list[str] | None


def run(term: Term, variant: str = SMAD, fuel: int = 10**7, audit: bool = False, trace: bool = False, labels: bool = False) -> Run:
    """Initialize and run a machine; optionally record a trace or the label sequence."""
    m = Machine(term, variant=variant)
    rows: list[tuple[str, str]] | None = [("", m.render_row())] if trace else None
    seq: list[str] | None = [] if labels else None

    def record(label: str, mach: Machine) -> None:
        if rows is not None:
            rows.append((label, mach.render_row()))
        if seq is not None:
            seq.append(label)

    stats = m.run(fuel, audit=audit, on_step=record if (trace or labels) else None)
    return Run(m, stats, rows, seq)


def check_bounds(stats: RunStats, initial_size: int, variant: str = SMAD) -> list[str]:
    """Violations of the transition-count bounds for a completed run."""
    c = stats.counts
    beta = c["beta"]
    copies = c["ss"] if normalize_variant(variant) == SMAD else c["sub"]
    bad = []
    if c["sea2"] > beta:
        bad.append(f"sea2={c['sea2']} > beta={beta}")
    if c["sea3"] > beta:
        bad.append(f"sea3={c['sea3']} > beta={beta}")
    if copies > 2 * beta + 1:
        bad.append(f"substitutions={copies} > 2*beta+1={2 * beta + 1}")
    if c["sk"] > c["ss"] and normalize_variant(variant) == SMAD:
        bad.append(f"sk={c['sk']} > ss={c['ss']}")
    limit = initial_size * (copies + c["sea2"] + 1)
    if c["sea1"] > limit:
        bad.append(f"sea1={c['sea1']} > |t|*(copies+sea2+1)={limit}")
    return bad


def check_bounds_with_flesh(stats: RunStats, initial_size: int, variant: str = SMAD) -> list[str]:
    """Like :func:`check_bounds`, but entries created by sk also feed sea2 and sea3.

    Flesh entries hold non-values, so each of them can trigger one sea2/sea3
    pair on top of those caused by beta.
    """
    c = stats.counts
    room = c["beta"] + stats.flesh
    bad = [b for b in check_bounds(stats, initial_size, variant) if not b.startswith(("sea2", "sea3"))]
    if c["sea2"] > room:
        bad.append(f"sea2={c['sea2']} > beta+flesh={room}")
    if c["sea3"] > room:
        bad.append(f"sea3={c['sea3']} > beta+flesh={room}")
    return bad


__all__ = [
    "MAD",
    "SMAD",
    "AuditError",
    "ChainItem",
    "FuelExhausted",
    "Machine",
    "MachineError",
    "OpenTermError",
    "Run",
    "RunStats",
    "check_bounds",
    "check_bounds_with_flesh",
    "run",
]
