"""Fast counting runs of the machines.

The compiled kernel is used when it was built; otherwise the pure-Python twin
with the same algorithm is selected.  ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

from . import _pykernel
from .machine import LABELS, SMAD, OpenTermError, RunStats, normalize_variant
from .syntax import App, Lam, SkTerm, Var
from .terms import ABS, APP, VAR, Term

try:
    if os.environ.get("SKELMAD_PURE"):
        raise ImportError("pure backend forced")
    from . import _ckernel as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernel
    BACKEND = "python"

_BACKENDS = {"python": _pykernel}
if BACKEND == "cython":
    _BACKENDS["cython"] = _impl

# kernel counter order
_ORDER = ("beta", "sk", "ss", "sub", "sea1", "sea2", "sea3")


def available_backends() -> list[str]:
    return list(_BACKENDS)


@dataclass
class FlatTerm:
    kind: list[int]
    fst: list[int]
    snd: list[int]
    names: list[str]

    @property
    def size(self) -> int:
        return len(self.kind)


def flatten(term: Term) -> FlatTerm:
    """Preorder flat arrays with the root at index 0 and dense declarations."""
    s, root = term.store, term.root
    free = s.free_decls(root)
    if free:
        raise OpenTermError(sorted(s.name[d] for d in free)[0])
    order = s.nodes(root)
    index = {n: i for i, n in enumerate(order)}
    decls: dict[int, int] = {}
    names: list[str] = []
    kind, fst, snd = [], [], []
    for n in order:
        k = s.kind[n]
        kind.append(k)
        if k == APP:
            fst.append(index[s.fst[n]])
            snd.append(index[s.snd[n]])
            continue
        d = s.fst[n]
        if d not in decls:
            decls[d] = len(names)
            names.append(s.name[d])
        fst.append(decls[d])
        snd.append(index[s.snd[n]] if k == ABS else -1)
    return FlatTerm(kind, fst, snd, names)


def _rebuild(encoded, names: list[str]) -> SkTerm:
    """Inverse of the kernels' preorder export; copies get numbered names."""
    shown: dict[int, str] = {}

    def name(decl: int, orig: int) -> str:
        if decl not in shown:
            base = names[orig] if orig >= 0 else "p"
            shown[decl] = base if decl < len(names) else f"{base}_{decl}"
        return shown[decl]

    results: list = []
    for tag, decl, orig in reversed(encoded):
        if tag == VAR:
            results.append(Var(name(decl, orig)))
        elif tag == ABS:
            results.append(Lam(name(decl, orig), results.pop()))
        else:
            head = results.pop()
            results.append(App(head, results.pop()))
    return results[0]


@dataclass
class FastRun:
    stats: RunStats
    result: SkTerm
    backend: str


def run_fast(term: Term | FlatTerm, variant: str = SMAD, fuel: int = 10**7, backend: str | None = None) -> FastRun:
    """Counts, final environment length and maximal state size of a run."""
    flat = term if isinstance(term, FlatTerm) else flatten(term)
    name = backend or BACKEND
    impl = _BACKENDS[name]
    skeletal = normalize_variant(variant) == SMAD
    start = time.perf_counter_ns()
    counts, env_len, max_size, exhausted, code = impl.run(flat.kind, flat.fst, flat.snd, len(flat.names), skeletal, fuel)
    wall = time.perf_counter_ns() - start
    stats = RunStats(
        counts=dict(zip(_ORDER, (int(c) for c in counts))),
        max_state_size=int(max_size),
        final_env_len=int(env_len),
        wall_nanos=wall,
        initial_size=flat.size,
        exhausted=bool(exhausted),
    )
    assert set(stats.counts) == set(LABELS)
    return FastRun(stats, _rebuild(code, flat.names), name)
