"""Random and exhaustive generators of pure terms.

All generated terms are well-bound: binders get distinct names ``a0, a1, ...``
and free variables come from a caller-supplied pool.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .syntax import App, Lam, SkTerm, Var


class _Names:
    def __init__(self) -> None:
        self.n = 0

    def __call__(self) -> str:
        name = f"a{self.n}"
        self.n += 1
        return name


def random_term(rng: random.Random, size: int, scope: tuple[str, ...] = (), app_bias: float = 0.5) -> SkTerm:
    """A term with exactly ``size`` constructors over the variables in ``scope``.

    With an empty scope the result is closed; sizes that admit no closed term
    (only size 1) raise ValueError.
    """
    if size < 1 or (size == 1 and not scope):
        raise ValueError(f"no term of size {size} over {scope!r}")
    fresh = _Names()

    def go(n: int, sc: tuple[str, ...]) -> SkTerm:
        if n == 1:
            return Var(rng.choice(sc))
        can_app = n >= 3 and (sc or n >= 5)
        if can_app and rng.random() < app_bias:
            lo = 1 if sc else 2
            k = rng.randint(lo, n - 1 - lo)
            return App(go(k, sc), go(n - 1 - k, sc))
        x = fresh()
        return Lam(x, go(n - 1, sc + (x,)))

    return go(size, tuple(scope))


def random_value(rng: random.Random, max_size: int, free: tuple[str, ...] = ("z", "w")) -> Lam:
    """An abstraction of size between 2 and ``max_size`` with free names from ``free``."""
    n = rng.randint(2, max_size)
    body = random_term(rng, n - 1, free + ("x",))
    # generated binders are a0, a1, ... and never clash with x
    return Lam("x", body)


def random_closed(rng: random.Random, max_size: int, min_size: int = 3, app_bias: float = 0.6) -> SkTerm:
    n = rng.randint(min_size, max_size)
    if n == 1:
        n = 2
    return random_term(rng, n, (), app_bias)


@lru_cache(maxsize=None)
def _count(n: int, k: int) -> int:
    """Number of terms of size n with k variables in scope."""
    if n <= 0:
        return 0
    if n == 1:
        return k
    total = _count(n - 1, k + 1)
    for i in range(1, n - 1):
        total += _count(i, k) * _count(n - 1 - i, k)
    return total


def count_terms(n: int, k: int) -> int:
    return _count(n, k)


def all_terms(n: int, scope: tuple[str, ...]):
    """Every term of size ``n`` over ``scope``, binders named by depth."""
    if n <= 0:
        return
    if n == 1:
        for x in scope:
            yield Var(x)
        return
    x = f"a{len(scope)}"
    for body in all_terms(n - 1, scope + (x,)):
        yield Lam(x, body)
    for i in range(1, n - 1):
        for f in all_terms(i, scope):
            for a in all_terms(n - 1 - i, scope):
                yield App(f, a)


def all_values(max_size: int, free: tuple[str, ...] = ("z",)):
    """Every abstraction ``\\x. t`` with size at most ``max_size``.

    Binders are named by depth, which may repeat across siblings; use
    :func:`skelmad.lsc.well_bound` when distinct names are required.
    """
    for n in range(2, max_size + 1):
        for body in all_terms(n - 1, free + ("x",)):
            yield Lam("x", body)
