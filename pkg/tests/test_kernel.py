import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skelmad import kernel, lsc
from skelmad.gen import random_closed
from skelmad.machine import MAD, SMAD, Machine, OpenTermError
from skelmad.syntax import Lam, Var, alpha_eq, fv, subterms, to_store
from skelmad.terms import Term, parse

BACKENDS = kernel.available_backends()


def _close(t):
    """Bind free variables in order of first occurrence, so names do not matter."""
    seen = []
    for u in subterms(t):
        if isinstance(u, Var) and u.name in fv(t) and u.name not in seen:
            seen.append(u.name)
    for x in reversed(seen):
        t = Lam(x, t)
    return t


def _term(t):
    store, root = to_store(t)
    return Term(store, root)


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernel.BACKEND in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("variant", [MAD, SMAD])
def test_family_parity(backend, variant):
    for n in range(9):
        t = _term(lsc.family_term(n))
        ref = Machine(t, variant=variant).run()
        fast = kernel.run_fast(t, variant, backend=backend)
        assert fast.stats.counts == ref.counts
        assert fast.stats.final_env_len == ref.final_env_len
        assert fast.stats.max_state_size == ref.max_state_size
        assert alpha_eq(fast.result, lsc.identity())


@pytest.mark.parametrize("backend", BACKENDS)
def test_golden_input(backend, family3):
    fast = kernel.run_fast(family3, SMAD, backend=backend)
    assert fast.stats.beta == 24
    assert fast.backend == backend


@pytest.mark.parametrize("backend", BACKENDS)
def test_fuel(backend):
    fast = kernel.run_fast(parse(r"(\x. x x) (\y. y y)"), MAD, fuel=1000, backend=backend)
    assert fast.stats.exhausted
    assert sum(fast.stats.counts.values()) == 1000


def test_open_terms_rejected():
    with pytest.raises(OpenTermError):
        kernel.flatten(parse(r"\x. y"))


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([MAD, SMAD]))
def test_random_parity(seed, variant):
    t = _term(lsc.well_bound(random_closed(random.Random(seed), 16)))
    ref = Machine(t, variant=variant)
    stats = ref.run(fuel=5000)
    for backend in BACKENDS:
        fast = kernel.run_fast(t, variant, fuel=5000, backend=backend)
        assert fast.stats.counts == stats.counts
        assert fast.stats.exhausted == stats.exhausted
        assert fast.stats.max_state_size == stats.max_state_size
        if not stats.exhausted:
            assert fast.stats.final_env_len == stats.final_env_len
            assert alpha_eq(_close(fast.result), _close(ref.result()))
