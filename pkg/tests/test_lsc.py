import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skelmad import lsc
from skelmad.gen import random_closed, random_term
from skelmad.skeleton import skeldec_value
from skelmad.syntax import ES, App, Fresh, Lam, SkES, Var, alpha_eq, fv, parse_sk, show, size

I = r"(\a. a)"


def step(text, strategy):
    return lsc.step(parse_sk(text), strategy)


def test_distant_beta_keeps_substitution_outside():
    label, t = step(r"(\x. y)[y\t] u", lsc.NEED)
    assert label == "dB"
    assert t == parse_sk(r"y[x\u][y\t]")


def test_linear_substitution_copies_the_value():
    label, t = step(rf"(x x)[x\{I}[y\t]]", lsc.NEED)
    assert label == "lsnd"
    assert alpha_eq(t, parse_sk(rf"({I} x)[x\{I}][y\t]"))


def test_skeletonization_of_a_closed_value():
    label, t = step(rf"(x {I} (x {I}))[x\{I}]", lsc.SKNEED)
    assert label == "sk"
    assert t == parse_sk(rf"(x {I} (x {I}))[x\\{I}]")


def test_skeletal_substitution():
    label, t = step(rf"(x {I} (x {I}))[x\\{I}]", lsc.SKNEED)
    assert label == "ss"
    assert alpha_eq(t, parse_sk(rf"({I} {I} (x {I}))[x\\{I}]"))


def test_sk_moves_flesh_outside():
    label, t = step(r"(x y)[x\(\a. a (z w))]", lsc.SKNEED)
    assert label == "sk"
    assert isinstance(t, ES) and show(t.arg) == "z w"
    inner = t.body
    assert isinstance(inner, SkES) and inner.var == "x"
    assert alpha_eq(Lam(t.var, inner.val), parse_sk(r"\p. \a. a p"))


@pytest.mark.parametrize("strategy", lsc.STRATEGIES)
def test_values_are_normal(strategy):
    assert lsc.step(parse_sk(r"\w. w"), strategy) is None
    assert lsc.step(parse_sk(r"(\w. w)[y\t]"), strategy) is None


def test_need_rejects_skeletal_substitutions():
    with pytest.raises(lsc.StrategyError):
        lsc.step(parse_sk(rf"x[x\\{I}]"), lsc.NEED)


def test_free_variable_is_stuck():
    assert lsc.step(parse_sk("x y"), lsc.SKNEED) is None


def test_dB_renames_when_argument_would_be_captured():
    # the substitution [y\t] must not capture the y of the argument
    label, t = step(r"(\x. y)[y\t] y", lsc.NEED)
    assert label == "dB"
    assert alpha_eq(t, parse_sk(r"z[x\y][z\t]"))
    assert fv(t) == {"t", "y"}


def test_family_term_zero():
    assert alpha_eq(lsc.family_term(0), parse_sk(rf"(\x. x {I} (x {I})) {I}"))


def test_family_grows_by_a_constant():
    sizes = [size(lsc.family_term(n)) for n in range(8)]
    diffs = {b - a for a, b in zip(sizes, sizes[1:])}
    assert len(diffs) == 1


@pytest.mark.parametrize("n", range(11))
def test_skeletal_family_counts(n):
    ev = lsc.evaluate(lsc.family_term(n), lsc.SKNEED, ink=False)
    assert ev.stats.beta == 6 * n + 4
    assert alpha_eq(_strip(ev.final), lsc.identity())


@pytest.mark.parametrize("n", range(6))
def test_need_family_counts(n):
    ev = lsc.evaluate(lsc.family_term(n), lsc.NEED, ink=False)
    assert ev.stats.beta == 8 * 2**n + n - 4
    assert alpha_eq(_strip(ev.final), lsc.identity())


def _strip(t):
    while isinstance(t, (ES, SkES)):
        t = t.body
    return t


def test_ink_space_separation():
    sk = [lsc.evaluate(lsc.family_term(n), lsc.SKNEED).stats.ink_space for n in range(2, 9)]
    nd = [lsc.evaluate(lsc.family_term(n), lsc.NEED).stats.ink_space for n in range(2, 7)]
    assert len({b - a for a, b in zip(sk, sk[1:])}) == 1
    assert all(b / a >= 1.8 for a, b in zip(nd, nd[1:]))


def test_final_context_sizes():
    def entries(t):
        k = 0
        while isinstance(t, (ES, SkES)):
            k, t = k + 1, t.body
        return k

    sk = [entries(lsc.evaluate(lsc.family_term(n), lsc.SKNEED, ink=False).final) for n in range(2, 9)]
    nd = [entries(lsc.evaluate(lsc.family_term(n), lsc.NEED, ink=False).final) for n in range(2, 7)]
    assert len({b - a for a, b in zip(sk, sk[1:])}) == 1
    assert all(b / a >= 1.8 for a, b in zip(nd, nd[1:]))


def test_skeletal_payloads_stay_skeletal():
    ev = lsc.evaluate(lsc.family_term(3), lsc.SKNEED, trace=True, ink=False)
    assert all(lsc.skeletal_payloads_ok(t) for _, t in ev.trace)


def test_fuel_exhaustion_is_flagged():
    omega = parse_sk(r"(\x. x x) (\y. y y)")
    ev = lsc.evaluate(omega, lsc.NEED, fuel=50, ink=False)
    assert ev.stats.exhausted and ev.stats.steps == 50


@pytest.mark.parametrize("seed", range(4))
def test_determinism_by_enumeration(seed):
    rng = random.Random(seed)
    for _ in range(40):
        t = lsc.well_bound(random_closed(rng, 10))
        for strategy in lsc.STRATEGIES:
            ev = lsc.evaluate(t, strategy, fuel=15, trace=True, ink=False)
            for u in [t] + [u for _, u in ev.trace]:
                if size(u) > 12:
                    continue
                found = lsc.all_redexes(u, strategy)
                r = lsc.locate(u, strategy)
                assert len(found) <= 1
                assert (r is None) == (not found)


def test_canonical_forms_of_floated_skeletal_substitution():
    a = parse_sk(rf"((x {I} (x {I}))[x\\(\z. w z)] y)[w\s]")
    b = parse_sk(rf"((x {I} (x {I})) y)[x\\(\z. w z)][w\s]")
    assert lsc.canonicalize(a) == lsc.canonicalize(b)


def test_canonical_form_keeps_substitutions_under_non_evaluation_positions():
    a = parse_sk(r"y (x[x\t])")
    b = parse_sk(r"(y x)[x\t]")
    assert lsc.canonicalize(a) != lsc.canonicalize(b)


def test_canonical_form_is_already_outermost():
    t = parse_sk(r"(f u)[x\s]")
    assert lsc.canonicalize(t) == lsc.alpha_normalize(t)


def _pure(rng, n, scope):
    return random_term(rng, n, scope)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.integers(1, 3))
def test_one_float_step_preserves_the_canonical_form(seed, skeletal, depth):
    rng = random.Random(seed)
    body = _pure(rng, rng.randint(1, 6), ("x", "f"))
    args = [_pure(rng, rng.randint(1, 4), ("f",)) for _ in range(depth)]
    if skeletal:
        payload = Lam("q", _pure(rng, rng.randint(1, 4), ("q",)))
        inner = SkES(body, "x", payload)
    else:
        payload = _pure(rng, rng.randint(1, 4), ("f",))
        inner = ES(body, "x", payload)
    left, right = inner, inner.body
    for a in args:
        left, right = App(left, a), App(right, a)
    right = SkES(right, "x", payload) if skeletal else ES(right, "x", payload)
    assert lsc.canonicalize(left) == lsc.canonicalize(right)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_alpha_normalize_is_idempotent_and_respects_alpha(seed):
    t = lsc.well_bound(random_closed(random.Random(seed), 14))
    n = lsc.alpha_normalize(t)
    assert alpha_eq(n, t)
    assert lsc.alpha_normalize(n) == n


def test_sk_agrees_with_the_store_split():
    from skelmad.skeleton import mark_skeleton, split
    from skelmad.syntax import from_store, to_store

    v = parse_sk(r"\x. x (z w) (\y. y (z w) x)")
    skel, flesh = skeldec_value(v, Fresh.avoiding(v))
    store, root = to_store(v)
    mark_skeleton(store, root)
    dec = split(store, root)
    assert len(dec.flesh) == len(flesh)
    assert all(alpha_eq(from_store(store, b), u) for (_, b), (_, u) in zip(dec.flesh, flesh))
    assert isinstance(skel, Lam)
