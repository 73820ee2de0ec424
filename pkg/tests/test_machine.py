import random

import pytest

from skelmad import lsc
from skelmad.gen import random_closed
from skelmad.machine import (
    MAD,
    SMAD,
    AuditError,
    Machine,
    OpenTermError,
    check_bounds,
    check_bounds_with_flesh,
    run,
)
from skelmad.syntax import ES, SkES, alpha_eq, from_store, parse_sk, to_store
from skelmad.terms import HOLE, SKEL, SUB, Term, parse, to_text

G = "λx.λy.xi(xi)y"
# expected rows of the skeletal run on the family_3 input, as
# (label, chain | code | stack | env) with all blanks removed
GOLDEN = [
    ("", "|(λi.(λg.(λz.zi(zi))(g(g(gi))))(λx.λy.xi(xi)y))(λw.w)||"),
    ("sea1", "|λi.(λg.(λz.zi(zi))(g(g(gi))))(λx.λy.xi(xi)y)|λw.w|"),
    ("beta", "|(λg.(λz.zi(zi))(g(g(gi))))(λx.λy.xi(xi)y)||[i\\λw.w]"),
    ("sea1", "|λg.(λz.zi(zi))(g(g(gi)))|λx.λy.xi(xi)y|[i\\λw.w]"),
    ("beta", f"|(λz.zi(zi))(g(g(gi)))||[g\\{G}]:[i\\λw.w]"),
    ("sea1", f"|λz.zi(zi)|g(g(gi))|[g\\{G}]:[i\\λw.w]"),
    ("beta", f"|zi(zi)||[z\\g(g(gi))]:[g\\{G}]:[i\\λw.w]"),
    ("sea1", f"|zi|zi|[z\\g(g(gi))]:[g\\{G}]:[i\\λw.w]"),
    ("sea1", f"|z|i:zi|[z\\g(g(gi))]:[g\\{G}]:[i\\λw.w]"),
    ("sea2", f"(z,i:zi,[z\\.])|g(g(gi))||[g\\{G}]:[i\\λw.w]"),
    ("sea1", f"(z,i:zi,[z\\.])|g|g(gi)|[g\\{G}]:[i\\λw.w]"),
    ("sk", f"(z,i:zi,[z\\.])|g|g(gi)|[g\\\\{G}]:[i\\λw.w]"),
    ("ss", f"(z,i:zi,[z\\.])|λx_1.λy_2.x_1i(x_1i)y_2|g(gi)|[g\\\\{G}]:[i\\λw.w]"),
    ("beta", f"(z,i:zi,[z\\.])|λy_2.x_1i(x_1i)y_2||[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sea3", f"|z|i:zi|[z\\λy_2.x_1i(x_1i)y_2]:[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sk", f"|z|i:zi|[z\\\\λy_2.p_3y_2]:[p_3\\x_1i(x_1i)]:[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("ss", f"|λy_4.p_3y_4|i:zi|[z\\\\λy_2.p_3y_2]:[p_3\\x_1i(x_1i)]:[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("beta", f"|p_3y_4|zi|[y_4\\i]:[z\\\\λy_2.p_3y_2]:[p_3\\x_1i(x_1i)]:[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sea1", f"|p_3|y_4:zi|[y_4\\i]:[z\\\\λy_2.p_3y_2]:[p_3\\x_1i(x_1i)]:[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
]
CHAIN = "(p_3,y_4:zi,[y_4\\i]:[z\\\\λy_2.p_3y_2]:[p_3\\.])"
GOLDEN += [
    ("sea2", f"{CHAIN}|x_1i(x_1i)||[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sea1", f"{CHAIN}|x_1i|x_1i|[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sea1", f"{CHAIN}|x_1|i:x_1i|[x_1\\g(gi)]:[g\\\\{G}]:[i\\λw.w]"),
    ("sea2", f"{CHAIN}:(x_1,i:x_1i,[x_1\\.])|g(gi)||[g\\\\{G}]:[i\\λw.w]"),
    ("sea1", f"{CHAIN}:(x_1,i:x_1i,[x_1\\.])|g|gi|[g\\\\{G}]:[i\\λw.w]"),
    ("ss", f"{CHAIN}:(x_1,i:x_1i,[x_1\\.])|λx_5.λy_6.x_5i(x_5i)y_6|gi|[g\\\\{G}]:[i\\λw.w]"),
    ("beta", f"{CHAIN}:(x_1,i:x_1i,[x_1\\.])|λy_6.x_5i(x_5i)y_6||[x_5\\gi]:[g\\\\{G}]:[i\\λw.w]"),
]


def _squash(row: str) -> str:
    return "".join(row.split())


def test_golden_trace_prefix(family3):
    r = run(family3, SMAD, trace=True)
    got = [(label, _squash(row)) for label, row in r.trace[: len(GOLDEN)]]
    for i, (want, have) in enumerate(zip(GOLDEN, got)):
        assert have == want, f"row {i}"


def test_golden_counts(family3):
    r = run(family3, SMAD)
    assert r.stats.beta == 24
    assert to_text(r.machine.store, r.machine.code, unicode=True).startswith("λw")
    assert alpha_eq(r.machine.result(), lsc.identity())


def test_plain_machine_matches_calculus_on_golden_input(family3, family3_text):
    r = run(family3, MAD)
    ev = lsc.evaluate(parse_sk(family3_text), lsc.NEED, ink=False)
    assert r.stats.beta == ev.stats.beta
    assert r.stats.counts["sub"] == ev.stats.counts["lsnd"]


def test_identity_is_final():
    m = Machine(parse(r"\w. w"))
    assert m.is_final()
    assert m.step() is None
    stats = m.run()
    assert stats.total == 0 and stats.final_env_len == 0


def test_open_terms_are_rejected():
    with pytest.raises(OpenTermError) as exc:
        Machine(parse(r"\x. x y"))
    assert exc.value.name == "y"


def test_initial_state_reads_back():
    t = lsc.family_term(0)
    store, root = to_store(t)
    m = Machine(Term(store, root), variant=SMAD)
    assert alpha_eq(m.readback(), t)
    assert alpha_eq(from_store(m.store, m.code), t)


def test_beta_pushes_the_argument_as_entry():
    m = Machine(parse(r"(\x. \y. y) (\z. z)"), variant=MAD)
    assert m.step() == "sea1"
    assert m.step() == "beta"
    d = m.env
    s = m.store
    assert s.sub_kind[d] == SUB and to_text(s, s.sub[d]) == r"\z. z"
    assert alpha_eq(m.readback(), parse_sk(r"(\y. y)[x\(\z. z)]"))


def test_readback_of_a_single_entry():
    m = Machine(parse(r"(\x. \y. y) (\z. z)"))
    m.run()
    assert alpha_eq(m.readback(), parse_sk(r"(\y. y)[x\(\z. z)]"))


def test_sk_with_empty_flesh_marks_the_entry(family3):
    m = Machine(family3, variant=SMAD)
    while True:
        label = m.step()
        if label == "sk":
            break
    s = m.store
    kinds = {s.name[d]: s.sub_kind[d] for d in m.env_decls()}
    assert kinds["g"] == SKEL
    assert any(s.sub_kind[item.decl] == HOLE for item in m.chain)


@pytest.mark.parametrize("n", range(11))
def test_skeletal_family(n):
    store, root = to_store(lsc.family_term(n))
    stats = Machine(Term(store, root), variant=SMAD).run()
    assert stats.beta == 6 * n + 4


@pytest.mark.parametrize("n", range(10))
def test_plain_family(n):
    store, root = to_store(lsc.family_term(n))
    stats = Machine(Term(store, root), variant=MAD).run()
    assert stats.beta == 8 * 2**n + n - 4


@pytest.mark.parametrize("variant", [MAD, SMAD])
def test_search_transitions_do_not_change_the_readback(variant, family3):
    m = Machine(family3, variant=variant)
    before = m.readback()
    while not m.is_final():
        label = m.step()
        after = m.readback()
        if label in ("sea1", "sea2", "sea3"):
            assert alpha_eq(before, after), label
        before = after


@pytest.mark.parametrize("variant", [MAD, SMAD])
def test_principal_steps_follow_the_calculus(variant, family3_text):
    t = parse_sk(family3_text)
    strategy = lsc.SKNEED if variant == SMAD else lsc.NEED
    ev = lsc.evaluate(t, strategy, trace=True, ink=False)
    m = Machine(parse(family3_text), variant=variant)
    calc = iter(ev.trace)
    names = {"beta": "dB", "sub": "lsnd", "sk": "sk", "ss": "ss"}
    while not m.is_final():
        label = m.step()
        if label in names:
            want, u = next(calc)
            assert names[label] == want
            assert lsc.canonicalize(m.readback()) == lsc.canonicalize(u)
    assert next(calc, None) is None


@pytest.mark.parametrize("variant", [MAD, SMAD])
def test_audited_family_runs(variant):
    top = 4 if variant == MAD else 6
    for n in range(top + 1):
        store, root = to_store(lsc.family_term(n))
        m = Machine(Term(store, root), variant=variant)
        stats = m.run(audit=True)
        assert check_bounds_with_flesh(stats, m.initial_size, variant) == []


def test_skeletal_golden_run_exceeds_the_literal_search_bound(family3):
    # entries created by sk are searched too, so sea2 can exceed beta
    m = Machine(family3, variant=SMAD)
    stats = m.run()
    assert stats.counts["sea2"] == 25 and stats.beta == 24
    assert any(b.startswith("sea2") for b in check_bounds(stats, m.initial_size, SMAD))
    assert check_bounds_with_flesh(stats, m.initial_size, SMAD) == []


def test_audit_catches_corruption():
    m = Machine(parse(r"(\x. x) (\y. y)"))
    m.step()
    m.state_size += 5
    with pytest.raises(AuditError):
        m.audit()


def test_fuel_exhaustion():
    m = Machine(parse(r"(\x. x x) (\y. y y)"))
    stats = m.run(fuel=100)
    assert stats.exhausted and stats.total == 100


@pytest.mark.parametrize("seed", range(3))
def test_random_runs_are_audited(seed):
    rng = random.Random(seed)
    done = 0
    while done < 15:
        t = lsc.well_bound(random_closed(rng, 12))
        if lsc.evaluate(t, lsc.NEED, fuel=500, ink=False).stats.exhausted:
            continue
        for variant in (MAD, SMAD):
            store, root = to_store(t)
            Machine(Term(store, root), variant=variant).run(audit=True)
        done += 1


def test_final_states_read_back_to_normal_terms(family3):
    m = Machine(family3, variant=SMAD)
    m.run()
    final = m.readback()
    assert lsc.step(final, lsc.SKNEED) is None
    assert isinstance(final, (ES, SkES))
