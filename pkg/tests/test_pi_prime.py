import pytest

from mltt import syntax as S
from mltt.build import El, Telescope, call, const_fam, flam
from mltt.derivations import verify
from mltt.kernel import ErrorKind, Session, TypingError
from mltt.pi_prime import (
    app_p,
    derive_theta,
    lam_p,
    refute_eta_prime,
    translate_context,
    translate_pi_prime,
    translate_sort,
)
from mltt.syntax import APP, TYPE, ElSort, Entry, Lam, One, Var, instantiate, star
from support import TermGen

A_CTX = S.context(("A", TYPE))
IDENT = S.lam(Lam(Var(0)))


def test_translate_identity():
    out = translate_pi_prime(IDENT, A_CTX, sort=ElSort(S.Pi(Var(0), Lam(Var(1)))))
    assert out == S.inl(IDENT)


def test_translate_variable_is_fixed():
    ctx = S.context(("A", TYPE), ("a", ElSort(Var(0))))
    assert translate_pi_prime(Var(0), ctx) == Var(0)


def test_translated_beta_normalizes():
    out = translate_pi_prime(S.app(S.lam(Lam(Var(0), "x", ElSort(One))), star))
    assert Session(APP).normalize(out) == star
    assert Session(APP).infer(out) == ElSort(One)


def test_translate_pi_type():
    assert translate_pi_prime(S.Pi(One, Lam(One))) == S.Sum(S.Pi(One, Lam(One)), S.Pi(One, Lam(One)))


@pytest.mark.parametrize("head", ["funsplit", "eta", "ext", "L"])
def test_translation_rejects_constants_outside_the_fragment(head):
    from mltt.syntax import SIGNATURE

    t = S.Const(head, tuple(star for _ in range(SIGNATURE[head])))
    with pytest.raises(TypingError) as e:
        translate_pi_prime(t)
    assert e.value.kind is ErrorKind.RULE_NOT_ENABLED


def test_translation_preserves_typing_on_corpus():
    gen = TermGen(21, fragment="app")
    ctx2 = translate_context(gen.ctx)
    session = Session(APP, ctx2)
    for sample in gen.corpus(50, depth=4):
        out = translate_pi_prime(sample.term, gen.ctx, sort=sample.sort)
        session.check(out, translate_sort(sample.sort, gen.ctx))


def test_translated_beta_on_corpus():
    gen = TermGen(22, fragment="app")
    ctx2 = translate_context(gen.ctx)
    session = Session(APP, ctx2)
    for _ in range(50):
        c1, c2 = gen.code(1), gen.code(2)
        env = list(gen.globals)
        f = flam("x", lambda x: gen.term(c2, 3, env + [(x, c1)]))
        a = gen.term(c1, 3, env, infer=True)
        redex = gen.tel.close(S.app(gen.ann(S.lam(f), ("Fn", c1, c2)), a))
        contractum = gen.tel.close(call(f, a))
        sort = gen.tel.close_sort(El(gen.ty(c2)))
        lhs = translate_pi_prime(redex, gen.ctx, sort=sort)
        rhs = translate_pi_prime(contractum, gen.ctx, sort=sort)
        assert session.defeq(lhs, rhs)


def test_translation_commutes_with_substitution():
    gen = TermGen(23, fragment="app")
    for _ in range(25):
        c1, c2 = gen.code(1), gen.code(1)
        env = list(gen.globals)
        f = flam("x", lambda x: gen.term(c2, 3, env + [(x, c1)]))
        a = gen.tel.close(gen.term(c1, 3, env, infer=True))
        lam_f = gen.tel.close(f)
        inner_ctx = gen.ctx + (Entry("x", gen.tel.close_sort(El(gen.ty(c1)))),)
        sort_b = S.shift_sort(gen.tel.close_sort(El(gen.ty(c2))), 1)
        t_body = translate_pi_prime(lam_f.body, inner_ctx, sort=sort_b)
        t_arg = translate_pi_prime(a, gen.ctx, sort=gen.tel.close_sort(El(gen.ty(c1))))
        whole = translate_pi_prime(instantiate(lam_f.body, a), gen.ctx, sort=gen.tel.close_sort(El(gen.ty(c2))))
        session = Session(APP, translate_context(gen.ctx))
        assert session.defeq(whole, instantiate(t_body, t_arg))


def test_theta_checks_at_zero():
    d = derive_theta()
    assert d.sort == ElSort(S.Zero)
    assert Session(APP, d.context).infer(d.term) == ElSort(S.Zero)
    assert verify(d).ok


def test_theta_is_stuck():
    d = derive_theta()
    out = Session(APP, d.context).normalize(d.term)
    assert isinstance(out, S.Const) and out.head == "app"


def test_refutation_needs_the_hypothesis():
    d = refute_eta_prime()
    assert [e.name for e in d.context] == ["e"]
    Session(APP, d.context).check(d.term, ElSort(S.Zero))
    with pytest.raises(TypingError) as err:
        Session(APP, ()).check(d.term, ElSort(S.Zero))
    assert err.value.kind is ErrorKind.UNBOUND_VARIABLE


def test_app_prime_on_right_injection_computes():
    T = Telescope()
    ident = S.lam(flam("x", lambda x: x))
    m = T.define("m", El(S.Sum(S.Pi(One, const_fam(One)), S.Pi(One, const_fam(One)))), S.inr(ident))
    x = T.assume("x", El(One))
    s = Session(APP, T.context())
    assert s.normalize(T.close(app_p(One, m, x))) == T.close(x)
    collapsed = lam_p(flam("y", lambda y: app_p(One, m, y)))
    assert s.normalize(T.close(collapsed)) == S.inl(s.normalize(T.close(ident)))
