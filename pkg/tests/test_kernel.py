import pytest

from mltt import syntax as S
from mltt.kernel import (
    ErrorKind,
    FuelExhausted,
    Session,
    TypingError,
    check,
    check_context,
    defeq,
    infer,
    normalize,
)
from mltt.syntax import APP, FUNSPLIT, TYPE, App, ElSort, FunSort, Lam, RuleSet, Var, lattice

FULL = RuleSet.full()

# [A : Type, B : (x : El A) Type, m : El Pi(A, B), a : El A]
PI_CTX = S.context(
    ("A", TYPE),
    ("B", FunSort(ElSort(Var(0)), TYPE)),
    ("m", ElSort(S.Pi(Var(1), Var(0)))),
    ("a", ElSort(Var(2))),
)
A_CTX = S.context(("A", TYPE), ("a", ElSort(Var(0))))
IDENT = S.lam(Lam(Var(0)))


def kind_of(excinfo):
    return excinfo.value.kind


# -- contexts ---------------------------------------------------------------------


def test_context_examples():
    check_context(())
    check_context(A_CTX)
    with pytest.raises(TypingError) as e:
        check_context(S.context(("a", ElSort(Var(0)))))
    assert kind_of(e) is ErrorKind.ILL_FORMED_CONTEXT
    assert e.value.context_index == 0


def test_ill_formed_entry_index_is_first_bad_one():
    ctx = S.context(("A", TYPE), ("a", ElSort(Var(0))), ("b", ElSort(Var(5))), ("c", ElSort(Var(9))))
    with pytest.raises(TypingError) as e:
        check_context(ctx)
    assert e.value.context_index == 2


# -- inference and checking ----------------------------------------------------------


def test_infer_refl():
    assert infer(APP, A_CTX, S.refl(Var(0))) == ElSort(S.Id(Var(1), Var(0), Var(0)))


def test_infer_star():
    assert infer(APP, (), S.star) == ElSort(S.One)


def test_infer_app():
    assert infer(APP, PI_CTX, S.app(Var(1), Var(0))) == ElSort(App(Var(2), Var(0)))


def test_funsplit_not_enabled_under_app():
    t = S.funsplit(Lam(App(Var(3), Var(1))), Lam(App(Var(0), Var(1))), Var(1))
    with pytest.raises(TypingError) as e:
        infer(APP, PI_CTX, t)
    assert kind_of(e) is ErrorKind.RULE_NOT_ENABLED
    assert infer(FUNSPLIT, PI_CTX, t) == ElSort(App(Var(2), Var(0)))


def test_app_not_enabled_under_funsplit():
    with pytest.raises(TypingError) as e:
        infer(FUNSPLIT, PI_CTX, S.app(Var(1), Var(0)))
    assert kind_of(e) is ErrorKind.RULE_NOT_ENABLED


def test_check_examples():
    check(APP, A_CTX, S.refl(Var(0)), ElSort(S.Id(Var(1), Var(0), Var(0))))
    check(APP, A_CTX, IDENT, ElSort(S.Pi(Var(1), Lam(Var(2)))))
    with pytest.raises(TypingError) as e:
        check(APP, (), S.star, ElSort(S.Zero))
    assert kind_of(e) is ErrorKind.MISMATCH
    assert e.value.expected == ElSort(S.Zero)
    assert e.value.actual == ElSort(S.One)


def test_unbound_variable():
    with pytest.raises(TypingError) as e:
        infer(APP, A_CTX, Var(5))
    assert kind_of(e) is ErrorKind.UNBOUND_VARIABLE


def test_abstraction_against_element_sort():
    with pytest.raises(TypingError) as e:
        check(APP, A_CTX, Lam(Var(0)), ElSort(Var(1)))
    assert kind_of(e) is ErrorKind.NOT_A_FUNCTION_SORT


def test_error_location_points_at_argument():
    # app(m, star): the argument is the offending subterm
    with pytest.raises(TypingError) as e:
        infer(APP, PI_CTX, S.app(Var(1), S.star))
    assert e.value.location == (1,)


def test_refl_endpoints_must_agree():
    ctx = A_CTX + S.context(("b", ElSort(Var(1))))
    with pytest.raises(TypingError) as e:
        check(APP, ctx, S.refl(Var(1)), ElSort(S.Id(Var(2), Var(1), Var(0))))
    assert kind_of(e) is ErrorKind.MISMATCH


# -- normalization --------------------------------------------------------------------


def test_normalize_examples():
    assert normalize(APP, (), S.app(IDENT, S.star)) == S.star
    assert normalize(APP, (), S.Decode(S.code1)) == S.One
    assert normalize(APP, (), S.Decode(S.code0)) == S.Zero
    assert normalize(APP, PI_CTX, Var(3)) == Var(3)


def test_normalize_J_on_refl():
    # [A, a, C, d] ; J(C, d, a, a, refl a) = d a
    ctx = A_CTX + S.context(
        ("C", FunSort(ElSort(Var(1)), FunSort(ElSort(Var(2)), FunSort(ElSort(S.Id(Var(3), Var(1), Var(0))), TYPE)))),
        ("d", FunSort(ElSort(Var(2)), ElSort(App(App(App(Var(1), Var(0)), Var(0)), S.refl(Var(0)))))),
    )
    t = S.J(Var(1), Var(0), Var(2), Var(2), S.refl(Var(2)))
    assert normalize(APP, ctx, t) == App(Var(0), Var(2))
    Session(APP, ctx).check(t, ElSort(App(App(App(Var(1), Var(2)), Var(2)), S.refl(Var(2)))))


def test_normalize_stuck_J_is_neutral():
    ctx = A_CTX + S.context(("p", ElSort(S.Id(Var(1), Var(0), Var(0)))))
    t = S.J(Lam(Lam(Lam(Var(5)))), Lam(Var(0)), Var(1), Var(1), Var(0))
    assert normalize(APP, ctx, t) == t


def test_case_split_and_funsplit_compute():
    assert normalize(APP, A_CTX, S.case(Lam(Var(2)), Lam(Var(0)), Lam(Var(1)), S.inl(Var(0)))) == Var(0)
    assert normalize(APP, A_CTX, S.case(Lam(Var(2)), Lam(Var(1)), Lam(Var(0)), S.inr(Var(0)))) == Var(0)
    assert normalize(APP, A_CTX, S.split(Lam(Var(2)), Lam(Lam(Var(0))), S.pair(Var(0), S.star))) == S.star
    fs = S.funsplit(Lam(S.One), Lam(App(Var(0), S.star)), IDENT)
    assert normalize(FUNSPLIT, (), fs) == S.star


def test_framework_eta_is_definitional():
    ctx = S.context(("A", TYPE), ("f", FunSort(ElSort(Var(0)), ElSort(Var(1)))))
    assert defeq(APP, ctx, Lam(App(Var(1), Var(0))), Var(0))


def test_object_eta_is_not_definitional():
    expanded = S.lam(Lam(S.app(Var(2), Var(0))))
    assert not defeq(APP, PI_CTX, expanded, Var(1))
    assert not defeq(FULL, PI_CTX, expanded, Var(1))


def test_defeq_reflexive_on_neutral():
    t = S.app(Var(1), Var(0))
    assert defeq(APP, PI_CTX, t, t)


def test_eta_constant_computes_only_on_lam():
    cfg = RuleSet.parse("app+eta")
    lam_a = S.lam(Lam(Var(1)))
    assert normalize(cfg, A_CTX, S.eta(lam_a)) == S.refl(lam_a)
    assert normalize(cfg, PI_CTX, S.eta(Var(1))) == S.eta(Var(1))


def _ext_ctx():
    # [A, B, f : (x : El A) El (B x)]
    return S.context(
        ("A", TYPE),
        ("B", FunSort(ElSort(Var(0)), TYPE)),
        ("f", FunSort(ElSort(Var(1)), ElSort(App(Var(1), Var(0))))),
    )


def test_ext_reduces_on_canonical_triple_only():
    cfg = RuleSet.parse("app+ext")
    lf = S.lam(Var(0))
    canon = S.ext(lf, lf, S.lam(Lam(S.refl(App(Var(1), Var(0))))))
    assert normalize(cfg, _ext_ctx(), canon) == S.refl(lf)
    ctx = _ext_ctx() + S.context(("k", ElSort(S.Pi(Var(2), Lam(S.Id(App(Var(2), Var(0)), App(Var(2), Var(0)), App(Var(2), Var(0))))))))
    stuck = S.ext(S.lam(Var(1)), S.lam(Var(1)), Var(0))
    assert normalize(cfg, ctx, stuck) == stuck


def test_L_reduces_on_canonical_triple():
    cfg = RuleSet.parse("app+pid")
    ctx = _ext_ctx() + S.context(("d", FunSort(FunSort(ElSort(Var(2)), ElSort(App(Var(2), Var(0)))), ElSort(S.One))))
    lf = S.lam(Var(1))
    t = S.L(Lam(Lam(Lam(S.One))), Var(0), lf, lf, S.lam(Lam(S.refl(App(Var(2), Var(0))))))
    assert normalize(cfg, ctx, t) == App(Var(0), Var(1))


def test_fuel_exhaustion_is_an_error():
    t = S.app(IDENT, S.app(IDENT, S.app(IDENT, S.star)))
    with pytest.raises(FuelExhausted):
        Session(APP, (), fuel=1).normalize(t)
    assert Session(APP, (), fuel=100).normalize(t) == S.star


def test_fuel_from_environment(monkeypatch):
    monkeypatch.setenv("MLTT_FUEL", "1")
    t = S.app(IDENT, S.app(IDENT, S.star))
    with pytest.raises(FuelExhausted):
        normalize(APP, (), t)


def test_let_bound_context_entries_unfold():
    ctx = S.context(S.Entry("u", ElSort(S.One), S.star))
    assert normalize(APP, ctx, Var(0)) == S.star
    assert defeq(APP, ctx, Var(0), S.star)


def test_rule_set_monotonicity():
    t = S.app(Var(1), Var(0))
    base = infer(APP, PI_CTX, t)
    for cfg in lattice():
        if APP <= cfg:
            assert infer(cfg, PI_CTX, t) == base
        else:
            with pytest.raises(TypingError):
                infer(cfg, PI_CTX, t)
