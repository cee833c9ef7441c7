import pytest

from mltt import syntax as S
from mltt.build import El, Telescope, call, const_fam, flam, flam3, fun
from mltt.derivations import (
    Toolkit,
    canonical_name,
    derive_ext_from_xi_eta,
    derive_L_from_ext_mu,
    lookup,
    registry,
    verify,
)
from mltt.kernel import ErrorKind, Session
from mltt.syntax import APP, FUNSPLIT, TYPE, One, RuleSet, lattice, star
from support import TermGen

FULL = RuleSet.full()
NAMES = sorted(registry())
ONE = const_fam(One)
IDENT = S.lam(flam("x", lambda x: x))


def nf(cfg, t, T=None):
    T = T or Telescope()
    return Session(cfg, T.context()).normalize(T.close(t))


def closed_eq(cfg, t, u, T=None):
    T = T or Telescope()
    return Session(cfg, T.context()).defeq(T.close(t), T.close(u))


# -- the registry against the lattice -------------------------------------------------


@pytest.mark.parametrize("name", NAMES)
def test_checks_under_declared_rule_set(name):
    report = verify(registry()[name]())
    assert report.status == "ok", (report.status, report.error)
    assert all(c.status == "ok" for c in report.comp_checks)


@pytest.mark.parametrize("name", NAMES)
def test_lattice_row(name):
    d = registry()[name]()
    for cfg in lattice():
        status = verify(d, cfg).status
        if d.required <= cfg:
            assert status == "ok", (str(cfg), status)
        else:
            assert status == ErrorKind.RULE_NOT_ENABLED.value, (str(cfg), status)


def test_negative_cases_are_plentiful():
    weaker = sum(
        1 for f in registry().values() for cfg in lattice() if not f().required <= cfg
    )
    assert weaker >= 15


def test_lookup_is_case_insensitive():
    assert canonical_name("ext-from-l") == "ext-from-L"
    assert lookup("L-FROM-EXT")().name == "L-from-ext"
    with pytest.raises(KeyError):
        lookup("no-such-derivation")


def test_declared_rule_sets():
    expected = {
        "app-from-funsplit": "funsplit",
        "prop-eta-from-funsplit": "funsplit",
        "subst": "app",
        "funsplit-from-app-eta": "app+eta",
        "psi": "funsplit",
        "trans": "app",
        "symm": "app",
        "eta-from-ext": "app+ext",
        "xi-from-ext": "app+ext",
        "ext-from-xi-eta": "app+eta,app+ext",
        "star": "app",
        "ext-from-L": "app+pid",
        "mu": "app+pid",
        "ext-cong": "app+ext",
        "nu": "app+pid",
        "L-from-ext": "app+pid,funsplit",
        "theta": "app",
        "refute-eta-prime": "app",
    }
    for name, spec in expected.items():
        assert str(registry()[name]().required) == spec


def test_hypothesis_providers_check():
    xi = derive_ext_from_xi_eta("hypothesis")
    assert str(xi.required) == "app+eta"
    assert verify(xi).status == "ok"
    L = derive_L_from_ext_mu("hypothesis")
    assert str(L.required) == "app+ext,funsplit"
    assert verify(L).status == "ok"


def test_nu_records_its_unit_law_choice():
    notes = " ".join(registry()["nu"]().notes)
    assert "propositionally" in notes


# -- instances at the unit type -----------------------------------------------------


def test_app_prime_at_one():
    tk = Toolkit(app_via="funsplit")
    assert nf(FUNSPLIT, tk.ap(One, ONE, IDENT, star)) == star


def test_derived_beta_on_generated_pairs():
    tk = Toolkit(app_via="funsplit")
    gen = TermGen(5, fragment="funsplit")
    for _ in range(20):
        c1, c2 = gen.code(1), gen.code(1)
        env = list(gen.globals)
        f = flam("x", lambda x: gen.term(c2, 3, env + [(x, c1)]))
        a = gen.term(c1, 3, env)
        lhs = tk.ap(gen.ty(c1), const_fam(gen.ty(c2)), S.lam(f), a)
        assert closed_eq(FUNSPLIT, lhs, call(f, a), gen.tel)


def test_prop_eta_at_identity():
    tk = Toolkit(app_via="funsplit", eta_via="funsplit")
    assert nf(FUNSPLIT, tk.eta(One, ONE, IDENT)) == nf(FUNSPLIT, S.refl(IDENT))


def test_subst_and_symm_at_one():
    tk = Toolkit()
    assert nf(APP, tk.subst(One, ONE, star, star, S.refl(star), star)) == star
    assert nf(APP, tk.symm(One, star, star, S.refl(star))) == S.refl(star)


def test_trans_of_refls():
    T = Telescope()
    A = T.assume("A", TYPE)
    a = T.assume("a", El(A))
    tk = Toolkit()
    assert closed_eq(APP, tk.trans(A, a, a, a, S.refl(a), S.refl(a)), S.refl(a), T)


def test_funsplit_prime_comp_on_ten_motives():
    tk = Toolkit()
    cfg = RuleSet.parse("app+eta")
    gen = TermGen(9, fragment="app")
    for _ in range(10):
        c1, c2, c3 = gen.code(1), gen.code(1), gen.code(1)
        A, B = gen.ty(c1), const_fam(gen.ty(c2))
        C = const_fam(gen.ty(c3))
        env = list(gen.globals)
        d = flam("g", lambda g: gen.term(c3, 2, env + [(g, ("FF", c1, c2))]))
        f = flam("x", lambda x: gen.term(c2, 2, env + [(x, c1)]))
        lhs = tk.funsplit_prime(A, B, C, d, S.lam(f))
        assert closed_eq(cfg, lhs, call(d, f), gen.tel)


def test_eta_providers_agree_on_canonical_inputs():
    T = Telescope()
    A = T.assume("A", TYPE)
    B = T.assume("B", fun("x", El(A), lambda x: TYPE))
    f = T.assume("f", fun("x", El(A), lambda x: El(call(B, x))))
    by_funsplit = Toolkit(eta_via="funsplit").eta(A, B, S.lam(f))
    by_ext = Toolkit(eta_via="ext").eta(A, B, S.lam(f))
    assert closed_eq(FULL, by_funsplit, by_ext, T)
    assert closed_eq(FULL, by_ext, S.refl(S.lam(f)), T)


def test_xi_comp_at_one():
    tk = Toolkit()
    f = flam("x", lambda x: x)
    rf = flam("x", lambda x: S.refl(x))
    cfg = RuleSet.parse("app+ext")
    assert nf(cfg, tk.xi(One, ONE, f, f, rf)) == nf(cfg, S.refl(IDENT))


def test_star_comp_and_stuck_case():
    tk = Toolkit()
    assert nf(APP, tk.star(One, ONE, IDENT, IDENT, S.refl(IDENT), star)) == S.refl(star)
    T = Telescope()
    p = T.assume("p", El(S.Id(S.Pi(One, ONE), IDENT, IDENT)))
    stuck = nf(APP, tk.star(One, ONE, IDENT, IDENT, p, star), T)
    assert stuck.head == "J"


def test_ext_from_L_stuck_on_variable_homotopy():
    tk = Toolkit(ext_via="pid")
    T = Telescope()
    k = T.assume("k", El(tk.homotopy(One, ONE, IDENT, IDENT)))
    out = nf(RuleSet.parse("app+pid"), tk.ext(One, ONE, IDENT, IDENT, k), T)
    assert out.head == "L"


def test_mu_at_identity():
    tk = Toolkit(ext_via="pid")
    rf = S.lam(flam("x", lambda x: S.refl(x)))
    out = nf(RuleSet.parse("app+pid"), tk.mu(One, ONE, IDENT, IDENT, rf, star))
    assert out == S.refl(S.refl(star))


def test_ext_cong_on_refl():
    tk = Toolkit()
    T = Telescope()
    A = T.assume("A", TYPE)
    B = T.assume("B", fun("x", El(A), lambda x: TYPE))
    a = T.assume("a", El(S.Pi(A, B)))
    b = T.assume("b", El(S.Pi(A, B)))
    c = T.assume("c", El(tk.homotopy(A, B, a, b)))
    lhs = tk.ext_cong(A, B, a, b, c, c, S.refl(c))
    assert closed_eq(RuleSet.parse("app+ext"), lhs, S.refl(S.ext(a, b, c)), T)


def test_phi_on_refl():
    tk = Toolkit()
    T = Telescope()
    C = T.assume(
        "C",
        fun("u", El(S.Pi(One, ONE)), lambda u: fun("v", El(S.Pi(One, ONE)), lambda v: fun(
            "w", El(tk.homotopy(One, ONE, u, v)), lambda w: TYPE))),
    )
    c = T.assume("c", El(call(C, *tk.canon(One, ONE, IDENT))))
    cfg = RuleSet.parse("app,funsplit")
    assert closed_eq(cfg, tk.phi(One, ONE, C, IDENT, IDENT, S.refl(IDENT), c), c, T)


def test_psi_is_stuck_on_a_variable():
    d = registry()["psi"]()
    out = Session(FUNSPLIT, d.context).normalize(d.term)
    assert isinstance(out, S.Const) and out.head == "funsplit"


def test_theta_tag_family_computes():
    report = verify(registry()["theta"]())
    assert {c.label: c.status for c in report.comp_checks} == {"tag-left": "ok", "tag-right": "ok"}


def test_motive_chain_of_mu():
    # C(lam f, lam f, lam(rf)) unfolds to Pi x. Id(Id(B x, f x, f x), rf x, rf x)
    tk = Toolkit(ext_via="pid")
    T = Telescope()
    A = T.assume("A", TYPE)
    B = T.assume("B", fun("x", El(A), lambda x: TYPE))
    f = T.assume("f", fun("x", El(A), lambda x: El(call(B, x))))
    lf = S.lam(f)
    rf = S.lam(flam("x", lambda x: S.refl(call(f, x))))
    motive = flam3("u", "v", "w", lambda u, v, w: S.Pi(A, flam("x", lambda x: tk.mu_type(A, B, u, v, w, x))))
    unfolded = S.Pi(A, flam("x", lambda x: S.Id(
        S.Id(call(B, x), call(f, x), call(f, x)), S.refl(call(f, x)), S.refl(call(f, x)))))
    assert closed_eq(RuleSet.parse("app+pid"), call(motive, lf, lf, rf), unfolded, T)
