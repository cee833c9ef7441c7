"""The sum-of-products interpretation of Pi and the disjointness argument.

``Pi'(A, B)`` is ``Pi(A, B) + Pi(A, B)``, abstraction injects on the left and
application cases on the tag.  Beta survives this reading definitionally,
while propositional eta would identify the two injections of a sum; the
universe of codes ``U`` turns that identification into an element of ``Zero``.
"""

from __future__ import annotations

from typing import Optional

from . import syntax as S
from .build import El, Telescope, call, const_fam, flam, fun
from .derivations import REGISTRY, Toolkit, _comp, _derivation
from .kernel import ErrorKind, Session, TypingError
from .syntax import (
    APP,
    TYPE,
    App,
    Const,
    Context,
    Derivation,
    ElSort,
    Entry,
    FunSort,
    Lam,
    One,
    RuleSet,
    Sort,
    Term,
    TypeSort,
    Var,
    shift,
)

_TK = Toolkit()

# Heads outside the app fragment.
_FORBIDDEN = ("funsplit", "eta", "ext", "L")


# -- the macros, named form ---------------------------------------------------


def pi_p(A: Term, B: Term) -> Term:
    return S.Sum(S.Pi(A, B), S.Pi(A, B))


def lam_p(f: Term) -> Term:
    return S.inl(S.lam(f))


def app_p(B_a: Term, m: Term, a: Term) -> Term:
    """``case`` on the tag of ``m``; ``B_a`` is the result type."""
    branch = flam("y", lambda y: S.app(y, a))
    return S.case(const_fam(B_a), branch, branch, m)


# -- translation of core terms ------------------------------------------------


def _app_p_core(T: Term, fn_type: Term, m: Term, a: Term) -> Term:
    branch = Lam(S.app(Var(0), shift(a, 1)), "y")
    # the annotation lets case type a scrutinee that is a bare injection
    return S.case(Lam(shift(T, 1), "z", ElSort(fn_type)), branch, branch, m)


def translate_pi_prime(
    t: Term, ctx: Context = (), cfg: RuleSet = APP, sort: Optional[Sort] = None
) -> Term:
    """Replace ``Pi``/``lam``/``app`` by their primed counterparts.

    ``t`` must be well-typed in ``ctx`` under ``cfg`` (checked against
    ``sort`` when given, inferred otherwise): application needs its result
    type and binders their domains, both read off a typing trace.
    """
    ctx = S.context(*ctx)
    for head in _FORBIDDEN:
        if head in S.heads(t):
            raise TypingError(
                ErrorKind.RULE_NOT_ENABLED,
                f"'{head}' is outside the fragment the Pi' translation covers",
            )
    trace: dict = {}
    session = Session(cfg, ctx, check=False)
    if sort is None:
        session.infer(t, trace=trace)
    else:
        session.check(t, sort, trace=trace)
    return _translate(t, (), trace, cfg)


def _translate(t: Term, path: tuple, trace: dict, cfg: RuleSet) -> Term:
    match t:
        case Var():
            return t
        case Lam(body, hint):
            dom = None
            if (path, "dom") in trace:
                node_ctx, sort = trace[(path, "dom")]
                dom = translate_sort(sort, node_ctx, cfg)
            return Lam(_translate(body, path + (0,), trace, cfg), hint, dom)
        case App(f, a):
            return App(_translate(f, path + (0,), trace, cfg), _translate(a, path + (1,), trace, cfg))
        case Const(head, args):
            new = tuple(_translate(a, path + (i,), trace, cfg) for i, a in enumerate(args))
            match head:
                case "Pi":
                    return S.Sum(S.Pi(*new), S.Pi(*new))
                case "lam":
                    return S.inl(S.lam(*new))
                case "app":
                    node_ctx, result, fn_type = trace[(path, "app")]
                    T = translate_pi_prime(result, node_ctx, cfg)
                    return _app_p_core(T, translate_pi_prime(fn_type, node_ctx, cfg), new[0], new[1])
            return Const(head, new)
    raise TypeError(f"not a core term: {t!r}")


def translate_sort(s: Sort, ctx: Context = (), cfg: RuleSet = APP) -> Sort:
    ctx = S.context(*ctx)
    match s:
        case TypeSort():
            return s
        case ElSort(a):
            return ElSort(translate_pi_prime(a, ctx, cfg))
        case FunSort(dom, cod, hint):
            inner = ctx + (Entry(hint, dom),)
            return FunSort(translate_sort(dom, ctx, cfg), translate_sort(cod, inner, cfg), hint)
    raise TypeError(f"not a core sort: {s!r}")


def translate_context(ctx: Context, cfg: RuleSet = APP) -> Context:
    ctx = S.context(*ctx)
    out = []
    for i, e in enumerate(ctx):
        value = None if e.value is None else translate_pi_prime(e.value, ctx[:i], cfg)
        out.append(Entry(e.name, translate_sort(e.sort, ctx[:i], cfg), value))
    return tuple(out)


# -- disjointness ---------------------------------------------------------------


def tag_family(C: Term) -> Term:
    """``T(z) = Decode(case(code0, code1, z))``: ``Zero`` on the left, ``One`` on the right."""
    return flam(
        "z",
        lambda z: S.Decode(
            S.case(const_fam(S.U), const_fam(S.code0), const_fam(S.code1), z)
        ),
    )


def theta(C: Term, c: Term, p: Term) -> Term:
    """From ``p : Id(C + C, inr c, inl c)`` build an element of ``Zero``."""
    SC = S.Sum(C, C)
    left, right = S.inl(c), S.inr(c)
    back = _TK.symm(SC, right, left, p)
    return _TK.subst(SC, tag_family(C), left, right, back, S.star)


def derive_theta() -> Derivation:
    T = Telescope()
    C = T.assume("C", TYPE)
    c = T.assume("c", El(C))
    p = T.assume("p", El(S.Id(S.Sum(C, C), S.inr(c), S.inl(c))))

    K = Telescope()
    C2 = K.assume("C", TYPE)
    c2 = K.assume("c", El(C2))
    # the injections are let-bound so that case can read the sum type off them
    left = K.define("l", El(S.Sum(C2, C2)), S.inl(c2))
    right = K.define("r", El(S.Sum(C2, C2)), S.inr(c2))
    comps = [
        _comp("tag-left", K, call(tag_family(C2), left), S.Zero, TYPE),
        _comp("tag-right", K, call(tag_family(C2), right), S.One, TYPE),
    ]
    return _derivation(
        "theta", "app", T, theta(C, c, p), El(S.Zero), comps,
        notes=["transport runs along the inverse of p, from the One side to the Zero side"],
    )


def eta_prime_sort() -> Sort:
    """The sort of a hypothetical propositional eta for ``Pi'``."""
    return fun(
        "A", TYPE,
        lambda A: fun(
            "B", fun("x", El(A), lambda x: TYPE),
            lambda B: fun(
                "m", El(pi_p(A, B)),
                lambda m: El(
                    S.Id(pi_p(A, B), m, lam_p(flam("x", lambda x: app_p(call(B, x), m, x))))
                ),
            ),
        ),
    )


def refute_eta_prime() -> Derivation:
    """Instantiate a hypothetical eta' at ``A = B = One``, ``m = inr(lam id)``."""
    T = Telescope()
    e = T.assume("e", eta_prime_sort())
    B = const_fam(One)
    C = S.Pi(One, B)
    ident = S.lam(flam("x", lambda x: x))
    p = call(e, One, B, S.inr(ident))
    term = theta(C, ident, p)

    K = Telescope()
    m = K.define("m", El(pi_p(One, B)), S.inr(ident))
    collapse = _comp(
        "lam-prime-collapse", K,
        lam_p(flam("x", lambda x: app_p(One, m, x))), S.inl(ident), El(pi_p(One, B)),
    )
    x = K.assume("x", El(One))
    chain = _comp("app-prime-inr", K, app_p(One, m, x), x, El(One))
    return _derivation(
        "refute-eta-prime", "app", T, term, El(S.Zero), [chain, collapse],
        notes=["the hypothesis e is the only free variable; without it the term is unbound"],
    )


def derive_translate() -> Derivation:
    """Translated beta: ``app'(lam' f, a)`` computes to ``f(a)``."""
    T = Telescope()
    A = T.assume("A", TYPE)
    B = T.assume("B", fun("x", El(A), lambda x: TYPE))
    f = T.assume("f", fun("x", El(A), lambda x: El(call(B, x))))
    a = T.assume("a", El(A))
    ctx = T.context()
    source = T.close(S.app(S.lam(f), a))
    image = translate_pi_prime(source, ctx)
    sort = T.close_sort(El(call(B, a)))
    beta = S.CompEquality("translated-beta", ctx, image, T.close(call(f, a)), sort)
    return Derivation("pi-prime-translate", APP, ctx, image, sort, (beta,))


REGISTRY.update(
    {
        "pi-prime-translate": derive_translate,
        "theta": derive_theta,
        "refute-eta-prime": refute_eta_prime,
    }
)
