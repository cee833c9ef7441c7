"""Derived rules and proof terms, built as core terms and checked by the kernel.

Each ``derive_*`` function returns a :class:`~mltt.syntax.Derivation`: a term
in a premise context, the sort it should have, the rule set it needs, and the
computation equalities it is claimed to satisfy definitionally.  Nothing here
extends the kernel; every derived rule is a macro over the fixed signature.

The :class:`Toolkit` holds the recurring macros (application, propositional
eta, transport, path algebra, extensionality).  Several of them have more than
one construction depending on which primitives are available, and the toolkit
is parameterized by that choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import syntax as S
from .build import (
    El,
    Name,
    Telescope,
    call,
    const_fam,
    flam,
    flam3,
    fun,
)
from .kernel import FuelExhausted, Session, TypingError
from .syntax import (
    TYPE,
    CompEquality,
    Derivation,
    Id,
    J,
    L,
    One,
    Pi,
    RuleSet,
    Sort,
    Term,
    lam,
    refl,
    star,
)


def _x(hint: str, fn: Callable[[Name], Term]) -> Term:
    return lam(flam(hint, fn))


@dataclass(frozen=True)
class Toolkit:
    """Macro library.

    ``app_via``: ``"primitive"`` or ``"funsplit"``.
    ``eta_via``: ``"primitive"``, ``"funsplit"`` or ``"ext"``.
    ``ext_via``: ``"primitive"``, ``"pid"`` or ``"xi-eta"``.
    ``xi_hyp`` / ``mu_hyp``: context names standing for hypothetical rules.
    """

    app_via: str = "primitive"
    eta_via: str = "primitive"
    ext_via: str = "primitive"
    xi_hyp: Optional[Name] = field(default=None, compare=False)
    mu_hyp: Optional[Name] = field(default=None, compare=False)

    # -- Pi

    def ap(self, A: Term, B: Term, m: Term, a: Term) -> Term:
        if self.app_via == "primitive":
            return S.app(m, a)
        return S.funsplit(const_fam(call(B, a)), flam("f", lambda f: call(f, a)), m)

    def lam_ap(self, A: Term, B: Term, m: Term) -> Term:
        """``lam([x] m . x)``"""
        return _x("x", lambda x: self.ap(A, B, m, x))

    def homotopy(self, A: Term, B: Term, m: Term, n: Term) -> Term:
        """The type of pointwise paths ``Pi x. Id(B x, m . x, n . x)``."""
        return Pi(A, self.homotopy_family(A, B, m, n))

    def homotopy_family(self, A: Term, B: Term, m: Term, n: Term) -> Term:
        return flam("x", lambda x: Id(call(B, x), self.ap(A, B, m, x), self.ap(A, B, n, x)))

    def hap(self, A: Term, B: Term, m: Term, n: Term, k: Term, a: Term) -> Term:
        """Apply a homotopy ``k`` between ``m`` and ``n`` at ``a``."""
        return self.ap(A, self.homotopy_family(A, B, m, n), k, a)

    def eta(self, A: Term, B: Term, m: Term) -> Term:
        P = Pi(A, B)
        match self.eta_via:
            case "primitive":
                return S.eta(m)
            case "funsplit":
                return S.funsplit(
                    flam("y", lambda y: Id(P, y, self.lam_ap(A, B, y))),
                    flam("f", lambda f: refl(lam(f))),
                    m,
                )
            case "ext":
                k = _x("x", lambda x: refl(self.ap(A, B, m, x)))
                return self.ext(A, B, m, self.lam_ap(A, B, m), k)
        raise ValueError(f"unknown eta provider {self.eta_via!r}")

    def funsplit_prime(self, A: Term, B: Term, C: Term, d: Term, m: Term) -> Term:
        """Pi-elimination from application and propositional eta."""
        return self.subst(
            Pi(A, B), C, m, self.lam_ap(A, B, m), self.eta(A, B, m),
            call(d, flam("x", lambda x: self.ap(A, B, m, x))),
        )

    # -- identity types

    def subst(self, A: Term, F: Term, a1: Term, a2: Term, p: Term, b2: Term) -> Term:
        """Transport ``b2 : F(a2)`` back along ``p : Id(A, a1, a2)`` to ``F(a1)``."""
        motive = flam3("x", "y", "z", lambda x, y, z: Pi(call(F, y), const_fam(call(F, x))))
        d = flam("x", lambda x: _x("b", lambda b: b))
        return self.ap(call(F, a2), const_fam(call(F, a1)), J(motive, d, a1, a2, p), b2)

    def trans(self, A: Term, a1: Term, a2: Term, a3: Term, p: Term, q: Term) -> Term:
        """Composite of ``p : a1 = a2`` and ``q : a2 = a3``; computes on ``p``."""
        motive = flam3("x", "y", "z", lambda x, y, z: Pi(Id(A, y, a3), const_fam(Id(A, x, a3))))
        d = flam("x", lambda x: _x("q", lambda q: q))
        return self.ap(Id(A, a2, a3), const_fam(Id(A, a1, a3)), J(motive, d, a1, a2, p), q)

    def symm(self, A: Term, a1: Term, a2: Term, p: Term) -> Term:
        return self.subst(A, flam("x", lambda x: Id(A, a2, x)), a1, a2, p, refl(a2))

    def runit(self, A: Term, a1: Term, a2: Term, p: Term) -> Term:
        """``Id(Id(A, a1, a2), trans(p, refl a2), p)``; the right unit law is not definitional."""
        motive = flam3(
            "x", "y", "z",
            lambda x, y, z: Id(Id(A, x, y), self.trans(A, x, y, y, z, refl(y)), z),
        )
        return J(motive, flam("x", lambda x: refl(refl(x))), a1, a2, p)

    def star(self, A: Term, B: Term, m: Term, n: Term, p: Term, a: Term) -> Term:
        """Apply a path between functions at a point: ``p * a``."""
        motive = flam3(
            "u", "v", "z",
            lambda u, v, z: Id(call(B, a), self.ap(A, B, u, a), self.ap(A, B, v, a)),
        )
        return J(motive, flam("u", lambda u: refl(self.ap(A, B, u, a))), m, n, p)

    # -- extensionality

    def xi(self, A: Term, B: Term, f: Term, g: Term, p: Term) -> Term:
        if self.xi_hyp is not None:
            return call(self.xi_hyp, f, g, p)
        return S.ext(lam(f), lam(g), lam(p))

    def ext(self, A: Term, B: Term, m: Term, n: Term, k: Term) -> Term:
        P = Pi(A, B)
        match self.ext_via:
            case "primitive":
                return S.ext(m, n, k)
            case "pid":
                return L(
                    flam3("u", "v", "w", lambda u, v, w: Id(P, u, v)),
                    flam("f", lambda f: refl(lam(f))),
                    m, n, k,
                )
            case "xi-eta":
                f = flam("x", lambda x: self.ap(A, B, m, x))
                g = flam("x", lambda x: self.ap(A, B, n, x))
                p = flam("x", lambda x: self.hap(A, B, m, n, k, x))
                lf, lg = lam(f), lam(g)
                left = self.trans(P, m, lf, lg, self.eta(A, B, m), self.xi(A, B, f, g, p))
                return self.trans(P, m, lg, n, left, self.symm(P, n, lg, self.eta(A, B, n)))
        raise ValueError(f"unknown ext provider {self.ext_via!r}")

    def ext_cong(self, A: Term, B: Term, a: Term, b: Term, c: Term, d: Term, p: Term) -> Term:
        """From ``p : Id(H, c, d)`` get ``Id(Id(Pi, a, b), ext(a, b, c), ext(a, b, d))``."""
        E = Id(Pi(A, B), a, b)
        motive = flam3(
            "u", "v", "z",
            lambda u, v, z: Id(E, self.ext(A, B, a, b, u), self.ext(A, B, a, b, v)),
        )
        base = flam("u", lambda u: refl(self.ext(A, B, a, b, u)))
        return J(motive, base, c, d, p)

    def mu_type(self, A: Term, B: Term, m: Term, n: Term, k: Term, a: Term) -> Term:
        return Id(
            Id(call(B, a), self.ap(A, B, m, a), self.ap(A, B, n, a)),
            self.star(A, B, m, n, self.ext(A, B, m, n, k), a),
            self.hap(A, B, m, n, k, a),
        )

    def mu(self, A: Term, B: Term, m: Term, n: Term, k: Term, a: Term) -> Term:
        """Extensionality applied at a point agrees with the homotopy there."""
        if self.mu_hyp is not None:
            return call(self.mu_hyp, m, n, k, a)
        motive = flam3(
            "u", "v", "w",
            lambda u, v, w: Pi(A, flam("x", lambda x: self.mu_type(A, B, u, v, w, x))),
        )
        base = flam("f", lambda f: _x("x", lambda x: refl(refl(call(f, x)))))
        fam = flam("x", lambda x: self.mu_type(A, B, m, n, k, x))
        return self.ap(A, fam, L(motive, base, m, n, k), a)

    # -- the coherence of extensionality with composition

    def nu_type(self, A, B, l, u, v, j, w) -> Term:
        P = Pi(A, B)
        pointwise = _x(
            "x",
            lambda x: self.trans(
                call(B, x),
                self.ap(A, B, l, x), self.ap(A, B, u, x), self.ap(A, B, v, x),
                self.hap(A, B, l, u, j, x), self.hap(A, B, u, v, w, x),
            ),
        )
        return Id(
            Id(P, l, v),
            self.trans(P, l, u, v, self.ext(A, B, l, u, j), self.ext(A, B, u, v, w)),
            self.ext(A, B, l, v, pointwise),
        )

    def nu_base(self, A, B, l, h, j) -> Term:
        """The case ``m = n = lam h`` and ``k = lam([x] refl(h x))``."""
        P = Pi(A, B)
        lh = lam(h)
        E = self.ext(A, B, l, lh, j)
        BQ = self.homotopy_family(A, B, l, lh)

        def jx(x):
            return self.hap(A, B, l, lh, j, x)

        def bx(x):
            return call(B, x), self.ap(A, B, l, x), self.ap(A, B, lh, x)

        def padded(x):
            Bx, lx, hx = bx(x)
            return self.trans(Bx, lx, hx, hx, jx(x), refl(hx))

        target = _x("x", padded)

        def unpad(x):
            Bx, lx, hx = bx(x)
            return self.symm(Id(Bx, lx, hx), padded(x), jx(x), self.runit(Bx, lx, hx, jx(x)))

        # ext accepts j itself, so the eta-expansion of j is not needed here
        path = self.ext(A, BQ, j, target, _x("x", unpad))
        E2 = Id(P, l, lh)
        return self.trans(
            E2,
            self.trans(P, l, lh, lh, E, refl(lh)), E, self.ext(A, B, l, lh, target),
            self.runit(P, l, lh, E),
            self.ext_cong(A, B, l, lh, j, target, path),
        )

    def nu(self, A, B, l, m, n, j, k) -> Term:
        motive = flam3(
            "u", "v", "w",
            lambda u, v, w: Pi(
                self.homotopy(A, B, l, u),
                flam("j", lambda j2: self.nu_type(A, B, l, u, v, j2, w)),
            ),
        )
        base = flam("h", lambda h: _x("j", lambda j2: self.nu_base(A, B, l, h, j2)))
        fam = flam("j", lambda j2: self.nu_type(A, B, l, m, n, j2, k))
        return self.ap(self.homotopy(A, B, l, m), fam, L(motive, base, m, n, k), j)

    # -- eliminating homotopies from ext and mu

    def canon(self, A, B, y) -> tuple[Term, Term, Term]:
        """``(lam([x] y.x), lam([x] y.x), lam([x] refl(y.x)))``"""
        return (
            self.lam_ap(A, B, y),
            self.lam_ap(A, B, y),
            _x("x", lambda x: refl(self.ap(A, B, y, x))),
        )

    def star_fn(self, A, B, u, v, p) -> Term:
        """``lam([x] p * x)``"""
        return _x("x", lambda x: self.star(A, B, u, v, p, x))

    def phi(self, A, B, C, u, v, p, c) -> Term:
        """From ``c : C(canon u)`` and ``p : Id(Pi, u, v)`` get ``C(u, v, lam([x] p * x))``."""

        def dom(y):
            return call(C, *self.canon(A, B, y))

        motive = flam3(
            "x", "y", "z",
            lambda x, y, z: Pi(dom(x), const_fam(call(C, x, y, self.star_fn(A, B, x, y, z)))),
        )
        inner = flam(
            "y",
            lambda y: Pi(dom(y), const_fam(call(C, y, y, _x("w", lambda w: refl(self.ap(A, B, y, w)))))),
        )
        base = flam("x", lambda x: S.funsplit(inner, flam("f", lambda f: _x("c", lambda c2: c2)), x))
        return self.ap(
            dom(u),
            const_fam(call(C, u, v, self.star_fn(A, B, u, v, p))),
            J(motive, base, u, v, p),
            c,
        )

    def L_b(self, A, B, C, d, m, n, k) -> Term:
        E = self.ext(A, B, m, n, k)
        return self.phi(A, B, C, m, n, E, call(d, flam("x", lambda x: self.ap(A, B, m, x))))

    def L_prime(self, A, B, C, d, m, n, k) -> Term:
        E = self.ext(A, B, m, n, k)
        BQ = self.homotopy_family(A, B, m, n)
        Q = Pi(A, BQ)
        sf = self.star_fn(A, B, m, n, E)
        mus = _x("x", lambda x: self.mu(A, B, m, n, k, x))
        to_k = self.ext(A, BQ, sf, k, mus)
        back = self.symm(Q, sf, k, to_k)
        return self.subst(Q, flam("w", lambda w: call(C, m, n, w)), k, sf, back, self.L_b(A, B, C, d, m, n, k))


# -- telescopes ---------------------------------------------------------------


def _pi_tel() -> tuple[Telescope, Name, Name]:
    T = Telescope()
    A = T.assume("A", TYPE)
    B = T.assume("B", fun("x", El(A), lambda x: TYPE))
    return T, A, B


def _fn_sort(A: Term, B: Term) -> Sort:
    """``(x : el A) el B(x)``"""
    return fun("x", El(A), lambda x: El(call(B, x)))


def _motive1(P: Term) -> Sort:
    return fun("y", El(P), lambda y: TYPE)


def _L_motive_sort(tk: Toolkit, A, B) -> Sort:
    P = Pi(A, B)
    return fun(
        "u", El(P),
        lambda u: fun("v", El(P), lambda v: fun("w", El(tk.homotopy(A, B, u, v)), lambda w: TYPE)),
    )


def _L_base_sort(tk: Toolkit, A, B, C) -> Sort:
    return fun(
        "f", _fn_sort(A, B),
        lambda f: El(call(C, lam(f), lam(f), _x("x", lambda x: refl(call(f, x))))),
    )


def _comp(label: str, T: Telescope, lhs: Term, rhs: Term, sort: Optional[Sort] = None) -> CompEquality:
    return CompEquality(
        label,
        T.context(),
        T.close(lhs),
        T.close(rhs),
        None if sort is None else T.close_sort(sort),
    )


def _derivation(name, required, T: Telescope, term, sort, comps=(), notes=()) -> Derivation:
    return Derivation(
        name,
        RuleSet.parse(required) if isinstance(required, str) else required,
        T.context(),
        T.close(term),
        T.close_sort(sort),
        tuple(comps),
        tuple(notes),
    )


# -- section: Pi formulations -------------------------------------------------


def derive_app_from_funsplit() -> Derivation:
    """Application and its beta rule from the funsplit formulation."""
    tk = Toolkit(app_via="funsplit")
    T, A, B = _pi_tel()
    m = T.assume("m", El(Pi(A, B)))
    a = T.assume("a", El(A))
    term = tk.ap(A, B, m, a)

    C, A2, B2 = _pi_tel()
    f = C.assume("f", _fn_sort(A2, B2))
    a2 = C.assume("a", El(A2))
    beta = _comp("beta", C, tk.ap(A2, B2, lam(f), a2), call(f, a2), El(call(B2, a2)))
    return _derivation("app-from-funsplit", "funsplit", T, term, El(call(B, a)), [beta])


def derive_prop_eta_from_funsplit() -> Derivation:
    tk = Toolkit(app_via="funsplit", eta_via="funsplit")
    T, A, B = _pi_tel()
    m = T.assume("m", El(Pi(A, B)))
    sort = El(Id(Pi(A, B), m, tk.lam_ap(A, B, m)))

    C, A2, B2 = _pi_tel()
    f = C.assume("f", _fn_sort(A2, B2))
    comp = _comp(
        "eta-comp", C, tk.eta(A2, B2, lam(f)), refl(lam(f)),
        El(Id(Pi(A2, B2), lam(f), lam(f))),
    )
    return _derivation("prop-eta-from-funsplit", "funsplit", T, tk.eta(A, B, m), sort, [comp])


def _subst_tel():
    T = Telescope()
    A = T.assume("A", TYPE)
    F = T.assume("F", fun("x", El(A), lambda x: TYPE))
    return T, A, F


def derive_subst() -> Derivation:
    """Leibniz transport: ``subst(p, b2) : F(a1)`` for ``p : a1 = a2``."""
    tk = Toolkit()
    T, A, F = _subst_tel()
    a1 = T.assume("a1", El(A))
    a2 = T.assume("a2", El(A))
    p = T.assume("p", El(Id(A, a1, a2)))
    b2 = T.assume("b2", El(call(F, a2)))
    term = tk.subst(A, F, a1, a2, p, b2)

    C, A_, F_ = _subst_tel()
    a = C.assume("a", El(A_))
    b = C.assume("b", El(call(F_, a)))
    comp = _comp("subst-comp", C, tk.subst(A_, F_, a, a, refl(a), b), b, El(call(F_, a)))
    return _derivation("subst", "app", T, term, El(call(F, a1)), [comp])


def derive_subst_roundtrip() -> Derivation:
    """Transporting forth and back along a path is propositionally the identity."""
    tk = Toolkit()
    T, A, F = _subst_tel()
    a1 = T.assume("a1", El(A))
    a2 = T.assume("a2", El(A))
    p = T.assume("p", El(Id(A, a1, a2)))
    b2 = T.assume("b2", El(call(F, a2)))

    def roundtrip(x, y, z, b):
        return tk.subst(A, F, y, x, tk.symm(A, x, y, z), tk.subst(A, F, x, y, z, b))

    motive = flam3(
        "x", "y", "z",
        lambda x, y, z: Pi(call(F, y), flam("b", lambda b: Id(call(F, y), roundtrip(x, y, z, b), b))),
    )
    base = flam("x", lambda x: _x("b", lambda b: refl(b)))
    fam = flam("b", lambda b: Id(call(F, a2), roundtrip(a1, a2, p, b), b))
    term = tk.ap(call(F, a2), fam, J(motive, base, a1, a2, p), b2)
    sort = El(Id(call(F, a2), roundtrip(a1, a2, p, b2), b2))
    return _derivation("subst-roundtrip", "app", T, term, sort)


def _funsplit_tel(tk: Toolkit):
    T, A, B = _pi_tel()
    P = Pi(A, B)
    C = T.assume("C", _motive1(P))
    d = T.assume("d", fun("f", _fn_sort(A, B), lambda f: El(call(C, lam(f)))))
    return T, A, B, C, d


def derive_funsplit_from_app_eta() -> Derivation:
    tk = Toolkit()
    T, A, B, C, d = _funsplit_tel(tk)
    m = T.assume("m", El(Pi(A, B)))
    term = tk.funsplit_prime(A, B, C, d, m)

    K, A2, B2, C2, d2 = _funsplit_tel(tk)
    f = K.assume("f", _fn_sort(A2, B2))
    comp = _comp(
        "funsplit-comp", K, tk.funsplit_prime(A2, B2, C2, d2, lam(f)), call(d2, f),
        El(call(C2, lam(f))),
    )
    return _derivation("funsplit-from-app-eta", "app+eta", T, term, El(call(C, m)), [comp])


def derive_psi() -> Derivation:
    """The primitive and the reconstructed eliminator agree propositionally."""
    tk = Toolkit(app_via="funsplit", eta_via="funsplit")

    def psi(A, B, C, d, m):
        motive = flam(
            "y",
            lambda y: Id(call(C, y), S.funsplit(C, d, y), tk.funsplit_prime(A, B, C, d, y)),
        )
        return S.funsplit(motive, flam("g", lambda g: refl(call(d, g))), m)

    T, A, B, C, d = _funsplit_tel(tk)
    m = T.assume("m", El(Pi(A, B)))
    sort = El(Id(call(C, m), S.funsplit(C, d, m), tk.funsplit_prime(A, B, C, d, m)))

    K, A2, B2, C2, d2 = _funsplit_tel(tk)
    g = K.assume("g", _fn_sort(A2, B2))
    comp = _comp(
        "psi-comp", K, psi(A2, B2, C2, d2, lam(g)), refl(call(d2, g)),
        El(Id(call(C2, lam(g)), call(d2, g), call(d2, g))),
    )
    return _derivation("psi", "funsplit", T, psi(A, B, C, d, m), sort, [comp])


# -- path algebra -------------------------------------------------------------


def _path_tel(n: int):
    T = Telescope()
    A = T.assume("A", TYPE)
    pts = [T.assume(f"a{i + 1}", El(A)) for i in range(n)]
    return T, A, pts


def derive_trans() -> Derivation:
    tk = Toolkit()
    T, A, (a1, a2, a3) = _path_tel(3)
    p = T.assume("p", El(Id(A, a1, a2)))
    q = T.assume("q", El(Id(A, a2, a3)))
    term = tk.trans(A, a1, a2, a3, p, q)

    K, A2, (b1, b2) = _path_tel(2)
    q2 = K.assume("q", El(Id(A2, b1, b2)))
    left_unit = _comp("trans-comp", K, tk.trans(A2, b1, b1, b2, refl(b1), q2), q2, El(Id(A2, b1, b2)))
    K2, A3, (c,) = _path_tel(1)
    rr = _comp("refl-refl", K2, tk.trans(A3, c, c, c, refl(c), refl(c)), refl(c), El(Id(A3, c, c)))
    return _derivation("trans", "app", T, term, El(Id(A, a1, a3)), [left_unit, rr])


def derive_symm() -> Derivation:
    tk = Toolkit()
    T, A, (a1, a2) = _path_tel(2)
    p = T.assume("p", El(Id(A, a1, a2)))
    K, A2, (a,) = _path_tel(1)
    comp = _comp("symm-comp", K, tk.symm(A2, a, a, refl(a)), refl(a), El(Id(A2, a, a)))
    return _derivation("symm", "app", T, tk.symm(A, a1, a2, p), El(Id(A, a2, a1)), [comp])


def derive_trans_assoc() -> Derivation:
    """Associativity of composition, by induction on the first path."""
    tk = Toolkit()
    T, A, (a1, a2, a3, a4) = _path_tel(4)
    p = T.assume("p", El(Id(A, a1, a2)))
    q = T.assume("q", El(Id(A, a2, a3)))
    r = T.assume("r", El(Id(A, a3, a4)))

    def assoc_type(x, y, z, q_, r_):
        return Id(
            Id(A, x, a4),
            tk.trans(A, x, a3, a4, tk.trans(A, x, y, a3, z, q_), r_),
            tk.trans(A, x, y, a4, z, tk.trans(A, y, a3, a4, q_, r_)),
        )

    motive = flam3(
        "x", "y", "z",
        lambda x, y, z: Pi(
            Id(A, y, a3),
            flam("q", lambda q_: Pi(Id(A, a3, a4), flam("r", lambda r_: assoc_type(x, y, z, q_, r_)))),
        ),
    )
    base = flam(
        "x",
        lambda x: _x("q", lambda q_: _x("r", lambda r_: refl(tk.trans(A, x, a3, a4, q_, r_)))),
    )
    inner_fam = flam("r", lambda r_: assoc_type(a1, a2, p, q, r_))
    outer_fam = flam("q", lambda q_: Pi(Id(A, a3, a4), flam("r", lambda r_: assoc_type(a1, a2, p, q_, r_))))
    step = tk.ap(Id(A, a2, a3), outer_fam, J(motive, base, a1, a2, p), q)
    term = tk.ap(Id(A, a3, a4), inner_fam, step, r)
    return _derivation(
        "trans-assoc", "app", T, term, El(assoc_type(a1, a2, p, q, r)),
        notes=["witness by path induction on the first path"],
    )


def derive_trans_right_unit() -> Derivation:
    tk = Toolkit()
    T, A, (a1, a2) = _path_tel(2)
    p = T.assume("p", El(Id(A, a1, a2)))
    sort = El(Id(Id(A, a1, a2), tk.trans(A, a1, a2, a2, p, refl(a2)), p))
    K, A2, (a,) = _path_tel(1)
    comp = _comp(
        "runit-comp", K, tk.runit(A2, a, a, refl(a)), refl(refl(a)),
        El(Id(Id(A2, a, a), refl(a), refl(a))),
    )
    return _derivation(
        "trans-right-unit", "app", T, tk.runit(A, a1, a2, p), sort, [comp],
        notes=["composition computes on its first path, so the right unit law holds only propositionally"],
    )


# -- extensionality -----------------------------------------------------------


def _fn_tel(*names: str):
    T, A, B = _pi_tel()
    out = [T.assume(n, El(Pi(A, B))) for n in names]
    return T, A, B, out


def derive_eta_from_ext() -> Derivation:
    tk = Toolkit(eta_via="ext")
    T, A, B, (m,) = _fn_tel("m")
    sort = El(Id(Pi(A, B), m, tk.lam_ap(A, B, m)))
    K, A2, B2 = _pi_tel()
    f = K.assume("f", _fn_sort(A2, B2))
    comp = _comp("eta-comp", K, tk.eta(A2, B2, lam(f)), refl(lam(f)), El(Id(Pi(A2, B2), lam(f), lam(f))))
    return _derivation("eta-from-ext", "app+ext", T, tk.eta(A, B, m), sort, [comp])


def derive_xi_from_ext() -> Derivation:
    tk = Toolkit()
    T, A, B = _pi_tel()
    f = T.assume("f", _fn_sort(A, B))
    g = T.assume("g", _fn_sort(A, B))
    p = T.assume("p", fun("x", El(A), lambda x: El(Id(call(B, x), call(f, x), call(g, x)))))
    sort = El(Id(Pi(A, B), lam(f), lam(g)))

    K, A2, B2 = _pi_tel()
    f2 = K.assume("f", _fn_sort(A2, B2))
    rf = flam("x", lambda x: refl(call(f2, x)))
    comp = _comp("xi-comp", K, tk.xi(A2, B2, f2, f2, rf), refl(lam(f2)), El(Id(Pi(A2, B2), lam(f2), lam(f2))))
    return _derivation("xi-from-ext", "app+ext", T, tk.xi(A, B, f, g, p), sort, [comp])


def _xi_hypothesis_sort(A, B) -> Sort:
    return fun(
        "f", _fn_sort(A, B),
        lambda f: fun(
            "g", _fn_sort(A, B),
            lambda g: fun(
                "p",
                fun("x", El(A), lambda x: El(Id(call(B, x), call(f, x), call(g, x)))),
                lambda p: El(Id(Pi(A, B), lam(f), lam(g))),
            ),
        ),
    )


def derive_ext_from_xi_eta(xi_provider: str = "ext") -> Derivation:
    """Extensionality from propositional xi and eta.

    ``xi_provider="ext"`` takes xi from primitive extensionality, which makes
    the computation rule definitional.  ``"hypothesis"`` assumes xi as a
    context entry; the construction still checks, but the computation rule
    then has no definitional content and is omitted.
    """

    def setup():
        T, A, B = _pi_tel()
        hyp = T.assume("xi", _xi_hypothesis_sort(A, B)) if xi_provider == "hypothesis" else None
        return T, A, B, Toolkit(ext_via="xi-eta", xi_hyp=hyp)

    T, A, B, tk = setup()
    m = T.assume("m", El(Pi(A, B)))
    n = T.assume("n", El(Pi(A, B)))
    k = T.assume("k", El(tk.homotopy(A, B, m, n)))
    term = tk.ext(A, B, m, n, k)
    sort = El(Id(Pi(A, B), m, n))

    comps, notes = [], []
    if xi_provider == "ext":
        required = "app+eta,app+ext"
        K, A2, B2, tk2 = setup()
        h = K.assume("h", _fn_sort(A2, B2))
        lh = lam(h)
        comps.append(
            _comp(
                "ext-comp", K, tk2.ext(A2, B2, lh, lh, _x("x", lambda x: refl(call(h, x)))),
                refl(lh), El(Id(Pi(A2, B2), lh, lh)),
            )
        )
    elif xi_provider == "hypothesis":
        required = "app+eta"
        notes.append("xi is a context hypothesis; the computation rule is not definitional")
    else:
        raise ValueError(f"unknown xi provider {xi_provider!r}")
    return _derivation("ext-from-xi-eta", required, T, term, sort, comps, notes)


def derive_ext_coherence() -> Derivation:
    """The reconstructed extensionality equals the primitive one, by Pi-Id-elimination."""
    tk = Toolkit()
    tk2 = Toolkit(ext_via="xi-eta")
    T, A, B, (m, n) = _fn_tel("m", "n")
    k = T.assume("k", El(tk.homotopy(A, B, m, n)))
    P = Pi(A, B)

    def coh(u, v, w):
        return Id(Id(P, u, v), tk2.ext(A, B, u, v, w), tk.ext(A, B, u, v, w))

    motive = flam3("u", "v", "w", coh)
    base = flam("f", lambda f: refl(refl(lam(f))))
    return _derivation(
        "ext-coherence", "app+eta,app+ext,app+pid", T, L(motive, base, m, n, k), El(coh(m, n, k)),
        notes=["funsplit on m and n leaves the homotopy free, so the witness eliminates all three by L"],
    )


def _star_tel():
    T, A, B, (m, n) = _fn_tel("m", "n")
    p = T.assume("p", El(Id(Pi(A, B), m, n)))
    a = T.assume("a", El(A))
    return T, A, B, m, n, p, a


def derive_star() -> Derivation:
    tk = Toolkit()
    T, A, B, m, n, p, a = _star_tel()
    sort = El(Id(call(B, a), S.app(m, a), S.app(n, a)))
    K, A2, B2, (m2,) = _fn_tel("m")
    a2 = K.assume("a", El(A2))
    comp = _comp(
        "star-comp", K, tk.star(A2, B2, m2, m2, refl(m2), a2), refl(S.app(m2, a2)),
        El(Id(call(B2, a2), S.app(m2, a2), S.app(m2, a2))),
    )
    return _derivation("star", "app", T, tk.star(A, B, m, n, p, a), sort, [comp])


def derive_star_subst_naturality() -> Derivation:
    """Transport of ``refl(n.a)`` along ``p`` agrees with ``p * a``."""
    tk = Toolkit()
    T, A, B, m, n, p, a = _star_tel()
    P = Pi(A, B)

    def naturality(u, v, z):
        F = flam("w", lambda w: Id(call(B, a), S.app(w, a), S.app(v, a)))
        return Id(
            Id(call(B, a), S.app(u, a), S.app(v, a)),
            tk.subst(P, F, u, v, z, refl(S.app(v, a))),
            tk.star(A, B, u, v, z, a),
        )

    base = flam("u", lambda u: refl(refl(S.app(u, a))))
    term = J(flam3("u", "v", "z", naturality), base, m, n, p)
    return _derivation("star-subst-naturality", "app", T, term, El(naturality(m, n, p)))


def _ext_tel(tk: Toolkit):
    T, A, B, (m, n) = _fn_tel("m", "n")
    k = T.assume("k", El(tk.homotopy(A, B, m, n)))
    return T, A, B, m, n, k


def _canonical_comp(tk: Toolkit, label: str, build, rhs_of, sort_of, extra=()):
    """Computation equality at the canonical triple ``(lam f, lam f, lam(r f))``."""
    K, A, B = _pi_tel()
    f = K.assume("f", _fn_sort(A, B))
    more = [K.assume(h, s(A, B)) for h, s in extra]
    lf = lam(f)
    rf = _x("x", lambda x: refl(call(f, x)))
    return _comp(label, K, build(A, B, lf, rf, *more), rhs_of(A, B, f, *more), sort_of(A, B, f, *more))


def derive_ext_from_L() -> Derivation:
    tk = Toolkit(ext_via="pid")
    T, A, B, m, n, k = _ext_tel(tk)
    comp = _canonical_comp(
        tk, "ext-comp",
        lambda A, B, lf, rf: tk.ext(A, B, lf, lf, rf),
        lambda A, B, f: refl(lam(f)),
        lambda A, B, f: El(Id(Pi(A, B), lam(f), lam(f))),
    )
    return _derivation("ext-from-L", "app+pid", T, tk.ext(A, B, m, n, k), El(Id(Pi(A, B), m, n)), [comp])


def derive_mu() -> Derivation:
    tk = Toolkit(ext_via="pid")
    T, A, B, m, n, k = _ext_tel(tk)
    a = T.assume("a", El(A))
    comp = _canonical_comp(
        tk, "mu-comp",
        lambda A, B, lf, rf, a: tk.mu(A, B, lf, lf, rf, a),
        lambda A, B, f, a: refl(refl(call(f, a))),
        lambda A, B, f, a: El(Id(Id(call(B, a), call(f, a), call(f, a)), refl(call(f, a)), refl(call(f, a)))),
        extra=[("a", lambda A, B: El(A))],
    )
    motive_chain = _canonical_comp(
        tk, "mu-motive",
        lambda A, B, lf, rf: Pi(A, flam("x", lambda x: tk.mu_type(A, B, lf, lf, rf, x))),
        lambda A, B, f: Pi(
            A,
            flam("x", lambda x: Id(
                Id(call(B, x), call(f, x), call(f, x)), refl(call(f, x)), refl(call(f, x)),
            )),
        ),
        lambda A, B, f: TYPE,
    )
    return _derivation(
        "mu", "app+pid", T, tk.mu(A, B, m, n, k, a), El(tk.mu_type(A, B, m, n, k, a)),
        [comp, motive_chain],
    )


def _cong_tel(tk: Toolkit):
    T, A, B, (a, b) = _fn_tel("a", "b")
    H = tk.homotopy(A, B, a, b)
    c = T.assume("c", El(H))
    d = T.assume("d", El(H))
    return T, A, B, a, b, H, c, d


def derive_ext_cong() -> Derivation:
    tk = Toolkit()
    T, A, B, a, b, H, c, d = _cong_tel(tk)
    p = T.assume("p", El(Id(H, c, d)))
    sort = El(Id(Id(Pi(A, B), a, b), tk.ext(A, B, a, b, c), tk.ext(A, B, a, b, d)))

    K, A2, B2, (a2, b2) = _fn_tel("a", "b")
    c2 = K.assume("c", El(tk.homotopy(A2, B2, a2, b2)))
    E = tk.ext(A2, B2, a2, b2, c2)
    comp = _comp(
        "ext-cong-comp", K, tk.ext_cong(A2, B2, a2, b2, c2, c2, refl(c2)), refl(E),
        El(Id(Id(Pi(A2, B2), a2, b2), E, E)),
    )
    return _derivation("ext-cong", "app+ext", T, tk.ext_cong(A, B, a, b, c, d, p), sort, [comp])


def derive_ext_cong_trans() -> Derivation:
    """Congruence of extensionality respects composition."""
    tk = Toolkit()
    T, A, B, a, b, H, c, d = _cong_tel(tk)
    e = T.assume("e", El(H))
    p = T.assume("p", El(Id(H, c, d)))
    q = T.assume("q", El(Id(H, d, e)))
    E = Id(Pi(A, B), a, b)

    def ex(w):
        return tk.ext(A, B, a, b, w)

    def law(u, v, z, q_):
        return Id(
            Id(E, ex(u), ex(e)),
            tk.ext_cong(A, B, a, b, u, e, tk.trans(H, u, v, e, z, q_)),
            tk.trans(E, ex(u), ex(v), ex(e), tk.ext_cong(A, B, a, b, u, v, z), tk.ext_cong(A, B, a, b, v, e, q_)),
        )

    motive = flam3("u", "v", "z", lambda u, v, z: Pi(Id(H, v, e), flam("q", lambda q_: law(u, v, z, q_))))
    base = flam("u", lambda u: _x("q", lambda q_: refl(tk.ext_cong(A, B, a, b, u, e, q_))))
    term = tk.ap(Id(H, d, e), flam("q", lambda q_: law(c, d, p, q_)), J(motive, base, c, d, p), q)
    return _derivation("ext-cong-trans", "app+ext", T, term, El(law(c, d, p, q)))


def derive_nu() -> Derivation:
    tk = Toolkit(ext_via="pid")
    T, A, B, (l, m, n) = _fn_tel("l", "m", "n")
    j = T.assume("j", El(tk.homotopy(A, B, l, m)))
    k = T.assume("k", El(tk.homotopy(A, B, m, n)))
    term = tk.nu(A, B, l, m, n, j, k)
    sort = El(tk.nu_type(A, B, l, m, n, j, k))

    K, A2, B2, (l2,) = _fn_tel("l")
    h = K.assume("h", _fn_sort(A2, B2))
    lh = lam(h)
    rh = _x("x", lambda x: refl(call(h, x)))
    j2 = K.assume("j", El(tk.homotopy(A2, B2, l2, lh)))
    base = _comp(
        "nu-base", K, tk.nu(A2, B2, l2, lh, lh, j2, rh), tk.nu_base(A2, B2, l2, h, j2),
        El(tk.nu_type(A2, B2, l2, lh, lh, j2, rh)),
    )
    K2, A3, B3 = _pi_tel()
    h3 = K2.assume("h", _fn_sort(A3, B3))
    lh3 = lam(h3)
    rh3 = _x("x", lambda x: refl(call(h3, x)))
    ext_step = _comp("ext-comp", K2, tk.ext(A3, B3, lh3, lh3, rh3), refl(lh3), El(Id(Pi(A3, B3), lh3, lh3)))
    x3 = K2.assume("x", El(A3))
    beta_step = _comp(
        "beta-under-binder", K2, S.app(rh3, x3), refl(call(h3, x3)),
        El(Id(call(B3, x3), call(h3, x3), call(h3, x3))),
    )

    K3 = Telescope()
    One_ = const_fam(One)
    ident = K3.define("i", El(Pi(One, One_)), _x("x", lambda x: x))
    r_ident = K3.define("r", El(tk.homotopy(One, One_, ident, ident)), _x("x", lambda x: refl(x)))
    inst = tk.nu(One, One_, ident, ident, ident, r_ident, r_ident)
    refl_inst = _comp(
        "instance", K3, inst, refl(refl(ident)),
        El(tk.nu_type(One, One_, ident, ident, ident, r_ident, r_ident)),
    )
    return _derivation(
        "nu", "app+pid", T, term, sort, [base, ext_step, beta_step, refl_inst],
        notes=[
            "the unit law trans(p, refl) = p is used propositionally, via the right unit witness",
            "extensionality computes definitionally under binders here",
            "the inner homotopy path is ext applied to j directly, which makes the eta step redundant",
        ],
    )


def derive_phi() -> Derivation:
    tk = Toolkit()
    T, A, B = _pi_tel()
    C = T.assume("C", _L_motive_sort(tk, A, B))
    u = T.assume("u", El(Pi(A, B)))
    v = T.assume("v", El(Pi(A, B)))
    p = T.assume("p", El(Id(Pi(A, B), u, v)))
    c = T.assume("c", El(call(C, *tk.canon(A, B, u))))
    sort = El(call(C, u, v, tk.star_fn(A, B, u, v, p)))

    K, A2, B2 = _pi_tel()
    C2 = K.assume("C", _L_motive_sort(tk, A2, B2))
    f = K.assume("f", _fn_sort(A2, B2))
    lf = lam(f)
    c2 = K.assume("c", El(call(C2, *tk.canon(A2, B2, lf))))
    comp = _comp("phi-comp", K, tk.phi(A2, B2, C2, lf, lf, refl(lf), c2), c2)
    return _derivation("phi", "app,funsplit", T, tk.phi(A, B, C, u, v, p, c), sort, [comp])


def _mu_hypothesis_sort(tk: Toolkit, A, B) -> Sort:
    P = Pi(A, B)
    return fun(
        "m", El(P),
        lambda m: fun(
            "n", El(P),
            lambda n: fun(
                "k", El(tk.homotopy(A, B, m, n)),
                lambda k: fun("x", El(A), lambda x: El(tk.mu_type(A, B, m, n, k, x))),
            ),
        ),
    )


def derive_L_from_ext_mu(provider: str = "pid") -> Derivation:
    """Pi-Id-elimination from extensionality and mu.

    ``provider="pid"`` derives both from primitive ``L`` (so the computation
    rule holds definitionally).  ``"hypothesis"`` uses primitive ``ext`` and
    assumes mu; the computation rule is then not definitional.
    """

    def setup():
        T, A, B = _pi_tel()
        if provider == "pid":
            tk = Toolkit(ext_via="pid")
        elif provider == "hypothesis":
            tk0 = Toolkit()
            tk = Toolkit(mu_hyp=T.assume("mu", _mu_hypothesis_sort(tk0, A, B)))
        else:
            raise ValueError(f"unknown provider {provider!r}")
        C = T.assume("C", _L_motive_sort(tk, A, B))
        d = T.assume("d", _L_base_sort(tk, A, B, C))
        return T, A, B, C, d, tk

    T, A, B, C, d, tk = setup()
    m = T.assume("m", El(Pi(A, B)))
    n = T.assume("n", El(Pi(A, B)))
    k = T.assume("k", El(tk.homotopy(A, B, m, n)))
    term = tk.L_prime(A, B, C, d, m, n, k)
    sort = El(call(C, m, n, k))

    comps, notes = [], []
    if provider == "pid":
        required = "funsplit,app+pid"
        K, A2, B2, C2, d2, tk2 = setup()
        f = K.assume("f", _fn_sort(A2, B2))
        lf = lam(f)
        rf = K.define("rf", El(tk2.homotopy(A2, B2, lf, lf)), _x("x", lambda x: refl(call(f, x))))
        target = El(call(C2, lf, lf, rf))
        comps.append(_comp("L-comp", K, tk2.L_prime(A2, B2, C2, d2, lf, lf, rf), call(d2, f), target))
        comps.append(_comp("b-comp", K, tk2.L_b(A2, B2, C2, d2, lf, lf, rf), call(d2, f), target))
        c = K.assume("c", El(call(C2, *tk2.canon(A2, B2, lf))))
        comps.append(_comp("phi-comp", K, tk2.phi(A2, B2, C2, lf, lf, refl(lf), c), c))
        notes.append("ext and mu are derived from L")
    else:
        required = "funsplit,app+ext"
        notes.append("mu is a context hypothesis; the computation rule is not definitional")
    notes.append("the transport runs along the inverse of the ext-of-mu path")
    return _derivation("L-from-ext", required, T, term, sort, comps, notes)


# -- registry -------------------------------------------------------------------

REGISTRY: dict[str, Callable[[], Derivation]] = {
    "app-from-funsplit": derive_app_from_funsplit,
    "prop-eta-from-funsplit": derive_prop_eta_from_funsplit,
    "subst": derive_subst,
    "subst-roundtrip": derive_subst_roundtrip,
    "funsplit-from-app-eta": derive_funsplit_from_app_eta,
    "psi": derive_psi,
    "trans": derive_trans,
    "symm": derive_symm,
    "trans-assoc": derive_trans_assoc,
    "trans-right-unit": derive_trans_right_unit,
    "eta-from-ext": derive_eta_from_ext,
    "xi-from-ext": derive_xi_from_ext,
    "ext-from-xi-eta": derive_ext_from_xi_eta,
    "ext-coherence": derive_ext_coherence,
    "star": derive_star,
    "star-subst-naturality": derive_star_subst_naturality,
    "ext-from-L": derive_ext_from_L,
    "mu": derive_mu,
    "ext-cong": derive_ext_cong,
    "ext-cong-trans": derive_ext_cong_trans,
    "nu": derive_nu,
    "phi": derive_phi,
    "L-from-ext": derive_L_from_ext_mu,
}


def registry() -> dict[str, Callable[[], Derivation]]:
    """All registered derivations, including the Pi-prime ones."""
    from . import pi_prime  # noqa: F401  (registers its entries)

    return REGISTRY


def lookup(name: str) -> Callable[[], Derivation]:
    reg = registry()
    if name in reg:
        return reg[name]
    folded = {k.lower(): v for k, v in reg.items()}
    try:
        return folded[name.lower()]
    except KeyError:
        raise KeyError(f"unknown derivation {name!r}") from None


def canonical_name(name: str) -> str:
    for k in registry():
        if k.lower() == name.lower():
            return k
    raise KeyError(f"unknown derivation {name!r}")


# -- verification -------------------------------------------------------------


@dataclass(frozen=True)
class CompCheck:
    label: str
    lhs: Term
    rhs: Term
    status: str
    context: tuple = ()


@dataclass(frozen=True)
class Report:
    name: str
    ruleset: RuleSet
    status: str
    derivation: Derivation
    comp_checks: tuple[CompCheck, ...] = ()
    error: Optional[Exception] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _check_comp(cfg: RuleSet, c: CompEquality) -> str:
    try:
        s = Session(cfg, c.context)
        if c.sort is None:
            sort = s.infer(c.lhs)
        else:
            s.check_sort(c.sort)
            sort = c.sort
        s.check(c.lhs, sort)
        s.check(c.rhs, sort)
        return "ok" if s.defeq(c.lhs, c.rhs) else "not-definitional"
    except TypingError as e:
        return e.kind.value
    except FuelExhausted:
        return "FuelExhausted"


def verify(d: Derivation, cfg: Optional[RuleSet] = None) -> Report:
    """Kernel-check ``d`` under ``cfg`` (default: its declared rule set)."""
    cfg = d.required if cfg is None else cfg
    try:
        Session(cfg, d.context).check(d.term, d.sort)
    except TypingError as e:
        return Report(d.name, cfg, e.kind.value, d, error=e)
    except FuelExhausted as e:
        return Report(d.name, cfg, "FuelExhausted", d, error=e)
    checks = tuple(
        CompCheck(c.label, c.lhs, c.rhs, _check_comp(cfg, c), c.context) for c in d.comp_equalities
    )
    status = "ok" if all(c.status == "ok" for c in checks) else "comp-failed"
    return Report(d.name, cfg, status, d, checks)
