"""Shared test fixtures: a type-directed term generator and a named-lambda oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass

from mltt import syntax as S
from mltt.build import El, Name, Telescope, const_fam, flam, flam2, flam3, fun
from mltt.syntax import TYPE, App, Lam, One, Var

# -- well-typed terms ---------------------------------------------------------
#
# Type codes: "A", "One", ("Fn", c1, c2), ("Prod", c1, c2), ("Sum", c1, c2).
# Framework functions in scope carry the code ("FF", c1, c2).


@dataclass
class Sample:
    term: S.Term  # closed over the generator's context
    code: object
    sort: S.Sort


class TermGen:
    """Random well-typed terms with plenty of redexes.

    ``fragment="app"`` restricts to constants the Pi' translation covers,
    ``fragment="funsplit"`` to those checkable without primitive application.
    """

    def __init__(self, seed: int, fragment: str = "full"):
        self.r = random.Random(seed)
        self.fragment = fragment
        T = Telescope()
        self.A = T.assume("A", TYPE)
        self.a = T.assume("a", El(self.A))
        self.g = T.assume("g", fun("x", El(self.A), lambda x: El(self.A)))
        self.h = T.assume("h", El(S.Pi(self.A, const_fam(self.A))))
        self.s = T.assume("s", El(S.Sum(self.A, One)))
        self.q = T.assume("q", El(S.Sigma(self.A, const_fam(self.A))))
        self.p = T.assume("p", El(S.Id(self.A, self.a, self.a)))
        self.tel = T
        self.ctx = T.context()
        self.globals = [
            (self.a, "A"),
            (self.g, ("FF", "A", "A")),
            (self.h, ("Fn", "A", "A")),
            (self.s, ("Sum", "A", "One")),
            (self.q, ("Prod", "A", "A")),
        ]

    # codes

    def code(self, depth: int = 2):
        if depth == 0 or self.r.random() < 0.45:
            return self.r.choice(["A", "A", "One"])
        kind = self.r.choice(["Fn", "Prod", "Sum"])
        return (kind, self.code(depth - 1), self.code(depth - 1))

    def ty(self, c) -> S.Term:
        match c:
            case "A":
                return self.A
            case "One":
                return One
            case ("Fn", c1, c2):
                return S.Pi(self.ty(c1), const_fam(self.ty(c2)))
            case ("Prod", c1, c2):
                return S.Sigma(self.ty(c1), const_fam(self.ty(c2)))
            case ("Sum", c1, c2):
                return S.Sum(self.ty(c1), self.ty(c2))
        raise ValueError(c)

    # terms

    def ann(self, t: S.Term, c) -> S.Term:
        """``([x : el T] x) t``: makes an introduction form inferable."""
        return App(Lam(Var(0), "x", El(self.ty(c))), t)

    def term(self, c, depth: int, env: list, infer: bool = False) -> S.Term:
        """A term of code ``c``; with ``infer`` its sort must be inferable."""
        r = self.r
        options = ["intro"]
        if any(code == c for _, code in env):
            options += ["var"] * 2
        if depth > 0:
            options += ["beta", "split", "case", "J"]
            if any(code == ("FF", x, c) for _, code in env for x in ("A", "One")):
                options.append("ffapp")
            if self.fragment != "funsplit":
                options.append("app")
            if self.fragment != "app":
                options.append("funsplit")
            if self.fragment == "full":
                options.append("eta")
        choice = r.choice(options)
        d = depth - 1
        match choice:
            case "var":
                return r.choice([v for v, code in env if code == c])
            case "ffapp":
                f, (_, c1, _) = r.choice(
                    [(v, code) for v, code in env if isinstance(code, tuple) and code[0] == "FF" and code[2] == c]
                )
                return App(f, self.term(c1, d, env))
            case "app":
                c1 = self.code(1)
                return S.app(self.term(("Fn", c1, c), d, env, True), self.term(c1, d, env))
            case "beta":
                c1 = self.code(1)
                return App(flam("x", lambda x: self.term(c, d, env + [(x, c1)], True)), self.term(c1, d, env, True))
            case "split":
                c1, c2 = self.code(1), self.code(1)
                return S.split(
                    const_fam(self.ty(c)),
                    flam2("x", "y", lambda x, y: self.term(c, d, env + [(x, c1), (y, c2)])),
                    self.term(("Prod", c1, c2), d, env, True),
                )
            case "case":
                c1, c2 = self.code(1), self.code(1)
                return S.case(
                    const_fam(self.ty(c)),
                    flam("x", lambda x: self.term(c, d, env + [(x, c1)])),
                    flam("y", lambda y: self.term(c, d, env + [(y, c2)])),
                    self.term(("Sum", c1, c2), d, env, True),
                )
            case "J":
                path = r.choice([self.p, S.refl(self.a)])
                return S.J(
                    flam3("x", "y", "z", lambda x, y, z: self.ty(c)),
                    flam("x", lambda x: self.term(c, d, env + [(x, "A")])),
                    self.a, self.a, path,
                )
            case "funsplit":
                c1, c2 = self.code(1), self.code(1)
                return S.funsplit(
                    const_fam(self.ty(c)),
                    flam("f", lambda f: self.term(c, d, env + [(f, ("FF", c1, c2))])),
                    self.term(("Fn", c1, c2), d, env, True),
                )
            case "eta":
                c1, c2 = self.code(1), self.code(1)
                m = self.term(("Fn", c1, c2), d, env, True)
                expanded = S.lam(flam("x", lambda x: S.app(m, x)))
                return S.J(
                    flam3("x", "y", "z", lambda x, y, z: self.ty(c)),
                    flam("x", lambda x: self.term(c, d, env + [(x, ("Fn", c1, c2))])),
                    m, expanded, S.eta(m),
                )
        t = self.intro(c, depth, env)
        return self.ann(t, c) if infer and not isinstance(t, Name) else t

    def intro(self, c, depth: int, env: list) -> S.Term:
        d = max(depth - 1, 0)
        match c:
            case "A":
                if any(code == "A" for _, code in env):
                    return self.r.choice([v for v, code in env if code == "A"])
                return self.a
            case "One":
                return S.star
            case ("Fn", c1, c2):
                return S.lam(flam("x", lambda x: self.term(c2, d, env + [(x, c1)])))
            case ("Prod", c1, c2):
                return S.pair(self.term(c1, d, env), self.term(c2, d, env))
            case ("Sum", c1, c2):
                if self.r.random() < 0.5:
                    return S.inl(self.term(c1, d, env))
                return S.inr(self.term(c2, d, env))
        raise ValueError(c)

    def sample(self, depth: int = 5) -> Sample:
        c = self.code(2)
        t = self.tel.close(self.term(c, depth, list(self.globals)))
        return Sample(t, c, self.tel.close_sort(El(self.ty(c))))

    def corpus(self, n: int, depth: int = 5) -> list[Sample]:
        return [self.sample(depth) for _ in range(n)]


# -- named lambda terms -------------------------------------------------------
#
# ("var", x) | ("lam", x, body) | ("app", f, a), with textbook
# capture-avoiding substitution, used as an oracle for the de Bruijn layer.


def nfree(t) -> set:
    match t:
        case ("var", x):
            return {x}
        case ("lam", x, b):
            return nfree(b) - {x}
        case ("app", f, a):
            return nfree(f) | nfree(a)
    raise ValueError(t)


def nsubst(t, x, s):
    match t:
        case ("var", y):
            return s if y == x else t
        case ("app", f, a):
            return ("app", nsubst(f, x, s), nsubst(a, x, s))
        case ("lam", y, b):
            if y == x:
                return t
            if y in nfree(s):
                taken = nfree(s) | nfree(b) | {x}
                k = 0
                while f"{y}{k}" in taken:
                    k += 1
                fresh = f"{y}{k}"
                b, y = nsubst(b, y, ("var", fresh)), fresh
            return ("lam", y, nsubst(b, x, s))
    raise ValueError(t)


def to_debruijn(t, scope: list):
    match t:
        case ("var", x):
            pos = len(scope) - 1 - scope[::-1].index(x)
            return Var(len(scope) - 1 - pos)
        case ("lam", x, b):
            return Lam(to_debruijn(b, scope + [x]), x)
        case ("app", f, a):
            return App(to_debruijn(f, scope), to_debruijn(a, scope))
    raise ValueError(t)


def random_named(r: random.Random, scope: list, depth: int, pool=("x", "y", "z", "u")):
    if depth == 0 or r.random() < 0.3:
        return ("var", r.choice(scope))
    if r.random() < 0.5:
        x = r.choice(pool)
        return ("lam", x, random_named(r, scope + [x], depth - 1, pool))
    return ("app", random_named(r, scope, depth - 1, pool), random_named(r, scope, depth - 1, pool))


def rename_bound(t, r: random.Random):
    """An alpha-variant of ``t`` with fresh bound names."""
    match t:
        case ("var", _):
            return t
        case ("app", f, a):
            return ("app", rename_bound(f, r), rename_bound(a, r))
        case ("lam", x, b):
            fresh = f"v{r.randrange(10**9)}"
            return ("lam", fresh, rename_bound(nsubst(b, x, ("var", fresh)), r))
    raise ValueError(t)


# -- acceptance report ----------------------------------------------------------

# Filled by the acceptance suite, printed in the pytest terminal summary.
ACCEPTANCE_LINES: list[str] = []
