"""Type checking and definitional equality by normalization by evaluation.

Terms are evaluated into a semantic domain (:class:`VLam` closures, canonical
and stuck :class:`VConst` nodes, variable-headed spines) and read back into
beta-normal, eta-short terms.  Framework functions carry beta and eta; object
``lam`` has beta (through ``app`` or ``funsplit``) and no eta.  Two terms are
definitionally equal exactly when their read-backs coincide.

The checker is bidirectional: constants and eliminators infer, framework
abstractions and object introductions (``lam``, ``pair``, ``inl``, ``inr``,
``refl``) check.
"""

from __future__ import annotations

import enum
import functools
import os
from dataclasses import dataclass, field
from typing import Optional, Union

from .build import El, const_fam, flam, fun, sort_template, template
from .syntax import (
    TYPE,
    App,
    Const,
    Context,
    ElSort,
    Entry,
    FunSort,
    Lam,
    RuleSet,
    Sort,
    Term,
    TypeSort,
    Var,
    free_vars,
    shift,
)
from . import syntax as S

DEFAULT_FUEL = 1_000_000


# -- semantic domain ----------------------------------------------------------


class Value:
    __slots__ = ()


@dataclass(frozen=True, eq=False, slots=True)
class Closure:
    env: tuple
    body: Term
    hint: str = "x"


@dataclass(frozen=True, eq=False, slots=True)
class VVar(Value):
    level: int


@dataclass(frozen=True, eq=False, slots=True)
class VApp(Value):
    fun: Value
    arg: Value


@dataclass(frozen=True, eq=False, slots=True)
class VLam(Value):
    closure: Closure


@dataclass(frozen=True, eq=False, slots=True)
class VConst(Value):
    head: str
    args: tuple = ()


class VSort:
    __slots__ = ()


@dataclass(frozen=True, eq=False, slots=True)
class VType(VSort):
    pass


@dataclass(frozen=True, eq=False, slots=True)
class VEl(VSort):
    type: Value


@dataclass(frozen=True, eq=False, slots=True)
class SortClosure:
    env: tuple
    body: Sort
    hint: str = "x"


@dataclass(frozen=True, eq=False, slots=True)
class VFun(VSort):
    dom: VSort
    cod: SortClosure


VTYPE = VType()


class FuelExhausted(RuntimeError):
    """The rewrite budget ran out.  Always a defect report, never an answer."""


# -- errors -------------------------------------------------------------------


class ErrorKind(enum.Enum):
    MISMATCH = "Mismatch"
    UNBOUND_VARIABLE = "UnboundVariable"
    RULE_NOT_ENABLED = "RuleNotEnabled"
    NOT_A_FUNCTION_SORT = "NotAFunctionSort"
    ILL_FORMED_CONTEXT = "IllFormedContext"


@dataclass
class TypingError(Exception):
    kind: ErrorKind
    message: str
    location: tuple = ()
    expected: Optional[Union[Term, Sort]] = None
    actual: Optional[Union[Term, Sort]] = None
    context_index: Optional[int] = None

    def __str__(self):
        where = "/".join(map(str, self.location)) or "<root>"
        return f"{self.kind.value} at {where}: {self.message}"


class CannotInfer(TypingError):
    """The term is in checking position only (e.g. an unannotated abstraction)."""


# -- evaluation ---------------------------------------------------------------


class Machine:
    """Evaluator and read-back for one rule set, with a rewrite budget."""

    def __init__(self, cfg: RuleSet, fuel: Optional[int] = None):
        self.cfg = cfg
        self.fuel = DEFAULT_FUEL if fuel is None else fuel

    def _tick(self):
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted("rewrite fuel exhausted; this is a kernel defect")

    def eval(self, env: tuple, t: Term) -> Value:
        match t:
            case Var(i):
                return env[len(env) - 1 - i]
            case Lam(body, hint):
                return VLam(Closure(env, body, hint))
            case App(f, a):
                return self.apply(self.eval(env, f), self.eval(env, a))
            case Const(head, args):
                return self.reduce(head, tuple(self.eval(env, a) for a in args))
        raise TypeError(f"cannot evaluate {t!r}")

    def eval_sort(self, env: tuple, s: Sort) -> VSort:
        match s:
            case TypeSort():
                return VTYPE
            case ElSort(a):
                return VEl(self.eval(env, a))
            case FunSort(dom, cod, hint):
                return VFun(self.eval_sort(env, dom), SortClosure(env, cod, hint))
        raise TypeError(f"cannot evaluate sort {s!r}")

    def apply(self, f: Value, a: Value) -> Value:
        if isinstance(f, VLam):
            self._tick()
            c = f.closure
            return self.eval(c.env + (a,), c.body)
        return VApp(f, a)

    def inst(self, c: SortClosure, a: Value) -> VSort:
        return self.eval_sort(c.env + (a,), c.body)

    def reduce(self, head: str, args: tuple) -> Value:
        if not self.cfg.allows(head):
            return VConst(head, args)
        match head, args:
            case "app", (VConst("lam", (f,)), a):
                self._tick()
                return self.apply(f, a)
            case "funsplit", (_, d, VConst("lam", (f,))):
                self._tick()
                return self.apply(d, f)
            case "eta", (VConst("lam") as m,):
                self._tick()
                return VConst("refl", (m,))
            case "J", (_, d, a, _, VConst("refl")):
                self._tick()
                return self.apply(d, a)
            case "split", (_, d, VConst("pair", (x, y))):
                self._tick()
                return self.apply(self.apply(d, x), y)
            case "case", (_, f, _, VConst("inl", (x,))):
                self._tick()
                return self.apply(f, x)
            case "case", (_, _, g, VConst("inr", (y,))):
                self._tick()
                return self.apply(g, y)
            case "Decode", (VConst("code0"),):
                self._tick()
                return VConst("Zero")
            case "Decode", (VConst("code1"),):
                self._tick()
                return VConst("One")
            case "ext", (m, n, k):
                if self.canonical_triple(m, n, k) is not None:
                    self._tick()
                    return VConst("refl", (m,))
            case "L", (_, d, m, n, k):
                f = self.canonical_triple(m, n, k)
                if f is not None:
                    self._tick()
                    return self.apply(d, f)
        return VConst(head, args)

    def canonical_triple(self, m: Value, n: Value, k: Value) -> Optional[Value]:
        """Return ``f`` when ``(m, n, k)`` is ``(lam f, lam f, lam [x] refl(f x))``.

        The comparison is definitional: arguments are compared by read-back.
        """
        match m, n, k:
            case VConst("lam", (f,)), VConst("lam", (g,)), VConst("lam", (p,)):
                pass
            case _:
                return None
        lvl = 1 + max(max_level(f), max_level(g), max_level(p))
        if self.quote(lvl, f) != self.quote(lvl, g):
            return None
        x = VVar(lvl)
        lhs = self.quote(lvl + 1, self.apply(p, x))
        rhs = self.quote(lvl + 1, VConst("refl", (self.apply(f, x),)))
        return f if lhs == rhs else None

    # -- read-back

    def quote(self, lvl: int, v: Value) -> Term:
        match v:
            case VVar(k):
                if k >= lvl:
                    raise RuntimeError(f"read-back of level {k} at depth {lvl}")
                return Var(lvl - 1 - k)
            case VApp(f, a):
                return App(self.quote(lvl, f), self.quote(lvl, a))
            case VLam(c):
                body = self.quote(lvl + 1, self.apply(v, VVar(lvl)))
                return eta_contract(body, c.hint)
            case VConst(head, args):
                if not args:
                    return Const(head)
                return Const(head, tuple(self.quote(lvl, a) for a in args))
        raise TypeError(f"cannot read back {v!r}")

    def quote_sort(self, lvl: int, s: VSort) -> Sort:
        match s:
            case VType():
                return TYPE
            case VEl(a):
                return ElSort(self.quote(lvl, a))
            case VFun(dom, cod):
                return FunSort(
                    self.quote_sort(lvl, dom),
                    self.quote_sort(lvl + 1, self.inst(cod, VVar(lvl))),
                    cod.hint,
                )
        raise TypeError(f"cannot read back sort {s!r}")

    def conv(self, lvl: int, a: Value, b: Value) -> bool:
        return self.quote(lvl, a) == self.quote(lvl, b)

    def conv_sort(self, lvl: int, a: VSort, b: VSort) -> bool:
        return self.quote_sort(lvl, a) == self.quote_sort(lvl, b)


def eta_contract(body: Term, hint: str = "x") -> Term:
    """``[x] f(x)`` becomes ``f`` when ``x`` is not free in ``f``."""
    if isinstance(body, App) and body.arg == Var(0) and 0 not in free_vars(body.fun):
        return shift(body.fun, -1)
    return Lam(body, hint)


def max_level(v) -> int:
    """Largest variable level occurring in a value (-1 if none)."""
    match v:
        case VVar(k):
            return k
        case VApp(f, a):
            return max(max_level(f), max_level(a))
        case VLam(c):
            return max((max_level(e) for e in c.env), default=-1)
        case VConst(_, args):
            return max((max_level(a) for a in args), default=-1)
    return -1


# -- rule templates -----------------------------------------------------------
#
# Premise sorts of the eliminators, written once over an environment of
# already-evaluated parameters and instantiated by evaluation.

_FAMILY = sort_template(["A"], lambda A: fun("x", El(A), lambda x: TYPE))
_EL_FAMILY = sort_template(
    ["A", "B"], lambda A, B: fun("x", El(A), lambda x: El(App(B, x)))
)
_MOTIVE1 = sort_template(["T"], lambda T: fun("z", El(T), lambda z: TYPE))
_J_MOTIVE = sort_template(
    ["A"],
    lambda A: fun(
        "x", El(A), lambda x: fun("y", El(A), lambda y: fun("p", El(S.Id(A, x, y)), lambda p: TYPE))
    ),
)
_J_BASE = sort_template(
    ["A", "C"], lambda A, C: fun("x", El(A), lambda x: El(S.apps(C, x, x, S.refl(x))))
)
_FUNSPLIT_BASE = sort_template(
    ["A", "B", "C"],
    lambda A, B, C: fun(
        "f",
        fun("x", El(A), lambda x: El(App(B, x))),
        lambda f: El(App(C, S.lam(f))),
    ),
)
_SPLIT_BASE = sort_template(
    ["A", "B", "C"],
    lambda A, B, C: fun(
        "x", El(A), lambda x: fun("y", El(App(B, x)), lambda y: El(App(C, S.pair(x, y))))
    ),
)
_CASE_LEFT = sort_template(["A", "C"], lambda A, C: fun("x", El(A), lambda x: El(App(C, S.inl(x)))))
_CASE_RIGHT = sort_template(["B", "C"], lambda B, C: fun("y", El(B), lambda y: El(App(C, S.inr(y)))))


def _pointwise(A, B, m, n):
    return S.Pi(A, flam("x", lambda x: S.Id(App(B, x), S.app(m, x), S.app(n, x))))


_HOMOTOPY = template(["A", "B", "m", "n"], _pointwise)
_L_MOTIVE = sort_template(
    ["A", "B"],
    lambda A, B: fun(
        "u",
        El(S.Pi(A, B)),
        lambda u: fun(
            "v", El(S.Pi(A, B)), lambda v: fun("w", El(_pointwise(A, B, u, v)), lambda w: TYPE)
        ),
    ),
)
_L_BASE = sort_template(
    ["A", "B", "C"],
    lambda A, B, C: fun(
        "f",
        fun("x", El(A), lambda x: El(App(B, x))),
        lambda f: El(
            S.apps(
                C,
                S.lam(f),
                S.lam(f),
                S.lam(flam("x", lambda x: S.refl(App(f, x)))),
            )
        ),
    ),
)
_ETA_TYPE = template(
    ["A", "B", "m"],
    lambda A, B, m: S.Id(S.Pi(A, B), m, S.lam(flam("x", lambda x: S.app(m, x)))),
)

# Heads that are types (checked against TypeSort).
_TYPE_FORMERS = {"Pi", "Sigma", "Id", "Zero", "One", "Sum", "U", "Decode"}


# -- checking -----------------------------------------------------------------


@dataclass(frozen=True)
class Scope:
    env: tuple = ()
    sorts: tuple = ()
    names: tuple = ()

    @property
    def level(self) -> int:
        return len(self.env)

    def bind(self, name: str, sort: VSort) -> tuple["Scope", Value]:
        v = VVar(len(self.env))
        return Scope(self.env + (v,), self.sorts + (sort,), self.names + (name,)), v

    def define(self, name: str, sort: VSort, value: Value) -> "Scope":
        return Scope(self.env + (value,), self.sorts + (sort,), self.names + (name,))


class Checker:
    def __init__(self, cfg: RuleSet, fuel: Optional[int] = None, trace: Optional[dict] = None):
        self.cfg = cfg
        self.m = Machine(cfg, fuel)
        # path -> (context, result type) for every object application
        self.trace = trace

    # -- helpers

    def _err(self, kind, msg, path, expected=None, actual=None, cls=TypingError):
        return cls(kind, msg, tuple(path), expected, actual)

    def _mismatch(self, sc: Scope, path, expected: VSort, actual: VSort, what="sort"):
        q = self.m.quote_sort
        return self._err(
            ErrorKind.MISMATCH,
            f"{what} mismatch",
            path,
            q(sc.level, expected),
            q(sc.level, actual),
        )

    def _el(self, sc: Scope, s: VSort, path, what: str) -> Value:
        if isinstance(s, VEl):
            return s.type
        raise self._err(
            ErrorKind.MISMATCH, f"{what} must be an element of a type", path,
            actual=self.m.quote_sort(sc.level, s),
        )

    def _former(self, sc: Scope, A: Value, head: str, path, what: str) -> tuple:
        if isinstance(A, VConst) and A.head == head:
            return A.args
        raise self._err(
            ErrorKind.MISMATCH, f"{what} must have a {head}-type", path,
            actual=self.m.quote(sc.level, A),
        )

    def _gate(self, head: str, path):
        if not self.cfg.allows(head):
            raise self._err(
                ErrorKind.RULE_NOT_ENABLED,
                f"'{head}' is not licensed by rule set {self.cfg}",
                path,
            )

    def _tmpl(self, s: Sort, *env: Value) -> VSort:
        return self.m.eval_sort(tuple(env), s)

    def ev(self, sc: Scope, t: Term) -> Value:
        return self.m.eval(sc.env, t)

    # -- contexts

    def scope_of(self, ctx: Context, check: bool = True) -> Scope:
        sc = Scope()
        for i, entry in enumerate(ctx):
            if check:
                try:
                    self.check_sort(sc, entry.sort, ("ctx", i))
                    vs = self.m.eval_sort(sc.env, entry.sort)
                    if entry.value is not None:
                        self.check(sc, entry.value, vs, ("ctx", i, "value"))
                except TypingError as e:
                    if e.kind is ErrorKind.RULE_NOT_ENABLED:
                        e.context_index = i
                        raise
                    raise TypingError(
                        ErrorKind.ILL_FORMED_CONTEXT,
                        f"context entry {i} ({entry.name}) is ill-formed: {e.message}",
                        e.location,
                        e.expected,
                        e.actual,
                        i,
                    ) from e
            else:
                vs = self.m.eval_sort(sc.env, entry.sort)
            if entry.value is None:
                sc, _ = sc.bind(entry.name, vs)
            else:
                sc = sc.define(entry.name, vs, self.m.eval(sc.env, entry.value))
        return sc

    # -- sorts

    def check_sort(self, sc: Scope, s: Sort, path=()) -> None:
        match s:
            case TypeSort():
                return
            case ElSort(a):
                self.check(sc, a, VTYPE, path + (0,))
                return
            case FunSort(dom, cod, hint):
                self.check_sort(sc, dom, path + (0,))
                inner, _ = sc.bind(hint, self.m.eval_sort(sc.env, dom))
                self.check_sort(inner, cod, path + (1,))
                return
        raise TypeError(f"not a sort: {s!r}")

    # -- terms

    def check(self, sc: Scope, t: Term, want: VSort, path=()) -> None:
        m = self.m
        match t:
            case Lam(body, hint, dom):
                if not isinstance(want, VFun):
                    raise self._err(
                        ErrorKind.NOT_A_FUNCTION_SORT,
                        "abstraction checked against a non-function sort",
                        path,
                        expected=m.quote_sort(sc.level, want),
                    )
                if dom is not None:
                    self.check_sort(sc, dom, path)
                    if not m.conv_sort(sc.level, want.dom, m.eval_sort(sc.env, dom)):
                        raise self._mismatch(sc, path, want.dom, m.eval_sort(sc.env, dom), "binder domain")
                self._record_dom(sc, path, want.dom)
                inner, x = sc.bind(hint, want.dom)
                self.check(inner, body, m.inst(want.cod, x), path + (0,))
                return
            case Const("lam", (f,)) if isinstance(want, VEl):
                A, B = self._former(sc, want.type, "Pi", path, "abstraction")
                self.check(sc, f, self._tmpl(_EL_FAMILY, A, B), path + (0,))
                return
            case Const("pair", (a, b)) if isinstance(want, VEl):
                A, B = self._former(sc, want.type, "Sigma", path, "pair")
                self.check(sc, a, VEl(A), path + (0,))
                self.check(sc, b, VEl(m.apply(B, self.ev(sc, a))), path + (1,))
                return
            case Const("inl" | "inr" as head, (a,)) if isinstance(want, VEl):
                A, B = self._former(sc, want.type, "Sum", path, head)
                self.check(sc, a, VEl(A if head == "inl" else B), path + (0,))
                return
            case Const("refl", (a,)) if isinstance(want, VEl):
                A, x, y = self._former(sc, want.type, "Id", path, "reflexivity")
                self.check(sc, a, VEl(A), path + (0,))
                av = self.ev(sc, a)
                for end, label in ((x, "left"), (y, "right")):
                    if not m.conv(sc.level, av, end):
                        raise self._err(
                            ErrorKind.MISMATCH,
                            f"refl does not match the {label} endpoint",
                            path,
                            expected=m.quote(sc.level, end),
                            actual=m.quote(sc.level, av),
                        )
                return
            case Const("ext", (mm, nn, kk)) if (
                isinstance(want, VEl)
                and isinstance(want.type, VConst)
                and want.type.head == "Id"
                and isinstance(want.type.args[0], VConst)
                and want.type.args[0].head == "Pi"
            ):
                self._gate("ext", path)
                A, B = want.type.args[0].args
                got = self._ext(sc, A, B, mm, nn, kk, path)
                if not m.conv_sort(sc.level, want, got):
                    raise self._mismatch(sc, path, want, got)
                return
        got = self.infer(sc, t, path)
        if not m.conv_sort(sc.level, want, got):
            raise self._mismatch(sc, path, want, got)

    def infer(self, sc: Scope, t: Term, path=()) -> VSort:
        m = self.m
        match t:
            case Var(i):
                if i >= sc.level:
                    raise self._err(
                        ErrorKind.UNBOUND_VARIABLE, f"index {i} in a context of length {sc.level}", path
                    )
                return sc.sorts[sc.level - 1 - i]
            case Lam(body, hint, dom):
                if dom is None:
                    raise self._err(
                        ErrorKind.MISMATCH, "cannot infer the sort of a bare abstraction", path, cls=CannotInfer
                    )
                self.check_sort(sc, dom, path)
                dv = m.eval_sort(sc.env, dom)
                self._record_dom(sc, path, dv)
                inner, _ = sc.bind(hint, dv)
                cod = m.quote_sort(inner.level, self.infer(inner, body, path + (0,)))
                return VFun(dv, SortClosure(sc.env, cod, hint))
            case App(Lam(body, hint, dom), a):
                # beta-redex: the argument's sort gives the binder's domain
                if dom is None:
                    sa = self.infer(sc, a, path + (1,))
                else:
                    self.check_sort(sc, dom, path + (0,))
                    sa = m.eval_sort(sc.env, dom)
                    self.check(sc, a, sa, path + (1,))
                self._record_dom(sc, path + (0,), sa)
                inner, _ = sc.bind(hint, sa)
                sb = self.infer(inner, body, path + (0, 0))
                body_sort = m.quote_sort(inner.level, sb)
                return m.eval_sort(sc.env + (self.ev(sc, a),), body_sort)
            case App(f, a):
                sf = self.infer(sc, f, path + (0,))
                if not isinstance(sf, VFun):
                    raise self._err(
                        ErrorKind.NOT_A_FUNCTION_SORT,
                        "applied term does not have a function sort",
                        path + (0,),
                        actual=m.quote_sort(sc.level, sf),
                    )
                self.check(sc, a, sf.dom, path + (1,))
                return m.inst(sf.cod, self.ev(sc, a))
            case Const(head, args):
                self._gate(head, path)
                return self._infer_const(sc, head, args, path)
        raise TypeError(f"not a core term: {t!r}")

    def _record_dom(self, sc: Scope, path, dom: VSort) -> None:
        if self.trace is not None:
            self.trace[(tuple(path), "dom")] = (self.quote_scope(sc), self.m.quote_sort(sc.level, dom))

    def _infer_first(self, sc: Scope, candidates, path, motive: Optional[Term] = None):
        """Infer the first inferable candidate ``(index, term)``.

        When none infers, an annotated motive ``[z : S] ...`` supplies ``S``
        as the sort of the first candidate, which is then checked against it.
        """
        first = None
        for i, t in candidates:
            try:
                return i, self.infer(sc, t, path + (i,))
            except CannotInfer as e:
                first = first or e
        if isinstance(motive, Lam) and motive.dom is not None:
            i, t = candidates[0]
            self.check_sort(sc, motive.dom, path + (0,))
            s = self.m.eval_sort(sc.env, motive.dom)
            self.check(sc, t, s, path + (i,))
            return i, s
        raise first

    def _infer_const(self, sc: Scope, head: str, args: tuple, path) -> VSort:
        m = self.m
        ev = lambda t: self.ev(sc, t)  # noqa: E731
        sub = lambda i: path + (i,)  # noqa: E731

        if head in ("Pi", "Sigma"):
            A, B = args
            self.check(sc, A, VTYPE, sub(0))
            self.check(sc, B, self._tmpl(_FAMILY, ev(A)), sub(1))
            return VTYPE
        if head == "Id":
            A, a, b = args
            self.check(sc, A, VTYPE, sub(0))
            Av = VEl(ev(A))
            self.check(sc, a, Av, sub(1))
            self.check(sc, b, Av, sub(2))
            return VTYPE
        if head == "Sum":
            self.check(sc, args[0], VTYPE, sub(0))
            self.check(sc, args[1], VTYPE, sub(1))
            return VTYPE
        if head in ("Zero", "One", "U"):
            return VTYPE
        if head == "Decode":
            self.check(sc, args[0], VEl(VConst("U")), sub(0))
            return VTYPE
        if head == "star":
            return VEl(VConst("One"))
        if head in ("code0", "code1"):
            return VEl(VConst("U"))

        if head == "lam":
            (f,) = args
            sf = self.infer(sc, f, sub(0))
            if not isinstance(sf, VFun) or not isinstance(sf.dom, VEl):
                raise self._err(
                    ErrorKind.MISMATCH, "lam expects a function over elements", sub(0),
                    actual=m.quote_sort(sc.level, sf),
                )
            _, x = sc.bind("x", sf.dom)
            cod = m.inst(sf.cod, x)
            if not isinstance(cod, VEl):
                raise self._err(
                    ErrorKind.MISMATCH, "lam expects an element-valued function", sub(0),
                    actual=m.quote_sort(sc.level, sf),
                )
            B = VLam(Closure(sc.env, m.quote(sc.level + 1, cod.type), sf.cod.hint))
            return VEl(VConst("Pi", (sf.dom.type, B)))

        if head == "app":
            mm, a = args
            if isinstance(mm, Const) and mm.head == "lam" and isinstance(mm.args[0], Lam):
                # object beta-redex: domain from the argument
                body = mm.args[0]
                A = self._el(sc, self.infer(sc, a, sub(1)), sub(1), "argument")
                self._record_dom(sc, path + (0, 0), VEl(A))
                inner, _ = sc.bind(body.hint, VEl(A))
                T = self._el(inner, self.infer(inner, body.body, path + (0, 0, 0)), sub(0), "body")
                Tq = m.quote(inner.level, T)
                res = VEl(m.eval(sc.env + (ev(a),), Tq))
                fn_type = Const("Pi", (m.quote(sc.level, A), Lam(Tq, body.hint)))
            else:
                Pv = self._el(sc, self.infer(sc, mm, sub(0)), sub(0), "function")
                A, B = self._former(sc, Pv, "Pi", sub(0), "applied term")
                self.check(sc, a, VEl(A), sub(1))
                res = VEl(m.apply(B, ev(a)))
                fn_type = m.quote(sc.level, Pv)
            if self.trace is not None:
                self.trace[(tuple(path), "app")] = (self.quote_scope(sc), m.quote(sc.level, res.type), fn_type)
            return res

        if head == "funsplit":
            C, d, mm = args
            Pv = self._el(sc, self._infer_first(sc, [(2, mm)], path, C)[1], sub(2), "eliminated term")
            A, B = self._former(sc, Pv, "Pi", sub(2), "eliminated term")
            self.check(sc, C, self._tmpl(_MOTIVE1, Pv), sub(0))
            Cv = ev(C)
            self.check(sc, d, self._tmpl(_FUNSPLIT_BASE, A, B, Cv), sub(1))
            return VEl(m.apply(Cv, ev(mm)))

        if head == "eta":
            (mm,) = args
            A, B = self._former(sc, self._el(sc, self.infer(sc, mm, sub(0)), sub(0), "argument"),
                                "Pi", sub(0), "argument")
            return VEl(m.eval((A, B, ev(mm)), _ETA_TYPE))

        if head == "refl":
            (a,) = args
            A = self._el(sc, self.infer(sc, a, sub(0)), sub(0), "argument")
            av = ev(a)
            return VEl(VConst("Id", (A, av, av)))

        if head == "J":
            C, d, a, b, p = args
            i, s = self._infer_first(sc, [(2, a), (3, b), (4, p)], path, C)
            if i == 4:
                A = self._former(sc, self._el(sc, s, sub(4), "proof"), "Id", sub(4), "proof")[0]
            else:
                A = self._el(sc, s, sub(i), "endpoint")
            for j, t in ((2, a), (3, b)):
                if j != i:
                    self.check(sc, t, VEl(A), sub(j))
            av, bv = ev(a), ev(b)
            if i != 4:
                self.check(sc, p, VEl(VConst("Id", (A, av, bv))), sub(4))
            elif not (m.conv(sc.level, s.type.args[1], av) and m.conv(sc.level, s.type.args[2], bv)):
                raise self._mismatch(sc, sub(4), VEl(VConst("Id", (A, av, bv))), s)
            self.check(sc, C, self._tmpl(_J_MOTIVE, A), sub(0))
            Cv = ev(C)
            self.check(sc, d, self._tmpl(_J_BASE, A, Cv), sub(1))
            return VEl(m.apply(m.apply(m.apply(Cv, av), bv), ev(p)))

        if head == "split":
            C, d, p = args
            Sv = self._el(sc, self._infer_first(sc, [(2, p)], path, C)[1], sub(2), "eliminated term")
            A, B = self._former(sc, Sv, "Sigma", sub(2), "eliminated term")
            self.check(sc, C, self._tmpl(_MOTIVE1, Sv), sub(0))
            Cv = ev(C)
            self.check(sc, d, self._tmpl(_SPLIT_BASE, A, B, Cv), sub(1))
            return VEl(m.apply(Cv, ev(p)))

        if head == "zeroElim":
            C, z = args
            zero = VConst("Zero")
            self.check(sc, z, VEl(zero), sub(1))
            self.check(sc, C, self._tmpl(_MOTIVE1, zero), sub(0))
            return VEl(m.apply(ev(C), ev(z)))

        if head == "case":
            C, f, g, c = args
            Sv = self._el(sc, self._infer_first(sc, [(3, c)], path, C)[1], sub(3), "scrutinee")
            A, B = self._former(sc, Sv, "Sum", sub(3), "scrutinee")
            self.check(sc, C, self._tmpl(_MOTIVE1, Sv), sub(0))
            Cv = ev(C)
            self.check(sc, f, self._tmpl(_CASE_LEFT, A, Cv), sub(1))
            self.check(sc, g, self._tmpl(_CASE_RIGHT, B, Cv), sub(2))
            return VEl(m.apply(Cv, ev(c)))

        if head == "ext":
            mm, nn, kk = args
            A, B = self._pi_of_pair(sc, mm, nn, path)
            return self._ext(sc, A, B, mm, nn, kk, path)

        if head == "L":
            C, d, mm, nn, kk = args
            A, B = self._pi_of_pair(sc, mm, nn, path, offset=2, motive=C)
            P = VEl(VConst("Pi", (A, B)))
            self.check(sc, mm, P, sub(2))
            self.check(sc, nn, P, sub(3))
            mv, nv = ev(mm), ev(nn)
            self.check(sc, kk, VEl(m.eval((A, B, mv, nv), _HOMOTOPY)), sub(4))
            self.check(sc, C, self._tmpl(_L_MOTIVE, A, B), sub(0))
            Cv = ev(C)
            self.check(sc, d, self._tmpl(_L_BASE, A, B, Cv), sub(1))
            return VEl(m.apply(m.apply(m.apply(Cv, mv), nv), ev(kk)))

        if head in ("inl", "inr", "pair"):
            raise self._err(
                ErrorKind.MISMATCH, f"cannot infer the sort of '{head}'; it must be checked", path,
                cls=CannotInfer,
            )
        raise TypeError(f"no typing rule for {head}")  # pragma: no cover

    def _pi_of_pair(self, sc: Scope, mm: Term, nn: Term, path, offset: int = 0, motive=None):
        i, s = self._infer_first(sc, [(offset, mm), (offset + 1, nn)], path, motive)
        return self._former(sc, self._el(sc, s, path + (i,), "function"), "Pi", path + (i,), "function")

    def _ext(self, sc: Scope, A, B, mm, nn, kk, path) -> VSort:
        m = self.m
        P = VEl(VConst("Pi", (A, B)))
        self.check(sc, mm, P, path + (0,))
        self.check(sc, nn, P, path + (1,))
        mv, nv = self.ev(sc, mm), self.ev(sc, nn)
        self.check(sc, kk, VEl(m.eval((A, B, mv, nv), _HOMOTOPY)), path + (2,))
        return VEl(VConst("Id", (VConst("Pi", (A, B)), mv, nv)))

    def quote_scope(self, sc: Scope) -> Context:
        return tuple(
            Entry(name, self.m.quote_sort(i, s)) for i, (name, s) in enumerate(zip(sc.names, sc.sorts))
        )


# -- public API -----------------------------------------------------------------


def fuel_from_env(default: int = DEFAULT_FUEL) -> int:
    raw = os.environ.get("MLTT_FUEL")
    return int(raw) if raw else default


def _guarded(method):
    # Python's stack is the other finite resource; running out of it is the
    # same kind of defect as running out of fuel.
    @functools.wraps(method)
    def wrapper(*args, **kwargs):
        try:
            return method(*args, **kwargs)
        except RecursionError as e:
            raise FuelExhausted("recursion depth exhausted during normalization") from e

    return wrapper


class Session:
    """A checked context under one rule set; the entry point for repeated queries."""

    @_guarded
    def __init__(self, cfg: RuleSet, ctx: Context = (), fuel: Optional[int] = None, check: bool = True):
        self.cfg = cfg
        self.ctx = S.context(*ctx)
        self.checker = Checker(cfg, fuel_from_env() if fuel is None else fuel)
        self.scope = self.checker.scope_of(self.ctx, check=check)

    @property
    def machine(self) -> Machine:
        return self.checker.m

    @_guarded
    def infer(self, t: Term, trace: Optional[dict] = None) -> Sort:
        self.checker.trace = trace
        try:
            s = self.checker.infer(self.scope, t)
        finally:
            self.checker.trace = None
        return self.machine.quote_sort(self.scope.level, s)

    @_guarded
    def check(self, t: Term, s: Sort, trace: Optional[dict] = None) -> None:
        self.check_sort(s)
        self.checker.trace = trace
        try:
            self.checker.check(self.scope, t, self.machine.eval_sort(self.scope.env, s))
        finally:
            self.checker.trace = None

    @_guarded
    def check_sort(self, s: Sort, trace: Optional[dict] = None) -> None:
        self.checker.trace = trace
        try:
            self.checker.check_sort(self.scope, s)
        finally:
            self.checker.trace = None

    @_guarded
    def push(self, entry: Entry) -> None:
        """Extend the context by an entry the caller has already checked."""
        m = self.machine
        vs = m.eval_sort(self.scope.env, entry.sort)
        if entry.value is None:
            self.scope, _ = self.scope.bind(entry.name, vs)
        else:
            self.scope = self.scope.define(entry.name, vs, m.eval(self.scope.env, entry.value))
        self.ctx = self.ctx + (entry,)

    @_guarded
    def normalize(self, t: Term) -> Term:
        m = self.machine
        return m.quote(self.scope.level, m.eval(self.scope.env, t))

    @_guarded
    def normalize_sort(self, s: Sort) -> Sort:
        m = self.machine
        return m.quote_sort(self.scope.level, m.eval_sort(self.scope.env, s))

    @_guarded
    def defeq(self, t: Term, u: Term) -> bool:
        return self.normalize(t) == self.normalize(u)

    @_guarded
    def defeq_sort(self, s: Sort, r: Sort) -> bool:
        return self.normalize_sort(s) == self.normalize_sort(r)


def check_context(ctx: Context, cfg: Optional[RuleSet] = None) -> None:
    Session(cfg or RuleSet.full(), ctx)


def infer(cfg: RuleSet, ctx: Context, t: Term) -> Sort:
    return Session(cfg, ctx).infer(t)


def check(cfg: RuleSet, ctx: Context, t: Term, s: Sort) -> None:
    Session(cfg, ctx).check(t, s)


def normalize(cfg: RuleSet, ctx: Context, t: Term, fuel: Optional[int] = None) -> Term:
    return Session(cfg, ctx, fuel, check=False).normalize(t)


def normalize_sort(cfg: RuleSet, ctx: Context, s: Sort, fuel: Optional[int] = None) -> Sort:
    return Session(cfg, ctx, fuel, check=False).normalize_sort(s)


def defeq(cfg: RuleSet, ctx: Context, t: Term, u: Term, sort: Optional[Sort] = None,
          fuel: Optional[int] = None) -> bool:
    """Definitional equality.  ``sort`` is accepted for symmetry with the judgement
    form but unused: framework eta is decided untyped, by eta-short read-back."""
    return Session(cfg, ctx, fuel, check=False).defeq(t, u)
