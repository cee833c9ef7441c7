"""Named construction of core terms.

Writing derivations directly with de Bruijn indices is error prone, so terms
are assembled here with unique :class:`Name` placeholders and higher-order
binders (``flam("x", lambda x: ...)``), then closed into index form with
:func:`close`.  Names compare by identity, so capture is impossible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .syntax import (
    App,
    Const,
    Context,
    ElSort,
    Entry,
    FunSort,
    Lam,
    Sort,
    Term,
    TypeSort,
    Var,
)

_uids = itertools.count()


@dataclass(frozen=True, eq=False)
class Name(Term):
    hint: str
    uid: int = field(default_factory=lambda: next(_uids))

    def __repr__(self):
        return f"{self.hint}#{self.uid}"


@dataclass(frozen=True, eq=False)
class Bind(Term):
    name: Name
    body: Term


@dataclass(frozen=True, eq=False)
class BindSort(Sort):
    name: Name
    dom: Sort
    cod: Sort


def flam(hint: str, fn: Callable[[Name], Term]) -> Term:
    """Framework abstraction built from a Python function of the bound name."""
    n = Name(hint)
    return Bind(n, fn(n))


def flam2(h1: str, h2: str, fn: Callable[[Name, Name], Term]) -> Term:
    return flam(h1, lambda a: flam(h2, lambda b: fn(a, b)))


def flam3(h1: str, h2: str, h3: str, fn: Callable[[Name, Name, Name], Term]) -> Term:
    return flam(h1, lambda a: flam(h2, lambda b: flam(h3, lambda c: fn(a, b, c))))


def fun(hint: str, dom: Sort, fn: Callable[[Name], Sort]) -> Sort:
    n = Name(hint)
    return BindSort(n, dom, fn(n))


def arrow(dom: Sort, cod: Sort) -> Sort:
    return fun("_", dom, lambda _: cod)


def const_fam(body: Term) -> Term:
    """The framework function ``[_] body`` ignoring its argument."""
    return flam("_", lambda _: body)


def close(t: Term, scope: Sequence[Name] = ()) -> Term:
    """Convert names to de Bruijn indices; ``scope`` lists the context, outermost first."""
    levels = {n: i for i, n in enumerate(scope)}
    return _close(t, levels, len(scope), 0)


def close_sort(s: Sort, scope: Sequence[Name] = ()) -> Sort:
    levels = {n: i for i, n in enumerate(scope)}
    return _close_sort(s, levels, len(scope), 0)


def _close(t: Term, levels: dict, depth: int, inner: int) -> Term:
    match t:
        case Name():
            if t not in levels:
                raise ValueError(f"name {t!r} escapes its scope")
            return Var(depth - 1 - levels[t])
        case Bind(n, body):
            return Lam(_close(body, {**levels, n: depth}, depth + 1, inner), n.hint)
        case Var(i):
            if i >= inner:
                raise ValueError("raw free index inside a named term")
            return t
        case Lam(body, hint, dom):
            new_dom = None if dom is None else _close_sort(dom, levels, depth, inner)
            return Lam(_close(body, levels, depth + 1, inner + 1), hint, new_dom)
        case App(f, a):
            return App(_close(f, levels, depth, inner), _close(a, levels, depth, inner))
        case Const(head, args):
            if not args:
                return t
            return Const(head, tuple(_close(a, levels, depth, inner) for a in args))
    raise TypeError(f"unexpected node {t!r}")


def _close_sort(s: Sort, levels: dict, depth: int, inner: int) -> Sort:
    match s:
        case TypeSort():
            return s
        case ElSort(a):
            return ElSort(_close(a, levels, depth, inner))
        case BindSort(n, dom, cod):
            return FunSort(
                _close_sort(dom, levels, depth, inner),
                _close_sort(cod, {**levels, n: depth}, depth + 1, inner),
                n.hint,
            )
        case FunSort(dom, cod, hint):
            return FunSort(
                _close_sort(dom, levels, depth, inner),
                _close_sort(cod, levels, depth + 1, inner + 1),
                hint,
            )
    raise TypeError(f"unexpected sort {s!r}")


class Telescope:
    """An ordered list of named hypotheses that closes into a core context."""

    def __init__(self):
        self.names: list[Name] = []
        self.sorts: list[Sort] = []
        self.values: list = []

    def assume(self, hint: str, sort: Sort) -> Name:
        n = Name(hint)
        self.sorts.append(sort)
        self.names.append(n)
        self.values.append(None)
        return n

    def define(self, hint: str, sort: Sort, value: Term) -> Name:
        """A let-bound entry: a variable of known sort that unfolds to ``value``."""
        n = self.assume(hint, sort)
        self.values[-1] = value
        return n

    def context(self) -> Context:
        return tuple(
            Entry(
                n.hint,
                close_sort(s, self.names[:i]),
                None if v is None else close(v, self.names[:i]),
            )
            for i, (n, s, v) in enumerate(zip(self.names, self.sorts, self.values))
        )

    def close(self, t: Term) -> Term:
        return close(t, self.names)

    def close_sort(self, s: Sort) -> Sort:
        return close_sort(s, self.names)


def template(hints: Sequence[str], fn: Callable[..., Term]) -> Term:
    """A term over an environment of ``len(hints)`` values (last hint = index 0)."""
    names = [Name(h) for h in hints]
    return close(fn(*names), names)


def sort_template(hints: Sequence[str], fn: Callable[..., Sort]) -> Sort:
    names = [Name(h) for h in hints]
    return close_sort(fn(*names), names)


def El(t: Term) -> Sort:
    return ElSort(t)


def substitute(t: Term, name: Name, value: Term) -> Term:
    """Replace ``name`` by ``value``.  Names are unique, so nothing is captured."""
    match t:
        case Name():
            return value if t is name else t
        case Bind(n, body):
            return Bind(n, substitute(body, name, value))
        case Var():
            return t
        case Lam(body, hint, dom):
            return Lam(substitute(body, name, value), hint, dom)
        case App(f, a):
            return App(substitute(f, name, value), substitute(a, name, value))
        case Const(head, args):
            if not args:
                return t
            return Const(head, tuple(substitute(a, name, value) for a in args))
    raise TypeError(f"unexpected node {t!r}")


def call(f: Term, *args: Term) -> Term:
    """Framework application, contracting the redex when ``f`` is a binder."""
    for a in args:
        f = substitute(f.body, f.name, a) if isinstance(f, Bind) else App(f, a)
    return f
