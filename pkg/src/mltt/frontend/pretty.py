"""Printing core terms back into the surface syntax.

Binder names are taken from the hints stored on the terms, renamed when
they would shadow a name already in scope or collide with a keyword, so
the output always re-parses to the same de Bruijn term.
"""

from __future__ import annotations

from typing import Sequence

from ..syntax import App, Const, ElSort, FunSort, Lam, Sort, Term, TypeSort, Var, free_vars_sort
from .parser import (
    ARROW_BINDER,
    IDENT,
    KEYWORDS,
    SURFACE,
    AssumeDecl,
    DefDecl,
    SurfaceDecl,
    TypeDecl,
    parse,
)

# LOOSE extends to the closing delimiter; DOTL is the left operand of ·
LOOSE, DOTL, ARG, ATOM = 0, 1, 2, 3
DOT = "·"


def fresh(hint: str, scope: Sequence[str]) -> str:
    base = hint if IDENT.match(hint or "") and hint not in KEYWORDS else "x"
    if base not in scope:
        return base
    stem = base.rstrip("0123456789") or "x"
    k = 1
    while f"{stem}{k}" in scope or f"{stem}{k}" in KEYWORDS:
        k += 1
    return f"{stem}{k}"


def _paren(text: str, wrap: bool) -> str:
    return f"({text})" if wrap else text


class Printer:
    def __init__(self, names: Sequence[str] = ()):
        self.scope = list(names)

    def name_of(self, index: int) -> str:
        if index >= len(self.scope):
            return f"#{index}"
        return self.scope[len(self.scope) - 1 - index]

    def under(self, name: str, fn):
        self.scope.append(name)
        try:
            return fn()
        finally:
            self.scope.pop()

    # -- terms

    def term(self, t: Term, prec: int = LOOSE, tail: bool = False) -> str:
        # binder forms print bare at the loosest level or when nothing follows
        open_binder = prec == LOOSE or (prec == ARG and tail)
        match t:
            case Var(i):
                return self.name_of(i)
            case Lam():
                return _paren(self.framework_lam(t), not open_binder)
            case Const("lam", (Lam(_, _, None),)):
                return _paren(self.object_lam(t), not open_binder)
            case Const(("Pi" | "Sigma") as head, (dom, Lam(body, hint, None))):
                x = fresh(hint, self.scope)
                inner = self.under(x, lambda: self.term(body))
                text = f"{head} ({x} : {self.term(dom)}) {inner}"
                return _paren(text, not open_binder)
            case Const("app", (m, a)):
                return _paren(f"{self.term(m, DOTL)} {DOT} {self.term(a, ATOM)}", prec >= ARG)
            case Const(head, ()):
                return SURFACE[head]
            case Const(head, args):
                parts = [SURFACE[head]]
                for k, a in enumerate(args):
                    parts.append(self.term(a, ARG, tail=prec == LOOSE and k == len(args) - 1))
                return _paren(" ".join(parts), prec != LOOSE)
            case App():
                spine = []
                while isinstance(t, App):
                    spine.append(t.arg)
                    t = t.fun
                spine.reverse()
                head = self.term(t, DOTL if _is_dot_or_atom(t) else ATOM)
                parts = [head]
                for k, a in enumerate(spine):
                    parts.append(self.term(a, ARG, tail=prec == LOOSE and k == len(spine) - 1))
                return _paren(" ".join(parts), prec != LOOSE)
        raise TypeError(f"not a term: {t!r}")

    def framework_lam(self, t: Lam) -> str:
        if t.dom is not None:
            dom = self.sort(t.dom)
            x = fresh(t.hint, self.scope)
            return self.under(x, lambda: f"[{x} : {dom}] {self.term(t.body)}")
        names = []
        depth = len(self.scope)
        while isinstance(t, Lam) and t.dom is None:
            x = fresh(t.hint, self.scope)
            names.append(x)
            self.scope.append(x)
            t = t.body
        try:
            return f"[{' '.join(names)}] {self.term(t)}"
        finally:
            del self.scope[depth:]

    def object_lam(self, t: Term) -> str:
        names = []
        depth = len(self.scope)
        while isinstance(t, Const) and t.head == "lam" and isinstance(t.args[0], Lam) and t.args[0].dom is None:
            x = fresh(t.args[0].hint, self.scope)
            names.append(x)
            self.scope.append(x)
            t = t.args[0].body
        try:
            return f"λ {' '.join(names)}. {self.term(t)}"
        finally:
            del self.scope[depth:]

    # -- sorts

    def sort(self, s: Sort, atom: bool = False) -> str:
        match s:
            case TypeSort():
                return "Type"
            case ElSort(a):
                return f"El {self.term(a, ARG)}"
            case FunSort(dom, cod, hint):
                left = self.sort(dom, atom=True)
                if 0 not in free_vars_sort(cod):
                    right = self.under(ARROW_BINDER, lambda: self.sort(cod))
                    return _paren(f"{left} -> {right}", atom)
                x = fresh(hint, self.scope)
                right = self.under(x, lambda: self.sort(cod))
                return _paren(f"({x} : {self.sort(dom)}) {right}", atom)
        raise TypeError(f"not a sort: {s!r}")


def _is_dot_or_atom(t: Term) -> bool:
    match t:
        case Var():
            return True
        case Const("app", _):
            return True
        case Const(head, ()):
            return True
    return False


def pretty(t: Term, names: Sequence[str] = ()) -> str:
    return Printer(names).term(t)


def pretty_sort(s: Sort, names: Sequence[str] = ()) -> str:
    return Printer(names).sort(s)


# -- declarations and files ---------------------------------------------------


def pretty_decl(d: SurfaceDecl, names: Sequence[str] = ()) -> str:
    p = Printer(names)
    match d:
        case AssumeDecl(name, sort):
            return f"assume {name} : {p.sort(sort)}"
        case DefDecl(name, ascription, body):
            out = f"def {name}"
            if ascription is not None:
                out += f" : {p.sort(ascription)}"
            if body is not None:
                out += f"\n  := {p.term(body)}"
            return out
        case TypeDecl(name, params, body):
            groups = []
            depth = len(p.scope)
            for x, s in params:
                x = fresh(x, p.scope)
                groups.append(f"({x} : {p.sort(s)})")
                p.scope.append(x)
            try:
                head = " ".join([f"type {name}", *groups])
                return f"{head} := {p.term(body)}"
            finally:
                del p.scope[depth:]
    raise TypeError(d)


def pretty_decls(decls: Sequence[SurfaceDecl]) -> str:
    names: list[str] = []
    blocks = []
    for d in decls:
        blocks.append(pretty_decl(d, names))
        names.append(d.name)
    return "\n\n".join(blocks) + "\n" if blocks else ""


def header(source: str) -> list[str]:
    """The leading comment lines of a file, kept verbatim by the formatter."""
    out = []
    for line in source.splitlines():
        if line.startswith("--"):
            out.append(line.rstrip())
        elif line.strip():
            break
    return out


def format_source(source: str, file: str = "<input>") -> str:
    decls = parse(source, file)
    if not isinstance(decls, list):
        raise ValueError(str(decls))
    lines = header(source)
    body = pretty_decls(decls)
    if lines and body:
        return "\n".join(lines) + "\n\n" + body
    return "\n".join(lines) + "\n" if lines else body
