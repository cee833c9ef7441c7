"""Command line driver: ``check``, ``normalize``, ``eq`` and ``derive``.

Exit codes: 0 success, 1 a check or derivation failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .. import syntax as S
from ..derivations import Report, canonical_name, lookup, registry, verify
from ..kernel import FuelExhausted, Session, TypingError
from ..syntax import Derivation, Entry, Lam, RuleSet, RuleSetError, Sort, Term, lattice
from .parser import (
    AssumeDecl,
    DefDecl,
    Diagnostic,
    ParseError,
    TypeDecl,
    Parser,
    decl_entry,
    parse_with_spans,
)
from .pretty import Printer, fresh, pretty, pretty_sort

OK, FAILED, USAGE = 0, 1, 2


class Usage(Exception):
    """A usage problem reported as exit code 2."""


def _ruleset(spec: Optional[str], default: RuleSet) -> RuleSet:
    if spec is None:
        return default
    try:
        return RuleSet.parse(spec)
    except RuleSetError as e:
        raise Usage(str(e)) from None


def header_rules(source: str) -> Optional[str]:
    for line in source.splitlines():
        if not line.startswith("--"):
            break
        body = line[2:].strip()
        if body.startswith("rules:"):
            return body[len("rules:"):].strip()
    return None


# -- locating errors ------------------------------------------------------------


def _children(node) -> list:
    match node:
        case Lam(body, _, _):
            return [body]
        case S.App(f, a):
            return [f, a]
        case S.Const(_, args):
            return list(args)
        case S.ElSort(a):
            return [a]
        case S.FunSort(dom, cod, _):
            return [dom, cod]
    return []


def _binder(node, k: int) -> Optional[str]:
    match node:
        case Lam(_, hint, _):
            return hint
        case S.FunSort(_, _, hint) if k == 1:
            return hint
    return None


def locate(root, path: Sequence, spans: dict, names: Sequence[str]):
    """Source position and printing scope of the node at ``path`` below ``root``."""
    scope = list(names)
    pos = spans.get(id(root))
    node = root
    for k in path:
        kids = _children(node)
        if not isinstance(k, int) or k >= len(kids):
            break
        hint = _binder(node, k)
        if hint is not None:
            scope.append(fresh(hint, scope))
        node = kids[k]
        pos = spans.get(id(node), pos)
    return pos, scope


def _show(x, scope) -> Optional[str]:
    if x is None:
        return None
    p = Printer(scope)
    return p.sort(x) if isinstance(x, Sort) else p.term(x)


def typing_diagnostic(e: TypingError, root, decl, spans: dict, names, file: str) -> Diagnostic:
    path = e.location or ()
    pos, scope = locate(root, path, spans, names)
    line, col = pos or (decl.line, decl.column)
    return Diagnostic(
        f"{e.kind.value}: {e.message}",
        line,
        col,
        file,
        expected=_show(e.expected, scope),
        actual=_show(e.actual, scope),
    )


# -- checking files -------------------------------------------------------------


def check_decls(decls, spans, cfg: RuleSet, file: str, session: Optional[Session] = None):
    """Check declarations in order; returns (session, lines, diagnostics)."""
    session = session or Session(cfg)
    names = [e.name for e in session.ctx]
    lines, diags = [], []
    for d in decls:
        entry = decl_entry(d)
        root = None
        try:
            match d:
                case AssumeDecl(_, sort):
                    root = sort
                    session.check_sort(sort)
                case DefDecl(_, None, body):
                    root = body
                    entry = Entry(d.name, session.infer(body), body)
                case DefDecl(_, ascription, None):
                    root = ascription
                    session.check_sort(ascription)
                    diags.append(Diagnostic(f"definition {d.name!r} has no body", d.line, d.column, file))
                    break
                case DefDecl(_, ascription, body):
                    root = ascription
                    session.check_sort(ascription)
                    root = body
                    session.check(body, ascription)
                case TypeDecl():
                    root = d.sort
                    session.check_sort(d.sort)
                    root = d.value
                    session.check(d.value, d.sort)
        except TypingError as e:
            diags.append(typing_diagnostic(e, root, d, spans, names, file))
            break
        except FuelExhausted as e:
            diags.append(Diagnostic(f"FuelExhausted: {e}", d.line, d.column, file))
            break
        session.push(entry)
        lines.append(f"{d.name} : {pretty_sort(entry.sort, names)}")
        names.append(d.name)
    return session, lines, diags


def parse_expr(source: str, names: Sequence[str]):
    p = Parser(source, "<expr>", tuple(names))
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t, p.spans


def expr_diagnostic(e: Exception, t: Term, spans: dict, names) -> Diagnostic:
    if isinstance(e, TypingError):
        pos, scope = locate(t, e.location or (), spans, names)
        line, col = pos or (1, 1)
        return Diagnostic(
            f"{e.kind.value}: {e.message}", line, col, "<expr>",
            expected=_show(e.expected, scope), actual=_show(e.actual, scope),
        )
    return Diagnostic(f"FuelExhausted: {e}", 1, 1, "<expr>")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise Usage(f"cannot read {path}: {e.strerror}") from None


def _load(path: str, cfg: RuleSet):
    source = _read(path)
    decls, spans = parse_with_spans(source, path)
    return check_decls(decls, spans, cfg, path)


def _report_diags(diags, as_json: bool, out, err):
    for d in diags:
        if as_json:
            print(json.dumps(d.to_json(), ensure_ascii=False, sort_keys=True), file=out)
        else:
            print(d, file=err)


def cmd_check(args, out, err) -> int:
    source = _read(args.file)
    cfg = _ruleset(args.rules or header_rules(source), RuleSet.full())
    decls, spans = parse_with_spans(source, args.file)
    _, lines, diags = check_decls(decls, spans, cfg, args.file)
    if not args.json:
        for line in lines:
            print(line, file=out)
    _report_diags(diags, args.json, out, err)
    if not diags and not args.json:
        print(f"ok: {len(lines)} declaration(s) under {cfg}", file=out)
    return FAILED if diags else OK


def _context_session(args, cfg: RuleSet, out, err):
    if not args.context:
        return Session(cfg), None
    session, _, diags = _load(args.context, cfg)
    return session, diags


def cmd_normalize(args, out, err) -> int:
    cfg = _ruleset(args.rules, RuleSet.full())
    session, diags = _context_session(args, cfg, out, err)
    if diags:
        _report_diags(diags, args.json, out, err)
        return FAILED
    names = tuple(e.name for e in session.ctx)
    t, spans = parse_expr(args.expr, names)
    try:
        sort = session.infer(t)
        nf = session.normalize(t)
    except (TypingError, FuelExhausted) as e:
        _report_diags([expr_diagnostic(e, t, spans, names)], args.json, out, err)
        return FAILED
    if args.json:
        record = {"term": pretty(nf, names), "sort": pretty_sort(session.normalize_sort(sort), names)}
        print(json.dumps(record, ensure_ascii=False, sort_keys=True), file=out)
    else:
        print(pretty(nf, names), file=out)
    return OK


def cmd_eq(args, out, err) -> int:
    if len(args.expr) != 2:
        raise Usage("eq needs exactly two -e expressions")
    cfg = _ruleset(args.rules, RuleSet.full())
    session, diags = _context_session(args, cfg, out, err)
    if diags:
        _report_diags(diags, False, out, err)
        return FAILED
    names = tuple(e.name for e in session.ctx)
    parsed = [parse_expr(e, names) for e in args.expr]
    sorts = []
    for t, spans in parsed:
        try:
            sorts.append(session.infer(t))
        except (TypingError, FuelExhausted) as e:
            print(expr_diagnostic(e, t, spans, names), file=err)
            return FAILED
    (t, _), (u, _) = parsed
    st, su = sorts
    try:
        if not session.defeq_sort(st, su):
            print(f"not equal: sorts differ ({pretty_sort(st, names)} vs {pretty_sort(su, names)})", file=out)
            return FAILED
        equal = session.defeq(t, u)
    except FuelExhausted as e:
        print(Diagnostic(f"FuelExhausted: {e}", 1, 1, "<expr>"), file=err)
        return FAILED
    print("equal" if equal else "not equal", file=out)
    return OK if equal else FAILED


# -- derivations ------------------------------------------------------------------


def _context_names(ctx) -> list[str]:
    names: list[str] = []
    for e in ctx:
        names.append(fresh(e.name, names))
    return names


def emit(d: Derivation) -> str:
    """A checkable ``.mltt`` file holding the context and the derived term."""
    names = _context_names(d.context)
    lines = [f"-- rules: {d.required}", f"-- derivation: {d.name}", ""]
    for i, e in enumerate(d.context):
        scope = names[:i]
        if e.value is None:
            lines.append(f"assume {names[i]} : {pretty_sort(e.sort, scope)}")
        else:
            lines.append(f"def {names[i]} : {pretty_sort(e.sort, scope)}\n  := {pretty(e.value, scope)}")
        lines.append("")
    main = fresh(d.name.replace("-", "_"), names)
    lines.append(f"def {main} : {pretty_sort(d.sort, names)}\n  := {pretty(d.term, names)}")
    return "\n".join(lines) + "\n"


def report_record(r: Report, full: bool = True) -> dict:
    record = {"name": r.name, "ruleset": str(r.ruleset), "status": r.status}
    if full:
        names = _context_names(r.derivation.context)
        record["term"] = pretty(r.derivation.term, names)
        record["sort"] = pretty_sort(r.derivation.sort, names)
    checks = []
    for c in r.comp_checks:
        names = _context_names(c.context)
        checks.append({"label": c.label, "lhs": pretty(c.lhs, names), "rhs": pretty(c.rhs, names), "status": c.status})
    record["comp_checks"] = checks
    if r.error is not None:
        record["message"] = str(getattr(r.error, "message", r.error))
    return record


def _build(name: str) -> Derivation:
    try:
        return lookup(name)()
    except KeyError:
        raise Usage(f"unknown derivation {name!r}; known: {', '.join(sorted(registry()))}") from None


def cmd_derive(args, out, err) -> int:
    if args.all:
        if args.name:
            raise Usage("derive takes either a name or --all")
        return derive_all(args, out)
    if not args.name:
        raise Usage("derive needs a derivation name or --all")
    d = _build(args.name)
    report = verify(d, _ruleset(args.rules, d.required))
    if args.json:
        print(json.dumps(report_record(report), ensure_ascii=False, sort_keys=True), file=out)
    else:
        print(f"{canonical_name(args.name)} [{report.ruleset}]: {report.status}", file=out)
        if report.error is not None:
            print(f"  {getattr(report.error, 'message', report.error)}", file=out)
        for c in report.comp_checks:
            print(f"  {c.label}: {c.status}", file=out)
        if args.emit:
            print(emit(d), end="", file=out)
    return OK if report.ok else FAILED


def expected_status(d: Derivation, cfg: RuleSet) -> str:
    return "ok" if d.required <= cfg else "RuleNotEnabled"


def derive_all(args, out) -> int:
    columns = lattice()
    good = True
    rows = []
    for name in registry():
        d = _build(name)
        cells = {str(cfg): verify(d, cfg) for cfg in columns}
        row_ok = all(r.status == expected_status(d, cfg) for cfg, r in zip(columns, cells.values()))
        good &= row_ok
        rows.append((name, d, cells, row_ok))
    if args.json:
        for name, d, cells, row_ok in rows:
            record = report_record(cells[str(d.required)] if str(d.required) in cells else verify(d), full=False)
            record["matrix"] = {k: r.status for k, r in cells.items()}
            record["matches_lattice"] = row_ok
            print(json.dumps(record, ensure_ascii=False, sort_keys=True), file=out)
    else:
        for k, cfg in enumerate(columns):
            print(f"[{k:2}] {cfg}", file=out)
        width = max(len(n) for n, *_ in rows)
        print(" " * width + " " + " ".join(f"{k:2}" for k in range(len(columns))), file=out)
        for name, d, cells, row_ok in rows:
            marks = []
            for cfg in columns:
                r = cells[str(cfg)]
                if r.status != expected_status(d, cfg):
                    marks.append("!!")
                else:
                    marks.append("ok" if r.ok else " -")
            print(f"{name:<{width}} " + " ".join(marks) + ("" if row_ok else "  MISMATCH"), file=out)
        print("ok = checks, - = RuleNotEnabled, !! = unexpected status", file=out)
    return OK if good else FAILED


# -- entry point ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise Usage(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mltt", description="Kernel checker for a two-layer intensional type theory.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="check a .mltt file")
    c.add_argument("file")
    c.add_argument("--rules", help="rule set; defaults to the file's '-- rules:' header, else all rules")
    c.add_argument("--json", action="store_true")
    c.set_defaults(run=cmd_check)

    n = sub.add_parser("normalize", help="print the normal form of an expression")
    n.add_argument("-e", "--expr", required=True)
    n.add_argument("--rules")
    n.add_argument("--context", help="a .mltt file whose declarations are in scope")
    n.add_argument("--json", action="store_true")
    n.set_defaults(run=cmd_normalize)

    q = sub.add_parser("eq", help="decide definitional equality of two expressions")
    q.add_argument("-e", "--expr", action="append", default=[])
    q.add_argument("--rules")
    q.add_argument("--context")
    q.set_defaults(run=cmd_eq)

    d = sub.add_parser("derive", help="build and kernel-check registered derivations")
    d.add_argument("name", nargs="?")
    d.add_argument("--rules")
    d.add_argument("--all", action="store_true")
    d.add_argument("--emit", action="store_true", help="print the derivation as a .mltt file")
    d.add_argument("--json", action="store_true")
    d.set_defaults(run=cmd_derive)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.run(args, out, err)
    except Usage as e:
        print(f"mltt: {e}", file=err)
        return USAGE
    except ParseError as e:
        print(e.diagnostic, file=err)
        return USAGE
    except SystemExit as e:  # --help
        return e.code if isinstance(e.code, int) else USAGE


if __name__ == "__main__":
    sys.exit(main())
