"""Core syntax: terms, sorts, contexts, rule sets and de Bruijn machinery.

All binders use de Bruijn indices, so two alpha-equivalent terms are the same
Python value.  Binder name hints are carried for printing only and never take
part in equality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union


class NegativeIndex(ValueError):
    """Raised when a shift would move a free index below zero."""


class Term:
    """Base class of framework- and object-level expressions."""

    __slots__ = ()


class Sort:
    """Base class of framework classifiers: ``type``, ``el A`` and ``(x:S)T``."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise NegativeIndex(f"negative de Bruijn index {self.index}")


@dataclass(frozen=True)
class Lam(Term):
    """Framework abstraction ``[x] body`` or, annotated, ``[x : dom] body``.

    The annotation only helps inference; it never takes part in equality.
    """

    body: Term
    hint: str = field(default="x", compare=False)
    dom: Optional["Sort"] = field(default=None, compare=False)


@dataclass(frozen=True)
class App(Term):
    """Framework application ``f(a)``."""

    fun: Term
    arg: Term


# Object-level constants of the fixed signature, with their arities.
SIGNATURE: dict[str, int] = {
    "Pi": 2,
    "lam": 1,
    "app": 2,
    "funsplit": 3,
    "eta": 1,
    "Id": 3,
    "refl": 1,
    "J": 5,
    "Sigma": 2,
    "pair": 2,
    "split": 3,
    "Zero": 0,
    "zeroElim": 2,
    "One": 0,
    "star": 0,
    "Sum": 2,
    "inl": 1,
    "inr": 1,
    "case": 4,
    "U": 0,
    "code0": 0,
    "code1": 0,
    "Decode": 1,
    "ext": 3,
    "L": 5,
}


@dataclass(frozen=True)
class Const(Term):
    """An object constant of the signature applied to its full argument list."""

    head: str
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        arity = SIGNATURE.get(self.head)
        if arity is None:
            raise ValueError(f"unknown constant {self.head!r}")
        if len(self.args) != arity:
            raise ValueError(f"{self.head} takes {arity} arguments, got {len(self.args)}")


@dataclass(frozen=True)
class TypeSort(Sort):
    pass


@dataclass(frozen=True)
class ElSort(Sort):
    type: Term


@dataclass(frozen=True)
class FunSort(Sort):
    """Framework function sort ``(x : dom) cod``; ``cod`` binds one variable."""

    dom: Sort
    cod: Sort
    hint: str = field(default="x", compare=False)


TYPE = TypeSort()


@dataclass(frozen=True)
class Entry:
    """A context entry.  ``value`` is set for definitions (let-bound names)."""

    name: str
    sort: Sort
    value: Optional[Term] = None


Context = tuple[Entry, ...]


def context(*entries: Union[Entry, tuple]) -> Context:
    return tuple(e if isinstance(e, Entry) else Entry(*e) for e in entries)


# -- convenience constructors -------------------------------------------------


def _c(head: str) -> Callable[..., Const]:
    def make(*args: Term) -> Const:
        return Const(head, tuple(args))

    make.__name__ = head
    return make


Pi = _c("Pi")
lam = _c("lam")
app = _c("app")
funsplit = _c("funsplit")
eta = _c("eta")
Id = _c("Id")
refl = _c("refl")
J = _c("J")
Sigma = _c("Sigma")
pair = _c("pair")
split = _c("split")
zeroElim = _c("zeroElim")
Sum = _c("Sum")
inl = _c("inl")
inr = _c("inr")
case = _c("case")
Decode = _c("Decode")
ext = _c("ext")
L = _c("L")

Zero = Const("Zero")
One = Const("One")
star = Const("star")
U = Const("U")
code0 = Const("code0")
code1 = Const("code1")


def apps(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


# -- rule sets ----------------------------------------------------------------


class PiMode(enum.Enum):
    APP_BETA = "app"
    FUNSPLIT = "funsplit"
    BOTH = "both"


# Constants whose typing and computation rules depend on the rule set.
GATED = {
    "app": "app",
    "funsplit": "funsplit",
    "eta": "eta",
    "ext": "ext",
    "L": "pid",
}

FEATURES = ("app", "funsplit", "eta", "ext", "pid")


class RuleSetError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSet:
    pi_mode: PiMode = PiMode.APP_BETA
    prop_eta_primitive: bool = False
    ext_primitive: bool = False
    pi_id_elim_primitive: bool = False

    def __post_init__(self):
        has_app = self.pi_mode in (PiMode.APP_BETA, PiMode.BOTH)
        for flag, label in (
            (self.prop_eta_primitive, "eta"),
            (self.ext_primitive, "ext"),
            (self.pi_id_elim_primitive, "pid"),
        ):
            if flag and not has_app:
                raise RuleSetError(f"'{label}' requires the app formulation of Pi")

    @property
    def features(self) -> frozenset[str]:
        out = set()
        if self.pi_mode in (PiMode.APP_BETA, PiMode.BOTH):
            out.add("app")
        if self.pi_mode in (PiMode.FUNSPLIT, PiMode.BOTH):
            out.add("funsplit")
        if self.prop_eta_primitive:
            out.add("eta")
        if self.ext_primitive:
            out.add("ext")
        if self.pi_id_elim_primitive:
            out.add("pid")
        return frozenset(out)

    def allows(self, head: str) -> bool:
        feature = GATED.get(head)
        return feature is None or feature in self.features

    @classmethod
    def of(cls, features) -> "RuleSet":
        fs = set(features)
        unknown = fs - set(FEATURES)
        if unknown:
            raise RuleSetError(f"unknown rule feature(s): {', '.join(sorted(unknown))}")
        if "app" in fs and "funsplit" in fs:
            mode = PiMode.BOTH
        elif "app" in fs:
            mode = PiMode.APP_BETA
        elif "funsplit" in fs:
            mode = PiMode.FUNSPLIT
        else:
            raise RuleSetError("a rule set needs 'app' or 'funsplit'")
        return cls(mode, "eta" in fs, "ext" in fs, "pid" in fs)

    @classmethod
    def parse(cls, spec: str) -> "RuleSet":
        """Parse ``app``, ``funsplit``, ``app+eta`` ... joined by commas."""
        fs: set[str] = set()
        for chunk in spec.split(","):
            chunk = chunk.strip()
            if not chunk:
                raise RuleSetError(f"empty item in rule spec {spec!r}")
            fs.update(p.strip() for p in chunk.split("+"))
        return cls.of(fs)

    @classmethod
    def full(cls) -> "RuleSet":
        return cls.of(FEATURES)

    def __le__(self, other: "RuleSet") -> bool:
        return self.features <= other.features

    def __lt__(self, other: "RuleSet") -> bool:
        return self.features < other.features

    def __str__(self) -> str:
        fs = self.features
        parts = []
        if "app" in fs:
            extras = [f"app+{e}" for e in ("eta", "ext", "pid") if e in fs]
            parts.extend(extras or ["app"])
        if "funsplit" in fs:
            parts.append("funsplit")
        return ",".join(parts)


APP = RuleSet(PiMode.APP_BETA)
FUNSPLIT = RuleSet(PiMode.FUNSPLIT)
BOTH = RuleSet(PiMode.BOTH)


def lattice() -> list[RuleSet]:
    """Every valid rule set, ordered by size then by canonical spelling."""
    out = []
    for mode in PiMode:
        for bits in range(8):
            flags = [bool(bits & 1), bool(bits & 2), bool(bits & 4)]
            try:
                out.append(RuleSet(mode, *flags))
            except RuleSetError:
                continue
    return sorted(out, key=lambda r: (len(r.features), str(r)))


# -- derivations --------------------------------------------------------------


@dataclass(frozen=True)
class CompEquality:
    """A computation equality ``lhs = rhs : sort`` claimed to hold definitionally."""

    label: str
    context: Context
    lhs: Term
    rhs: Term
    sort: Optional[Sort] = None


@dataclass(frozen=True)
class Derivation:
    name: str
    required: RuleSet
    context: Context
    term: Term
    sort: Sort
    comp_equalities: tuple[CompEquality, ...] = ()
    notes: tuple[str, ...] = ()


# -- traversal ----------------------------------------------------------------


def map_vars(t: Term, fn: Callable[[int, int], Term], depth: int = 0) -> Term:
    """Rebuild ``t`` replacing each ``Var(i)`` by ``fn(i, depth)``."""
    match t:
        case Var(i):
            return fn(i, depth)
        case Lam(body, hint, dom):
            new_dom = None if dom is None else map_vars_sort(dom, fn, depth)
            return Lam(map_vars(body, fn, depth + 1), hint, new_dom)
        case App(f, a):
            return App(map_vars(f, fn, depth), map_vars(a, fn, depth))
        case Const(head, args):
            if not args:
                return t
            return Const(head, tuple(map_vars(a, fn, depth) for a in args))
    raise TypeError(f"not a core term: {t!r}")


def map_vars_sort(s: Sort, fn: Callable[[int, int], Term], depth: int = 0) -> Sort:
    match s:
        case TypeSort():
            return s
        case ElSort(a):
            return ElSort(map_vars(a, fn, depth))
        case FunSort(dom, cod, hint):
            return FunSort(map_vars_sort(dom, fn, depth), map_vars_sort(cod, fn, depth + 1), hint)
    raise TypeError(f"not a core sort: {s!r}")


def shift(t: Term, amount: int, cutoff: int = 0) -> Term:
    """Move free indices ``>= cutoff`` by ``amount``."""
    if amount == 0:
        return t

    def go(i: int, depth: int) -> Term:
        if i < cutoff + depth:
            return Var(i)
        if i + amount < cutoff + depth:
            raise NegativeIndex(f"shifting Var {i} by {amount} escapes its binder")
        return Var(i + amount)

    return map_vars(t, go)


def shift_sort(s: Sort, amount: int, cutoff: int = 0) -> Sort:
    if amount == 0:
        return s

    def go(i: int, depth: int) -> Term:
        if i < cutoff + depth:
            return Var(i)
        if i + amount < cutoff + depth:
            raise NegativeIndex(f"shifting Var {i} by {amount} escapes its binder")
        return Var(i + amount)

    return map_vars_sort(s, go)


def _subst_fn(arg: Term) -> Callable[[int, int], Term]:
    def go(i: int, depth: int) -> Term:
        if i < depth:
            return Var(i)
        if i == depth:
            return shift(arg, depth)
        return Var(i - 1)

    return go


def instantiate(body: Term, arg: Term) -> Term:
    """Substitute ``arg`` for index 0 of ``body`` and lower the other free indices."""
    return map_vars(body, _subst_fn(arg))


def instantiate_sort(body: Sort, arg: Term) -> Sort:
    return map_vars_sort(body, _subst_fn(arg))


def free_vars(t: Term) -> set[int]:
    out: set[int] = set()

    def go(i: int, depth: int) -> Term:
        if i >= depth:
            out.add(i - depth)
        return Var(i)

    map_vars(t, go)
    return out


def free_vars_sort(s: Sort) -> set[int]:
    out: set[int] = set()

    def go(i: int, depth: int) -> Term:
        if i >= depth:
            out.add(i - depth)
        return Var(i)

    map_vars_sort(s, go)
    return out


def subterms(t: Term) -> Iterator[Term]:
    yield t
    match t:
        case Lam(body):
            yield from subterms(body)
        case App(f, a):
            yield from subterms(f)
            yield from subterms(a)
        case Const(_, args):
            for a in args:
                yield from subterms(a)


def heads(t: Term) -> set[str]:
    return {s.head for s in subterms(t) if isinstance(s, Const)}


def heads_sort(s: Sort) -> set[str]:
    match s:
        case TypeSort():
            return set()
        case ElSort(a):
            return heads(a)
        case FunSort(dom, cod):
            return heads_sort(dom) | heads_sort(cod)
    raise TypeError(f"not a core sort: {s!r}")


def size(t: Term) -> int:
    return sum(1 for _ in subterms(t))
