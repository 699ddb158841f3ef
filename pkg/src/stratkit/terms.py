"""Terms, patterns, and many-sorted signatures.

Terms are immutable rose trees of constructor applications with literal
leaves for primitive payloads (ints, floats, strings). Every operation
here is iterative where it walks a term: the engine guarantees terms of
depth 100k+ work, and CPython's recursion limit would kill a recursive
equality or tally long before that.

Nodes precompute their hash and depth at construction. Construction is
bottom-up (children exist before the parent), so both are O(1) per node
and never recurse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

from .errors import SignatureError, TermError

Sort = str

#: primitive kind name -> accepted Python payload type
PRIM_KINDS = {"int": int, "float": float, "string": str}


class Term:
    """Base class; instances are Node or Lit. Treated as immutable."""

    __slots__ = ()

    # Uniform child access; Node overrides with an instance slot.
    children: tuple = ()
    depth: int = 1

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        if self._hash != other._hash:
            return False
        return term_eq(self, other)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return self._hash


class Node(Term):
    """A constructor applied to zero or more child terms."""

    __slots__ = ("constr", "children", "depth", "_hash")

    def __init__(self, constr: str, children=()):
        # Rule appliers construct millions of nodes per run, mostly of
        # arity one, so this is written as a single pass with a fast
        # path rather than genexprs.
        if type(children) is not tuple:
            children = tuple(children)
        self.constr = constr
        self.children = children
        n = len(children)
        if n == 1:
            c = children[0]
            self.depth = 1 + c.depth
            self._hash = hash((constr, c._hash))
        elif n == 0:
            self.depth = 1
            self._hash = hash((constr,))
        else:
            best = 0
            hs = [constr]
            for c in children:
                if c.depth > best:
                    best = c.depth
                hs.append(c._hash)
            self.depth = 1 + best
            self._hash = hash(tuple(hs))

    def __repr__(self):
        from .files import term_to_sexpr

        return term_to_sexpr(self)


class Lit(Term):
    """A primitive payload tagged with its declared sort."""

    __slots__ = ("value", "sort", "_hash")

    def __init__(self, value: Union[int, float, str], sort: Sort):
        self.value = value
        self.sort = sort
        self._hash = hash(("lit", type(value).__name__, value, sort))

    def __repr__(self):
        from .files import term_to_sexpr

        return term_to_sexpr(self)


def term_eq(a: Term, b: Term) -> bool:
    """Structural equality, iterative. Literal kinds are strict: 1 != 1.0."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if isinstance(x, Lit):
            if (
                not isinstance(y, Lit)
                or x.sort != y.sort
                or type(x.value) is not type(y.value)
                or x.value != y.value
            ):
                return False
        elif isinstance(y, Lit):
            return False
        else:
            if x.constr != y.constr or len(x.children) != len(y.children):
                return False
            stack.extend(zip(x.children, y.children))
    return True


def depth(t: Term) -> int:
    """1 for leaves, 1 + max child depth otherwise."""
    return t.depth


def count(constr: str, t: Term) -> int:
    """Number of Node occurrences with the given constructor."""
    n = 0
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Node):
            if x.constr == constr:
                n += 1
            stack.extend(x.children)
    return n


def subterms(t: Term) -> Iterator[Term]:
    """All subterms including t itself, preorder, left to right."""
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.children))


def is_constant(t: Term) -> bool:
    """True for terms with no subterms (literals and nullary nodes)."""
    return not t.children


# ---------------------------------------------------------------------------
# Patterns and substitution


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PNode:
    constr: str
    children: tuple = ()


@dataclass(frozen=True)
class PLit:
    value: Union[int, float, str]
    sort: Sort


Pattern = Union[PVar, PNode, PLit]

Substitution = Mapping[str, Term]


def pattern_vars(p: Pattern) -> set[str]:
    out: set[str] = set()
    stack = [p]
    while stack:
        x = stack.pop()
        if isinstance(x, PVar):
            out.add(x.name)
        elif isinstance(x, PNode):
            stack.extend(x.children)
    return out


def match(p: Pattern, t: Term) -> Optional[dict[str, Term]]:
    """The unique substitution with p[theta] == t, or None.

    Repeated variables are allowed and require structurally equal
    bindings. Literal patterns match by exact payload, kind, and sort.
    """
    binding: dict[str, Term] = {}
    stack = [(p, t)]
    while stack:
        pp, tt = stack.pop()
        if isinstance(pp, PVar):
            seen = binding.get(pp.name)
            if seen is None:
                binding[pp.name] = tt
            elif not term_eq(seen, tt):
                return None
        elif isinstance(pp, PLit):
            if (
                not isinstance(tt, Lit)
                or tt.sort != pp.sort
                or type(tt.value) is not type(pp.value)
                or tt.value != pp.value
            ):
                return None
        else:
            if (
                not isinstance(tt, Node)
                or tt.constr != pp.constr
                or len(tt.children) != len(pp.children)
            ):
                return None
            stack.extend(zip(pp.children, tt.children))
    return binding


def instantiate(p: Pattern, subst: Substitution) -> Term:
    """Replace every variable of p by its binding. Patterns are shallow
    (they come from rule files), so recursion is fine here."""
    if isinstance(p, PVar):
        try:
            return subst[p.name]
        except KeyError:
            raise TermError(f"unbound pattern variable {p.name!r}") from None
    if isinstance(p, PLit):
        return Lit(p.value, p.sort)
    return Node(p.constr, tuple(instantiate(c, subst) for c in p.children))


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class Symbol:
    constr: str
    arg_sorts: tuple[Sort, ...]
    result_sort: Sort


class Signature:
    """A many-sorted constructor algebra.

    Immutable after construction. Symbols are indexed by constructor and
    by result sort; arg_sorts_of_sort is precomputed since the
    reachability analysis hits it in a fixpoint loop.
    """

    def __init__(
        self,
        sorts,
        symbols,
        prim_sorts: Mapping[Sort, str] | None = None,
    ):
        self.sorts = frozenset(sorts)
        self.prim_sorts = dict(prim_sorts or {})
        self.symbols = tuple(symbols)
        self.by_constr: dict[str, Symbol] = {}
        by_result: dict[Sort, list[Symbol]] = {}

        for sort, kind in self.prim_sorts.items():
            if sort not in self.sorts:
                raise SignatureError(f"primitive sort {sort!r} is not declared")
            if kind not in PRIM_KINDS:
                raise SignatureError(f"unknown primitive kind {kind!r} for sort {sort!r}")
        for sym in self.symbols:
            if sym.constr in self.by_constr:
                raise SignatureError(f"constructor {sym.constr!r} declared twice")
            for s in sym.arg_sorts + (sym.result_sort,):
                if s not in self.sorts:
                    raise SignatureError(
                        f"constructor {sym.constr!r} mentions undeclared sort {s!r}"
                    )
            if sym.result_sort in self.prim_sorts:
                raise SignatureError(
                    f"constructor {sym.constr!r} targets primitive sort {sym.result_sort!r}"
                )
            self.by_constr[sym.constr] = sym
            by_result.setdefault(sym.result_sort, []).append(sym)

        self.by_result = {s: tuple(v) for s, v in by_result.items()}
        self._arg_sorts: dict[Sort, frozenset[Sort]] = {}
        for s in self.sorts:
            acc: set[Sort] = set()
            for sym in self.by_result.get(s, ()):
                acc.update(sym.arg_sorts)
            self._arg_sorts[s] = frozenset(acc)
        #: constructor -> result sort, for the interpreter's hot path
        self.constr_sort = {c: sym.result_sort for c, sym in self.by_constr.items()}

    def symbol(self, constr: str) -> Symbol:
        try:
            return self.by_constr[constr]
        except KeyError:
            raise SignatureError(f"unknown constructor {constr!r}") from None

    def arg_sorts_of_sort(self, sort: Sort) -> frozenset[Sort]:
        """Union of argument sorts over all constructors of `sort`; empty
        for primitive sorts."""
        try:
            return self._arg_sorts[sort]
        except KeyError:
            raise SignatureError(f"unknown sort {sort!r}") from None


def sort_of(sig: Signature, t: Term) -> Sort:
    """Result sort of the root constructor, or the literal's tag."""
    if isinstance(t, Lit):
        return t.sort
    return sig.symbol(t.constr).result_sort


def validate_term(sig: Signature, t: Term) -> None:
    """Raise TermError at the first ill-formed node (preorder), naming
    its path as child indices from the root."""
    stack: list[tuple[Term, tuple[int, ...]]] = [(t, ())]
    while stack:
        x, path = stack.pop()
        where = "/".join(map(str, path)) or "root"
        if isinstance(x, Lit):
            kind = sig.prim_sorts.get(x.sort)
            if kind is None:
                raise TermError(f"at {where}: {x.sort!r} is not a primitive sort")
            if type(x.value) is not PRIM_KINDS[kind]:
                raise TermError(
                    f"at {where}: literal {x.value!r} is not of kind {kind!r}"
                )
            continue
        sym = sig.by_constr.get(x.constr)
        if sym is None:
            raise TermError(f"at {where}: unknown constructor {x.constr!r}")
        if len(x.children) != len(sym.arg_sorts):
            raise TermError(
                f"at {where}: {x.constr!r} expects {len(sym.arg_sorts)} children, "
                f"got {len(x.children)}"
            )
        for i in range(len(x.children) - 1, -1, -1):
            c = x.children[i]
            got = c.sort if isinstance(c, Lit) else None
            if got is None:
                csym = sig.by_constr.get(c.constr)
                got = csym.result_sort if csym else None
            if got is not None and got != sym.arg_sorts[i]:
                raise TermError(
                    f"at {where}: child {i} of {x.constr!r} has sort {got!r}, "
                    f"expected {sym.arg_sorts[i]!r}"
                )
            stack.append((c, path + (i,)))
