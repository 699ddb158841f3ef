"""Strategy expressions, rewrite rules, and traversal scheme builders.

The core language is deliberately small: identity, failure, sequential
composition, left-biased choice, the two child combinators, and binding
recursion. Everything else (top-down, bottom-up, once, repeat, ...) is a
derived form built here by macro expansion, so the interpreter and the
static analyses only ever see the eight core constructs plus rule
application.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import StratkitError
from .terms import Lit, Node, Pattern, Signature, Term, instantiate, match, sort_of

# ---------------------------------------------------------------------------
# Rules


@dataclass(frozen=True)
class RuleDef:
    """A named rewrite rule on a single sort.

    `guard` names a predicate from GUARDS applied to the whole matched
    term; `infallible` and `effect_claim` are programmer annotations
    that the analyses may check but the interpreter ignores.
    """

    name: str
    sort: str
    lhs: Pattern
    rhs: Pattern
    guard: Optional[str] = None
    infallible: bool = False
    effect_claim: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class RuleChoice:
    """Left-biased alternative of same-sort rules, applied as one rule."""

    members: tuple

    @property
    def name(self) -> str:
        return "rule_choice(" + ",".join(m.name for m in self.members) + ")"

    @property
    def sort(self) -> str:
        return self.members[0].sort


@dataclass(frozen=True)
class RuleSeq:
    """Pipeline of same-sort rules; fails unless every stage applies."""

    members: tuple

    @property
    def name(self) -> str:
        return "rule_seq(" + ",".join(m.name for m in self.members) + ")"

    @property
    def sort(self) -> str:
        return self.members[0].sort


Rule = Union[RuleDef, RuleChoice, RuleSeq]


def _check_same_sort(kind: str, members: tuple) -> None:
    if len(members) < 2:
        raise StratkitError(f"{kind} needs at least two rules")
    first = members[0].sort
    for m in members[1:]:
        if m.sort != first:
            raise StratkitError(
                f"{kind} mixes sorts: {members[0].name} is on {first!r} "
                f"but {m.name} is on {m.sort!r}"
            )


def rule_choice(*members: Rule) -> RuleChoice:
    _check_same_sort("rule_choice", members)
    return RuleChoice(tuple(members))


def rule_seq(*members: Rule) -> RuleSeq:
    _check_same_sort("rule_seq", members)
    return RuleSeq(tuple(members))


def rule_names(rule: Rule) -> tuple[str, ...]:
    """Leaf rule names, in application order."""
    if isinstance(rule, RuleDef):
        return (rule.name,)
    out: list[str] = []
    for m in rule.members:
        out.extend(rule_names(m))
    return tuple(out)


# Guard predicates take the whole matched term. Peano guards walk the
# Succ spine iteratively; matched naturals may be arbitrarily deep.


def _nat_value_parity(t: Term) -> Optional[int]:
    n = 0
    while isinstance(t, Node) and t.constr == "Succ" and len(t.children) == 1:
        n ^= 1
        t = t.children[0]
    if isinstance(t, Node) and t.constr == "Zero" and not t.children:
        return n
    return None


def _even_nat(t: Term) -> bool:
    return _nat_value_parity(t) == 0


def _odd_nat(t: Term) -> bool:
    return _nat_value_parity(t) == 1


def _lit_pred(p: Callable[[Union[int, float]], bool]) -> Callable[[Term], bool]:
    def check(t: Term) -> bool:
        return isinstance(t, Lit) and not isinstance(t.value, str) and p(t.value)

    return check


GUARDS: dict[str, Callable[[Term], bool]] = {
    "even_nat": _even_nat,
    "odd_nat": _odd_nat,
    "lit_zero": _lit_pred(lambda v: v == 0),
    "lit_nonzero": _lit_pred(lambda v: v != 0),
    "lit_positive": _lit_pred(lambda v: v > 0),
    "lit_negative": _lit_pred(lambda v: v < 0),
}


def apply_rule(rule: Rule, t: Term, sig: Signature) -> Optional[Term]:
    """One rule application at the root, or None. Sort mismatch is a
    plain failure, not an error: ad hoc dispatch relies on it."""
    if isinstance(rule, RuleDef):
        if sort_of(sig, t) != rule.sort:
            return None
        binding = match(rule.lhs, t)
        if binding is None:
            return None
        if rule.guard is not None and not GUARDS[rule.guard](t):
            return None
        return instantiate(rule.rhs, binding)
    if isinstance(rule, RuleChoice):
        for m in rule.members:
            out = apply_rule(m, t, sig)
            if out is not None:
                return out
        return None
    for m in rule.members:
        out = apply_rule(m, t, sig)
        if out is None:
            return None
        t = out
    return t


# ---------------------------------------------------------------------------
# Strategy expressions


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class Fail:
    pass


@dataclass(frozen=True)
class Seq:
    left: "Strategy"
    right: "Strategy"


@dataclass(frozen=True)
class Choice:
    left: "Strategy"
    right: "Strategy"


@dataclass(frozen=True)
class All:
    body: "Strategy"


@dataclass(frozen=True)
class One:
    body: "Strategy"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Rec:
    name: str
    body: "Strategy"


@dataclass(frozen=True)
class RuleRef:
    rule: Rule


@dataclass(frozen=True)
class Adhoc:
    """Sort dispatch: apply `rule` on its own sort, `default` elsewhere."""

    default: "Strategy"
    rule: Rule


Strategy = Union[Id, Fail, Seq, Choice, All, One, Var, Rec, RuleRef, Adhoc]

ID = Id()
FAIL = Fail()


def free_vars(s: Strategy) -> frozenset[str]:
    if isinstance(s, Var):
        return frozenset((s.name,))
    if isinstance(s, Rec):
        return free_vars(s.body) - {s.name}
    if isinstance(s, (Seq, Choice)):
        return free_vars(s.left) | free_vars(s.right)
    if isinstance(s, (All, One)):
        return free_vars(s.body)
    return frozenset()


# Scheme expansions introduce binders no surface program can mention:
# the DSL rejects '$' in identifiers, so these can never be captured.
_fresh = itertools.count(1)


def _fresh_var() -> str:
    return f"${next(_fresh)}"


def substitute(s: Strategy, mapping: dict[str, Strategy]) -> Strategy:
    """Capture-avoiding substitution of variables by strategies."""
    if not mapping:
        return s
    if isinstance(s, Var):
        return mapping.get(s.name, s)
    if isinstance(s, Rec):
        inner = {k: v for k, v in mapping.items() if k != s.name}
        if not inner:
            return s
        if any(s.name in free_vars(v) for v in inner.values()):
            renamed = _fresh_var()
            body = substitute(s.body, {s.name: Var(renamed)})
            return Rec(renamed, substitute(body, inner))
        return Rec(s.name, substitute(s.body, inner))
    if isinstance(s, Seq):
        return Seq(substitute(s.left, mapping), substitute(s.right, mapping))
    if isinstance(s, Choice):
        return Choice(substitute(s.left, mapping), substitute(s.right, mapping))
    if isinstance(s, All):
        return All(substitute(s.body, mapping))
    if isinstance(s, One):
        return One(substitute(s.body, mapping))
    return s


# ---------------------------------------------------------------------------
# Traversal schemes


class BogusSchemeWarning(UserWarning):
    """Raised for scheme instances that can never do useful work."""


def try_(s: Strategy) -> Strategy:
    return Choice(s, ID)


def repeat(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, try_(Seq(s, Var(v))))


def full_td(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, Seq(s, All(Var(v))))


def full_bu(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, Seq(All(Var(v)), s))


def once_td(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, Choice(s, One(Var(v))))


def once_bu(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, Choice(One(Var(v)), s))


def stop_td(s: Strategy) -> Strategy:
    v = _fresh_var()
    return Rec(v, Choice(s, All(Var(v))))


def stop_bu(s: Strategy) -> Strategy:
    warnings.warn(
        "stop_bu descends before it ever tries its argument, and a "
        "successful descent preempts it: the result is a deep identity "
        "traversal that never applies the argument",
        BogusSchemeWarning,
        stacklevel=2,
    )
    v = _fresh_var()
    return Rec(v, Choice(All(Var(v)), s))


def innermost(s: Strategy) -> Strategy:
    return repeat(once_bu(s))


# One-rule conveniences: a rule lifted with the identity default for the
# full traversals, and with the failure default for the searching ones.


def full_td1(rule: Rule) -> Strategy:
    return full_td(Adhoc(ID, rule))


def full_bu1(rule: Rule) -> Strategy:
    return full_bu(Adhoc(ID, rule))


def once_td1(rule: Rule) -> Strategy:
    return once_td(Adhoc(FAIL, rule))


def once_bu1(rule: Rule) -> Strategy:
    return once_bu(Adhoc(FAIL, rule))


def stop_td1(rule: Rule) -> Strategy:
    return stop_td(Adhoc(FAIL, rule))


def innermost1(rule: Rule) -> Strategy:
    return innermost(Adhoc(FAIL, rule))


def family(cases: list[Rule] | tuple[Rule, ...], default: Strategy) -> Strategy:
    """Layer many rules over one default, earlier cases taking priority.

    Two cases on the same sort would make the later one unreachable, so
    that is rejected outright rather than silently shadowed.
    """
    seen: dict[str, Rule] = {}
    for r in cases:
        prev = seen.get(r.sort)
        if prev is not None:
            raise StratkitError(
                f"family has two cases on sort {r.sort!r}: "
                f"{prev.name} shadows {r.name}"
            )
        seen[r.sort] = r
    out = default
    for r in reversed(tuple(cases)):
        out = Adhoc(out, r)
    return out


# ---------------------------------------------------------------------------
# Printing


def print_strategy(s: Strategy) -> str:
    """Concrete syntax with minimal parentheses; `;` binds tighter than
    `<+` and rec extends as far right as possible."""
    return _print(s, 0)


def _print(s: Strategy, min_prec: int) -> str:
    if isinstance(s, Id):
        return "id"
    if isinstance(s, Fail):
        return "fail"
    if isinstance(s, Var):
        return s.name
    if isinstance(s, RuleRef):
        return s.rule.name
    if isinstance(s, All):
        return f"all({_print(s.body, 0)})"
    if isinstance(s, One):
        return f"one({_print(s.body, 0)})"
    if isinstance(s, Adhoc):
        return f"adhoc({_print(s.default, 0)},{s.rule.name})"
    if isinstance(s, Rec):
        text = f"rec {s.name}. {_print(s.body, 0)}"
        return f"({text})" if min_prec > 0 else text
    if isinstance(s, Seq):
        text = f"{_print(s.left, 1)} ; {_print(s.right, 2)}"
        return f"({text})" if min_prec > 1 else text
    if isinstance(s, Choice):
        text = f"{_print(s.left, 0)} <+ {_print(s.right, 1)}"
        return f"({text})" if min_prec > 0 else text
    raise StratkitError(f"cannot print {s!r}")
