"""Reachability of sort-specific cases, for dead-code detection.

The analysis computes, for every sort the root term might have, which
named rules a strategy could end up applying somewhere below such a
root. It deliberately ignores the difference between sequence and
choice and between all and one: the result is a safe over-approximation
(a case absent from the map is definitely unreachable; a case present
may still never fire).
"""

from __future__ import annotations

from typing import Optional

from .errors import EngineError, SignatureError
from .fallibility import fix_eq
from .strategies import (
    Adhoc,
    All,
    Choice,
    Fail,
    Id,
    One,
    Rec,
    Rule,
    RuleRef,
    Seq,
    Strategy,
    Var,
    rule_names,
)
from .terms import Signature, Sort

# total map sort -> reachable case names
ReachMap = dict[Sort, frozenset[str]]

OVER_REPORT_NOTE = (
    "note: reachable sets may over-report; cases listed as unreachable "
    "are definitely dead"
)


def reach_bottom(sig: Signature) -> ReachMap:
    empty: frozenset[str] = frozenset()
    return {s: empty for s in sig.sorts}


def reach_lub(a: ReachMap, b: ReachMap) -> ReachMap:
    return {s: a[s] | b[s] for s in a}


def reach_transform(sig: Signature, m: ReachMap) -> ReachMap:
    """One layer down: what is reachable from a sort's immediate
    argument positions."""
    out: ReachMap = {}
    for so in m:
        acc: frozenset[str] = frozenset()
        for arg in sig.arg_sorts_of_sort(so):
            acc |= m[arg]
        out[so] = acc
    return out


def _rule_map(sig: Signature, rule: Rule) -> ReachMap:
    m = reach_bottom(sig)
    if rule.sort not in m:
        raise SignatureError(
            f"rule {rule.name!r} is on sort {rule.sort!r}, "
            "which the signature does not declare"
        )
    m[rule.sort] = frozenset(rule_names(rule))
    return m


def reach_analyse(
    sig: Signature,
    s: Strategy,
    env: Optional[dict[str, ReachMap]] = None,
) -> ReachMap:
    env = env or {}
    if isinstance(s, (Id, Fail)):
        return reach_bottom(sig)
    if isinstance(s, (Seq, Choice)):
        return reach_lub(
            reach_analyse(sig, s.left, env), reach_analyse(sig, s.right, env)
        )
    if isinstance(s, Var):
        try:
            return env[s.name]
        except KeyError:
            raise EngineError(f"unbound strategy variable {s.name!r}") from None
    if isinstance(s, Rec):
        return fix_eq(
            lambda m: reach_analyse(sig, s.body, {**env, s.name: m}),
            reach_bottom(sig),
        )
    if isinstance(s, (All, One)):
        return reach_transform(sig, reach_analyse(sig, s.body, env))
    if isinstance(s, RuleRef):
        return _rule_map(sig, s.rule)
    if isinstance(s, Adhoc):
        return reach_lub(
            reach_analyse(sig, s.default, env), _rule_map(sig, s.rule)
        )
    raise EngineError(f"cannot analyse {s!r}")


def mentioned_cases(s: Strategy) -> frozenset[str]:
    """Names of all rules appearing syntactically in s."""
    out: set[str] = set()
    stack = [s]
    while stack:
        node = stack.pop()
        if isinstance(node, (Seq, Choice)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (All, One)):
            stack.append(node.body)
        elif isinstance(node, Rec):
            stack.append(node.body)
        elif isinstance(node, RuleRef):
            out.update(rule_names(node.rule))
        elif isinstance(node, Adhoc):
            stack.append(node.default)
            out.update(rule_names(node.rule))
    return frozenset(out)


def dead_case_report(
    sig: Signature, main: Strategy, root: Sort
) -> list[tuple[str, str]]:
    """Cases mentioned in main that cannot fire below a root of the
    given sort, each with a one-line diagnostic."""
    if root not in sig.sorts:
        raise SignatureError(f"unknown root sort {root!r}")
    reachable = reach_analyse(sig, main)[root]
    out = []
    for name in sorted(mentioned_cases(main) - reachable):
        out.append(
            (name, f"case {name!r} is unreachable from root sort {root!r}")
        )
    return out
