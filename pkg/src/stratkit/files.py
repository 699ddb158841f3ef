"""File formats: signature declarations and term s-expressions.

Both readers track line and column so error messages point at the
offending token. The term reader and writer are iterative; term files
routinely hold trees deeper than the interpreter stack.
"""

from __future__ import annotations

from typing import Optional

from .errors import ParseError, SignatureError
from .terms import Lit, Node, Signature, Symbol, Term

# ---------------------------------------------------------------------------
# Signature files
#
#   sort Nat
#   prim Salary : float
#   list NatTree
#   Succ : Nat -> Nat
#   Zero : -> Nat
#   Node : Nat * [NatTree] -> NatTree
#
# `list S` declares the sort [S] together with its two spine
# constructors Cons_S and Nil_S, so list-shaped children stay inside the
# ordinary constructor discipline.


def list_sort(elem: str) -> str:
    return f"[{elem}]"


def parse_signature(text: str, origin: str = "<signature>") -> Signature:
    sorts: list[str] = []
    prims: dict[str, str] = {}
    symbols: list[Symbol] = []
    list_elems: list[tuple[str, int]] = []

    def err(lineno: int, msg: str) -> ParseError:
        return ParseError(f"{origin}: {msg}", line=lineno)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("sort "):
            name = line[5:].strip()
            if not name or " " in name:
                raise err(lineno, f"bad sort declaration {raw.strip()!r}")
            sorts.append(name)
        elif line.startswith("prim "):
            rest = line[5:]
            if ":" not in rest:
                raise err(lineno, f"bad prim declaration {raw.strip()!r}")
            name, kind = (part.strip() for part in rest.split(":", 1))
            if not name or kind not in ("int", "float", "string"):
                raise err(lineno, f"bad prim declaration {raw.strip()!r}")
            sorts.append(name)
            prims[name] = kind
        elif line.startswith("list "):
            elem = line[5:].strip()
            if not elem or " " in elem:
                raise err(lineno, f"bad list declaration {raw.strip()!r}")
            list_elems.append((elem, lineno))
        elif ":" in line:
            name, sig_part = (part.strip() for part in line.split(":", 1))
            if "->" not in sig_part:
                raise err(lineno, f"constructor {name!r} is missing '->'")
            args_part, result = (part.strip() for part in sig_part.rsplit("->", 1))
            if not name or not result:
                raise err(lineno, f"bad constructor declaration {raw.strip()!r}")
            if args_part:
                arg_sorts = tuple(a.strip() for a in args_part.split("*"))
                if any(not a for a in arg_sorts):
                    raise err(lineno, f"bad argument list in {raw.strip()!r}")
            else:
                arg_sorts = ()
            symbols.append(Symbol(name, arg_sorts, result))
        else:
            raise err(lineno, f"unrecognised declaration {raw.strip()!r}")

    declared = set(sorts)
    for elem, lineno in list_elems:
        if elem not in declared:
            raise err(lineno, f"list declaration for unknown sort {elem!r}")
        ls = list_sort(elem)
        sorts.append(ls)
        symbols.append(Symbol(f"Cons_{elem}", (elem, ls), ls))
        symbols.append(Symbol(f"Nil_{elem}", (), ls))

    try:
        return Signature(sorts, symbols, prims)
    except SignatureError as e:
        raise ParseError(f"{origin}: {e}") from None


def load_signature(path: str) -> Signature:
    with open(path, encoding="utf-8") as fh:
        return parse_signature(fh.read(), origin=path)


# ---------------------------------------------------------------------------
# Term s-expressions
#
#   (Node (Succ (Zero)) (Nil_NatTree))
#   100.0:Salary
#   "Amsterdam":Name
#
# A bare constructor name is shorthand for its nullary application, so
# (Succ Zero) reads the same as (Succ (Zero)).

_BARE_END = set("() \t\r\n")


def _tokenize_term(text: str):
    """Yield (kind, value, line, col); kind in {'(', ')', 'atom', 'str'}."""
    i, n = 0, len(text)
    line, col = 1, 1
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield (ch, ch, line, col)
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError(
                        "unterminated string literal", line=start_line, col=start_col
                    )
                if text[j] == "\\" and j + 1 < n:
                    nxt = text[j + 1]
                    buf.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError(
                    "unterminated string literal", line=start_line, col=start_col
                )
            col += j + 1 - i
            i = j + 1
            yield ("str", "".join(buf), start_line, start_col)
        else:
            start_line, start_col = line, col
            j = i
            while j < n and text[j] not in _BARE_END:
                j += 1
            yield ("atom", text[i:j], start_line, start_col)
            col += j - i
            i = j


def _atom_to_term(tok: str, line: int, col: int) -> Term:
    """A bare atom is either a `value:Sort` literal or a nullary node."""
    if ":" in tok:
        payload, sort = tok.rsplit(":", 1)
        if not sort:
            raise ParseError(f"missing sort tag in literal {tok!r}", line=line, col=col)
        try:
            value = int(payload)
        except ValueError:
            try:
                value = float(payload)
            except ValueError:
                raise ParseError(
                    f"bad literal payload {payload!r}", line=line, col=col
                ) from None
        return Lit(value, sort)
    return Node(tok)


def parse_term(text: str) -> Term:
    """Read exactly one term; trailing input is an error."""
    tokens = list(_tokenize_term(text))
    # A string literal's sort tag arrives as a separate ':Sort' atom
    # right after the quotes (`"abc":Name`, no space). Stitch the pairs.
    stitched: list[tuple[str, object, int, int]] = []
    i = 0
    while i < len(tokens):
        kind, value, line, col = tokens[i]
        if kind == "str":
            if (
                i + 1 < len(tokens)
                and tokens[i + 1][0] == "atom"
                and tokens[i + 1][1].startswith(":")
            ):
                sort = tokens[i + 1][1][1:]
                if not sort:
                    raise ParseError("missing sort tag after string", line=line, col=col)
                stitched.append(("lit", Lit(value, sort), line, col))
                i += 2
                continue
            raise ParseError(
                "string literal needs a :Sort tag", line=line, col=col
            )
        stitched.append((kind, value, line, col))
        i += 1

    if not stitched:
        raise ParseError("empty input, expected a term")

    # Iterative build: a stack of (constr, children, line, col) frames.
    stack: list[tuple[str, list[Term], int, int]] = []
    result: Optional[Term] = None
    pos = 0

    def push_value(t: Term, line: int, col: int):
        nonlocal result
        if stack:
            stack[-1][1].append(t)
        elif result is None:
            result = t
        else:
            raise ParseError("trailing input after term", line=line, col=col)

    while pos < len(stitched):
        kind, value, line, col = stitched[pos]
        pos += 1
        if kind == "(":
            if pos >= len(stitched) or stitched[pos][0] != "atom":
                raise ParseError("expected constructor after '('", line=line, col=col)
            head = stitched[pos]
            if ":" in head[1]:
                raise ParseError(
                    f"literal {head[1]!r} cannot head an application",
                    line=head[2],
                    col=head[3],
                )
            stack.append((head[1], [], line, col))
            pos += 1
        elif kind == ")":
            if not stack:
                raise ParseError("unmatched ')'", line=line, col=col)
            constr, children, oline, ocol = stack.pop()
            push_value(Node(constr, tuple(children)), oline, ocol)
        elif kind == "lit":
            push_value(value, line, col)
        else:  # atom
            push_value(_atom_to_term(value, line, col), line, col)

    if stack:
        constr, _, line, col = stack[-1]
        raise ParseError(f"unclosed '(' for {constr!r}", line=line, col=col)
    assert result is not None
    return result


def load_term(path: str) -> Term:
    with open(path, encoding="utf-8") as fh:
        return parse_term(fh.read())


def _format_lit(t: Lit) -> str:
    if isinstance(t.value, str):
        escaped = (
            t.value.replace("\\", "\\\\")
            .replace('"', '\\"')
            .replace("\n", "\\n")
            .replace("\t", "\\t")
        )
        return f'"{escaped}":{t.sort}'
    return f"{t.value!r}:{t.sort}"


def term_to_sexpr(t: Term) -> str:
    """Canonical printed form; parse_term(term_to_sexpr(t)) == t."""
    out: list[str] = []
    stack: list[object] = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            out.append(x)
        elif isinstance(x, Lit):
            out.append(_format_lit(x))
        else:
            out.append(f"({x.constr}")
            stack.append(")")
            for c in reversed(x.children):
                stack.append(c)
                stack.append(" ")
    return "".join(out)
