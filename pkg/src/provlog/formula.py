"""Modal formulas: core syntax, parsing, printing, fragments, schema instances.

The core language is bot / atoms / implication / indexed boxes, plus the
binary interpretability connective ``|>``.  Every other connective
(negation, conjunction, disjunction, top, diamonds, boxplus, biconditional)
is accepted by the parser and offered as a constructor helper, but
normalizes into the core.  All values are immutable and hashable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union


class ParseError(ValueError):
    """Malformed input text; carries the offending position."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class FragmentError(ValueError):
    """A formula falls outside the requested fragment."""


class SchemaError(ValueError):
    """Unknown schema name, or missing/malformed schema arguments."""


# ---------------------------------------------------------------------------
# Abstract syntax


class _Node:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Bot(_Node):
    pass


@dataclass(frozen=True)
class Var(_Node):
    name: str

    def __post_init__(self) -> None:
        if not re.fullmatch(r"[a-z][a-zA-Z0-9_]*", self.name):
            raise ValueError(f"bad variable name {self.name!r}")
        if self.name in _KEYWORDS or re.fullmatch(r"s\d+", self.name):
            raise ValueError(
                f"variable name {self.name!r} collides with the grammar"
            )


@dataclass(frozen=True)
class Const(_Node):
    index: int

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError(f"constant index must be >= 1, got {self.index}")

    @property
    def name(self) -> str:
        return f"s{self.index}"


@dataclass(frozen=True)
class Implies(_Node):
    a: "Formula"
    b: "Formula"


@dataclass(frozen=True)
class BoxN(_Node):
    level: int
    body: "Formula"

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError(f"box level must be >= 0, got {self.level}")


@dataclass(frozen=True)
class Rhd(_Node):
    a: "Formula"
    b: "Formula"


Formula = Union[Bot, Var, Const, Implies, BoxN, Rhd]

BOT = Bot()
TOP = Implies(BOT, BOT)


# ---------------------------------------------------------------------------
# Derived connectives (normalizing constructors)


def neg(f: Formula) -> Formula:
    return Implies(f, BOT)


def conj(a: Formula, b: Formula) -> Formula:
    return Implies(Implies(a, Implies(b, BOT)), BOT)


def disj(a: Formula, b: Formula) -> Formula:
    return Implies(Implies(a, BOT), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(Implies(a, b), Implies(b, a))


def box(f: Formula, level: int = 0) -> Formula:
    return BoxN(level, f)


def dia(f: Formula, level: int = 0) -> Formula:
    return neg(BoxN(level, neg(f)))


def boxplus(f: Formula) -> Formula:
    return conj(f, BoxN(0, f))


def conj_all(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is top."""
    items = list(items)
    if not items:
        return TOP
    out = items[-1]
    for g in reversed(items[:-1]):
        out = conj(g, out)
    return out


def disj_all(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is bot."""
    items = list(items)
    if not items:
        return BOT
    out = items[-1]
    for g in reversed(items[:-1]):
        out = disj(g, out)
    return out


# ---------------------------------------------------------------------------
# Structural analysis


def modal_depth(f: Formula) -> int:
    """Maximum nesting of modalities; ``|>`` counts as depth 2."""
    match f:
        case Bot() | Var() | Const():
            return 0
        case Implies(a, b):
            return max(modal_depth(a), modal_depth(b))
        case BoxN(_, body):
            return 1 + modal_depth(body)
        case Rhd(a, b):
            return 2 + max(modal_depth(a), modal_depth(b))
    raise TypeError(f"not a formula: {f!r}")


def formula_size(f: Formula) -> int:
    match f:
        case Bot() | Var() | Const():
            return 1
        case Implies(a, b) | Rhd(a, b):
            return 1 + formula_size(a) + formula_size(b)
        case BoxN(_, body):
            return 1 + formula_size(body)
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> frozenset[Formula]:
    """All subterms of the core AST, including f itself."""
    out: set[Formula] = set()

    def walk(g: Formula) -> None:
        if g in out:
            return
        out.add(g)
        match g:
            case Implies(a, b) | Rhd(a, b):
                walk(a)
                walk(b)
            case BoxN(_, body):
                walk(body)

    walk(f)
    return frozenset(out)


def atoms(f: Formula) -> frozenset[str]:
    """Names of all variables and constants occurring in f."""
    return frozenset(
        g.name for g in subformulas(f) if isinstance(g, (Var, Const))
    )


def box_subformulas(f: Formula) -> frozenset[BoxN]:
    return frozenset(g for g in subformulas(f) if isinstance(g, BoxN))


def max_box_level(f: Formula) -> int:
    levels = [g.level for g in subformulas(f) if isinstance(g, BoxN)]
    return max(levels, default=0)


def has_rhd(f: Formula) -> bool:
    return any(isinstance(g, Rhd) for g in subformulas(f))


def formula_key(f: Formula):
    """Deterministic sort key for formulas."""
    return (formula_size(f), pretty(f))


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Replace variables by formulas; constants are left untouched."""
    match f:
        case Var(name):
            return mapping.get(name, f)
        case Bot() | Const():
            return f
        case Implies(a, b):
            return Implies(substitute(a, mapping), substitute(b, mapping))
        case BoxN(level, body):
            return BoxN(level, substitute(body, mapping))
        case Rhd(a, b):
            return Rhd(substitute(a, mapping), substitute(b, mapping))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Fragments


@dataclass(frozen=True)
class FragmentTag:
    kind: str
    n: Optional[int] = None

    def __str__(self) -> str:
        return f"{self.kind}({self.n})" if self.n is not None else self.kind


CLOSED_B = FragmentTag("closed-b")
CLOSED_D = FragmentTag("closed-d")
FULL_GL = FragmentTag("full-gl")
FULL_IL = FragmentTag("full-il")


def fragment_fn(n: int) -> FragmentTag:
    if n < 0:
        raise ValueError("fragment index must be >= 0")
    return FragmentTag("fn", n)


def fragment_violation(f: Formula, tag: FragmentTag) -> Optional[str]:
    """Reason why f is outside the fragment, or None if it is a member."""
    for g in subformulas(f):
        match g:
            case Rhd():
                if tag.kind != "full-il":
                    return f"'|>' is not part of fragment {tag}"
            case Var(name):
                if tag.kind in ("closed-b", "closed-d", "fn"):
                    return f"variable '{name}' is not part of fragment {tag}"
            case Const(index):
                if tag.kind in ("closed-b", "closed-d"):
                    return f"constant 's{index}' is not part of fragment {tag}"
                if tag.kind == "fn" and index > (tag.n or 0):
                    return f"constant 's{index}' exceeds fragment {tag}"
            case BoxN(level, _):
                if level != 0 and tag.kind != "closed-d":
                    return f"box level {level} is not part of fragment {tag}"
    return None


def in_fragment(f: Formula, tag: FragmentTag) -> bool:
    return fragment_violation(f, tag) is None


def require_fragment(f: Formula, tag: FragmentTag) -> None:
    reason = fragment_violation(f, tag)
    if reason is not None:
        raise FragmentError(reason)


# ---------------------------------------------------------------------------
# Printing
#
# Precedence levels: atoms 6, unary (~, boxes, diamonds) 5, & 4, | 3,
# |> 2, -> 1.  The binary connectives are right-associative.  The printer
# recognizes the normal forms of top, negation, diamonds, conjunction and
# disjunction so that output stays readable; parse(pretty(f)) == f always.


def pretty(f: Formula) -> str:
    return _pp(f, 0)


def _pp(f: Formula, ctx: int) -> str:
    text, prec = _render(f)
    return f"({text})" if prec < ctx else text


def _render(f: Formula) -> tuple[str, int]:
    match f:
        case Bot():
            return "bot", 6
        case Var(name):
            return name, 6
        case Const(index):
            return f"s{index}", 6
        case BoxN(level, body):
            op = "[]" if level == 0 else f"[{level}]"
            return op + _pp(body, 5), 5
        case Rhd(a, b):
            return f"{_pp(a, 3)} |> {_pp(b, 2)}", 2
        case Implies(a, b):
            if f == TOP:
                return "top", 6
            if b == BOT:
                # diamond: ~[n]~g
                if (
                    isinstance(a, BoxN)
                    and isinstance(a.body, Implies)
                    and a.body.b == BOT
                ):
                    op = "<>" if a.level == 0 else f"<{a.level}>"
                    return op + _pp(a.body.a, 5), 5
                # conjunction: ~(x -> ~y)
                if (
                    isinstance(a, Implies)
                    and isinstance(a.b, Implies)
                    and a.b.b == BOT
                ):
                    return f"{_pp(a.a, 5)} & {_pp(a.b.a, 4)}", 4
                return "~" + _pp(a, 5), 5
            # disjunction: ~x -> b
            if isinstance(a, Implies) and a.b == BOT:
                return f"{_pp(a.a, 4)} | {_pp(b, 3)}", 3
            return f"{_pp(a, 2)} -> {_pp(b, 1)}", 1
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parsing

_CONST_RE = re.compile(r"s(\d+)\Z")
_KEYWORDS = {"bot", "top", "boxplus"}


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    out: list[tuple[str, object, int]] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == "(":
            out.append(("lparen", None, i))
            i += 1
        elif c == ")":
            out.append(("rparen", None, i))
            i += 1
        elif c == "~":
            out.append(("not", None, i))
            i += 1
        elif c == "&":
            out.append(("and", None, i))
            i += 1
        elif c == "-":
            if text[i : i + 2] != "->":
                raise ParseError("expected '->'", i)
            out.append(("imp", None, i))
            i += 2
        elif c == "|":
            if text[i : i + 2] == "|>":
                out.append(("rhd", None, i))
                i += 2
            else:
                out.append(("or", None, i))
                i += 1
        elif c == "<":
            if text[i : i + 3] == "<->":
                out.append(("iff", None, i))
                i += 3
            elif text[i : i + 2] == "<>":
                out.append(("dia", 0, i))
                i += 2
            else:
                m = re.match(r"<(\d+)>", text[i:])
                if not m:
                    raise ParseError("expected '<>', '<->' or '<n>'", i)
                out.append(("dia", int(m.group(1)), i))
                i += m.end()
        elif c == "[":
            if text[i : i + 2] == "[]":
                out.append(("box", 0, i))
                i += 2
            else:
                m = re.match(r"\[(\d+)\]", text[i:])
                if not m:
                    raise ParseError("expected '[]' or '[n]'", i)
                out.append(("box", int(m.group(1)), i))
                i += m.end()
        elif c.isalpha() and c.islower():
            m = re.match(r"[a-z][a-zA-Z0-9_]*", text[i:])
            word = m.group(0)
            if word in _KEYWORDS:
                out.append((word, None, i))
            else:
                cm = _CONST_RE.match(word)
                if cm:
                    index = int(cm.group(1))
                    if index < 1:
                        raise ParseError(
                            "constant indices start at 1 (use s1, s2, ...)", i
                        )
                    out.append(("const", index, i))
                else:
                    out.append(("var", word, i))
            i += m.end()
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    out.append(("eof", None, n))
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, object, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, object, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, object, int]:
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok

    def parse_formula(self) -> Formula:
        left = self.parse_rhd()
        kind, _, _ = self.peek()
        if kind == "imp":
            self.next()
            return Implies(left, self.parse_formula())
        if kind == "iff":
            self.next()
            return iff(left, self.parse_formula())
        return left

    def parse_rhd(self) -> Formula:
        left = self.parse_or()
        if self.peek()[0] == "rhd":
            self.next()
            return Rhd(left, self.parse_rhd())
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        if self.peek()[0] == "or":
            self.next()
            return disj(left, self.parse_or())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_unary()
        if self.peek()[0] == "and":
            self.next()
            return conj(left, self.parse_and())
        return left

    def parse_unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "not":
            self.next()
            return neg(self.parse_unary())
        if kind == "box":
            self.next()
            return BoxN(value, self.parse_unary())
        if kind == "dia":
            self.next()
            return dia(self.parse_unary(), value)
        if kind == "boxplus":
            self.next()
            return boxplus(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        kind, value, pos = self.next()
        if kind == "bot":
            return BOT
        if kind == "top":
            return TOP
        if kind == "var":
            return Var(value)
        if kind == "const":
            return Const(value)
        if kind == "lparen":
            f = self.parse_formula()
            self.expect("rparen")
            return f
        raise ParseError(f"expected a formula, found {kind!r}", pos)


def parse(text: str, language: FragmentTag = FULL_GL) -> Formula:
    """Parse text into a core AST and check it against the given fragment."""
    parser = _Parser(text)
    f = parser.parse_formula()
    kind, _, pos = parser.peek()
    if kind != "eof":
        raise ParseError(f"unexpected trailing input ({kind!r})", pos)
    require_fragment(f, language)
    return f


# ---------------------------------------------------------------------------
# Schema instantiation


def _is_boxbot_tower(f: Formula) -> bool:
    while isinstance(f, BoxN) and f.level == 0:
        f = f.body
    return f == BOT


def _is_boxbot_combination(f: Formula) -> bool:
    if _is_boxbot_tower(f):
        return True
    if isinstance(f, Implies):
        return _is_boxbot_combination(f.a) and _is_boxbot_combination(f.b)
    return False


def _letters(args: Mapping[str, Formula], *names: str) -> list[Formula]:
    out = []
    for name in names:
        if name not in args:
            raise SchemaError(f"missing schema argument {name!r}")
        out.append(args[name])
    return out


def _build_k(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(box(Implies(a, b)), Implies(box(a), box(b)))


def _build_l(args, params):
    (a,) = _letters(args, "A")
    return Implies(box(Implies(box(a), a)), box(a))


def _build_l2(args, params):
    (a,) = _letters(args, "A")
    return Implies(box(a), box(box(a)))


def _build_linearity(args, params):
    a, b = _letters(args, "A", "B")
    return disj(box(Implies(box(a), b)), box(Implies(boxplus(b), a)))


def _build_q1(args, params):
    a, b, c = _letters(args, "A", "B", "C")
    return disj_all(
        [
            box(Implies(box(a), disj(b, c))),
            box(Implies(boxplus(b), disj(a, c))),
            box(Implies(boxplus(c), disj(a, b))),
        ]
    )


def _build_q2(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(dia(conj(dia(a), box(b))), box(disj(dia(a), b)))


def _build_nonbranching(args, params):
    n = params.get("n")
    if n is None or n < 0:
        raise SchemaError("nonbranching schema needs parameter n >= 0")
    letters = _letters(args, *[f"A{k}" for k in range(1, n + 3)])
    disjuncts = []
    for i, a_i in enumerate(letters):
        others = [a_j for j, a_j in enumerate(letters) if j != i]
        disjuncts.append(box(Implies(boxplus(a_i), disj_all(others))))
    return disj_all(disjuncts)


def _build_fgl(args, params):
    n, i = params.get("n"), params.get("i")
    if n is None or n < 0:
        raise SchemaError("fgl schema needs parameter n >= 0")
    if i is None or not (0 <= i < 2**n):
        raise SchemaError(f"fgl schema needs parameter i with 0 <= i < 2^{n}")
    (b,) = _letters(args, "B")
    if not _is_boxbot_combination(b):
        raise SchemaError(
            "fgl schema argument B must be a boolean combination of "
            "iterated-box-bot formulas (with top standing for the omega tower)"
        )
    literals = []
    for j in range(n):
        s = Const(j + 1)
        literals.append(s if (i >> j) & 1 else neg(s))
    svec = conj_all(literals)
    return Implies(box(Implies(svec, b)), box(b))


def _build_j1(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(box(Implies(a, b)), Rhd(a, b))


def _build_j2(args, params):
    a, b, c = _letters(args, "A", "B", "C")
    return Implies(conj(Rhd(a, b), Rhd(b, c)), Rhd(a, c))


def _build_j3(args, params):
    a, b, c = _letters(args, "A", "B", "C")
    return Implies(conj(Rhd(a, c), Rhd(b, c)), Rhd(disj(a, b), c))


def _build_j4(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(Rhd(a, b), Implies(dia(a), dia(b)))


def _build_j5(args, params):
    (a,) = _letters(args, "A")
    return Rhd(dia(a), a)


def _build_m(args, params):
    a, b, c = _letters(args, "A", "B", "C")
    return Implies(Rhd(a, b), Rhd(conj(a, box(c)), conj(b, box(c))))


def _build_p(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(Rhd(a, b), box(Rhd(a, b)))


def _build_w(args, params):
    a, b = _letters(args, "A", "B")
    return Implies(Rhd(a, b), Rhd(a, conj(b, box(neg(a)))))


def _build_glp_lob(args, params):
    n = params.get("n")
    if n is None or n < 0:
        raise SchemaError("glp-lob schema needs parameter n >= 0")
    (a,) = _letters(args, "A")
    return Implies(box(Implies(box(a, n), a), n), box(a, n))


def _build_glp_mono(args, params):
    m, n = params.get("m"), params.get("n")
    if m is None or n is None or not (0 <= m <= n):
        raise SchemaError("glp-mono schema needs parameters 0 <= m <= n")
    (a,) = _letters(args, "A")
    return Implies(box(a, m), box(a, n))


def _build_glp_negintro(args, params):
    m, n = params.get("m"), params.get("n")
    if m is None or n is None or not (0 <= m < n):
        raise SchemaError("glp-negintro schema needs parameters 0 <= m < n")
    (a,) = _letters(args, "A")
    return Implies(dia(a, m), box(dia(a, m), n))


_SCHEMAS = {
    "k": _build_k,
    "l": _build_l,
    "linearity": _build_linearity,
    "q1": _build_q1,
    "q2": _build_q2,
    "nonbranching": _build_nonbranching,
    "fgl": _build_fgl,
    "l1": _build_k,
    "l2": _build_l2,
    "l3": _build_l,
    "j1": _build_j1,
    "j2": _build_j2,
    "j3": _build_j3,
    "j4": _build_j4,
    "j5": _build_j5,
    "m": _build_m,
    "p": _build_p,
    "w": _build_w,
    "ilw3-linearity": _build_linearity,
    "glp-lob": _build_glp_lob,
    "glp-mono": _build_glp_mono,
    "glp-negintro": _build_glp_negintro,
}


def instantiate_schema(
    schema: str,
    args: Mapping[str, Formula] | None = None,
    fragment: FragmentTag | None = None,
    **params,
) -> Formula:
    """Build the literal instance of a named axiom schema.

    `args` maps schema letters (A, B, C, ... or A1..Ak for the
    non-branching family) to formulas.  Level/index parameters (n, i, m)
    are keyword arguments.  When `fragment` is given, every argument must
    belong to it.
    """
    builder = _SCHEMAS.get(schema.lower())
    if builder is None:
        raise SchemaError(f"unknown schema {schema!r}")
    args = dict(args or {})
    if fragment is not None:
        for letter, g in args.items():
            reason = fragment_violation(g, fragment)
            if reason is not None:
                raise SchemaError(f"argument {letter}: {reason}")
    return builder(args, params)


def schema_names() -> tuple[str, ...]:
    return tuple(sorted(_SCHEMAS))
