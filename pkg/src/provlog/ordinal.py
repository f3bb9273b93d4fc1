"""Ordinals below epsilon_0 in hereditary Cantor normal form.

An ordinal is a weakly decreasing tuple of exponent ordinals, read as
w^e_k + ... + w^e_1; the empty tuple is 0.  Coefficients are represented
by repetition, which keeps comparison a plain lexicographic recursion.
Only comparison and the end exponent are needed here; no ordinal
arithmetic is implemented.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cmp_to_key, total_ordering


class OrdinalParseError(ValueError):
    pass


@total_ordering
@dataclass(frozen=True)
class OrdinalCNF:
    exps: tuple["OrdinalCNF", ...] = ()

    def __post_init__(self) -> None:
        for x, y in zip(self.exps, self.exps[1:]):
            if compare(x, y) < 0:
                raise ValueError(
                    "CNF exponents must be weakly decreasing: "
                    f"{print_ordinal(x)} < {print_ordinal(y)}"
                )

    def __lt__(self, other: "OrdinalCNF") -> bool:
        return compare(self, other) < 0

    def is_zero(self) -> bool:
        return not self.exps

    def __str__(self) -> str:
        return print_ordinal(self)


ZERO = OrdinalCNF()
ONE = OrdinalCNF((ZERO,))
OMEGA = OrdinalCNF((ONE,))


def from_int(k: int) -> OrdinalCNF:
    if k < 0:
        raise ValueError("ordinals are non-negative")
    return OrdinalCNF((ZERO,) * k)


def omega_power(e: OrdinalCNF) -> OrdinalCNF:
    return OrdinalCNF((e,))


def compare(a: OrdinalCNF, b: OrdinalCNF) -> int:
    """-1, 0 or 1; a strict total order on CNF terms."""
    for x, y in zip(a.exps, b.exps):
        c = compare(x, y)
        if c:
            return c
    return (len(a.exps) > len(b.exps)) - (len(a.exps) < len(b.exps))


def end_exponent(a: OrdinalCNF) -> OrdinalCNF:
    """The last (smallest) CNF exponent; 0 for the ordinal 0."""
    return a.exps[-1] if a.exps else ZERO


def structural_size(a: OrdinalCNF) -> int:
    """Hereditary node count: size(0) = 1."""
    return 1 + sum(structural_size(e) for e in a.exps)


def as_int(a: OrdinalCNF) -> int | None:
    """The natural number a denotes, or None if a >= omega."""
    if all(e == ZERO for e in a.exps):
        return len(a.exps)
    return None


def ordinals_up_to_size(bound: int) -> tuple[OrdinalCNF, ...]:
    """All CNF terms of structural size <= bound, sorted ascending."""
    if bound < 1:
        return ()
    found: set[OrdinalCNF] = {ZERO}
    # grow by prepending one more leading exponent drawn from earlier rounds
    changed = True
    while changed:
        changed = False
        for a in list(found):
            for e in list(found):
                if a.exps and compare(e, a.exps[0]) < 0:
                    continue
                cand_size = structural_size(a) + structural_size(e)
                if cand_size <= bound:
                    cand = OrdinalCNF((e,) + a.exps)
                    if cand not in found:
                        found.add(cand)
                        changed = True
    return tuple(sorted(found, key=cmp_to_key(compare)))


# ---------------------------------------------------------------------------
# Text form: terms joined by '+', each term 'w^(alpha)*k' with sugar for
# finite exponents ('w^3'), the first limit ordinal ('w^w'), omega itself
# ('w') and naturals ('3').  '0' only denotes the zero ordinal on its own.


def print_ordinal(a: OrdinalCNF) -> str:
    if a.is_zero():
        return "0"
    parts = []
    i = 0
    exps = a.exps
    while i < len(exps):
        j = i
        while j < len(exps) and exps[j] == exps[i]:
            j += 1
        count = j - i
        parts.append(_print_term(exps[i], count))
        i = j
    return "+".join(parts)


def _print_term(e: OrdinalCNF, count: int) -> str:
    if e == ZERO:
        return str(count)
    if e == ONE:
        base = "w"
    elif e == OMEGA:
        base = "w^w"
    elif (k := as_int(e)) is not None:
        base = f"w^{k}"
    else:
        base = f"w^({print_ordinal(e)})"
    return f"{base}*{count}" if count > 1 else base


_INT_RE = re.compile(r"\d+")


def parse_ordinal(text: str, normalize: bool = False) -> OrdinalCNF:
    """Parse the ordinal grammar; exponent lists must be weakly decreasing
    unless ``normalize`` is set, in which case terms are re-sorted."""
    s = text.strip()
    if s == "0":
        return ZERO
    exps: list[OrdinalCNF] = []
    for raw in s.split("+"):
        term = raw.strip()
        if not term:
            raise OrdinalParseError(f"empty term in {text!r}")
        exps.extend(_parse_term(term, text))
    if normalize:
        exps.sort(key=cmp_to_key(compare), reverse=True)
    for x, y in zip(exps, exps[1:]):
        if compare(x, y) < 0:
            raise OrdinalParseError(
                f"exponents not weakly decreasing in {text!r} "
                "(pass normalize=True to sort)"
            )
    return OrdinalCNF(tuple(exps))


def _parse_term(term: str, full: str) -> list[OrdinalCNF]:
    count = 1
    if "*" in term:
        base, _, count_text = term.rpartition("*")
        base = base.strip()
        count_text = count_text.strip()
        if not _INT_RE.fullmatch(count_text) or int(count_text) < 1:
            raise OrdinalParseError(f"bad coefficient {count_text!r} in {full!r}")
        count = int(count_text)
        term = base
    if _INT_RE.fullmatch(term):
        k = int(term)
        if k == 0:
            raise OrdinalParseError(f"zero term inside a sum in {full!r}")
        return [ZERO] * (k * count)
    if term == "w":
        return [ONE] * count
    if term.startswith("w^"):
        exp_text = term[2:].strip()
        if exp_text.startswith("("):
            if not exp_text.endswith(")"):
                raise OrdinalParseError(f"unbalanced parentheses in {full!r}")
            e = parse_ordinal(exp_text[1:-1])
        elif exp_text == "w":
            e = OMEGA
        elif _INT_RE.fullmatch(exp_text):
            e = from_int(int(exp_text))
        else:
            raise OrdinalParseError(f"bad exponent {exp_text!r} in {full!r}")
        return [e] * count
    raise OrdinalParseError(f"bad term {term!r} in {full!r}")
