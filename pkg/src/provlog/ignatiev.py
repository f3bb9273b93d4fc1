"""Finite windows onto the universal frame for the closed polymodal language.

Points are finite sequences of Cantor-normal-form ordinals where each
coordinate is bounded by the end exponent of its predecessor.  A truncation
materializes every such point whose coordinates stay below a structural
size bound, together with the level-indexed accessibility relations.
Evaluation over a truncation is an approximation to the full frame: the
point set is finite, so boxes can gain spurious truths.  All outputs that
depend on it are labelled approximate; the experiment suites probe how far
the approximation carries.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key
from typing import Optional, Sequence

from .formula import (
    CLOSED_D,
    BoxN,
    Bot,
    Formula,
    Implies,
    box,
    boxplus,
    conj,
    disj,
    formula_size,
    max_box_level,
    neg,
    pretty,
    require_fragment,
    subformulas,
)
from .ordinal import (
    ZERO,
    OrdinalCNF,
    compare,
    end_exponent,
    ordinals_up_to_size,
    parse_ordinal,
    print_ordinal,
    structural_size,
)


def in_universe(coords: Sequence[OrdinalCNF]) -> bool:
    """Each coordinate must be at most the end exponent of its predecessor
    (coordinates past the end of the list are zero)."""
    coords = list(coords)
    for a, b in zip(coords, coords[1:]):
        if compare(b, end_exponent(a)) > 0:
            return False
    return True


@dataclass(frozen=True)
class IgnatievPoint:
    coords: tuple[OrdinalCNF, ...] = ()

    def __post_init__(self) -> None:
        coords = tuple(self.coords)
        while coords and coords[-1] == ZERO:
            coords = coords[:-1]
        object.__setattr__(self, "coords", coords)
        if not in_universe(coords):
            raise ValueError(
                f"coordinates {[print_ordinal(c) for c in coords]} violate "
                "the end-exponent bound"
            )

    def coord(self, k: int) -> OrdinalCNF:
        return self.coords[k] if k < len(self.coords) else ZERO

    def __str__(self) -> str:
        if not self.coords:
            return "(0)"
        return "(" + ", ".join(print_ordinal(c) for c in self.coords) + ")"


def rel_n(n: int, a: IgnatievPoint, b: IgnatievPoint) -> bool:
    """Level-n accessibility: equal below n, strictly descending at n."""
    if n < 0:
        raise ValueError("level must be >= 0")
    for m in range(n):
        if a.coord(m) != b.coord(m):
            return False
    return compare(a.coord(n), b.coord(n)) > 0


def root_point(alpha: OrdinalCNF) -> IgnatievPoint:
    """Iterate the end exponent down to zero."""
    coords = []
    current = alpha
    while current != ZERO:
        coords.append(current)
        current = end_exponent(current)
    return IgnatievPoint(tuple(coords))


def is_root_point(p: IgnatievPoint) -> bool:
    return p == root_point(p.coord(0))


def roots_trichotomy(a: OrdinalCNF, b: OrdinalCNF) -> str:
    """Which of the two root points sees the other at level 0:
    'R0_ab', 'R0_ba' or 'equal'."""
    c = compare(a, b)
    if c > 0:
        return "R0_ab"
    if c < 0:
        return "R0_ba"
    return "equal"


# ---------------------------------------------------------------------------
# Truncations


@dataclass(frozen=True)
class TruncatedUniverse:
    bound: int
    max_level: int
    points: tuple[IgnatievPoint, ...]

    def __contains__(self, p: IgnatievPoint) -> bool:
        return p in set(self.points)

    def successors(self, n: int, p: IgnatievPoint) -> tuple[IgnatievPoint, ...]:
        if not (0 <= n <= self.max_level):
            raise ValueError(f"level {n} exceeds the materialized maximum")
        return tuple(q for q in self.points if rel_n(n, p, q))

    def root_points(self) -> tuple[IgnatievPoint, ...]:
        return tuple(p for p in self.points if is_root_point(p))


def build_truncation(bound: int = 3, max_level: int = 2) -> TruncatedUniverse:
    """All points whose coordinates (up to the level cap) have structural
    size at most `bound`.  Closed under every materialized successor
    relation, since successors only shrink coordinates."""
    if bound < 1 or max_level < 0:
        raise ValueError("bound must be >= 1 and max_level >= 0")
    ordinals = ordinals_up_to_size(bound)
    points: list[IgnatievPoint] = []

    def extend(prefix: tuple[OrdinalCNF, ...]) -> None:
        points.append(IgnatievPoint(prefix))
        if len(prefix) > max_level:
            return
        cap = end_exponent(prefix[-1]) if prefix else None
        for o in ordinals:
            if o == ZERO:
                continue
            if cap is not None and compare(o, cap) > 0:
                continue
            if len(prefix) <= max_level:
                extend(prefix + (o,))

    extend(())
    key = cmp_to_key(compare)
    unique = sorted(set(points), key=lambda p: tuple(key(c) for c in p.coords))
    return TruncatedUniverse(bound, max_level, tuple(unique))


def eval_d(tu: TruncatedUniverse, p: IgnatievPoint, f: Formula) -> bool:
    """Truth of a closed polymodal formula at a point of the truncation.

    Approximate by construction: boxes quantify over the successors that
    the truncation retains, not over the full frame.
    """
    require_fragment(f, CLOSED_D)
    if max_box_level(f) > tu.max_level:
        raise ValueError(
            f"formula uses level {max_box_level(f)}, truncation has "
            f"{tu.max_level}"
        )
    if p not in tu:
        raise ValueError(f"point {p} is not in the truncation")
    return _eval_table(tu, f)[f][p]


def _eval_table(tu: TruncatedUniverse, f: Formula) -> dict:
    univ = sorted(subformulas(f), key=formula_size)
    succ = {
        n: {p: tu.successors(n, p) for p in tu.points}
        for n in range(max_box_level(f) + 1)
    }
    table: dict = {}
    for g in univ:
        match g:
            case Bot():
                row = {p: False for p in tu.points}
            case Implies(a, b):
                row = {
                    p: (not table[a][p]) or table[b][p] for p in tu.points
                }
            case BoxN(level, body):
                row = {
                    p: all(table[body][q] for q in succ[level][p])
                    for p in tu.points
                }
            case _:
                raise TypeError(f"not a closed polymodal formula: {g!r}")
        table[g] = row
    return table


# ---------------------------------------------------------------------------
# The linearity experiment


@dataclass(frozen=True)
class LinearityViolation:
    point: IgnatievPoint
    witness_left: IgnatievPoint
    witness_right: IgnatievPoint
    root_left: Optional[IgnatievPoint]
    root_right: Optional[IgnatievPoint]


@dataclass(frozen=True)
class LinearityReport:
    formula: Formula
    points_checked: int
    violations: tuple[LinearityViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def linearity_experiment(
    tu: TruncatedUniverse, a: Formula, b: Formula
) -> LinearityReport:
    """Check the level-0 linearity disjunction for the pair (a, b) at every
    point of the truncation.  A violating point comes with its two
    witnessing successors and, when the truncation contains them, root
    points satisfying the same two conjunctions."""
    require_fragment(a, CLOSED_D)
    require_fragment(b, CLOSED_D)
    formula = disj(
        box(Implies(box(a), b)),
        box(Implies(boxplus(b), a)),
    )
    table = _eval_table(tu, formula)
    left = conj(box(a), neg(b))  # needs a successor satisfying this
    right = conj(boxplus(b), neg(a))
    left_table = _eval_table(tu, left)[left]
    right_table = _eval_table(tu, right)[right]
    roots = tu.root_points()
    violations = []
    for p in tu.points:
        if table[formula][p]:
            continue
        wl = next(q for q in tu.successors(0, p) if left_table[q])
        wr = next(q for q in tu.successors(0, p) if right_table[q])
        rl = next((r for r in roots if left_table[r]), None)
        rr = next((r for r in roots if right_table[r]), None)
        violations.append(LinearityViolation(p, wl, wr, rl, rr))
    return LinearityReport(formula, len(tu.points), tuple(violations))


# ---------------------------------------------------------------------------
# Serialization


def truncation_to_json(tu: TruncatedUniverse) -> dict:
    return {
        "bound": tu.bound,
        "max_level": tu.max_level,
        "points": [
            [print_ordinal(c) for c in p.coords] for p in tu.points
        ],
    }


def truncation_from_json(data: dict) -> TruncatedUniverse:
    points = tuple(
        IgnatievPoint(tuple(parse_ordinal(c) for c in coords))
        for coords in data["points"]
    )
    return TruncatedUniverse(data["bound"], data["max_level"], points)


def truncation_to_dot(tu: TruncatedUniverse) -> str:
    """Graphviz rendering with one labelled edge per accessibility level."""
    ids = {p: f"p{k}" for k, p in enumerate(tu.points)}
    lines = ["digraph {"]
    for p in tu.points:
        lines.append(f'  {ids[p]} [label="{p}", shape=circle];')
    for n in range(tu.max_level + 1):
        for p in tu.points:
            for q in tu.successors(n, p):
                lines.append(f'  {ids[p]} -> {ids[q]} [label="R{n}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
