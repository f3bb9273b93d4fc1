"""Interpretability formulas decided through their boxed translation.

The translation leaves every box-language connective alone and turns
``A |> B`` into ``[](A -> (B | <>B))``; a formula is accepted exactly when
its translation is valid on finite strict linear orders.  There is no
independent proof search for the interpretability logic itself; the
translation is the single engine, cross-validated by the axiom and rule
properties in the test suites.  Refutations are countermodels for the
translation, which certify non-provability of the original formula.
"""

from __future__ import annotations

from typing import Mapping

from .formula import (
    FULL_IL,
    BoxN,
    Bot,
    Const,
    Formula,
    Implies,
    Rhd,
    Var,
    box,
    dia,
    disj,
    instantiate_schema,
    require_fragment,
)
from .glprover import Verdict, decide_gl3

IL_SCHEMAS = (
    "L1",
    "L2",
    "L3",
    "J1",
    "J2",
    "J3",
    "J4",
    "J5",
    "M",
    "P",
    "W",
    "ilw3-linearity",
)


def translate_tr(f: Formula) -> Formula:
    """Homomorphic on everything except ``|>``."""
    match f:
        case Bot() | Var() | Const():
            return f
        case Implies(a, b):
            return Implies(translate_tr(a), translate_tr(b))
        case BoxN(level, body):
            return BoxN(level, translate_tr(body))
        case Rhd(a, b):
            ta, tb = translate_tr(a), translate_tr(b)
            return box(Implies(ta, disj(tb, dia(tb))))
    raise TypeError(f"not a formula: {f!r}")


def decide_ilw3(f: Formula) -> Verdict:
    """Decide f by deciding its translation over finite strict linear
    orders.  A Refuted verdict carries a linear countermodel for the
    translation, not for f itself."""
    require_fragment(f, FULL_IL)
    return decide_gl3(translate_tr(f))


def il_axiom_instance(schema: str, args: Mapping[str, Formula]) -> Formula:
    """Literal instance of one of the interpretability axiom schemas."""
    if schema not in IL_SCHEMAS and schema.lower() not in [
        s.lower() for s in IL_SCHEMAS
    ]:
        raise ValueError(
            f"unknown interpretability schema {schema!r}; "
            f"expected one of {', '.join(IL_SCHEMAS)}"
        )
    return instantiate_schema(schema, args)
