"""Decision procedures and countermodel tooling for GL-family provability
logics, their constant fragments, truncations of the universal frame for the
closed polymodal language, and the interpretability logic decided through
its boxed translation."""

from .formula import (
    BOT,
    CLOSED_B,
    CLOSED_D,
    FULL_GL,
    FULL_IL,
    TOP,
    BoxN,
    Bot,
    Const,
    FragmentError,
    FragmentTag,
    Implies,
    ParseError,
    Rhd,
    SchemaError,
    Var,
    box,
    boxplus,
    conj,
    dia,
    disj,
    fragment_fn,
    iff,
    instantiate_schema,
    modal_depth,
    neg,
    parse,
    pretty,
    subformulas,
)
from .glprover import (
    GnPoint,
    NormalForm,
    Provable,
    Refuted,
    Verdict,
    decide_fgl,
    decide_gl,
    decide_gl3,
    decide_gl4,
    decide_gl_closed,
    eval_gn,
    eval_rank,
    is_provable,
    normal_form,
)
from .ignatiev import (
    IgnatievPoint,
    TruncatedUniverse,
    build_truncation,
    eval_d,
    in_universe,
    linearity_experiment,
    rel_n,
    root_point,
    roots_trichotomy,
)
from .interp import decide_ilw3, il_axiom_instance, translate_tr
from .kripke import (
    Frame,
    FrameClassReport,
    Model,
    PMorphism,
    ResourceLimitError,
    build_pmorphism_from_G1,
    check,
    countermodel_search,
    frame_class,
    generated_subframe,
    restricted_substitution,
    transitive_closure,
    truth_worlds,
    verify_pmorphism,
)
from .ordinal import OrdinalCNF, compare, end_exponent, parse_ordinal, print_ordinal

__version__ = "0.1.0"
