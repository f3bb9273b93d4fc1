import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from provlog.formula import (
    BOT,
    CLOSED_B,
    CLOSED_D,
    FULL_GL,
    FULL_IL,
    TOP,
    BoxN,
    Const,
    FragmentError,
    Implies,
    ParseError,
    Rhd,
    SchemaError,
    Var,
    atoms,
    box,
    boxplus,
    conj,
    dia,
    disj,
    fragment_fn,
    iff,
    in_fragment,
    instantiate_schema,
    modal_depth,
    neg,
    parse,
    pretty,
    subformulas,
    substitute,
)

P, Q, R = Var("p"), Var("q"), Var("r")


def dia_tower(n):
    f = TOP
    for _ in range(n):
        f = dia(f)
    return f


def box_tower(n):
    f = BOT
    for _ in range(n):
        f = box(f)
    return f


class TestParse:
    def test_lob_schema_string(self):
        f = parse("[]([]p -> p) -> []p")
        assert f == instantiate_schema("L", {"A": P})

    def test_bot(self):
        assert parse("bot") == BOT

    def test_rhd_binds_below_implication(self):
        f = parse("p |> q -> r", FULL_IL)
        assert f == Implies(Rhd(P, Q), R)

    def test_rhd_binds_above_or(self):
        assert parse("p | q |> r", FULL_IL) == Rhd(disj(P, Q), R)

    def test_precedence_chain(self):
        # ~ and modalities over &, & over |, | over ->
        f = parse("~p & []q | r -> p")
        assert f == Implies(disj(conj(neg(P), box(Q)), R), P)

    def test_imp_right_assoc(self):
        assert parse("p -> q -> r") == Implies(P, Implies(Q, R))

    def test_indexed_modalities(self):
        assert parse("[2]bot", CLOSED_D) == BoxN(2, BOT)
        assert parse("<3>bot", CLOSED_D) == dia(BOT, 3)

    def test_boxplus(self):
        assert parse("boxplus p") == boxplus(P)

    def test_iff(self):
        assert parse("p <-> q") == iff(P, Q)

    def test_top_and_constants(self):
        assert parse("top") == TOP
        assert parse("s2", fragment_fn(2)) == Const(2)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse("p -> ->")
        assert err.value.position == 5

    def test_unbalanced(self):
        with pytest.raises(ParseError):
            parse("(p -> q")

    def test_bad_constant_index(self):
        with pytest.raises(ParseError):
            parse("s0", fragment_fn(1))

    def test_fragment_violation(self):
        with pytest.raises(FragmentError):
            parse("p", CLOSED_B)
        with pytest.raises(FragmentError):
            parse("[1]bot", FULL_GL)
        with pytest.raises(FragmentError):
            parse("s2", fragment_fn(1))
        with pytest.raises(FragmentError):
            parse("p |> q", FULL_GL)

    def test_closed_fragments(self):
        assert in_fragment(parse("[]([]bot -> bot)", CLOSED_B), CLOSED_B)
        f = parse("[0]bot -> [2][1]bot", CLOSED_D)
        assert in_fragment(f, CLOSED_D)
        assert not in_fragment(f, CLOSED_B)


_formulas = st.deferred(
    lambda: st.one_of(
        st.just(BOT),
        st.sampled_from([P, Q, Var("v12"), Var("longname")]),
        st.builds(Const, st.integers(1, 3)),
        st.builds(Implies, _formulas, _formulas),
        st.builds(BoxN, st.integers(0, 3), _formulas),
        st.builds(Rhd, _formulas, _formulas),
    )
)


class TestPrinting:
    @settings(max_examples=400, deadline=None)
    @given(_formulas)
    def test_round_trip(self, f):
        assert parse(pretty(f), FULL_IL) == f

    def test_round_trip_examples(self):
        for text in [
            "[]([]p -> p) -> []p",
            "p |> q -> r",
            "<>(<>p & []q) -> [](<>p | q)",
            "boxplus (p | ~q) <-> r",
            "[2]([1]bot -> <0>bot)",
        ]:
            f = parse(text, FULL_IL if "|>" in text else CLOSED_D if "[2]" in text else FULL_GL)
            assert parse(pretty(f), FULL_IL) == f

    def test_derived_connectives_print_readably(self):
        assert pretty(TOP) == "top"
        assert pretty(neg(P)) == "~p"
        assert pretty(conj(P, Q)) == "p & q"
        assert pretty(disj(P, Q)) == "p | q"
        assert pretty(dia(P)) == "<>p"
        assert pretty(dia(P, 2)) == "<2>p"

    def test_var_name_validation(self):
        with pytest.raises(ValueError):
            Var("s1")
        with pytest.raises(ValueError):
            Var("bot")
        with pytest.raises(ValueError):
            Var("P")


class TestStructure:
    def test_modal_depth_examples(self):
        assert modal_depth(BOT) == 0
        assert modal_depth(box(BOT)) == 1
        for n in range(4):
            assert modal_depth(conj(dia_tower(n), box_tower(n + 1))) == n + 1

    @settings(max_examples=100, deadline=None)
    @given(_formulas)
    def test_lob_instance_depth(self, f):
        inst = instantiate_schema("L", {"A": f})
        assert modal_depth(inst) == modal_depth(f) + 2

    def test_subformulas_examples(self):
        assert subformulas(box(BOT)) == frozenset({box(BOT), BOT})
        assert subformulas(Implies(P, Q)) == frozenset({Implies(P, Q), P, Q})
        q2 = instantiate_schema("q2", {"A": P, "B": Q})
        subs = subformulas(q2)
        for part in [dia(P), box(Q), P, Q, conj(dia(P), box(Q)), disj(dia(P), Q)]:
            assert part in subs

    @settings(max_examples=150, deadline=None)
    @given(_formulas)
    def test_subformulas_closed_under_subterms(self, f):
        subs = subformulas(f)
        assert f in subs
        for g in subs:
            assert subformulas(g) <= subs

    def test_atoms(self):
        assert atoms(parse("s1 -> []p & q", fragment_fn(1) if False else FULL_GL)) == {
            "s1",
            "p",
            "q",
        }

    def test_substitute(self):
        f = parse("[]p -> q")
        assert substitute(f, {"p": BOT}) == parse("[]bot -> q")


class TestSchemas:
    def test_lob(self):
        assert instantiate_schema("L", {"A": P}) == Implies(
            box(Implies(box(P), P)), box(P)
        )

    def test_fgl_axiom_i0(self):
        inst = instantiate_schema("fgl", {"B": box(BOT)}, n=1, i=0)
        assert inst == Implies(box(Implies(neg(Const(1)), box(BOT))), box(box(BOT)))

    def test_fgl_axiom_i_selects_bits(self):
        inst = instantiate_schema("fgl", {"B": BOT}, n=2, i=2)
        # i = 2 = binary 10: s2 positive, s1 negated
        expected = conj(neg(Const(1)), Const(2))
        assert inst == Implies(box(Implies(expected, BOT)), box(BOT))

    def test_nonbranching_n0(self):
        inst = instantiate_schema("nonbranching", {"A1": P, "A2": Q}, n=0)
        assert inst == disj(
            box(Implies(boxplus(P), Q)), box(Implies(boxplus(Q), P))
        )

    def test_missing_argument(self):
        with pytest.raises(SchemaError):
            instantiate_schema("K", {"A": P})

    def test_unknown_schema(self):
        with pytest.raises(SchemaError):
            instantiate_schema("zz9", {})

    def test_malformed_fgl_b(self):
        with pytest.raises(SchemaError):
            instantiate_schema("fgl", {"B": P}, n=1, i=0)
        with pytest.raises(SchemaError):
            instantiate_schema("fgl", {"B": box(TOP)}, n=1, i=0)

    def test_fgl_b_accepts_omega_as_top(self):
        instantiate_schema("fgl", {"B": disj(TOP, box(BOT))}, n=1, i=1)

    def test_fragment_gate(self):
        with pytest.raises(SchemaError):
            instantiate_schema("L", {"A": P}, fragment=CLOSED_B)

    def test_b_arguments_keep_schemas_closed(self):
        closed_args = [BOT, box(BOT), Implies(box(BOT), BOT)]
        for name, letters in [
            ("K", ("A", "B")),
            ("L", ("A",)),
            ("linearity", ("A", "B")),
            ("q1", ("A", "B", "C")),
            ("q2", ("A", "B")),
        ]:
            args = {letter: closed_args[k % 3] for k, letter in enumerate(letters)}
            inst = instantiate_schema(name, args)
            assert in_fragment(inst, CLOSED_B), name

    def test_glp_schemas(self):
        inst = instantiate_schema("glp-mono", {"A": BOT}, m=0, n=2)
        assert inst == Implies(BoxN(0, BOT), BoxN(2, BOT))
        with pytest.raises(SchemaError):
            instantiate_schema("glp-negintro", {"A": BOT}, m=1, n=1)
