"""Parser, renderer and desugaring tests."""

import pytest
from hypothesis import given, strategies as st

from epicmp.syntax import (And, Atom, CDK, CK, Cmp, CmpOp, DK,
                           EmptyGroupError, FormulaError, Group, Iff, Imp,
                           IndK, LexError, Not, Or, ParseError, Supergroup,
                           agent_names, atom_names, expand_sugar, parse,
                           render)


def test_atom_and_precedence():
    f = parse("~p & q")
    assert f == And(Not(Atom("p")), Atom("q"))


def test_imp_right_assoc():
    assert parse("p -> q -> r") == \
        Imp(Atom("p"), Imp(Atom("q"), Atom("r")))


def test_iff_left_assoc():
    assert parse("p <-> q <-> r") == \
        Iff(Iff(Atom("p"), Atom("q")), Atom("r"))


def test_or_binds_tighter_than_imp():
    assert parse("p | q -> r") == Imp(Or(Atom("p"), Atom("q")), Atom("r"))


def test_and_binds_tighter_than_or():
    assert parse("p | q & r") == Or(Atom("p"), And(Atom("q"), Atom("r")))


def test_modal_prefix_binds_like_negation():
    f = parse("D{a} p & q")
    assert f == And(DK(Group(["a"]), Atom("p")), Atom("q"))


def test_nested_modalities():
    f = parse("C{a,b} D{b} ~p")
    assert f == CK(Group(["a", "b"]), DK(Group(["b"]), Not(Atom("p"))))


def test_comparison_forms():
    assert parse("[{a} <= {b}]") == \
        Cmp(CmpOp.LEQ, Group(["a"]), Group(["b"]))
    assert parse("[{a,b} < {c}]") == \
        Cmp(CmpOp.LT, Group(["a", "b"]), Group(["c"]))
    assert parse("[{a} == {b}]").op is CmpOp.EQV
    assert parse("[{a} # {b}]").op is CmpOp.INCOMP


def test_cdk_groups():
    f = parse("CD[{a,b};{c}] p")
    assert f == CDK(Supergroup([Group(["a", "b"]), Group(["c"])]), Atom("p"))


def test_group_order_is_canonical():
    assert parse("[{b,a} <= {c}]") == parse("[{a,b} <= {c}]")
    assert parse("CD[{c};{a,b}] p") == parse("CD[{a,b};{c}] p")


def test_keywords_need_group_brace():
    # D/C/K/CD not followed by their bracket are ordinary atoms
    assert parse("Kp") == Atom("Kp")
    assert parse("D & C") == And(Atom("D"), Atom("C"))
    assert parse("CD -> p") == Imp(Atom("CD"), Atom("p"))


def test_k_takes_single_agent():
    assert parse("K{a} p") == IndK("a", Atom("p"))
    with pytest.raises(ParseError, match="single agent"):
        parse("K{a,b} p")


def test_empty_group_rejected():
    with pytest.raises(EmptyGroupError):
        parse("D{} p")
    with pytest.raises(EmptyGroupError):
        parse("[{} <= {a}]")


def test_duplicate_agent_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse("D{a,a} p")


def test_lex_error_positions():
    with pytest.raises(LexError, match="column 3"):
        parse("p $ q")


def test_parse_error_on_trailing_input():
    with pytest.raises(ParseError, match="unexpected"):
        parse("p q")


def test_parse_error_on_missing_operand():
    with pytest.raises(ParseError):
        parse("p &")
    with pytest.raises(ParseError):
        parse("[{a} <= ]")


def test_group_constructor_rejects_empty():
    with pytest.raises(EmptyGroupError):
        Group([])
    with pytest.raises(EmptyGroupError):
        Supergroup([])


def test_group_size_cap():
    with pytest.raises(FormulaError, match="limit"):
        Group([f"x{i}" for i in range(9)])


def test_render_examples():
    assert render(parse("[{a}<={b}]")) == "[{a} <= {b}]"
    assert render(parse("p&q")) == "p & q"
    assert render(parse("CD[{a,b};{c}]p")) == "CD[{a,b};{c}] p"
    assert render(parse("~(p & q)")) == "~(p & q)"
    assert render(parse("(p -> q) -> r")) == "(p -> q) -> r"
    assert render(parse("p -> (q -> r)")) == "p -> q -> r"


def test_collectors():
    f = parse("CD[{a,b};{c}] (K{d} p -> [{a} # {b}] & q)")
    assert atom_names(f) == {"p", "q"}
    assert agent_names(f) == {"a", "b", "c", "d"}


def test_expand_sugar_core_examples():
    assert expand_sugar(parse("K{a} p")) == parse("D{a} p")
    assert expand_sugar(parse("[{a} < {b}]")) == \
        parse("[{a} <= {b}] & ~[{b} <= {a}]")
    assert expand_sugar(parse("[{a} == {b}]")) == \
        parse("[{a} <= {b}] & [{b} <= {a}]")
    assert expand_sugar(parse("[{a} # {b}]")) == \
        parse("~[{a} <= {b}] & ~[{b} <= {a}]")
    assert expand_sugar(parse("p | q")) == parse("~(~p & ~q)")
    assert expand_sugar(parse("p -> q")) == parse("~(p & ~q)")


# --- random formulas ------------------------------------------------------

_agents = st.sampled_from(["a", "b", "c"])
_groups = st.sets(_agents, min_size=1, max_size=3).map(Group)
_atoms = st.sampled_from(["p", "q", "H1", "Kp", "D"]).map(Atom)
_cmp = st.builds(Cmp, st.sampled_from(list(CmpOp)), _groups, _groups)


def _compound(children):
    return st.one_of(
        st.builds(Not, children),
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Imp, children, children),
        st.builds(Iff, children, children),
        st.builds(DK, _groups, children),
        st.builds(CK, _groups, children),
        st.builds(IndK, _agents, children),
        st.builds(CDK,
                  st.sets(_groups, min_size=1, max_size=2).map(Supergroup),
                  children),
    )


formulas = st.recursive(st.one_of(_atoms, _cmp), _compound, max_leaves=12)


@given(formulas)
def test_render_parse_round_trip(f):
    assert parse(render(f)) == f


@given(formulas)
def test_expand_sugar_idempotent(f):
    core = expand_sugar(f)
    assert expand_sugar(core) == core


@given(formulas)
def test_expand_sugar_leaves_only_core_nodes(f):
    def check(node):
        assert not isinstance(node, (Or, Imp, Iff, IndK))
        if isinstance(node, Cmp):
            assert node.op is CmpOp.LEQ
        if isinstance(node, Not):
            check(node.sub)
        elif isinstance(node, And):
            check(node.left)
            check(node.right)
        elif isinstance(node, (DK, CK, CDK)):
            check(node.sub)

    check(expand_sugar(f))


@given(formulas)
def test_collectors_survive_desugar(f):
    assert atom_names(expand_sugar(f)) == atom_names(f)
    assert agent_names(expand_sugar(f)) == agent_names(f)
