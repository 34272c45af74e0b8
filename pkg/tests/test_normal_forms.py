import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from conftest import SMALL_MSLIG, load, random_mslig
from mvg import MsligGrammar, MsligProduction, Nt, SearchBounds, enumerate_mslig, parse_grammar
from mvg.grammar import RESERVED_PREFIX
from mvg.multiset import EMPTY, IndexMultiset
from mvg.normal_forms import etf_shape, is_etf, is_rinf, rinf_type, to_etf, to_rinf

M = IndexMultiset


def test_g1_is_in_neither_form(g1):
    assert not is_rinf(g1)       # p1 pushes five indices at once
    assert not is_etf(g1)        # p2 has five right-hand nonterminals


def test_pure_cfg_is_rinf():
    assert is_rinf(load("dyck"))


def test_terminal_only_grammar_is_etf():
    g = parse_grammar("%type mslig\n%start A\nA -> 'a'\nA -> 'b'\n")
    assert is_etf(g)


def test_rinf_types():
    assert rinf_type(MsligProduction("A", EMPTY, ("a", Nt("B")))) == 1
    assert rinf_type(MsligProduction("A", EMPTY, (Nt("B", M.of("f")),))) == 2
    assert rinf_type(MsligProduction("A", M.of("f"), (Nt("B"),))) == 3
    assert rinf_type(MsligProduction("A", M.of("f"), ("a",))) is None
    assert rinf_type(MsligProduction("A", EMPTY, (Nt("B", M.of("f", "f")),))) is None


def test_g1_push_becomes_chain_of_five(g1):
    r = to_rinf(g1)
    from_p1 = [p for p in r.productions if p.origin == "p1"]
    assert len(from_p1) == 5
    assert all(rinf_type(p) == 2 for p in from_p1)
    fresh = {p.lhs for p in from_p1} | {p.nts[0].name for p in from_p1}
    assert len({x for x in fresh if x.startswith(RESERVED_PREFIX)}) == 4
    assert from_p1[0].lhs == "S" and from_p1[-1].nts[0].name == "S"
    assert is_rinf(r)


def test_pop_core_push_split():
    g = parse_grammar("%type mslig\n%start A\n%indices f g\nA[f] -> B[g] 'c'\nB[g] -> 'c'\n")
    r = to_rinf(g)
    group = [p for p in r.productions if p.origin == "production 1"]
    kinds = [rinf_type(p) for p in group]
    # pop f, core with a pre-terminal, push g, then the pre-terminal rule
    assert kinds == [3, 1, 2, 1]
    pop, core, push, lex = group
    assert pop.lhs == "A" and pop.lhs_indices == M.of("f")
    assert core.lhs == pop.nts[0].name and len(core.rhs) == 2 and all(isinstance(x, Nt) for x in core.rhs)
    assert push.lhs == core.rhs[0].name and push.rhs == (Nt("B", M.of("g")),)
    assert lex.lhs == core.rhs[1].name and lex.rhs == ("c",)


def test_rinf_fixed_point():
    g = load("double")
    r = to_rinf(g)
    assert to_rinf(r) == r


def test_g1_binarization(g1):
    e = to_etf(g1)
    from_p2 = [p for p in e.productions if p.origin == "p2"]
    assert len(from_p2) == 4
    spine = {p.lhs for p in from_p2} - {"S"}
    assert len(spine) == 3
    assert all(etf_shape(p) == "binary" for p in from_p2)
    assert all(not x.indices for p in from_p2 for x in p.nts)


def test_indexed_epsilon_becomes_pair():
    g = parse_grammar("%type mslig\n%start S\n%indices f\nS -> A[f]\nA[f] ->\n")
    e = to_etf(g)
    pair = [p for p in e.productions if p.origin == "production 2"]
    assert len(pair) == 2
    z = pair[0].nts[0].name
    assert pair[0].lhs_indices == M.of("f") and pair[1] == MsligProduction(z, EMPTY, ())


def test_terminals_lifted_from_long_rhs():
    g = parse_grammar("%type mslig\n%start A\n%indices f\nA -> A[f] 'a' 'b'\nA[f] -> 'a'\nA ->\n")
    e = to_etf(g)
    assert is_etf(e)
    lexical = [p for p in e.productions if etf_shape(p) == "terminal" and p.rhs]
    assert {p.rhs for p in lexical} >= {("a",), ("b",)}


@pytest.mark.parametrize("name", ["g1"] + SMALL_MSLIG)
def test_language_kept_small(name):
    g = load(name)
    b = SearchBounds(7)
    ref = enumerate_mslig(g, b).strings
    assert enumerate_mslig(to_rinf(g), b).strings == ref
    assert enumerate_mslig(to_etf(g), b).strings == ref
    assert enumerate_mslig(to_etf(to_rinf(g)), b).strings == ref


def test_transforms_are_deterministic(g1):
    assert to_rinf(g1) == to_rinf(g1)
    assert [str(p) for p in to_etf(g1).productions] == [str(p) for p in to_etf(g1).productions]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_mslig())
def test_random_grammars_keep_their_language(g):
    b = SearchBounds(4, max_total_indices=6)
    ref = enumerate_mslig(g, b)
    assume(ref.stats.exact)
    r, e = to_rinf(g), to_etf(g)
    assert is_rinf(r) and is_etf(e)
    for h in (r, e):
        got = enumerate_mslig(h, b)
        assume(got.stats.exact)
        assert got.strings == ref.strings
