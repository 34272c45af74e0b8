from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings

from conftest import SMALL_MSLIG, load, random_mslig
from mvg import (MsligGrammar, MsligProduction, Nt, SearchBounds, StepApplication, apply_step,
                 check_linear_restriction, derivation_metrics, enumerate_forms, enumerate_mslig)
from mvg.derivation import DerivationMetrics, start_form, successors
from mvg.errors import (BadDistribution, EmptyDistributionTarget, InvalidDerivation, LhsMismatch,
                        NotSubMultiset)
from mvg.multiset import EMPTY, IndexMultiset, distributions, msum
from mvg.normal_forms import to_etf, to_rinf

M = IndexMultiset
FIVE = M.of("s_a", "s_b", "s_c", "s_d", "s_e")


def prod(g, label):
    return next(p for p in g.productions if p.label == label)


def times(m, k):
    out = EMPTY
    for _ in range(k):
        out = msum(out, m)
    return out


def test_push_adds_to_what_is_there(g1):
    form = (Nt("S", FIVE),)
    out = apply_step(StepApplication(form, 0, prod(g1, "p1"), (FIVE,)))
    assert out == (Nt("S", times(FIVE, 2)),)


def test_p2_routes_each_index_to_its_letter(g1):
    form = (Nt("S", times(FIVE, 3)),)
    shares = tuple(M({f"s_{c}": 3}) for c in "abcde")
    out = apply_step(StepApplication(form, 0, prod(g1, "p2"), shares))
    assert out == tuple(Nt(c.upper(), M({f"s_{c}": 3})) for c in "abcde")


def test_epsilon_needs_exact_multiset(g1):
    assert apply_step(StepApplication((Nt("A"),), 0, prod(g1, "p4"), ())) == ()
    with pytest.raises(EmptyDistributionTarget):
        apply_step(StepApplication((Nt("A", M.of("s_a")),), 0, prod(g1, "p4"), ()))
    assert issubclass(EmptyDistributionTarget, BadDistribution)


def test_step_errors(g1):
    p3 = prod(g1, "p3")
    with pytest.raises(LhsMismatch):
        apply_step(StepApplication((Nt("B", M.of("s_a")),), 0, p3, (EMPTY,)))
    with pytest.raises(LhsMismatch):
        apply_step(StepApplication(("a",), 0, p3, (EMPTY,)))
    with pytest.raises(NotSubMultiset):
        apply_step(StepApplication((Nt("A"),), 0, p3, (EMPTY,)))
    with pytest.raises(BadDistribution):
        apply_step(StepApplication((Nt("A", M.of("s_a", "s_a")),), 0, p3, (EMPTY,)))
    with pytest.raises(BadDistribution):
        apply_step(StepApplication((Nt("A", M.of("s_a")),), 0, p3, (EMPTY, EMPTY)))


def test_successors_of_start(g1):
    b = SearchBounds(20)
    assert successors(start_form(g1), g1, b) == {(Nt("S", FIVE),), tuple(Nt(c) for c in "ABCDE")}
    assert successors(("a", "b"), g1, b) == set()
    assert successors((Nt("A", M.of("s_a")),), g1, b) == {(Nt("A"), "a")}


def test_enumeration_examples(g1):
    assert enumerate_mslig(g1, SearchBounds(5)).strings == {(), tuple("abcde")}
    assert tuple("aaabbbcccdddeee") in enumerate_mslig(g1, SearchBounds(15))
    assert enumerate_mslig(g1, SearchBounds(0)).strings == {()}
    assert enumerate_mslig(load("double"), SearchBounds(0)).strings == {()}
    no_eps = MsligGrammar({"S"}, {"a"}, set(), (MsligProduction("S", EMPTY, ("a",)),), "S")
    assert enumerate_mslig(no_eps, SearchBounds(0)).strings == set()


def test_count5_up_to_twenty(g1):
    got = enumerate_mslig(g1, SearchBounds(20)).strings
    assert got == {tuple(c for c in "abcde" for _ in range(n)) for n in range(5)}


def three_pump_derivation(g1, pumps=3):
    """S =>p1 ... =>p2 A B C D E, then each letter popped ``pumps`` times and erased."""
    steps = []
    form = start_form(g1)

    def step(label, shares, pos=None):
        nonlocal form
        if pos is None:
            pos = next(i for i, x in enumerate(form) if isinstance(x, Nt))
        s = StepApplication(form, pos, prod(g1, label), shares)
        steps.append(s)
        form = apply_step(s)

    for k in range(pumps):
        step("p1", (times(FIVE, k),))
    step("p2", tuple(M({f"s_{c}": pumps}) for c in "abcde"))
    for c, (pop, eps) in zip("abcde", [("p3", "p4"), ("p5", "p6"), ("p7", "p8"), ("p9", "p10"), ("p11", "p12")]):
        for k in range(pumps, 0, -1):
            step(pop, (M({f"s_{c}": k - 1}),))
        step(eps, ())
    return steps, form


def test_three_pump_metrics(g1):
    steps, form = three_pump_derivation(g1)
    assert form == tuple(c for c in "abcde" for _ in range(3))
    m = derivation_metrics(steps)
    assert m == DerivationMetrics(15, 5, 15)
    assert check_linear_restriction(m, 1, 1)


def test_tiny_metrics():
    g = MsligGrammar({"S"}, {"a"}, set(), (MsligProduction("S", EMPTY, ("a",)), MsligProduction("S", EMPTY, ())), "S")
    one = [StepApplication((Nt("S"),), 0, g.productions[0], ())]
    eps = [StepApplication((Nt("S"),), 0, g.productions[1], ())]
    assert derivation_metrics(one) == DerivationMetrics(0, 0, 1)
    assert derivation_metrics(eps) == DerivationMetrics(0, 1, 0)


def test_broken_derivations(g1):
    steps, _ = three_pump_derivation(g1, 1)
    with pytest.raises(InvalidDerivation):
        derivation_metrics(steps[:-1])
    with pytest.raises(InvalidDerivation):
        derivation_metrics(steps[1:])
    with pytest.raises(InvalidDerivation):
        derivation_metrics([])


def test_linear_restriction_arithmetic():
    assert check_linear_restriction(DerivationMetrics(15, 5, 15), 1, 1)
    assert not check_linear_restriction(DerivationMetrics(16, 5, 15), 1, 1)
    assert not check_linear_restriction(DerivationMetrics(1, 0, 0), 5, 5)
    assert not check_linear_restriction(DerivationMetrics(0, 1, 0), 5, 5)
    assert check_linear_restriction(DerivationMetrics(3, 0, 2), Fraction(3, 2), 0)


@pytest.mark.parametrize("name", ["g1"] + SMALL_MSLIG)
def test_witnesses_replay(name):
    g = load(name)
    e = enumerate_mslig(g, SearchBounds(7))
    for w in e.strings:
        steps = e.witness(w)
        assert derivation_metrics(steps).yield_length == len(w)
        assert apply_step(steps[-1]) == w


@pytest.mark.parametrize("name", ["g1", "dyck", "double", "split"])
def test_item_memo_agrees_with_form_search(name):
    # the form search does not terminate on grammars that can grow forms
    # without adding terminals, such as mix with X -> X X and X -> eps
    g = load(name)
    b = SearchBounds(6)
    forms = enumerate_forms(g, b)
    assert enumerate_mslig(g, b).strings == forms.strings
    for w in list(forms.strings)[:10]:
        assert apply_step(forms.witness(w)[-1]) == w


def test_item_memo_agrees_with_form_search_on_converted_g2(g2):
    from mvg import uvgdl_to_mslig
    h = uvgdl_to_mslig(g2)
    b = SearchBounds(7)
    assert enumerate_mslig(h, b).strings == enumerate_forms(h, b).strings


def test_unknown_witness(g1):
    e = enumerate_mslig(g1, SearchBounds(5))
    with pytest.raises(KeyError):
        e.witness(("a",))


def test_bounds_are_checked():
    with pytest.raises(ValueError):
        SearchBounds(-1)


def test_leftmost_choice_does_not_matter():
    # rewriting any nonterminal first reaches the same terminal strings
    g = load("split")
    b = SearchBounds(5)
    left = enumerate_forms(g, b, leftmost=True).strings
    anywhere = enumerate_forms(g, b, leftmost=False).strings
    assert left == anywhere


def brute_force(g, max_yield, max_indices=4, max_len=6, depth=12):
    """Leftmost search that prunes only by terminal count, index total and
    form length; it may miss strings but never uses the yield bounds."""
    frontier = {(Nt(g.start),)}
    found = set()
    for _ in range(depth):
        nxt = set()
        for form in frontier:
            pos = next((i for i, x in enumerate(form) if isinstance(x, Nt)), None)
            if pos is None:
                found.add(form)
                continue
            item = form[pos]
            for p in g.productions_for(item.name):
                if not p.lhs_indices <= item.indices:
                    continue
                rest = item.indices - p.lhs_indices
                if not p.nts:
                    shares = [()] if not rest else []
                else:
                    shares = distributions(rest, len(p.nts))
                for dist in shares:
                    new = apply_step(StepApplication(form, pos, p, dist))
                    if (sum(not isinstance(x, Nt) for x in new) <= max_yield and len(new) <= max_len
                            and sum(len(x.indices) for x in new if isinstance(x, Nt)) <= max_indices):
                        nxt.add(new)
        frontier = nxt
    found |= {f for f in frontier if not any(isinstance(x, Nt) for x in f)}
    return found


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(random_mslig())
def test_pruning_never_loses_strings(g):
    b = SearchBounds(3, max_total_indices=4)
    fast = enumerate_mslig(g, b).strings
    assert brute_force(g, 3) <= fast
    for h in (to_rinf(g), to_etf(g)):
        assert brute_force(h, 3, depth=16, max_len=7) <= enumerate_mslig(h, b).strings
