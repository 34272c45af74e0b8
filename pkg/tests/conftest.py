from pathlib import Path

import pytest
from hypothesis import strategies as st

from mvg import MsligGrammar, MsligProduction, Nt, parse_grammar, parse_tree
from mvg.multiset import EMPTY, IndexMultiset as M

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# handcrafted {}-LIGs used by the oracle tests, besides COUNT-5
SMALL_MSLIG = ["mix", "dyck", "double", "split"]


def load(name):
    return parse_grammar((CORPUS / f"{name}.mvg").read_text(encoding="utf-8"))


def load_tree(name, g):
    return parse_tree((CORPUS / f"{name}.tree").read_text(encoding="utf-8"), g)


@pytest.fixture(scope="session")
def g1():
    return load("g1")


@pytest.fixture(scope="session")
def g2():
    return load("g2")


@pytest.fixture(scope="session")
def clause_tree(g2):
    return load_tree("clause", g2)


@pytest.fixture(scope="session")
def bad_tree(g2):
    return load_tree("clause_violating", g2)


# -- random small {}-LIGs for property tests ------------------------------------

NTS = ["S", "A", "B"]
# pushed indices must all be popped again, so most draws push nothing
ms = st.sampled_from([(), (), (), ("f",), ("g",), ("f", "g"), ("f", "f")]).map(lambda xs: M.of(*xs))
pop = st.sampled_from([(), (), ("f",), ("g",)]).map(lambda xs: M.of(*xs))
nt = st.builds(Nt, st.sampled_from(NTS), ms)
item = st.one_of(nt, st.sampled_from(["a", "b"]))
rhs = st.lists(item, min_size=1, max_size=3).map(tuple)
production = st.builds(MsligProduction, st.sampled_from(NTS), pop, rhs)


@st.composite
def random_mslig(draw):
    # every nonterminal gets a terminal-only rule so that most draws derive something
    base = [MsligProduction(a, draw(pop), tuple(draw(st.lists(st.sampled_from(["a", "b"]), max_size=1))))
            for a in NTS]
    # the start symbol is given a second rule so that it reaches the others
    prods = [MsligProduction("S", EMPTY, draw(rhs.filter(lambda r: any(isinstance(x, Nt) for x in r))))]
    prods += draw(st.lists(production, min_size=1, max_size=5))
    return MsligGrammar(set(NTS), {"a", "b"}, {"f", "g"}, tuple(base + prods), "S")


# -- one summary line per acceptance criterion ------------------------------

_VERDICTS: dict[int, tuple[bool, str]] = {}


class Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        msg = self.title + (f" ({'; '.join(self.details)})" if self.details else "")
        if exc_type is not None:
            msg += f" -- {exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        _VERDICTS[self.number] = (exc_type is None, msg)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, msg = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {msg}")
