import pytest

from penum import builtin_tables, parse_corpus

# Two-entry account: a sexagesimal amount of M056~f and a capacity amount
# of M288, the classic 2.5:1 pairing.
TABLET_P008805 = """\
&P008805
1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)
2. M341 M288 , 7(N14) 2(N01) 3(N39B)
"""


@pytest.fixture(scope="session")
def tables():
    return builtin_tables()


@pytest.fixture(scope="session")
def fig_corpus():
    return parse_corpus(TABLET_P008805)


@pytest.fixture(scope="session")
def fig_tablet(fig_corpus):
    return fig_corpus.tablets[0]
