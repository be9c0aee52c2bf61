import numpy as np
import pytest

from gmem import CorpusSpec, MemoryNet, generate_corpus, make_pattern

ACCEPTANCE_LINES = []


def overlap_winner(stored, bits, presented):
    """Brute-force reference: argmax of presented-cell overlap, lowest index on ties.

    Plain Python loops over lists; shares nothing with the weight machinery.
    """
    best, best_count = None, -1
    for i, pattern in enumerate(stored):
        count = 0
        for a, b, shown in zip(pattern, bits, presented):
            if shown and a == 1 and b == 1:
                count += 1
        if count > best_count:
            best, best_count = i, count
    return best


@pytest.fixture
def three_net():
    """Small net storing P0=[1,0,1,0], P1=[0,1,1,0], P2=[1,1,0,1] at defaults."""
    net = MemoryNet(2, 2)
    for bits in ([1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 1]):
        net.store(make_pattern(2, 2, bits))
    return net


@pytest.fixture(scope="session")
def qr_corpus():
    return generate_corpus(CorpusSpec(298, 116, 116, (0.475, 0.507), False, 42))


@pytest.fixture(scope="session")
def qr_net(qr_corpus):
    net = MemoryNet(116, 116)
    net.store_all(qr_corpus)
    return net


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
