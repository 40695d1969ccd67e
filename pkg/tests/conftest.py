import numpy as np
import pytest
import torch

from rse_defense.corpus import LabeledExample, build_vocab

torch.set_num_threads(1)


def toy_corpus(n=200, seed=0, length=8):
    """Two classes separable by which word family appears."""
    rng = np.random.default_rng(seed)
    fam = [["alpha", "beta", "gamma"], ["delta", "epsilon", "zeta"]]
    noise = ["the", "a", "of", "and", "in"]
    out = []
    for i in range(n):
        y = i % 2
        toks = [str(rng.choice(fam[y])) if rng.random() < 0.4 else str(rng.choice(noise))
                for _ in range(length)]
        toks[int(rng.integers(length))] = str(rng.choice(fam[y]))
        out.append(LabeledExample(tuple(toks), y))
    return out


@pytest.fixture
def toy():
    data = toy_corpus()
    return data, build_vocab(data)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
