import numpy as np
import pytest

from tlgc.hsi_io import LabeledDataset


def random_problem(seed, D, n, C, spread=1.5):
    """Gaussian classes with shifted means; every class gets at least two samples."""
    gen = np.random.default_rng(seed)
    labels = np.concatenate([np.repeat(np.arange(1, C + 1), 2), gen.integers(1, C + 1, n - 2 * C)])
    means = gen.normal(0, spread, (D, C))
    X = means[:, labels - 1] + gen.standard_normal((D, n))
    return LabeledDataset(X, labels)


@pytest.fixture
def tiny_1d():
    # class 1 = {0, 2}, class 2 = {10}
    return LabeledDataset(np.array([[0.0, 2.0, 10.0]]), [1, 1, 2])


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, passed, detail):
        status = passed if isinstance(passed, str) else ("PASS" if passed else "FAIL")
        line = f"criterion {number:>2}: {status}  {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
