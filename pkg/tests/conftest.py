import numpy as np
import pytest

from oslo.episodes import SyntheticSpec, generate_synthetic_dataset, sample_episode
from oslo.preprocess import CenteringMode, normalize_episode
from oslo.types import Episode, EpisodeSpec


def random_unit(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def make_episode(rng, k=3, shots=2, n_query=12, d=8, n_outliers=4):
    """Small random episode with unit-norm features (not from any dataset)."""
    support = random_unit(rng, k * shots, d)
    labels = np.repeat(np.arange(k), shots)
    query = random_unit(rng, n_query, d)
    gt = np.concatenate([rng.integers(0, k, n_query - n_outliers), -np.ones(n_outliers, int)])
    return Episode(support, labels, query, gt, k)


@pytest.fixture(scope="session")
def synth_dataset():
    return generate_synthetic_dataset(SyntheticSpec(15, 16, 1.0, 30, 7), split="test")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def task_episode(synth_dataset):
    ep = sample_episode(synth_dataset, EpisodeSpec(n_shots=2, rng_seed=3), 0)
    return normalize_episode(ep, CenteringMode("task"))


_ACCEPTANCE = pytest.StashKey[list]()


class _Criterion:
    """Context manager recording one PASS/FAIL line per acceptance criterion."""

    def __init__(self, lines, name):
        self.lines, self.name, self.notes = lines, name, []

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.notes)
        if exc is not None:
            detail = f"{detail}; {exc}" if detail else str(exc)
        line = f"[{status}] {self.name}" + (f" :: {detail}" if detail else "")
        self.lines.append(line)
        print("\n" + line)
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])
    return lambda name: _Criterion(lines, name)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
