"""Shared fixtures and helpers for the test suite."""

import random

import numpy as np
import pytest

from semogp.dataset import Dataset, synthetic_blobs, write_synthetic_csv
from semogp.gp_core import Call, Feature, Individual


class ScriptedRandom(random.Random):
    """random.Random whose random()/randrange() answers can be scripted.

    Script entries are consumed in call order: floats answer random(), ints
    answer randrange(n) verbatim, and the string "last" answers randrange(n)
    with n - 1. When the script is exhausted (or the head does not match the
    called method) the seeded stream takes over.
    """

    def __new__(cls, script=(), seed=0):
        return super().__new__(cls, seed)

    def __init__(self, script=(), seed=0):
        super().__init__(seed)
        self.script = list(script)

    def random(self):
        if self.script and isinstance(self.script[0], float):
            return self.script.pop(0)
        return super().random()

    def randrange(self, start, stop=None, step=1):
        head = self.script[0] if self.script else None
        if stop is None and step == 1:
            if head == "last":
                self.script.pop(0)
                return start - 1
            if isinstance(head, int) and not isinstance(head, bool):
                return self.script.pop(0)
        return super().randrange(start, stop, step)


def left_comb(depth: int):
    """A left-leaning chain of additions with the given tree depth."""
    tree = Feature(0)
    for _ in range(depth):
        tree = Call("+", tree, Feature(0))
    return tree


def make_individual(semantics=None, objectives=None, tree=None):
    return Individual(
        tree=tree if tree is not None else Feature(0),
        semantics=None if semantics is None else np.asarray(semantics, dtype=np.float64),
        objectives=None if objectives is None else np.asarray(objectives, dtype=np.float64),
    )


def blob_dataset(n_cases=60, imbalance=3, seed=0) -> Dataset:
    rows = synthetic_blobs(n_cases, imbalance, seed)
    features = np.array([[x0, x1] for x0, x1, _ in rows])
    labels = np.array([label == "pos" for _, _, label in rows])
    return Dataset(features, labels)


@pytest.fixture
def small_dataset() -> Dataset:
    return blob_dataset()


@pytest.fixture
def blob_csv(tmp_path):
    path = tmp_path / "blobs.csv"
    write_synthetic_csv(path, 200, 9, seed=0)
    return path
