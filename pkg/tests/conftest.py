import math
from pathlib import Path

import numpy as np
import pytest

from symgabor.exprparse import parse_matrix
from symgabor.sampling import Grid, default_grid

DATA = Path(__file__).parent / "data"
PI = math.pi
R2 = math.sqrt(2.0)


def path_of(name):
    return str(DATA / f"{name}.json")


def load(name):
    return parse_matrix((DATA / f"{name}.json").read_text())


# Hand-entered copies of the golden matrices, built with numpy only so the
# parser is checked against an independent source.
PI_LATTICE = np.array([
    [1, PI ** 2, PI / 3, PI],
    [PI ** 2, 1, PI, PI / 2],
    [0, PI, 1 / 3, 1],
    [PI, 0, 1, 1 / 2],
])
PI_SEPARABLE = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1 / 3, 1],
    [0, 0, 1, 1 / 2],
])
PI_S = np.array([
    [1, PI ** 2, PI, 0],
    [PI ** 2, 1, 0, PI],
    [0, PI, 1, 0],
    [PI, 0, 0, 1],
])
PI_THETA = np.array([
    [0, 0, 1 / 3, 1],
    [0, 0, 1, 1 / 2],
    [-1 / 3, -1, 0, 0],
    [-1, -1 / 2, 0, 0],
])
DIAGK_LATTICE = np.array([
    [3, 0, 1 / 2, 0],
    [0, 1, 0, 1],
    [14, 1, 5 / 2, 1],
    [3, 14 / 3, 1 / 2, 5],
])
DIAGK_THETA = np.array([
    [0, 0, 1 / 2, 0],
    [0, 0, 0, 1 / 3],
    [-1 / 2, 0, 0, 0],
    [0, -1 / 3, 0, 0],
])


def diagk_closed_form(a, b):
    """Closed-form X and Y for the diagonal-K lattice with D = diag(a, b)."""
    X = np.diag([a ** 2 / (9 * a ** 4 + 1), b ** 2 / (b ** 4 + 9)])
    Y = -np.array([
        [(42 * a ** 4 + 5) / (9 * a ** 4 + 1), 1.0],
        [1.0, (14 * b ** 4 + 135) / (3 * (b ** 4 + 9))],
    ])
    return X, Y


def form_with_k(k1, k2):
    K = np.diag([k1, k2])
    Z = np.zeros((2, 2))
    return np.block([[Z, K], [-K, Z]])


@pytest.fixture
def grid1():
    return default_grid(1)


@pytest.fixture
def grid2():
    return default_grid(2)


@pytest.fixture
def small_grid1():
    return Grid(1, 128, 12.0)
