"""Shared fixtures and draw helpers."""

import numpy as np
import pytest

from riskcore import ReferenceDistribution


def draw_monotone_simplex(gen: np.random.Generator, n: int) -> np.ndarray:
    """A random point of the non-increasing simplex: exponential spacings
    normalised and sorted downward."""
    raw = gen.exponential(size=n)
    raw /= raw.sum()
    return np.sort(raw)[::-1].copy()


def draw_simplex(gen: np.random.Generator, n: int) -> np.ndarray:
    raw = gen.exponential(size=n)
    return raw / raw.sum()


@pytest.fixture(scope="session")
def uniform01() -> ReferenceDistribution:
    return ReferenceDistribution("uniform", a=0.0, b=1.0)


@pytest.fixture(scope="session")
def std_normal() -> ReferenceDistribution:
    return ReferenceDistribution("normal", mean=0.0, sd=1.0)


@pytest.fixture(scope="session")
def exponential1() -> ReferenceDistribution:
    return ReferenceDistribution("exponential", rate=1.0)


@pytest.fixture(scope="session")
def point_mass3() -> ReferenceDistribution:
    return ReferenceDistribution("point_mass", c=3.0)
