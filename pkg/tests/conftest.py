"""Shared fixtures and small generators for the test suite.

Randomness is always routed through numpy Generators with fixed seeds, so the
suite is deterministic run to run.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from blaschke import BlaschkeProduct, CompositionChain, ToleranceConfig

TAU = 2.0 * math.pi


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_point(rng: np.random.Generator, radius: float = 0.85) -> complex:
    r = radius * math.sqrt(rng.uniform(0.0, 1.0))
    t = rng.uniform(0.0, TAU)
    return r * cmath.exp(1j * t)


def random_product(
    rng: np.random.Generator,
    degree: int,
    radius: float = 0.85,
    origin_zero: bool = False,
) -> BlaschkeProduct:
    zeros = [random_point(rng, radius) for _ in range(degree)]
    if origin_zero:
        zeros[0] = 0j
    gamma = cmath.exp(1j * rng.uniform(0.0, TAU))
    return BlaschkeProduct(gamma, tuple(zeros))


def random_degree2_chain(
    rng: np.random.Generator,
    factor_count: int,
    radius: float = 0.6,
) -> CompositionChain:
    factors = tuple(
        random_product(rng, 2, radius=radius) for _ in range(factor_count)
    )
    return CompositionChain(factors)


def circle_grid(count: int, offset: float = 0.0) -> list[complex]:
    return [cmath.exp(1j * (offset + TAU * k / count)) for k in range(count)]


def sup_difference(f, g, points) -> float:
    return max(abs(f(z) - g(z)) for z in points)


@pytest.fixture
def tol() -> ToleranceConfig:
    return ToleranceConfig()
