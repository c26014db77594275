import numpy as np
import pytest

from rectiflat.core import GeneratorSpec, build_space, generate


@pytest.fixture(scope="session")
def line65():
    return generate(GeneratorSpec("line", n=65))


@pytest.fixture(scope="session")
def circle64():
    return generate(GeneratorSpec("circle", n=64))


@pytest.fixture(scope="session")
def cantor2():
    return generate(GeneratorSpec("cantor4", depth=2))


def random_euclidean_space(n, dim, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return build_space(scale * rng.normal(size=(n, dim)), f"euclidean:{dim}")


def brute_excess(a, b, c):
    s = a + b + c
    return max(0.0, s - 2.0 * max(a, b, c))
