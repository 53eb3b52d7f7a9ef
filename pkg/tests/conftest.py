import pytest

import sralloc as sa


@pytest.fixture(scope="session")
def kernels():
    return sa.bundled_kernels()


@pytest.fixture(scope="session")
def reuse_map(kernels):
    return {name: sa.analyze_all(k) for name, k in kernels.items()}


@pytest.fixture(scope="session")
def oracle_map(kernels):
    return {name: sa.oracle_analysis(k) for name, k in kernels.items()}


@pytest.fixture(scope="session")
def example(kernels):
    return kernels["example"]


@pytest.fixture(scope="session")
def example_reuse(reuse_map):
    return reuse_map["example"]


def beta_tuple(kernel, alloc):
    """Allocation vector in source (first-appearance) order."""
    return tuple(alloc.beta[a] for a in kernel.arrays)
