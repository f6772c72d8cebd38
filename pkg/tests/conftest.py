"""Shared fixtures: equilibrium measures and Markov chains are expensive,
so everything heavy is session-scoped and computed lazily."""

import pytest

from coulombgas import potential as pot
from coulombgas import sampler as smp


@pytest.fixture(scope="session")
def quad():
    return pot.quadratic()


@pytest.fixture(scope="session")
def eq_fast(quad):
    """Coarse equilibrium measure for unit tests (h = 0.02)."""
    return pot.equilibrium_measure(quad, grid=0.02, tol=5e-5, max_iter=800)


@pytest.fixture(scope="session")
def eq_fine(quad):
    """Acceptance-grade equilibrium measure (h = 0.01, tight tolerance)."""
    return pot.equilibrium_measure(quad, grid=0.01, tol=2e-5, max_iter=1500)


def _chain(quad, eq, n, n_sweeps, burn_in, thin, seed):
    import time

    cfg = smp.SamplerConfig(n=n, beta=2.0, n_sweeps=n_sweeps,
                            burn_in_sweeps=burn_in, thin=thin, seed=seed)
    started = time.monotonic()
    chain = smp.sample_gibbs(cfg, quad, eq=eq)
    chain.metadata["build_seconds"] = time.monotonic() - started
    return chain


@pytest.fixture(scope="session")
def chain64(quad, eq_fast):
    return _chain(quad, eq_fast, 64, 1700, 200, 5, seed=64)


@pytest.fixture(scope="session")
def chain256(quad, eq_fast):
    return _chain(quad, eq_fast, 256, 4400, 200, 15, seed=256)


@pytest.fixture(scope="session")
def chain1024(quad, eq_fast):
    return _chain(quad, eq_fast, 1024, 1500, 220, 20, seed=1024)


@pytest.fixture(scope="session")
def chain4096(quad, eq_fast):
    return _chain(quad, eq_fast, 4096, 640, 160, 30, seed=4096)
