"""Shared fixtures: expensive forward solves are computed once per session."""

from __future__ import annotations

import numpy as np
import pytest

from convexwave.forward import TraceData
from convexwave.mesh import ScalarField, UniformGrid, make_grid
from convexwave.pipeline import clean_traces


@pytest.fixture(scope="session")
def fd_traces():
    """Noiseless finite-difference traces per benchmark test, memoized."""

    def get(test: int) -> TraceData:
        return clean_traces(test, solver="fd")

    return get


@pytest.fixture
def small_grid() -> UniformGrid:
    return make_grid(0.0, 1.1, 0.0, 2.0, 14, 10)


def random_field(grid: UniformGrid, seed: int, scale: float = 0.5) -> ScalarField:
    """Smooth random field for stencil/gradient oracles."""
    rng = np.random.default_rng(seed)
    X, T = grid.meshgrid()
    v = np.zeros_like(X)
    for kx in range(1, 4):
        for kt in range(1, 4):
            v += (
                rng.normal()
                / (kx * kt)
                * np.sin(kx * X + rng.uniform(0, 6))
                * np.cos(kt * T + rng.uniform(0, 6))
            )
    return ScalarField(grid, scale * v)
