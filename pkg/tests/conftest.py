"""Shared fixtures and field generators."""

import numpy as np
import pytest

from geovar.grid import GridSpec, StaggeredVectorField, VertexField, from_stream_function


def random_divfree(grid: GridSpec, rng: np.random.Generator, scale: float = 1.0) -> StaggeredVectorField:
    """Random exactly divergence-free edge field from a stream function.

    On walled grids the stream function is held constant on the boundary
    so the field is tangential.
    """
    psi = scale * rng.standard_normal(grid.vertex_shape)
    if not grid.periodic:
        psi = psi.copy()
        psi[0, :] = psi[-1, :] = psi[:, 0] = psi[:, -1] = 0.0
    return from_stream_function(VertexField(grid, psi))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
