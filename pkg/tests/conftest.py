"""Shared discretized operators; assembled once per session."""

import pytest

from gibbskit import GridSpec, PotentialSpec, assemble_and_solve


@pytest.fixture(scope="session")
def ham_main():
    """Workhorse quadratic-confinement grid (levels 2j+2 to ~1e-5)."""
    return assemble_and_solve(GridSpec(1, 12.0, 2400), PotentialSpec(2.0), 160)


@pytest.fixture(scope="session")
def ham_fine():
    """Finer grid for absolute chemical-potential and field tolerances."""
    return assemble_and_solve(GridSpec(1, 12.0, 3200), PotentialSpec(2.0), 220)


@pytest.fixture(scope="session")
def ham_weyl():
    """Wide box with ~500 trusted levels for semiclassical scans."""
    return assemble_and_solve(GridSpec(1, 34.0, 3400), PotentialSpec(2.0), 520)


@pytest.fixture(scope="session")
def ham_coarse():
    """Small cheap grid for structural and error-path tests."""
    return assemble_and_solve(GridSpec(1, 10.0, 600), PotentialSpec(2.0), 40)
