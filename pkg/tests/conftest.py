import pytest

from bieberbach_lab import geometry


@pytest.fixture(scope="session")
def registered_surfaces():
    """One instance per registry entry, built with default parameters."""
    return {key: builder() for key, builder in geometry.SURFACE_BUILDERS.items()}


@pytest.fixture(scope="session")
def helicoid_unit():
    return geometry.helicoid(r=1.0)


@pytest.fixture(scope="session")
def helicoid_half():
    return geometry.helicoid(r=0.5)


@pytest.fixture(scope="session")
def plane_patch():
    return geometry.plane()
