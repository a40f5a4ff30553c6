import numpy as np
import pytest

from ellipsoidrep import synthetic


@pytest.fixture(scope="session")
def cloud_suite():
    """The shared 20-cloud synthetic mix (name, points) pairs."""
    return synthetic.suite()


@pytest.fixture(scope="session")
def labeled_cloud():
    pts = synthetic.ellipsoid_surface(512, 16, radii=(1.0, 0.6, 0.3))
    return pts, synthetic.height_bands(pts, 4)


def assert_reps_equal(a, b):
    """Bit-level equality of two representations' stored content."""
    assert len(a.nodes) == len(b.nodes)
    assert a.n_points == b.n_points
    for na, nb in zip(a.nodes, b.nodes):
        assert na.level == nb.level and na.parent == nb.parent
        assert np.array_equal(na.members, nb.members)
        assert np.array_equal(na.feature.as_array(), nb.feature.as_array())
        assert (na.map is None) == (nb.map is None)
        if na.map is not None:
            assert na.map.m == nb.map.m
            assert na.map.layout == nb.map.layout
            assert np.array_equal(na.map.data, nb.map.data)
            assert np.array_equal(na.map.point_index, nb.map.point_index)
