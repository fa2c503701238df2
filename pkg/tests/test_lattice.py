import numpy as np
import pytest

from oracles import neighbor_coords, to_matrix, walk_loop_matrix
from su2lat import GaugeField, LatticeGeometry, SplitMix64, su2
from su2lat.errors import InvalidPlaneError
from su2lat.lattice import (
    gauge_transform,
    plaquette_field,
    plaquette_re_trace,
    staple_sum,
    sum_plaquette_re_trace,
)


def test_site_index_basics():
    g = LatticeGeometry((4, 4, 4, 4))
    assert g.site_index([0, 0, 0, 0]) == 0
    assert g.site_index([1, 0, 0, 0]) == 1
    assert g.site_index([0, 0, 0, 1]) == 64
    # out-of-range coordinates wrap
    assert g.site_index([4, 0, 0, 0]) == 0
    assert g.site_index([-1, 0, 0, 0]) == 3


def test_site_coords_roundtrip():
    g = LatticeGeometry((3, 4, 5, 2))
    sites = np.arange(g.volume)
    assert np.array_equal(g.site_index(g.site_coords(sites)), sites)


def test_geometry_validation():
    with pytest.raises(ValueError):
        LatticeGeometry((1, 4, 4, 4))
    with pytest.raises(ValueError):
        LatticeGeometry((4, 4, 4))


def test_neighbor_involution():
    g = LatticeGeometry((2, 2, 2, 2))
    for mu in range(4):
        fwd_then_bwd = g.bwd[g.fwd[:, mu], mu]
        assert np.array_equal(fwd_then_bwd, np.arange(g.volume))


def test_neighbor_wrap():
    g = LatticeGeometry((4, 4, 4, 4))
    assert g.neighbor(g.site_index([3, 0, 0, 0]), 0, +1) == 0


def test_neighbor_exhaustive_against_coordinate_oracle():
    dims = (3, 3, 3, 2)
    g = LatticeGeometry(dims)
    for s in range(g.volume):
        coords = tuple(g.site_coords(s))
        for mu in range(4):
            for sign in (+1, -1):
                want = g.site_index(list(neighbor_coords(coords, dims, mu, sign)))
                assert g.neighbor(s, mu, sign) == want


def test_plaquette_cold():
    f = GaugeField.cold(LatticeGeometry((2, 2, 2, 2)))
    assert plaquette_re_trace(f, 0, 0, 1) == 2.0


def test_plaquette_matches_matrix_oracle(hot_field_4):
    f = hot_field_4
    gen = np.random.Generator(np.random.PCG64(1))
    for _ in range(20):
        s = int(gen.integers(f.geometry.volume))
        mu, nu = gen.permutation(4)[:2]
        steps = [(mu, +1), (nu, +1), (mu, -1), (nu, -1)]
        want = walk_loop_matrix(f, s, steps)
        assert abs(plaquette_re_trace(f, s, mu, nu) - want) < 1e-12


def test_plaquette_base_corner_independent(hot_field_4):
    # same square traversed from each of its four corners
    f = hot_field_4
    g = f.geometry
    s = 37
    mu, nu = 0, 2
    base = plaquette_re_trace(f, s, mu, nu)
    corners = [
        (g.fwd[s, mu], [(nu, +1), (mu, -1), (nu, -1), (mu, +1)]),
        (g.fwd[g.fwd[s, mu], nu], [(mu, -1), (nu, -1), (mu, +1), (nu, +1)]),
        (g.fwd[s, nu], [(nu, -1), (mu, +1), (nu, +1), (mu, -1)]),
    ]
    for site, steps in corners:
        assert abs(walk_loop_matrix(f, site, steps) - base) < 1e-12


def test_plaquette_plane_order_symmetric(hot_field_4):
    f = hot_field_4
    for s in (0, 11, 100):
        for mu in range(4):
            for nu in range(mu + 1, 4):
                a = plaquette_re_trace(f, s, mu, nu)
                b = plaquette_re_trace(f, s, nu, mu)
                assert abs(a - b) < 1e-12


def test_plaquette_same_plane_rejected(hot_field_4):
    with pytest.raises(InvalidPlaneError):
        plaquette_re_trace(hot_field_4, 0, 2, 2)
    with pytest.raises(InvalidPlaneError):
        plaquette_field(hot_field_4, 1, 1)


def test_staple_cold():
    f = GaugeField.cold(LatticeGeometry((2, 2, 2, 2)))
    st = staple_sum(f, 0, 0)
    assert np.array_equal(st, [6.0, 0, 0, 0])
    _, k = su2.normalize(st)
    assert k == 6.0


def test_staple_plaquette_identity(hot_field_4):
    f = hot_field_4
    g = f.geometry
    gen = np.random.Generator(np.random.PCG64(2))
    for _ in range(10):
        s = int(gen.integers(g.volume))
        mu = int(gen.integers(4))
        st = staple_sum(f, s, mu)
        lhs = su2.re_trace(su2.multiply(f.links[s, mu], st))
        total = 0.0
        for nu in range(4):
            if nu == mu:
                continue
            total += plaquette_re_trace(f, s, mu, nu)
            total += plaquette_re_trace(f, g.bwd[s, nu], mu, nu)
        assert abs(lhs - total) < 1e-12


def test_staple_action_double_counting():
    # summing Re Tr(U S) over all links hits each plaquette four times
    f = GaugeField.hot(LatticeGeometry((2, 2, 2, 2)), SplitMix64(7))
    total = 0.0
    for s in range(f.geometry.volume):
        for mu in range(4):
            total += su2.re_trace(su2.multiply(f.links[s, mu], staple_sum(f, s, mu)))
    assert abs(total - 4.0 * sum_plaquette_re_trace(f)) < 1e-10


def test_staple_matches_kernel(hot_field_4):
    from su2lat import _kernels

    f = hot_field_4
    g = f.geometry
    for s, mu in ((0, 0), (17, 3), (200, 1)):
        ka = _kernels.staple_components(f.links, g.fwd, g.bwd, s, mu)
        assert np.abs(np.array(ka) - staple_sum(f, s, mu)).max() < 1e-13


def test_gauge_transform_identity(hot_field_4):
    om = np.zeros((hot_field_4.geometry.volume, 4))
    om[:, 0] = 1.0
    out = gauge_transform(hot_field_4, om)
    assert np.allclose(out.links, hot_field_4.links, atol=1e-15)


def test_gauge_transform_invariance(hot_field_4, rng):
    f = hot_field_4
    om = su2.haar_sample(rng, f.geometry.volume)
    f2 = gauge_transform(f, om)
    for mu in range(4):
        for nu in range(mu + 1, 4):
            delta = plaquette_field(f, mu, nu) - plaquette_field(f2, mu, nu)
            assert np.abs(delta).max() < 1e-10


def test_field_shape_validation():
    g = LatticeGeometry((2, 2, 2, 2))
    with pytest.raises(ValueError):
        GaugeField(g, np.zeros((5, 4, 4)))


def test_reunitarize(hot_field_4):
    f = hot_field_4.copy()
    f.links *= 1.0 + 1e-9
    f.on_manifold = False
    f.reunitarize()
    assert np.abs(su2.norm(f.links) - 1).max() < 1e-15
    assert f.on_manifold
