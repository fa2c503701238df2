import itertools

import numpy as np
import pytest

from oracles import l1_sphere_points
from su2lat import GaugeField, LatticeGeometry, SplitMix64, su2
from su2lat import digitize as dg
from su2lat.errors import EmptyMeshError


def closure_defect(mesh):
    """Largest distance^2 from any pairwise product to the codebook."""
    els = mesh.elements
    prods = su2.multiply(els[:, None, :], els[None, :, :]).reshape(-1, 4)
    best_dot = (prods @ els.T).max(axis=1)
    return float((2.0 - 2.0 * best_dot).max())


@pytest.mark.parametrize("name,size", [("2T", 24), ("2O", 48), ("2I", 120)])
def test_subgroup_sizes(name, size):
    mesh = dg.gen_subgroup(name)
    assert mesh.size == size
    assert np.abs(su2.norm(mesh.elements) - 1).max() < 1e-12


@pytest.mark.parametrize("name", ["2T", "2O", "2I"])
def test_subgroup_closure(name):
    mesh = dg.gen_subgroup(name)
    assert closure_defect(mesh) < 1e-12


@pytest.mark.parametrize("name", ["2T", "2O", "2I"])
def test_subgroup_closed_under_dagger(name):
    els = dg.gen_subgroup(name).elements
    conj = su2.dagger(els)
    best_dot = (conj @ els.T).max(axis=1)
    assert (2.0 - 2.0 * best_dot).max() < 1e-12


def test_tetrahedral_inside_octahedral():
    t = dg.gen_subgroup("2T").elements
    o = dg.gen_subgroup("2O").elements
    best_dot = (t @ o.T).max(axis=1)
    assert (2.0 - 2.0 * best_dot).max() < 1e-12


def test_subgroup_no_duplicates():
    for name in ("2T", "2O", "2I"):
        els = dg.gen_subgroup(name).elements
        d = np.sum((els[:, None, :] - els[None, :, :]) ** 2, axis=-1)
        np.fill_diagonal(d, 1.0)
        assert d.min() > 1e-9


def test_unknown_subgroup_rejected():
    with pytest.raises(ValueError):
        dg.gen_subgroup("2X")


def test_edgewise_level1_is_cross_polytope():
    mesh = dg.gen_edgewise_mesh(1)
    assert mesh.size == 8
    want = set()
    for i in range(4):
        for s in (1.0, -1.0):
            v = [0.0] * 4
            v[i] = s
            want.add(tuple(v))
    assert {tuple(row) for row in mesh.elements} == want


@pytest.mark.parametrize("k", range(1, 9))
def test_edgewise_sizes_against_enumeration_oracle(k):
    mesh = dg.gen_edgewise_mesh(k)
    pts = l1_sphere_points(k)
    assert mesh.size == len(pts) == 8 * k * (k * k + 2) // 3
    # the mesh is exactly the normalized oracle point set
    arr = np.array(sorted(pts), dtype=float)
    arr /= np.linalg.norm(arr, axis=1)[:, None]
    got = {tuple(np.round(row, 12)) for row in mesh.elements}
    want = {tuple(np.round(row, 12)) for row in arr}
    assert got == want


def test_edgewise_unit_norm_and_symmetry():
    mesh = dg.gen_edgewise_mesh(3)
    els = mesh.elements
    assert np.abs(su2.norm(els) - 1).max() < 1e-14
    key = {tuple(np.round(row, 12)) for row in els}
    gen = np.random.Generator(np.random.PCG64(3))
    for _ in range(20):
        perm = gen.permutation(4)
        signs = gen.choice([-1.0, 1.0], size=4)
        mapped = els[:, perm] * signs
        assert {tuple(np.round(row, 12)) for row in mapped} == key


def test_edgewise_level_validation():
    with pytest.raises(ValueError):
        dg.gen_edgewise_mesh(0)


def test_fixed_point_examples():
    out = dg.fixed_point_truncate(np.array([0.7, 0.1, 0.1, np.sqrt(1 - 0.51)]), 2)
    assert out[0] == 0.5 and out[1] == 0.0 and out[2] == 0.0

    out = dg.fixed_point_truncate(np.array([1.0, 0.0, 0.0, 0.0]), 3)
    # 1.0 is not representable; d keeps the sign of the input (zero stays zero)
    assert np.array_equal(out, [0.75, 0.0, 0.0, 0.0])

    g = su2.haar_sample(SplitMix64(4), 100)
    out = dg.fixed_point_truncate(g, 52)
    assert np.abs(out - g).max() < 1e-12


def test_fixed_point_norm_bound(rng):
    g = su2.haar_sample(rng, 2000)
    for p in (2, 3, 5, 8, 16):
        out = dg.fixed_point_truncate(g, p)
        defect = np.abs(np.sum(out * out, axis=-1) - 1.0)
        assert defect.max() <= 8.0 * 2.0 ** (-(p - 1)) + 1e-15


def test_fixed_point_grid_membership(rng):
    g = su2.haar_sample(rng, 500)
    p = 6
    scale = 2 ** (p - 1)
    out = dg.fixed_point_truncate(g, p)
    codes = out * scale
    assert np.abs(codes - np.rint(codes)).max() == 0.0
    assert np.abs(codes).max() <= scale - 1
    # truncation moves magnitudes toward zero
    assert np.all(np.abs(out[:, :3]) <= np.abs(g[:, :3]) + 1e-15)


def test_fixed_point_spec_validation():
    with pytest.raises(ValueError):
        dg.FixedPointSpec(1)
    with pytest.raises(ValueError):
        dg.FixedPointSpec(63)
    assert dg.FixedPointSpec(8).bits_per_link == 24


def test_project_fixed_point_flags_off_manifold(hot_field_4):
    out = dg.project_fixed_point(hot_field_4, dg.FixedPointSpec(4))
    assert not out.on_manifold


def test_project_l2_mesh_field_unchanged(hot_field_4):
    mesh = dg.gen_subgroup("2T")
    once = dg.project_l2(hot_field_4, mesh)
    twice = dg.project_l2(once, mesh)
    assert np.array_equal(once.links, twice.links)


def test_project_l2_example():
    mesh = dg.gen_subgroup("2T")
    g = np.array([0.99, 0.141, 0.0, 0.0])
    g /= np.linalg.norm(g)
    geom = LatticeGeometry((2, 2, 2, 2))
    links = np.tile(g, (geom.volume, 4, 1))
    out = dg.project_l2(GaugeField(geom, links), mesh)
    assert np.array_equal(out.links[0, 0], [1.0, 0.0, 0.0, 0.0])


def test_project_l2_equivariance_edgewise(rng):
    # signed coordinate permutations are isometries mapping the mesh to itself
    mesh = dg.gen_edgewise_mesh(3)
    g = su2.haar_sample(rng, 500)
    gen = np.random.Generator(np.random.PCG64(9))
    perm = gen.permutation(4)
    signs = gen.choice([-1.0, 1.0], size=4)
    rot = lambda q: q[..., perm] * signs
    proj = mesh.elements[mesh.nearest(g)]
    proj_rot = mesh.elements[mesh.nearest(rot(g))]
    assert np.abs(proj_rot - rot(proj)).max() < 1e-12


def test_project_l2_equivariance_subgroup(rng):
    # left multiplication by a group element permutes the codebook
    mesh = dg.gen_subgroup("2I")
    h = mesh.elements[17]
    g = su2.haar_sample(rng, 500)
    proj = mesh.elements[mesh.nearest(g)]
    proj_moved = mesh.elements[mesh.nearest(su2.multiply(h, g))]
    assert np.abs(proj_moved - su2.multiply(h, proj)).max() < 1e-9


def test_nearest_tie_breaks_to_lowest_index():
    mesh = dg.gen_edgewise_mesh(1)
    # equidistant from every element
    idx = mesh.nearest(np.zeros(4))
    assert idx == 0


def test_kdtree_matches_brute_force(rng):
    mesh = dg.gen_edgewise_mesh(8)  # 1408 elements, spatial index path
    assert mesh.size >= 1000
    pts = su2.haar_sample(rng, 2000)
    tree_idx = mesh.nearest(pts)
    brute_idx = np.argmax(pts @ mesh.elements.T, axis=1)
    same = tree_idx == brute_idx
    if not same.all():
        # allow only exact distance ties
        d_tree = np.sum((pts - mesh.elements[tree_idx]) ** 2, axis=1)
        d_brute = np.sum((pts - mesh.elements[brute_idx]) ** 2, axis=1)
        assert np.abs(d_tree - d_brute).max() < 1e-14


def test_monotone_fidelity(thermal_field_6):
    dists = []
    for k in range(1, 7):
        mesh = dg.gen_edgewise_mesh(k)
        proj = dg.project_l2(thermal_field_6, mesh)
        dists.append(np.sum((proj.links - thermal_field_6.links) ** 2, axis=-1).mean())
    assert all(a > b for a, b in zip(dists, dists[1:]))


def test_apr_cold_field_fixed():
    geom = LatticeGeometry((2, 2, 2, 2))
    cold = GaugeField.cold(geom)
    for mesh in (dg.gen_subgroup("2T"), dg.gen_edgewise_mesh(2)):
        for objective in ("single", "all-staples"):
            out = dg.project_apr(cold, mesh, objective=objective)
            assert np.array_equal(out.links, cold.links)


def test_apr_mesh_field_fixed(thermal_field_6):
    mesh = dg.gen_subgroup("2I")
    base = dg.project_l2(thermal_field_6, mesh)
    for objective in ("single", "all-staples"):
        out = dg.project_apr(base, mesh, objective=objective)
        assert np.array_equal(out.links, base.links)


def test_apr_outputs_mesh_elements(thermal_field_6):
    mesh = dg.gen_edgewise_mesh(2)
    out = dg.project_apr(thermal_field_6, mesh)
    d = np.sum((out.links.reshape(-1, 4) - mesh.elements[mesh.nearest(out.links.reshape(-1, 4))]) ** 2, axis=1)
    assert d.max() == 0.0


def test_apr_beats_l2_on_plaquette(thermal_field_6):
    from su2lat.observables import avg_plaquette

    p0 = avg_plaquette(thermal_field_6)
    for mesh in (dg.gen_subgroup("2I"), dg.gen_edgewise_mesh(3)):
        l2 = avg_plaquette(dg.project_l2(thermal_field_6, mesh))
        apr = avg_plaquette(dg.project_apr(thermal_field_6, mesh))
        assert abs(apr - p0) < abs(l2 - p0)


def test_apr_unknown_objective(thermal_field_6):
    with pytest.raises(ValueError):
        dg.project_apr(thermal_field_6, dg.gen_edgewise_mesh(1), objective="plaq")


def test_empty_mesh_rejected():
    with pytest.raises(EmptyMeshError):
        dg.Mesh(elements=np.zeros((0, 4)), kind="edgewise", label="none")


def test_bits_per_link():
    assert dg.bits_per_link(dg.FixedPointSpec(8)) == 24.0
    assert dg.bits_per_link(dg.gen_subgroup("2I")) == pytest.approx(np.log2(120))
    assert dg.bits_per_link(dg.gen_edgewise_mesh(1)) == 3.0
    with pytest.raises(TypeError):
        dg.bits_per_link("2I")


def test_index_bits():
    assert dg.gen_subgroup("2I").index_bits == 7
    assert dg.gen_edgewise_mesh(1).index_bits == 3
