import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symtc import geometry as geo, maps
from symtc.errors import CoincidentImages, DegeneratePair, NearZeroVector, Unsupported
from symtc.geometry import SpaceDescriptor
from symtc.sampling import sample_rng, uniform_sphere

unit = lambda rng, d: uniform_sphere(rng, d)


# quaternion units 1, i, j, k as basis vectors; products by the Hamilton rules
_HAMILTON = {
    (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}


def _basis(k, d=4):
    e = np.zeros(d)
    e[k] = 1
    return e


def test_complex_product_matches_python_complex():
    c = maps.builtin_bilinear("complex")
    rng = np.random.default_rng(1)
    for _ in range(20):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        z = complex(*x) * complex(*y)
        assert np.allclose(c(x, y), [z.real, z.imag], atol=1e-14)


def test_quaternion_units():
    q = maps.builtin_bilinear("quaternion")
    for a in range(4):
        assert np.array_equal(q(_basis(0), _basis(a)), _basis(a))
        assert np.array_equal(q(_basis(a), _basis(0)), _basis(a))
    for (a, b), (sign, c) in _HAMILTON.items():
        assert np.array_equal(q(_basis(a), _basis(b)), sign * _basis(c)), (a, b)


def test_octonion_is_norm_multiplicative_and_unital():
    o = maps.builtin_bilinear("octonion")
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal((2, 500, 8))
    assert np.allclose(np.linalg.norm(o(x, y), axis=-1), np.linalg.norm(x, axis=-1) * np.linalg.norm(y, axis=-1))
    assert np.allclose(o(_basis(0, 8), y[0]), y[0])
    # the quaternions sit inside as the first four coordinates
    q = maps.builtin_bilinear("quaternion")
    a, b = np.zeros(8), np.zeros(8)
    a[:4], b[:4] = x[0, :4], x[1, :4]
    assert np.allclose(o(a, b)[:4], q(x[0, :4], x[1, :4]))


@pytest.mark.parametrize("r", range(1, 7))
def test_poly_matches_numpy_polymul(r):
    spec = maps.builtin_bilinear("poly", r=r)
    assert (spec.domain_dim, spec.target_dim) == (r, 2 * r)
    rng = np.random.default_rng(r)
    for _ in range(10):
        x, y = rng.standard_normal((2, r + 1))
        assert np.allclose(spec(x, y), np.polymul(x[::-1], y[::-1])[::-1], atol=1e-13)


def test_sphere_map_examples():
    assert geo.UnitVector([0, 1]) == maps.sphere_map(maps.builtin_bilinear("complex"), [1, 0], [0, 1])
    assert maps.sphere_map(maps.builtin_bilinear("quaternion"), _basis(0), _basis(2)).tolist() == [0, 0, 1, 0]
    out = maps.sphere_map(maps.builtin_bilinear("poly", r=2), [1, 0, 0], [1, 0, -1])
    assert np.allclose(out.coords, np.array([1, 0, -1, 0, 0]) / math.sqrt(2))
    with pytest.raises(geo.DimensionMismatch):
        maps.sphere_map(maps.builtin_bilinear("complex"), [1, 0, 0], [1, 0, 0])


def test_unknown_map_rejected():
    with pytest.raises(Unsupported):
        maps.builtin_bilinear("sedenion")
    with pytest.raises(Unsupported):
        maps.builtin_bilinear("poly")


@pytest.mark.parametrize("kind,sym", [("complex", True), ("quaternion", False), ("octonion", False)])
def test_relation_profiles(kind, sym):
    spec = maps.builtin_bilinear(kind)
    assert maps.check_relations(spec, "AXIAL2", 2000).passed
    rep = maps.check_relations(spec, "SYM", 2000)
    assert rep.passed is sym
    if not sym:
        assert rep.max_residual > 1.0


def test_bilinearity_and_nonvanishing():
    for spec in (maps.builtin_bilinear("octonion"), maps.builtin_bilinear("poly", r=4)):
        assert maps.check_bilinearity(spec, 200) < 1e-12
        vanishing, smallest = maps.check_nonvanishing(spec, 2000)
        assert vanishing == 0 and smallest > 0


@pytest.mark.parametrize("n,m", [(0, 3), (1, 3), (1, 4), (2, 6)])
def test_lens_maps_scale_with_omega(n, m):
    for k in (2 * n + 1, (n + 1) ** 2):
        spec = maps.builtin_bilinear("lens", n=n, m=m, k=k)
        assert maps.check_relations(spec, "TCE", 2000).passed
        assert maps.check_relations(spec, "AXIAL2", 2000).passed
    if m > 2:
        # omega-scaling and swap symmetry are incompatible once omega^2 != 1
        assert not maps.check_relations(maps.builtin_bilinear("lens", n=n, m=m), "SYM", 500).passed


def test_relation_residuals_split_over_index_ranges():
    spec = maps.builtin_bilinear("poly", r=3)
    full, xs, _ = maps.relation_residuals(spec, "SYM", 4, 0, 300)
    a, xa, _ = maps.relation_residuals(spec, "SYM", 4, 0, 120)
    b, xb, _ = maps.relation_residuals(spec, "SYM", 4, 120, 300)
    assert np.array_equal(np.concatenate([a, b]), full)
    assert np.array_equal(np.concatenate([xa, xb]), xs)


def test_report_json_and_singular_inputs():
    spec = maps.builtin_bilinear("complex")
    doc = maps.check_relations(spec, "SYM", 100, seed=3).to_json()
    assert doc["pass"] and doc["samples"] == 100 and doc["seed"] == 3 and len(doc["worst_input"]) == 2
    zero = maps.BilinearMapSpec("zero", 1, 1, lambda x, y: 0 * x, frozenset({"SYM"}))
    rep = maps.check_relations(zero, "SYM", 50)
    assert not rep.passed and rep.singular == 50 and rep.to_json()["max_residual"] is None


# ------------------------------------------------------------------ Psi


def test_psi_split_on_frames():
    u, v = maps.psi_split([1, 0], [0, 1])
    s = 1 / math.sqrt(2)
    assert np.allclose(u.coords, [s, s]) and np.allclose(v.coords, [s, -s])
    with pytest.raises(NearZeroVector):
        maps.psi_split([1, 0], [1, 0])
    with pytest.raises(NearZeroVector):
        maps.psi_split([0, 1], [0, -1])


@pytest.mark.parametrize("r", [1, 3, 6])
def test_psi_exchange(r):
    reps = maps.psi_exchange_suite(r, 1000)
    assert [rep.relation for rep in reps] == ["exchange:swap->sign", "exchange:sign->swap"]
    assert all(rep.passed for rep in reps)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 8))
def test_psi_generators_land_in_other_class(seed, r):
    rng = np.random.default_rng(seed)
    x, y = unit(rng, r + 1), unit(rng, r + 1)
    u, v = maps.psi_batch(x, y)
    # (y, x) -> (u, -v); (-x, -y) -> (-u, -v); (-x, y) -> (-v, -u); (x, -y) -> (v, u)
    for (a, b), (p, q) in [((y, x), (u, -v)), ((-x, -y), (-u, -v)), ((-x, y), (-v, -u)), ((x, -y), (v, u))]:
        pa, pb = maps.psi_batch(a, b)
        assert np.allclose(pa, p, atol=1e-12) and np.allclose(pb, q, atol=1e-12)


# -------------------------------------------------------------------- H


def test_retraction_endpoints_and_fixed_frames():
    rng = np.random.default_rng(0)
    u1, u2 = unit(rng, 5), unit(rng, 5)
    a, b = maps.retract_H(u1, u2, 0.0)
    assert np.allclose(a.coords, u1, atol=1e-12) and np.allclose(b.coords, u2, atol=1e-12)
    a, b = maps.retract_H(u1, u2, 1.0)
    assert abs(a.coords @ b.coords) < 1e-12
    f1, f2 = maps.frame_sampler(5)(rng)
    for t in np.linspace(0, 1, 7):
        a, b = maps.retract_H(f1, f2, t)
        assert np.allclose(a.coords, f1, atol=1e-12) and np.allclose(b.coords, f2, atol=1e-12)
    with pytest.raises(DegeneratePair):
        maps.retract_H(u1, u1, 0.5)
    with pytest.raises(DegeneratePair):
        maps.retract_H(u1, -u1, 0.5)


def test_retraction_suite_small():
    reps = maps.retraction_suite(3, 200)
    assert len(reps) == 5 and all(r.passed for r in reps)


@pytest.mark.parametrize("spec", [maps.builtin_bilinear("complex"), maps.builtin_bilinear("poly", r=3)],
                         ids=lambda s: s.name)
def test_alpha_psi_is_d4_equivariant(spec):
    rep = maps.check_equivariance(maps.composite_alpha_psi(spec), geo.d4_action(), geo.d4_through_z2(),
                                  maps.frame_sampler(spec.ambient_in), 300, name=spec.name)
    assert rep.passed, rep.to_json()


def test_equivariance_check_detects_failure():
    f = lambda p: np.asarray(p[0])
    rep = maps.check_equivariance(f, geo.d4_action(), geo.d4_through_z2(), maps.frame_sampler(3), 20)
    assert not rep.passed


# ------------------------------------------------------- embeddings


def test_hopf_embedding_complex_doubles_angles():
    spec = maps.builtin_bilinear("complex")
    rp1 = SpaceDescriptor.rp(1)
    for th in np.linspace(0.1, 3.0, 7):
        L = geo.canonicalize(rp1, [math.cos(th), math.sin(th)])
        assert np.allclose(maps.hopf_embed(spec, L).coords, [math.cos(2 * th), math.sin(2 * th)], atol=1e-12)
    with pytest.raises(Unsupported):
        maps.hopf_embed(maps.builtin_bilinear("quaternion"), geo.canonicalize(SpaceDescriptor.rp(3), [1, 0, 0, 0]))


def test_hopf_suite_small():
    sign, inj, anti = maps.hopf_suite(maps.builtin_bilinear("poly", r=2), 500)
    assert sign.passed and inj.passed and anti.passed
    assert inj.details["min_image_distance"] > 0


@pytest.mark.parametrize("n,m", [(0, 3), (1, 2), (1, 4), (1, 5)])
def test_lens_veronese_is_orbit_invariant_and_separates(n, m):
    g = maps.lens_veronese_embedding(n, m)
    space = g.source
    h = maps.haefliger_pair_map(g)
    rng = np.random.default_rng(n * 10 + m)
    for _ in range(100):
        x, y = unit(rng, space.ambient), unit(rng, space.ambient)
        assert np.allclose(g(x), g(geo.rotate(x, m, 1)), atol=1e-12)
        if geo.orbit_distance(space, x, y) > 0.1:
            assert np.linalg.norm(g(x) - g(y)) > 1e-6
    assert maps.check_relations(h, "EMB", 500).passed


def test_haefliger_map_antisymmetry_and_coincidence():
    g = maps.hopf_embedding(maps.builtin_bilinear("complex"))
    rp1 = SpaceDescriptor.rp(1)
    pair = geo.make_pair_config(rp1, [1, 0], [1, 1])
    assert np.array_equal(maps.haefliger_map(g, pair).coords, -maps.haefliger_map(g, pair.swapped()).coords)
    bad = maps.EmbeddingSpec("const", rp1, 2, lambda x: np.ones(x.shape[:-1] + (2,)))
    with pytest.raises(CoincidentImages):
        maps.haefliger_map(bad, pair)
