"""Tests for the nonlocality measure, entropy chains, and filtered statistics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptbounds import (
    Box,
    CMatrix,
    LocalPolytope,
    MeasurementFamily,
    SystemLayout,
    ValidationError,
    box_from,
    continuity_bound,
    er_upper,
    filter_apply,
    hiding_state,
    kl,
    max_entangled,
    nonlocality_N,
    partial_transpose,
    ppt_pbit,
    rel_entropy,
    thm2_chain_check,
)
from ptbounds.nonlocality import _binary_entropy
from ptbounds.rand import (
    random_binary_povm,
    random_bipartite_density,
    random_filter,
    random_separable,
)

from conftest import key_lifted_measurements, tsirelson_measurements

TSIRELSON_BOX_N = 0.0462738469


def tsirelson_box() -> Box:
    phi = max_entangled(2)
    return box_from(phi, tsirelson_measurements())


def vertex_box(polytope: LocalPolytope, index: int) -> Box:
    p = polytope.vertices[index].reshape(
        polytope.nx, polytope.ny, polytope.na, polytope.nb
    )
    return Box(polytope.nx, polytope.ny, polytope.na, polytope.nb, p)


def test_kl_basic_values():
    assert kl(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0
    assert kl(np.array([1.0, 0.0]), np.array([0.5, 0.5])) == pytest.approx(1.0, abs=1e-12)
    assert kl(np.array([0.5, 0.5]), np.array([1.0, 0.0])) == math.inf
    assert kl(np.array([0.0, 1.0]), np.array([0.0, 1.0])) == 0.0


def test_kl_validates_inputs():
    with pytest.raises(ValidationError):
        kl(np.array([0.6, 0.6]), np.array([0.5, 0.5]))
    with pytest.raises(ValidationError):
        kl(np.array([1.1, -0.1]), np.array([0.5, 0.5]))


def test_local_polytope_chsh_vertices():
    poly = LocalPolytope.for_scenario(2, 2, 2, 2)
    assert poly.vertices.shape == (16, 16)
    seen = set()
    for i in range(poly.vertices.shape[0]):
        box = vertex_box(poly, i)
        table = box.p
        assert set(np.unique(table)).issubset({0.0, 1.0})
        assert np.abs(table.sum(axis=(2, 3)) - 1.0).max() <= 1e-12
        seen.add(table.tobytes())
    assert len(seen) == 16


def test_local_polytope_vertex_guard():
    with pytest.raises(ValidationError):
        LocalPolytope.for_scenario(5, 5, 4, 4)


def test_nonlocality_vanishes_on_vertices():
    poly = LocalPolytope.for_scenario(2, 2, 2, 2)
    for i in (0, 5, 10, 15):
        res = nonlocality_N(vertex_box(poly, i))
        assert res.value <= 1e-9
        assert res.converged


def test_nonlocality_vanishes_on_local_mixtures():
    rng = np.random.default_rng(50)
    poly = LocalPolytope.for_scenario(2, 2, 2, 2)
    for _ in range(10):
        w = rng.dirichlet(np.ones(16))
        p = (w @ poly.vertices).reshape(2, 2, 2, 2)
        res = nonlocality_N(Box(2, 2, 2, 2, p))
        assert res.value <= 1e-7


def test_nonlocality_of_tsirelson_box_uniform_inputs():
    res = nonlocality_N(tsirelson_box(), mode="uniform")
    assert res.value == pytest.approx(TSIRELSON_BOX_N, abs=1e-7)
    assert res.converged
    assert np.abs(res.input_dist - 0.25).max() <= 1e-12


def test_nonlocality_optimized_inputs_dominate_uniform():
    box = tsirelson_box()
    uniform = nonlocality_N(box, mode="uniform")
    opt = nonlocality_N(box, mode="optimize", restarts=4, ascent_iters=60)
    assert opt.value >= uniform.value - 1e-9
    assert opt.input_dist.min() >= -1e-15
    assert opt.input_dist.sum() == pytest.approx(1.0, abs=1e-9)


def test_nonlocality_result_json():
    res = nonlocality_N(tsirelson_box(), mode="uniform")
    payload = res.to_json()
    assert payload["value"] == pytest.approx(res.value)
    assert payload["converged"] is True
    assert len(payload["input_dist"]) == 4


def test_nonlocality_classical_data_processing():
    # post-processing outputs with local stochastic maps cannot raise the measure
    rng = np.random.default_rng(51)
    box = tsirelson_box()
    base = nonlocality_N(box).value
    for _ in range(5):
        ka = rng.random(size=(2, 2))
        ka /= ka.sum(axis=0, keepdims=True)
        kb = rng.random(size=(2, 2))
        kb /= kb.sum(axis=0, keepdims=True)
        q = np.einsum("ca,db,xyab->xycd", ka, kb, box.p)
        processed = nonlocality_N(Box(2, 2, 2, 2, q)).value
        assert processed <= base + 1e-9


def test_kl_classical_data_processing():
    # coarse-graining through a stochastic map cannot increase the divergence
    rng = np.random.default_rng(56)
    for _ in range(20):
        p = rng.dirichlet(np.ones(6))
        q = rng.dirichlet(np.ones(6))
        k = rng.random(size=(4, 6))
        k /= k.sum(axis=0, keepdims=True)
        assert kl(k @ p, k @ q) <= kl(p, q) + 1e-9


def test_measured_kl_is_bounded_by_relative_entropy():
    rng = np.random.default_rng(52)
    for _ in range(20):
        rho = random_bipartite_density(rng, 2, 2)
        sigma = random_bipartite_density(rng, 2, 2)
        meas = MeasurementFamily(
            [random_binary_povm(rng, 2) for _ in range(2)],
            [random_binary_povm(rng, 2) for _ in range(2)],
        )
        p = box_from(rho, meas).p
        q = box_from(sigma, meas).p
        avg = 0.0
        for x in range(2):
            for y in range(2):
                avg += 0.25 * kl(p[x, y].ravel(), q[x, y].ravel())
        assert avg <= rel_entropy(rho, sigma) + 1e-9


def test_er_upper_values(phi_plus):
    assert er_upper(phi_plus, phi_plus) == pytest.approx(0.0, abs=1e-9)
    cc = np.zeros((4, 4))
    cc[0, 0] = 0.5
    cc[3, 3] = 0.5
    sigma = CMatrix(cc, SystemLayout.bipartite(2, 2), hermitian=True)
    assert er_upper(phi_plus, sigma) == pytest.approx(1.0, abs=1e-9)


def test_er_upper_warns_on_support_violation(phi_plus):
    pure_prod = np.zeros((4, 4))
    pure_prod[0, 0] = 1.0
    sigma = CMatrix(pure_prod, SystemLayout.bipartite(2, 2), hermitian=True)
    with pytest.warns(RuntimeWarning):
        assert er_upper(phi_plus, sigma) == math.inf


def test_er_upper_on_transposed_private_bit_pair():
    fam = ppt_pbit(4)
    rho_pt = partial_transpose(fam.rho)
    sigma_pt = partial_transpose(fam.sigma_candidate)
    assert er_upper(rho_pt, sigma_pt) == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_continuity_bound_values():
    assert continuity_bound(0.0, 4) == 0.0
    expected = 4 * 0.25 * 1.0 + 2 * _binary_entropy(0.25)
    assert continuity_bound(0.25, 2) == pytest.approx(expected, abs=1e-12)
    assert continuity_bound(0.25, 2) == pytest.approx(2.6225562489, abs=1e-9)


def test_continuity_bound_domain():
    with pytest.raises(ValidationError):
        continuity_bound(0.5, 2)
    with pytest.raises(ValidationError):
        continuity_bound(-0.1, 2)
    with pytest.raises(ValidationError):
        continuity_bound(0.1, 1)


def test_binary_entropy_symmetry():
    assert _binary_entropy(0.3) == pytest.approx(_binary_entropy(0.7), abs=1e-15)
    assert _binary_entropy(0.0) == 0.0
    assert _binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)


def test_chain_check_on_identical_separable_states(tsirelson_meas):
    rng = np.random.default_rng(55)
    rho = random_separable(rng, 2, 2)
    chain = thm2_chain_check(rho, rho, tsirelson_meas)
    assert chain.lhs <= 1e-7
    assert chain.mid == pytest.approx(0.0, abs=1e-9)
    assert chain.rhs == pytest.approx(0.0, abs=1e-9)
    assert chain.verdict


def test_chain_check_on_ppt_private_bit():
    fam = ppt_pbit(4)
    meas = key_lifted_measurements(4)
    chain = thm2_chain_check(fam.rho, fam.sigma_candidate, meas)
    assert chain.verdict
    assert chain.lhs <= chain.mid + 1e-7
    assert chain.mid <= chain.rhs + 1e-7
    payload = chain.to_json()
    assert payload["verdict"] is True


def test_chain_check_random_instances():
    rng = np.random.default_rng(53)
    for _ in range(5):
        rho = random_bipartite_density(rng, 2, 2)
        sigma = random_separable(rng, 2, 2)
        meas = MeasurementFamily(
            [random_binary_povm(rng, 2) for _ in range(2)],
            [random_binary_povm(rng, 2) for _ in range(2)],
        )
        assert thm2_chain_check(rho, sigma, meas).verdict


def test_chain_check_tolerates_infinite_entropy(tsirelson_meas, phi_plus):
    pure_prod = np.zeros((4, 4))
    pure_prod[0, 0] = 1.0
    sigma = CMatrix(pure_prod, SystemLayout.bipartite(2, 2), hermitian=True)
    chain = thm2_chain_check(phi_plus, sigma, tsirelson_meas)
    assert chain.rhs == math.inf
    assert chain.verdict
    assert "infinite" in chain.context


def test_filter_apply_identity_keeps_state(phi_plus):
    out, prob = filter_apply(phi_plus, np.eye(2), np.eye(2))
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert np.abs(out.mat - phi_plus.mat).max() <= 1e-12


def test_filter_apply_rank_one_projects(phi_plus):
    proj = np.diag([1.0, 0.0])
    out, prob = filter_apply(phi_plus, proj, np.eye(2))
    assert prob == pytest.approx(0.5, abs=1e-12)
    target = np.zeros((4, 4))
    target[0, 0] = 1.0
    assert np.abs(out.mat - target).max() <= 1e-12
    assert float(np.trace(out.mat).real) == pytest.approx(1.0, abs=1e-12)


def test_filter_apply_rejects_amplifying_filters(phi_plus):
    with pytest.raises(ValidationError):
        filter_apply(phi_plus, 2.0 * np.eye(2), np.eye(2))
    with pytest.raises(ValidationError):
        filter_apply(phi_plus, np.eye(2), np.diag([1.0, 1.5]))


def test_filter_apply_rejects_zero_probability(phi_plus):
    fa = np.diag([1.0, 0.0])
    fb = np.diag([0.0, 1.0])
    with pytest.raises(ValidationError):
        filter_apply(phi_plus, fa, fb)


def test_filtered_nonlocality_stays_below_transposed_entropy():
    fam = ppt_pbit(4)
    meas = key_lifted_measurements(4)
    rhs = er_upper(partial_transpose(fam.rho), partial_transpose(fam.sigma_candidate))
    rng = np.random.default_rng(54)
    done = 0
    while done < 5:
        fa = random_filter(rng, 8)
        fb = random_filter(rng, 8)
        try:
            filtered, prob = filter_apply(fam.rho, fa, fb)
        except ValidationError:
            continue
        res = nonlocality_N(box_from(filtered, meas))
        assert prob * res.value <= rhs + 1e-7
        done += 1


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 10_000))
def test_kl_nonnegative_property(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(4))
    q = rng.dirichlet(np.ones(4))
    assert kl(p, q) >= -1e-12


@settings(deadline=None, max_examples=15)
@given(st.integers(0, 10_000))
def test_nonlocality_below_max_pair_kl_property(seed):
    # the measure is an infimum over local boxes, so any single vertex caps it
    rng = np.random.default_rng(seed)
    p = rng.random(size=(2, 2, 2, 2))
    p /= p.sum(axis=(2, 3), keepdims=True)
    box = Box(2, 2, 2, 2, p)
    res = nonlocality_N(box)
    poly = LocalPolytope.for_scenario(2, 2, 2, 2)
    best = math.inf
    for i in range(poly.vertices.shape[0]):
        q = poly.vertices[i].reshape(2, 2, 2, 2)
        avg = 0.0
        for x in range(2):
            for y in range(2):
                avg += 0.25 * kl(p[x, y].ravel(), q[x, y].ravel())
        best = min(best, avg)
    assert res.value <= best + 1e-7
