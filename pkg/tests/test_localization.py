import numpy as np
import pytest

from cdloc.jets import HoloJet, MatrixJet2, holo_invert, holo_mul, sandwich
from cdloc.kernels import ConjugateBy, PowerSeries, jet_at
from cdloc.localization import (
    BlockGram,
    DegenerateGramError,
    adjoint_matrix,
    build_block_gram,
    build_N_matrix,
    extract_invariants,
    invariants_for_pair,
    normalize,
    oracle_invariants_direct,
)
from cdloc.multiindex import add, enumerate_indices
from conftest import random_point
from oracles import log_curvature


def _invariants(model, z, k):
    jet, _ = normalize(jet_at(model, z, k - 1))
    return extract_invariants(jet, k)


def test_golden_disc_values(models):
    # (1 - |z|^2)^2 / lambda on the diagonal; derived from the series oracle
    assert abs(_invariants(models["szego"], [0.0], 2)[(1,), (1,)][0, 0] - 1.0) < 1e-12
    assert abs(_invariants(models["bergman"], [0.0], 2)[(1,), (1,)][0, 0] - 0.5) < 1e-12
    assert abs(_invariants(models["szego"], [0.5], 2)[(1,), (1,)][0, 0] - 0.5625) < 1e-12
    inv = _invariants(models["szego_plus_bergman"], [0.0], 2)
    assert np.allclose(inv[(1,), (1,)], np.diag([1.0, 0.5]), atol=1e-12)


def test_normalized_szego_metric_value(models):
    jet, phi = normalize(jet_at(models["szego"], [0.5], 1))
    assert abs(jet[(1,), (1,)][0, 0] - 16 / 9) < 1e-12
    assert jet.is_normalized()


@pytest.mark.parametrize("lam", [1.0, 2.0, 3.0])
@pytest.mark.parametrize("z", [0.0, 0.3, 0.5 + 0.2j, -0.7j])
def test_curvature_identity(models, lam, z):
    from cdloc.kernels import ProductPolydisc

    M = _invariants(ProductPolydisc((lam,)), [z], 2)[(1,), (1,)][0, 0]
    assert abs(M * log_curvature(lam, z) - 1) < 1e-10


def test_normalize_constant_factor(models):
    jet = jet_at(models["szego"], [0.0], 2).scaled(2.0)
    _, phi = normalize(jet)
    assert np.isclose(phi.data[0, 0, 0], 2 ** -0.5)


def test_normalization_idempotent_and_scale_invariant(rng, models):
    for name, model in models.items():
        z = random_point(rng, model.m)
        jet = jet_at(model, z, 2)
        nj, _ = normalize(jet)
        again, phi = normalize(nj)
        assert np.max(np.abs(again.data - nj.data)) < 1e-12, name
        assert np.allclose(phi.data[0], np.eye(model.n), atol=1e-12)
        assert np.max(np.abs(phi.data[1:])) < 1e-12
        scaled, _ = normalize(jet.scaled(7.5))
        assert np.max(np.abs(scaled.data - nj.data)) < 1e-12, name


def test_oracle_agreement_catalog(rng, models):
    for name, model in models.items():
        for k in (2, 3):
            z = random_point(rng, model.m)
            jet, _ = normalize(jet_at(model, z, k - 1))
            a, b = extract_invariants(jet, k), oracle_invariants_direct(jet, k)
            assert np.max(np.abs(a.data - b.data)) < 1e-10, (name, k)
            assert a.adjoint_defect() < 1e-12


def test_invariants_require_normalized_jet(models):
    with pytest.raises(ValueError):
        extract_invariants(jet_at(models["bergman"], [0.2], 1), 2)


def test_labels_and_indexing(models):
    inv = _invariants(models["bidisc_mixed"], [0.1, 0.2], 3)
    assert len(inv.indices) == 5
    assert inv.labels()[0] == "K[0, 1][0, 1]"
    assert len(inv.matrices()) == 25
    with pytest.raises(KeyError):
        inv[(0, 0), (1, 0)]


def test_block_gram_layout_and_pd(models):
    jet, _ = normalize(jet_at(models["szego_plus_bergman"], [0.1], 2))
    H = build_block_gram(jet, 3)
    assert H.matrix.shape == (6, 6) and H.L == 3
    assert np.allclose(H.block((1,), (2,)), jet[(1,), (2,)], rtol=0, atol=1e-15)
    assert H.eigenvalues[0] > 0
    assert np.allclose(H.matrix @ H.inverse(), np.eye(6), atol=1e-10)
    with pytest.raises(ValueError):
        build_block_gram(jet, 4)
    with pytest.raises(ValueError):
        build_block_gram(jet, 0)


def test_degenerate_gram():
    # rank-deficient at order 2: only the constant and z^1 terms exist
    ps = PowerSeries(1, 1, {((0,), (0,)): np.eye(1), ((1,), (1,)): np.eye(1)})
    jet, _ = normalize(jet_at(ps, [0.0], 2))
    with pytest.raises(DegenerateGramError):
        extract_invariants(jet, 3)
    bad = MatrixJet2(1, 1, 1, [0.0], np.array([[[[1.0]], [[2.0]]], [[[0.0]], [[1.0]]]]))
    with pytest.raises(DegenerateGramError):
        build_block_gram(bad, 2)
    with pytest.raises(DegenerateGramError):
        normalize(MatrixJet2(1, 1, 1, [0.0], np.zeros((2, 2, 1, 1))))


def test_shift_matrices_commute_and_compose():
    k, m, n = 4, 2, 1
    for I in [(1, 0), (0, 1), (1, 1)]:
        for J in [(1, 0), (0, 2)]:
            A, B = build_N_matrix(I, k, m, n), build_N_matrix(J, k, m, n)
            assert np.allclose(A @ B, B @ A)
            assert np.allclose(B @ A, build_N_matrix(add(I, J), k, m, n))
    assert not np.any(np.linalg.matrix_power(build_N_matrix((1, 0), k, m, n), k))
    with pytest.raises(ValueError):
        build_N_matrix((1,), k, m, n)


def test_adjoint_small_example():
    # Bergman at 0, k = 2: H = diag(1, 2)
    H = BlockGram(2, 1, 1, np.diag([1.0, 2.0]).astype(complex), np.array([1.0, 2.0]))
    N = build_N_matrix((1,), 2, 1, 1)
    assert np.allclose(adjoint_matrix(N, H), [[0, 0.5], [0, 0]])


def test_single_pair(models):
    jet, _ = normalize(jet_at(models["bidisc_hardy"], [0.2, -0.3], 1))
    inv = extract_invariants(jet, 2)
    assert np.allclose(invariants_for_pair(jet, 2, (1, 0), (0, 1)), inv[(1, 0), (0, 1)])
    with pytest.raises(ValueError):
        invariants_for_pair(jet, 2, (0, 0), (0, 1))


@pytest.mark.parametrize("name", ["szego_plus_bergman", "poly_rank2", "bidisc_plus_ball"])
def test_frame_change_is_constant_unitary(rng, models, name):
    model = models[name]
    m, n, d = model.m, model.n, 2
    L = len(enumerate_indices(m, d))
    coeffs = 0.4 * (rng.standard_normal((L, n, n)) + 1j * rng.standard_normal((L, n, n)))
    coeffs[0] += np.eye(n)
    change = HoloJet(m, n, d, np.zeros(m), coeffs)
    other = ConjugateBy(model, change)
    z = random_point(rng, m, 0.3)
    ja, phi_a = normalize(jet_at(model, z, d))
    jb, phi_b = normalize(jet_at(other, z, d))
    W = holo_mul(phi_b, holo_mul(change.reexpand(z, d), holo_invert(phi_a)))
    assert np.max(np.abs(W.data[1:])) < 1e-10
    U = W.data[0]
    assert np.allclose(U.conj().T @ U, np.eye(n), atol=1e-10)
    assert np.max(np.abs(U @ ja.data @ U.conj().T - jb.data)) < 1e-10
    assert np.max(np.abs(sandwich(W, ja, W).data - jb.data)) < 1e-10


def test_invariants_scale_exactly(models):
    from cdloc.kernels import Scale

    for name in ("szego", "drury_arveson", "bidisc_mixed"):
        model = models[name]
        z = [0.1 + 0.2j] * model.m
        assert np.array_equal(_invariants(Scale(model, 4.0), z, 3).data, _invariants(model, z, 3).data)
    model = models["poly_rank2"]
    a, b = _invariants(Scale(model, 2.7), [0.3], 3), _invariants(model, [0.3], 3)
    assert np.max(np.abs(a.data - b.data)) < 1e-12


@pytest.mark.parametrize("name", ["szego_plus_bergman", "poly_rank2", "bidisc_plus_ball", "ball_hardy"])
def test_constant_unitary_recovered_from_blocks(rng, models, name):
    from cdloc.jets import constant_jet
    from cdloc.specht import MatrixTuple, find_certificate

    model = models[name]
    n, d = model.n, 3
    z = random_point(rng, model.m, 0.4)
    jet = jet_at(model, z, d)
    U = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))[0]
    Uj = constant_jet(U, model.m, d, jet.z0)
    ja, _ = normalize(jet)
    jb, _ = normalize(sandwich(Uj, jet, Uj))
    flat = lambda j, pos: MatrixTuple(np.array([j.data[s, t] for s in pos for t in pos]))
    # first-order blocks alone fix U only up to their commutant
    first = [s for s, I in enumerate(ja.ordering) if sum(I) == 1]
    V1 = find_certificate(flat(ja, first), flat(jb, first), tol=1e-10)
    assert V1 is not None
    everything = range(len(ja.ordering))
    V = find_certificate(flat(ja, everything), flat(jb, everything), tol=1e-10)
    assert V is not None
    assert np.max(np.abs(V @ ja.data @ V.conj().T - jb.data)) < 1e-10
