import numpy as np
import pytest

from dilations.blocks import DilationTuple, chain_products, interior_norm
from dilations.certificates import adjoint_transfer, fundamental_pairs, make_adjoint_certificate
from dilations.core import (
    DEFAULT_TOL,
    BadParams,
    NotC0,
    NotPureShift,
    adj,
    opnorm,
    random_contraction,
    random_projection,
    random_unitary,
)
from dilations.defects import build_tuple, defect_data
from dilations.generators import generate_instance, shift_compression_data
from dilations.hardy import (
    LinearSymbol,
    bcl_extract,
    bdf_coanalytic_product,
    bdf_product,
    bdf_tuple_check,
    characteristic_sample,
    laurent_op,
    pure_dilation,
    pure_embedding,
    toeplitz_op,
)


def basis_projection(n, i):
    return np.diag([1.0 if j == i else 0.0 for j in range(n)]).astype(complex)


def commuting_unitaries(n, count, rng):
    frame = random_unitary(n, rng)
    rows = [np.exp(2j * np.pi * rng.random(n)) for _ in range(count)]
    return [frame @ np.diag(r) @ adj(frame) for r in rows], frame


def test_toeplitz_identity_and_shift():
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    op = toeplitz_op(LinearSymbol(eye, zero), 3)
    np.testing.assert_allclose(op.data, np.eye(6), atol=1e-15)
    shift = toeplitz_op(LinearSymbol(zero, eye), 3)
    expected = np.zeros((6, 6))
    expected[2:4, 0:2] = np.eye(2)
    expected[4:6, 2:4] = np.eye(2)
    np.testing.assert_allclose(shift.data, expected, atol=1e-15)


def test_toeplitz_isometric_interior():
    sym = LinearSymbol.from_model_pair(np.eye(2), basis_projection(2, 0))
    assert sym.is_isometric()
    op = toeplitz_op(sym, 6)
    g = adj(op.data) @ op.data - np.eye(op.size)
    assert interior_norm(op, g, 1) <= 1e-14


def test_laurent_bilateral_shift_and_unitary_symbol():
    eye = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    shift = laurent_op(LinearSymbol(zero, eye), 3)
    assert opnorm(shift.block(1, 0) - eye) <= 1e-15
    rng = np.random.default_rng(0)
    u = random_unitary(3, rng)
    op = laurent_op(LinearSymbol.from_model_pair(u, np.zeros((3, 3))), 3)
    g = adj(op.data) @ op.data - np.eye(op.size)
    assert opnorm(g) <= 1e-13


def test_laurent_random_pair_interior_unitary():
    rng = np.random.default_rng(14)
    u = random_unitary(3, rng)
    p = random_projection(3, 2, rng)
    op = laurent_op(LinearSymbol.from_model_pair(u, p), 8)
    eye = np.eye(op.size)
    g = adj(op.data) @ op.data - eye
    h = op.data @ adj(op.data) - eye
    assert max(interior_norm(op, g, 1), interior_norm(op, h, 1)) <= 1e-12


def test_laurent_restriction_matches_toeplitz():
    rng = np.random.default_rng(6)
    u = random_unitary(2, rng)
    p = random_projection(2, 1, rng)
    sym = LinearSymbol.from_model_pair(u, p)
    N = 6
    lau = laurent_op(sym, N)
    toe = toeplitz_op(sym, N)
    rows = lau.indices_for(range(N))
    np.testing.assert_allclose(lau.data[np.ix_(rows, rows)], toe.data, atol=1e-12)


def test_bdf_tuple_coordinate_projections_pass():
    n = 3
    pairs = [(np.eye(n, dtype=complex), basis_projection(n, i)) for i in range(n)]
    report = bdf_tuple_check(pairs)
    assert report.algebraic_verdict and report.matrix_verdict


def test_bdf_tuple_overfull_projections_fail():
    pairs = [(np.eye(2, dtype=complex), np.eye(2, dtype=complex))] * 2
    report = bdf_tuple_check(pairs)
    assert not report.algebraic_verdict and not report.matrix_verdict
    assert report.partition == pytest.approx(1.0)


def test_bdf_tuple_exchange_violation_fails_both_ways():
    rng = np.random.default_rng(33)
    (u1, u2), _ = (None, None), None
    us, _ = commuting_unitaries(3, 2, rng)
    p1 = random_projection(3, 1, rng)
    p2 = random_projection(3, 1, rng)
    report = bdf_tuple_check([(us[0], p1), (us[1], p2)])
    assert not report.algebraic_verdict
    assert not report.matrix_verdict


def test_bdf_product_examples():
    eye = np.eye(2, dtype=complex)
    ok = bdf_product(eye, np.zeros((2, 2)), eye, np.zeros((2, 2)))
    assert ok.projection_flag and ok.matrix_verdict and ok.consistent
    split = bdf_product(eye, basis_projection(2, 0), eye, basis_projection(2, 1))
    assert split.projection_flag and split.matrix_verdict
    np.testing.assert_allclose(split.P, np.eye(2), atol=1e-14)
    overlap = bdf_product(eye, basis_projection(2, 0), eye, basis_projection(2, 0))
    assert not overlap.projection_flag and not overlap.matrix_verdict and overlap.consistent


def test_bdf_coanalytic_product_examples():
    eye = np.eye(2, dtype=complex)
    ok = bdf_coanalytic_product(eye, np.zeros((2, 2)), eye, np.zeros((2, 2)))
    assert ok.projection_flag and ok.matrix_verdict
    swap = bdf_coanalytic_product(eye, basis_projection(2, 0), eye, basis_projection(2, 1))
    assert swap.projection_flag and swap.matrix_verdict
    np.testing.assert_allclose(swap.P, np.eye(2), atol=1e-14)
    single = bdf_coanalytic_product(eye, basis_projection(2, 0), eye, np.zeros((2, 2)))
    np.testing.assert_allclose(single.U, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(single.P, basis_projection(2, 0), atol=1e-14)


def test_pure_embedding_zero_contraction():
    e = pure_embedding(np.zeros((2, 2)), 4)
    np.testing.assert_allclose(e[:2], np.eye(2), atol=1e-14)
    np.testing.assert_allclose(e[2:], np.zeros((6, 2)), atol=1e-14)


def test_pure_embedding_scalar_geometric_norm():
    e = pure_embedding(np.array([[0.5]]), 60)
    np.testing.assert_allclose(np.linalg.norm(e[:, 0]), 1.0, atol=1e-12)


def test_pure_embedding_rejects_unitary():
    with pytest.raises(NotC0):
        pure_embedding(np.eye(2), 8)


def test_pure_embedding_rejects_shallow_truncation():
    with pytest.raises(BadParams):
        pure_embedding(np.array([[0.5]]), 4)


def test_pure_dilation_scalar_compression():
    t = 0.5
    tp = build_tuple([np.array([[t]])])
    dd = defect_data(tp)
    acert = adjoint_transfer(tp, dd, fundamental_pairs(tp, dd))
    dil = pure_dilation(tp, dd, acert, 60, space="h2")
    e = dil.embedding
    for k in range(21):
        value = (adj(e) @ np.linalg.matrix_power(dil.ops[0].data, k) @ e)[0, 0]
        assert abs(value - t**k) <= 1e-10


def test_pure_dilation_corpus_product_is_shift():
    T_list, _, _ = shift_compression_data(2, 2, 2, seed=6)
    tp = build_tuple(T_list)
    dd = defect_data(tp)
    acert = adjoint_transfer(tp, dd, fundamental_pairs(tp, dd))
    dil = pure_dilation(tp, dd, acert, 12, space="l2")
    eye = np.eye(dd.rank_star, dtype=complex)
    shift = laurent_op(LinearSymbol(np.zeros_like(eye), eye), 12)
    assert interior_norm(dil.product, dil.product.data - shift.data, tp.n) <= 1e-10


def test_pure_dilation_projection_triple_product_not_shift():
    doc = generate_instance("projection-triple")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    acert = make_adjoint_certificate(doc.adjoint_certificate[0], doc.adjoint_certificate[1])
    dil = pure_dilation(tp, dd, acert, 10, space="l2")
    eye = np.eye(dd.rank_star, dtype=complex)
    shift = laurent_op(LinearSymbol(np.zeros_like(eye), eye), 10)
    assert interior_norm(dil.product, dil.product.data - shift.data, tp.n) >= 0.9


def test_characteristic_sample_zero_contraction():
    sample = characteristic_sample(np.zeros((2, 2)), 8)
    assert sample.max_delta_norm <= 1e-14
    lam = np.exp(1j * sample.angles[3])
    np.testing.assert_allclose(sample.theta[3], lam * np.eye(2), atol=1e-13)


def test_characteristic_sample_unitary_is_empty():
    theta = 0.9
    c, s = np.cos(theta), np.sin(theta)
    sample = characteristic_sample(np.array([[c, -s], [s, c]]), 8)
    assert sample.theta[0].shape == (0, 0)
    assert sample.max_delta_norm == 0.0


def test_characteristic_sample_random_strict_contraction():
    rng = np.random.default_rng(7)
    t = random_contraction(4, rng, 0.9)
    sample = characteristic_sample(t, 64)
    assert sample.max_delta_norm <= 1e-6
    assert sample.consistency_residual() <= 1e-10


def test_bcl_extract_single_shift():
    eye = np.eye(2, dtype=complex)
    op = toeplitz_op(LinearSymbol.from_model_pair(eye, eye), 6)
    parts = chain_products([op.data])
    dil = DilationTuple(ops=(op,), product=op.like(parts[-1]), partial_products=tuple(parts))
    [(u, p)] = bcl_extract(dil)
    np.testing.assert_allclose(u, eye, atol=1e-12)
    np.testing.assert_allclose(p, eye, atol=1e-12)


def test_bcl_extract_round_trip():
    rng = np.random.default_rng(19)
    us, frame = commuting_unitaries(3, 1, rng)
    u1 = us[0]
    u2 = frame @ adj(np.diag(np.diag(adj(frame) @ u1 @ frame))) @ adj(frame)
    groups = np.array([0, 1, 1])
    ps = [frame @ np.diag((groups == i).astype(complex)) @ adj(frame) for i in range(2)]
    ops = tuple(toeplitz_op(LinearSymbol.from_model_pair(u, p), 8) for u, p in zip([u1, u2], ps))
    parts = chain_products([op.data for op in ops])
    dil = DilationTuple(ops=ops, product=ops[0].like(parts[-1]), partial_products=tuple(parts))
    recovered = bcl_extract(dil)
    for (u, p), u_true, p_true in zip(recovered, [u1, u2], ps):
        assert opnorm(u - u_true) <= DEFAULT_TOL.check_tol
        assert opnorm(p - p_true) <= DEFAULT_TOL.check_tol


def test_bcl_extract_rejects_non_shift():
    eye = np.eye(2, dtype=complex)
    op = toeplitz_op(LinearSymbol.from_model_pair(eye, np.zeros((2, 2))), 6)
    parts = chain_products([op.data])
    dil = DilationTuple(ops=(op,), product=op.like(parts[-1]), partial_products=tuple(parts))
    with pytest.raises(NotPureShift):
        bcl_extract(dil)
