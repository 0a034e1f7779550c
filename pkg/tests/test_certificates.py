import numpy as np
import pytest

from dilations.certificates import (
    adjoint_transfer,
    assemble_certificate,
    certificate_oracle_search,
    check_adjoint_conditions,
    check_conditions,
    fundamental_pairs,
    make_adjoint_certificate,
    make_certificate,
    solve_fundamental,
)
from dilations.core import DEFAULT_TOL, Unsupported, adj, opnorm, random_contraction
from dilations.defects import build_tuple, defect_data
from dilations.generators import generate_instance, shift_compression_data


def corpus_tuple(seed=11, q=2, n=2, m=3):
    T_list, _, _ = shift_compression_data(q, n, m, seed)
    return build_tuple(T_list)


def test_solve_fundamental_zero():
    out = solve_fundamental(np.zeros((3, 3)), np.zeros((3, 3)))
    np.testing.assert_allclose(out.C, np.zeros((3, 3)), atol=1e-14)
    assert out.residual <= 1e-14


def test_solve_fundamental_scalar_closed_form():
    out = solve_fundamental(np.array([[0.5]]), np.array([[0.5]]))
    # (1 - b^2) a / (1 - (ab)^2) at a = b = 1/2
    np.testing.assert_allclose(out.C, np.array([[0.4]]), atol=1e-14)


def test_solve_fundamental_identity_left_factor():
    rng = np.random.default_rng(2)
    b = random_contraction(4, rng, 0.6)
    out = solve_fundamental(np.eye(4), b)
    r = out.C.shape[0]
    np.testing.assert_allclose(out.C, np.eye(r), atol=1e-10)


def test_fundamental_pairs_single_scalar():
    tp = build_tuple([np.array([[0.5]])])
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    # the co-factor of the only index is the identity, whose defect vanishes
    np.testing.assert_allclose(pairs.F[0], np.zeros((1, 1)), atol=1e-14)
    np.testing.assert_allclose(pairs.F_prime[0], np.ones((1, 1)), atol=1e-14)
    assert pairs.transfer_residual <= 1e-14


def test_fundamental_pairs_unitary_tuple_is_empty():
    theta = 0.3
    c, s = np.cos(theta), np.sin(theta)
    u = np.array([[c, -s], [s, c]], dtype=complex)
    tp = build_tuple([u, adj(u)])
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    assert pairs.F[0].shape == (0, 0)


def test_fundamental_pairs_projection_triple():
    doc = generate_instance("projection-triple")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    for i in range(3):
        np.testing.assert_allclose(pairs.F[i], tp.T_list[i], atol=1e-12)
        np.testing.assert_allclose(pairs.F_prime[i], np.zeros((3, 3)), atol=1e-12)


def test_assemble_single_contraction_gives_identity_data():
    rng = np.random.default_rng(9)
    tp = build_tuple([random_contraction(3, rng, 0.8)])
    dd = defect_data(tp)
    cert = assemble_certificate(fundamental_pairs(tp, dd))
    r = dd.rank
    np.testing.assert_allclose(cert.U[0], np.eye(r), atol=1e-10)
    np.testing.assert_allclose(cert.P[0], np.eye(r), atol=1e-10)
    assert cert.valid()


def test_assemble_nilpotent_pair_not_unitary():
    doc = generate_instance("nilpotent-pair")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    cert = assemble_certificate(fundamental_pairs(tp, dd))
    assert max(cert.unitarity) >= 0.1
    assert not cert.valid()


def test_assemble_corpus_instance_valid():
    tp = corpus_tuple()
    dd = defect_data(tp)
    cert = assemble_certificate(fundamental_pairs(tp, dd))
    assert cert.valid()
    assert cert.max_validity_residual <= 1e-8


def test_conditions_nilpotent_pair_fail_at_four():
    doc = generate_instance("nilpotent-pair")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    report = check_conditions(tp, dd, assemble_certificate(fundamental_pairs(tp, dd)), "full")
    assert not report.verdict
    assert report.residuals[3] >= 1e-2
    assert report.worst_failure == 4


def test_conditions_projection_triple_relaxed():
    doc = generate_instance("projection-triple")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    cert = make_certificate(doc.certificate[0], doc.certificate[1])
    relaxed = check_conditions(tp, dd, cert, "relaxed")
    assert relaxed.verdict
    assert max(relaxed.residuals[:4]) <= 1e-10
    np.testing.assert_allclose(relaxed.r5, 1.0, atol=1e-10)
    full = check_conditions(tp, dd, cert, "full")
    assert not full.verdict and full.worst_failure == 5


def test_conditions_trivial_single_index():
    tp = build_tuple([np.array([[0.5]])])
    dd = defect_data(tp)
    cert = make_certificate([np.eye(1)], [np.eye(1)])
    report = check_conditions(tp, dd, cert, "full")
    assert report.verdict
    assert max(report.residuals) <= 1e-14


def test_adjoint_transfer_single_index():
    rng = np.random.default_rng(21)
    tp = build_tuple([random_contraction(3, rng, 0.8)])
    dd = defect_data(tp)
    acert = adjoint_transfer(tp, dd, fundamental_pairs(tp, dd))
    rs = dd.rank_star
    np.testing.assert_allclose(acert.U[0], np.eye(rs), atol=1e-10)
    np.testing.assert_allclose(acert.P[0], np.eye(rs), atol=1e-10)


def test_adjoint_transfer_nilpotent_pair_invalid():
    doc = generate_instance("nilpotent-pair")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    acert = adjoint_transfer(tp, dd, fundamental_pairs(tp, dd))
    assert not acert.valid()


@pytest.mark.parametrize("seed,q,n,m", [(0, 1, 2, 2), (5, 2, 2, 3), (13, 3, 3, 2)])
def test_duality_on_corpus(seed, q, n, m):
    T_list, _, _ = shift_compression_data(q, n, m, seed)
    tp = build_tuple(T_list)
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    primal = check_conditions(tp, dd, assemble_certificate(pairs), "full")
    adjoint = check_adjoint_conditions(tp, dd, adjoint_transfer(tp, dd, pairs), "full")
    assert primal.verdict and adjoint.verdict
    # and from scratch on the adjoint tuple
    tpa = tp.adjoint()
    dda = defect_data(tpa)
    pa = fundamental_pairs(tpa, dda)
    assert check_conditions(tpa, dda, assemble_certificate(pa), "full").verdict


def test_orthogonality_algebra_on_valid_certificate():
    tp = corpus_tuple(seed=4, q=2, n=3, m=2)
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    cert = assemble_certificate(pairs)
    assert check_conditions(tp, dd, cert, "full").verdict
    eye = np.eye(dd.rank, dtype=complex)
    for f, fp in zip(pairs.F, pairs.F_prime):
        assert opnorm(f @ fp) <= DEFAULT_TOL.check_tol
        assert opnorm(adj(f) @ f + fp @ adj(fp) - eye) <= DEFAULT_TOL.check_tol


def test_cofactor_identities_on_valid_certificate():
    tp = corpus_tuple(seed=6, q=2, n=2, m=3)
    dd = defect_data(tp)
    pairs = fundamental_pairs(tp, dd)
    cert = assemble_certificate(pairs)
    assert check_conditions(tp, dd, cert, "full").verdict
    D, Q = dd.D, dd.basis
    for i in range(tp.n):
        up = Q @ (cert.U[i] @ cert.P[i]) @ adj(Q)
        up_perp = Q @ (cert.U[i] @ (np.eye(dd.rank) - cert.P[i])) @ adj(Q)
        lhs = D @ tp.Tprime_list[i] - up @ D - up_perp @ D @ tp.T
        assert opnorm(lhs) <= DEFAULT_TOL.check_tol
        p_perp = Q @ (np.eye(dd.rank) - cert.P[i]) @ adj(Q)
        dsq = np.eye(tp.dim) - adj(tp.Tprime_list[i]) @ tp.Tprime_list[i]
        assert opnorm(D @ p_perp @ D - dsq) <= DEFAULT_TOL.check_tol


def test_uniqueness_against_known_certificate():
    # unitary factor times a shifted factor; the certificate is known in
    # closed form, and the reconstruction must reproduce it
    u1 = np.exp(0.7j)
    t1 = u1 * np.eye(2, dtype=complex)
    t2 = np.conj(u1) * np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    tp = build_tuple([t1, t2])
    dd = defect_data(tp)
    cert = assemble_certificate(fundamental_pairs(tp, dd))
    known_U = [np.array([[np.conj(u1)]]), np.array([[u1]])]
    known_P = [np.array([[0.0 + 0j]]), np.array([[1.0 + 0j]])]
    supplied = make_certificate(known_U, known_P)
    assert check_conditions(tp, dd, supplied, "full").verdict
    assert check_conditions(tp, dd, cert, "full").verdict
    for a, b in zip(cert.U, known_U):
        assert opnorm(a - b) <= DEFAULT_TOL.check_tol
    for a, b in zip(cert.P, known_P):
        assert opnorm(a - b) <= DEFAULT_TOL.check_tol


def test_oracle_scalar_pair_relaxed_only():
    tp = build_tuple([np.zeros((1, 1)), np.zeros((1, 1))])
    dd = defect_data(tp)
    relaxed = certificate_oracle_search(tp, dd, grid=64, mode="relaxed")
    assert relaxed is not None
    np.testing.assert_allclose(relaxed.P[0], np.ones((1, 1)), atol=1e-12)
    np.testing.assert_allclose(relaxed.P[1], np.ones((1, 1)), atol=1e-12)
    np.testing.assert_allclose(relaxed.U[0] @ relaxed.U[1], np.ones((1, 1)), atol=1e-12)
    assert certificate_oracle_search(tp, dd, grid=64, mode="full") is None


def test_oracle_single_scalar_full():
    tp = build_tuple([np.array([[0.5]])])
    dd = defect_data(tp)
    found = certificate_oracle_search(tp, dd, grid=16, mode="full")
    assert found is not None
    np.testing.assert_allclose(found.U[0], np.ones((1, 1)), atol=1e-12)
    np.testing.assert_allclose(found.P[0], np.ones((1, 1)), atol=1e-12)


def test_oracle_projection_triple_diagonal_search():
    doc = generate_instance("projection-triple")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    found = certificate_oracle_search(tp, dd, grid=8, mode="relaxed")
    assert found is not None
    for i in range(3):
        np.testing.assert_allclose(found.U[i], np.eye(3), atol=1e-12)
        np.testing.assert_allclose(found.P[i], np.eye(3) - tp.T_list[i], atol=1e-12)


def test_oracle_unsupported_domain():
    doc = generate_instance("nilpotent-pair")
    tp = build_tuple(doc.matrices)
    dd = defect_data(tp)
    with pytest.raises(Unsupported):
        certificate_oracle_search(tp, dd, grid=8, mode="relaxed")


def test_adjoint_conditions_on_zero_defect():
    theta = 0.5
    c, s = np.cos(theta), np.sin(theta)
    u = np.array([[c, -s], [s, c]], dtype=complex)
    tp = build_tuple([u, adj(u)])
    dd = defect_data(tp)
    acert = make_adjoint_certificate([np.zeros((0, 0))] * 2, [np.zeros((0, 0))] * 2)
    report = check_adjoint_conditions(tp, dd, acert, "full")
    assert report.verdict
