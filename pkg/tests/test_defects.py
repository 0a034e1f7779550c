import numpy as np
import pytest

from dilations.core import (
    DEFAULT_TOL,
    NotCommuting,
    NotContraction,
    ShapeMismatch,
    adj,
    opnorm,
    random_contraction,
    random_unitary,
)
from dilations.defects import (
    build_tuple,
    canonical_decomposition,
    defect_data,
    is_c0,
    is_cnu,
)
from dilations.generators import generate_instance


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def test_build_tuple_projection_triple():
    doc = generate_instance("projection-triple")
    tp = build_tuple(doc.matrices)
    assert tp.n == 3 and tp.dim == 3
    np.testing.assert_allclose(tp.T, np.zeros((3, 3)), atol=1e-15)
    for i in range(3):
        np.testing.assert_allclose(tp.T_list[i] @ tp.Tprime_list[i], tp.T, atol=1e-15)


def test_build_tuple_single_unitary():
    tp = build_tuple([rotation(0.3)])
    np.testing.assert_allclose(tp.T, rotation(0.3), atol=1e-15)
    np.testing.assert_allclose(tp.Tprime_list[0], np.eye(2), atol=1e-15)


def test_build_tuple_nilpotent_pair():
    doc = generate_instance("nilpotent-pair")
    tp = build_tuple(doc.matrices)
    np.testing.assert_allclose(tp.T, np.zeros((3, 3)), atol=1e-15)


def test_build_tuple_rejections():
    with pytest.raises(NotCommuting):
        build_tuple([np.array([[0.0, 0.5], [0.0, 0.0]]), np.array([[0.0, 0.0], [0.5, 0.0]])])
    with pytest.raises(NotContraction):
        build_tuple([2 * np.eye(2)])
    with pytest.raises(ShapeMismatch):
        build_tuple([np.eye(2), np.eye(3)])


def test_defect_data_unitary_has_no_defect():
    tp = build_tuple([rotation(1.1)])
    dd = defect_data(tp)
    assert dd.rank == 0 and dd.rank_star == 0
    np.testing.assert_allclose(dd.D, np.zeros((2, 2)), atol=1e-8)


def test_defect_data_zero_product():
    tp = build_tuple([np.zeros((3, 3))])
    dd = defect_data(tp)
    assert dd.rank == 3
    np.testing.assert_allclose(dd.D, np.eye(3), atol=1e-14)


def test_defect_data_jordan_cell():
    tp = build_tuple([np.array([[0.0, 0.5], [0.0, 0.0]])])
    dd = defect_data(tp)
    np.testing.assert_allclose(dd.D, np.diag([1.0, np.sqrt(3.0) / 2.0]), atol=1e-14)


@pytest.mark.parametrize("seed", range(6))
def test_defect_intertwining(seed):
    rng = np.random.default_rng(seed)
    base = random_contraction(4, rng, 0.9)
    tp = build_tuple([base, 0.5 * base @ base + 0.3 * np.eye(4)])
    dd = defect_data(tp)
    assert opnorm(tp.T @ dd.D - dd.D_star @ tp.T) <= DEFAULT_TOL.check_tol
    for t, d, d_star in zip(tp.T_list, dd.D_i, dd.D_i_star):
        assert opnorm(t @ d - d_star @ t) <= DEFAULT_TOL.check_tol


def test_canonical_decomposition_unitary():
    split = canonical_decomposition(rotation(0.4))
    assert split.dim_unitary == 2 and split.dim_cnu == 0


def test_canonical_decomposition_strict():
    split = canonical_decomposition(0.5 * rotation(0.4))
    assert split.dim_unitary == 0 and split.dim_cnu == 2


def test_canonical_decomposition_mixed():
    split = canonical_decomposition(np.diag([1.0, 0.5]))
    assert split.dim_unitary == 1
    overlap = abs(split.basis_unitary[0, 0])
    np.testing.assert_allclose(overlap, 1.0, atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_canonical_split_resolves_identity(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(2, rng)
    t = np.zeros((4, 4), dtype=complex)
    t[:2, :2] = u
    t[2:, 2:] = random_contraction(2, rng, 0.7)
    split = canonical_decomposition(t)
    b = np.hstack([split.basis_unitary, split.basis_cnu])
    np.testing.assert_allclose(b @ adj(b), np.eye(4), atol=1e-12)
    assert split.dim_unitary == 2


def test_is_c0_examples():
    assert is_c0(np.zeros((2, 2)))
    assert not is_c0(rotation(0.2))
    nil = 0.9 * np.array([[0.0, 1.0], [0.0, 0.0]])
    witness = is_c0(nil)
    assert witness and witness.spectral_radius == 0.0


def test_is_c0_witness_monotone():
    rng = np.random.default_rng(8)
    t = random_contraction(5, rng, 0.95)
    witness = is_c0(t, horizon=12)
    norms = witness.power_norms
    assert all(norms[i + 1] <= norms[i] + 1e-12 for i in range(len(norms) - 1))


def test_is_cnu_examples():
    assert is_cnu(0.5 * rotation(0.7))
    assert not is_cnu(rotation(0.7))
    assert not is_cnu(np.diag([1.0, 0.5]))


def test_cnu_equals_c0_on_random_contractions():
    rng = np.random.default_rng(17)
    for k in range(500):
        d = int(rng.integers(1, 6))
        if k % 3 == 0:
            ud = int(rng.integers(1, d + 1))
            t = np.zeros((d + ud, d + ud), dtype=complex)
            t[:ud, :ud] = random_unitary(ud, rng)
            t[ud:, ud:] = random_contraction(d, rng, float(rng.uniform(0.3, 0.97)))
        else:
            t = random_contraction(d, rng, float(rng.uniform(0.3, 0.97)))
        assert is_cnu(t) == bool(is_c0(t))
