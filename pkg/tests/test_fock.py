import itertools

import numpy as np
import pytest
import scipy.sparse as sparse

from bosonic_mip.errors import (
    ConfigError,
    InvalidDimensionError,
    UnsupportedMonomialError,
)
from bosonic_mip.fock import (
    ModeSpace,
    OperatorPoly,
    annihilation,
    assemble,
    assemble_diagonal,
    embed,
    hermiticity_defect,
    n_op,
    number,
    p_op,
    quadratures,
    x_op,
)


def test_annihilation_d2():
    np.testing.assert_allclose(annihilation(2), [[0, 1], [0, 0]])


def test_annihilation_d3_entries():
    a = annihilation(3)
    assert a[0, 1] == 1.0
    assert a[1, 2] == pytest.approx(np.sqrt(2))
    assert np.count_nonzero(a) == 2


def test_number_operator_spectrum():
    a = annihilation(4)
    np.testing.assert_allclose(a.T @ a, np.diag([0.0, 1.0, 2.0, 3.0]), atol=1e-14)


def test_invalid_dimension():
    with pytest.raises(InvalidDimensionError):
        annihilation(1)


def test_quadratures_d2():
    x, p = quadratures(2)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(x, [[0, s], [s, 0]])
    np.testing.assert_allclose(p, [[0, -1j * s], [1j * s, 0]])


def test_commutator_truncation_structure():
    # [x, p] = i*hbar*I except the top diagonal entry, which picks up -(d-1)*i*hbar
    d = 10
    x, p = quadratures(d)
    comm = x @ p - p @ x
    expected = 1j * np.eye(d)
    expected[d - 1, d - 1] = -1j * (d - 1)
    np.testing.assert_allclose(comm, expected, atol=1e-12)


def test_hbar_scaling():
    x1, _ = quadratures(5, hbar=1.0)
    x2, _ = quadratures(5, hbar=2.0)
    np.testing.assert_allclose(x2, np.sqrt(2) * x1)


def test_embed_number_two_modes():
    space = ModeSpace((2, 2))
    n0 = embed(number(2), 0, space)
    n1 = embed(number(2), 1, space)
    np.testing.assert_allclose(n0.toarray(), np.diag([0, 0, 1, 1]))
    np.testing.assert_allclose(n1.toarray(), np.diag([0, 1, 0, 1]))


def test_embed_identity():
    space = ModeSpace((3, 4))
    out = embed(np.eye(4), 1, space)
    np.testing.assert_allclose(out.toarray(), np.eye(12))


def test_embed_dimension_mismatch():
    with pytest.raises(ConfigError):
        embed(np.eye(3), 0, ModeSpace((2, 2)))
    with pytest.raises(ConfigError):
        embed(np.eye(2), 5, ModeSpace((2, 2)))


def test_embedded_distinct_modes_commute_exactly():
    space = ModeSpace((3, 3))
    x, p = quadratures(3)
    a = embed(x, 0, space)
    b = embed(p, 1, space)
    delta = (a @ b - b @ a)
    assert np.abs(delta.toarray()).max() == 0.0


def _feasibility_poly():
    lhs = n_op(0) + n_op(1) - 5.0
    return lhs * lhs


def test_assemble_feasibility_diagonal_zeros():
    space = ModeSpace((8, 8))
    h = assemble(_feasibility_poly(), space)
    dense = h.toarray()
    assert np.abs(dense - np.diag(np.diag(dense))).max() == 0.0
    diag = np.real(np.diag(dense))
    zeros = [space.index_of((i, 5 - i)) for i in range(6)]
    assert np.all(np.abs(diag[zeros]) < 1e-12)
    mask = np.ones(64, bool)
    mask[zeros] = False
    assert diag[mask].min() >= 1.0 - 1e-12


def test_assemble_momentum_square_psd():
    space = ModeSpace((12,))
    h = assemble(p_op(0, 2), space).toarray()
    vals = np.linalg.eigvalsh(h)
    assert vals.min() > -1e-12


def test_assemble_negative_number():
    space = ModeSpace((3,))
    h = assemble(-1.0 * n_op(0), space).toarray()
    np.testing.assert_allclose(h, np.diag([0, -1, -2]), atol=1e-14)


def test_mixed_primitive_rejected():
    with pytest.raises(UnsupportedMonomialError):
        _ = x_op(0) * p_op(0)
    with pytest.raises(UnsupportedMonomialError):
        _ = n_op(1) * x_op(1)


def test_same_primitive_same_mode_merges_power():
    poly = x_op(0) * x_op(0)
    ((mono, coeff),) = poly.terms()
    assert mono == ((0, "X", 2),)
    assert coeff == 1.0


def test_poly_algebra_square():
    poly = (n_op(0) + n_op(1) - 5.0) ** 2
    expected = (
        n_op(0, 2) + n_op(1, 2) + 2.0 * (n_op(0) * n_op(1))
        - 10.0 * n_op(0) - 10.0 * n_op(1) + 25.0
    )
    assert poly == expected


@pytest.mark.parametrize("seed", range(4))
def test_random_poly_hermiticity(seed):
    rng = np.random.default_rng(seed)
    space = ModeSpace((3, 4, 2))
    poly = OperatorPoly()
    prim_builders = [n_op, x_op, p_op]
    for _ in range(6):
        mode = int(rng.integers(0, 3))
        builder = prim_builders[int(rng.integers(0, 3))]
        power = int(rng.integers(1, 4))
        coeff = float(rng.normal())
        poly = poly + coeff * builder(mode, power)
    h = assemble(poly, space)
    assert hermiticity_defect(h) <= 1e-12


def test_n_only_poly_assembles_diagonal():
    space = ModeSpace((4, 3))
    poly = 2.0 * n_op(0, 2) * n_op(1) - 3.0 * n_op(1) + 1.5
    h = assemble(poly, space)
    off = h - sparse.diags(h.diagonal())
    assert off.nnz == 0
    expected = assemble_diagonal(poly, space)
    np.testing.assert_allclose(np.real(h.diagonal()), expected, atol=1e-12)


def test_spectrum_oracle_feasibility():
    # eigenvalues of the assembled diagonal match direct enumeration
    space = ModeSpace((6, 6))
    h = assemble(_feasibility_poly(), space)
    got = np.sort(np.real(np.linalg.eigvalsh(h.toarray())))
    expected = np.sort(
        [(n1 + n2 - 5) ** 2 for n1, n2 in itertools.product(range(6), range(6))]
    )
    np.testing.assert_allclose(got, expected, atol=1e-10)


def test_mode_space_validation():
    with pytest.raises(InvalidDimensionError):
        ModeSpace((1, 4))
    with pytest.raises(ConfigError):
        ModeSpace((4, 4), hbar=0.0)
    space = ModeSpace((2, 3, 4))
    assert space.total_dim == 24
    assert space.index_of((1, 2, 3)) == 1 * 12 + 2 * 4 + 3
    assert space.occupation_of(23) == (1, 2, 3)


def test_assemble_cache_returns_same_object():
    space = ModeSpace((4, 4))
    poly = _feasibility_poly()
    assert assemble(poly, space) is assemble(poly, space)
