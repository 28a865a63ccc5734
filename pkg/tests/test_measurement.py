import numpy as np
import pytest
from scipy import stats

from bosonic_mip.errors import ConditioningError, ConfigError
from bosonic_mip.fock import ModeSpace
from bosonic_mip.measurement import (
    FockDistribution,
    conditional_state,
    conditional_x2,
    default_grid,
    exact_threshold_distribution,
    fairness_metrics,
    fock_probabilities,
    hermite_functions,
    homodyne_sample,
    marginal,
    quadrature_pdf,
    reduced_density,
    spad_success,
    threshold_bits,
)
from bosonic_mip.states import InitialStateSpec, QuantumState, product_state, squeezed_coherent


def basis_state(space, occupation):
    amp = np.zeros(space.total_dim, dtype=complex)
    amp[space.index_of(occupation)] = 1.0
    return QuantumState(amp, space)


def test_fock_probabilities_basis_state():
    space = ModeSpace((8, 8))
    dist = fock_probabilities(basis_state(space, (0, 5)))
    assert dist.prob((0, 5)) == pytest.approx(1.0)
    assert dist.total() == pytest.approx(1.0)
    assert dist.argmax() == (0, 5)


def test_fock_probabilities_uniform_superposition():
    space = ModeSpace((8, 8))
    amp = np.zeros(space.total_dim, dtype=complex)
    for i in range(6):
        amp[space.index_of((i, 5 - i))] = 1.0
    state = QuantumState(amp / np.sqrt(6), space)
    dist = fock_probabilities(state)
    for i in range(6):
        assert dist.prob((i, 5 - i)) == pytest.approx(1 / 6)


def test_fock_probabilities_topk_filter():
    space = ModeSpace((4, 4))
    amp = np.sqrt(np.arange(1, 17, dtype=float))
    state = QuantumState(amp / np.linalg.norm(amp), space)
    dist = fock_probabilities(state, top_k=3)
    assert np.count_nonzero(dist.probs) == 3
    assert dist.argmax() == (3, 3)


def test_marginal_product_state():
    space = ModeSpace((6, 5))
    vec0, _ = squeezed_coherent(0.4j, 0.3, 6)
    vec1, _ = squeezed_coherent(0.2j, 0.1, 5)
    state = QuantumState(np.kron(vec0, vec1), space)
    marg = marginal(state, keep=(0,))
    np.testing.assert_allclose(marg.probs, np.abs(vec0) ** 2, atol=1e-12)


def test_marginal_composition_and_total():
    space = ModeSpace((3, 4, 2))
    rng = np.random.default_rng(5)
    amp = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
    state = QuantumState(amp / np.linalg.norm(amp), space)
    dist = fock_probabilities(state)
    m01 = marginal(dist, keep=(0, 1))
    m0_direct = marginal(dist, keep=(0,))
    m0_composed = marginal(m01, keep=(0,))
    np.testing.assert_allclose(m0_direct.probs, m0_composed.probs, atol=1e-12)
    assert marginal(dist, keep=(0, 1, 2)).total() == pytest.approx(dist.total())


def test_marginal_invalid_subset():
    space = ModeSpace((3, 3))
    state = basis_state(space, (0, 0))
    with pytest.raises(ConfigError):
        marginal(state, keep=())
    with pytest.raises(ConfigError):
        marginal(state, keep=(5,))


def test_reduced_density_product_is_rank_one():
    space = ModeSpace((5, 4))
    vec0, _ = squeezed_coherent(0.3j, 0.4, 5)
    vec1, _ = squeezed_coherent(0.0, 0.2, 4)
    state = QuantumState(np.kron(vec0, vec1), space)
    rho = reduced_density(state, keep=(0,))
    vals = np.linalg.eigvalsh(rho)
    assert vals[-1] == pytest.approx(1.0, abs=1e-10)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)


def test_reduced_density_bell_like():
    space = ModeSpace((2, 2))
    amp = np.zeros(4, dtype=complex)
    amp[space.index_of((0, 0))] = 1 / np.sqrt(2)
    amp[space.index_of((1, 1))] = 1 / np.sqrt(2)
    rho = reduced_density(QuantumState(amp, space), keep=(0,))
    np.testing.assert_allclose(rho, np.diag([0.5, 0.5]), atol=1e-12)


def test_quadrature_pdf_vacuum():
    grid = default_grid(8)
    rho = np.zeros((8, 8)); rho[0, 0] = 1.0
    pdf = quadrature_pdf(rho, grid)
    np.testing.assert_allclose(pdf, np.exp(-grid**2) / np.sqrt(np.pi), atol=1e-6)
    assert np.trapezoid(pdf, grid) == pytest.approx(1.0, abs=1e-3)


def test_quadrature_pdf_one_photon_node():
    grid = np.linspace(-6, 6, 2001)
    rho = np.zeros((4, 4)); rho[1, 1] = 1.0
    pdf = quadrature_pdf(rho, grid)
    assert pdf[1000] == pytest.approx(0.0, abs=1e-12)


def test_quadrature_pdf_squeezed_variance():
    d = 30
    vec, _ = squeezed_coherent(0.0, 0.6, d)  # momentum squeezed -> x widened
    rho = np.outer(vec, vec.conj())
    grid = default_grid(d)
    pdf = quadrature_pdf(rho, grid)
    var = np.trapezoid(grid**2 * pdf, grid)
    assert var == pytest.approx(0.5 * np.exp(1.2), rel=0.02)


def test_quadrature_pdf_narrow_grid_rejected():
    grid = np.linspace(-0.5, 0.5, 101)
    rho = np.zeros((6, 6)); rho[0, 0] = 1.0
    with pytest.raises(ConfigError):
        quadrature_pdf(rho, grid)


def test_hermite_functions_orthonormal():
    grid = np.linspace(-10, 10, 4001)
    phi = hermite_functions(6, grid)
    gram = np.trapezoid(phi[:, None, :] * phi[None, :, :], grid, axis=2)
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-6)


def test_homodyne_vacuum_variance():
    space = ModeSpace((6,))
    state = basis_state(space, (0,))
    record = homodyne_sample(state, (0,), shots=10000, seed=11)
    assert record.samples.var() == pytest.approx(0.5, rel=0.05)
    assert record.samples.mean() == pytest.approx(0.0, abs=0.03)


def test_homodyne_reproducible():
    space = ModeSpace((5, 5))
    spec = InitialStateSpec.uniform(0.4, 0.3, 2)
    state = product_state(spec, space)
    a = homodyne_sample(state, (0, 1), shots=64, seed=3)
    b = homodyne_sample(state, (0, 1), shots=64, seed=3)
    np.testing.assert_array_equal(a.samples, b.samples)
    c = homodyne_sample(state, (0, 1), shots=64, seed=4)
    assert not np.array_equal(a.samples, c.samples)


def test_homodyne_product_independence():
    space = ModeSpace((6, 6))
    vec0, _ = squeezed_coherent(0.5j, 0.4, 6)
    vec1, _ = squeezed_coherent(-0.3j, 0.2, 6)
    state = QuantumState(np.kron(vec0, vec1), space)
    record = homodyne_sample(state, (0, 1), shots=10000, seed=7)
    xs, ys = record.samples[:, 0], record.samples[:, 1]
    # chi-square independence test on a 4x4 quantile binning
    qx = np.quantile(xs, [0.25, 0.5, 0.75])
    qy = np.quantile(ys, [0.25, 0.5, 0.75])
    table = np.zeros((4, 4))
    ix = np.digitize(xs, qx)
    iy = np.digitize(ys, qy)
    for a_, b_ in zip(ix, iy):
        table[a_, b_] += 1
    _, p_value, _, _ = stats.chi2_contingency(table)
    assert p_value > 0.01


def test_homodyne_chain_rule_marginals_match_single_mode():
    space = ModeSpace((6, 6))
    vec0, _ = squeezed_coherent(0.5j, 0.4, 6)
    vec1, _ = squeezed_coherent(0.0, 0.5, 6)
    joint = QuantumState(np.kron(vec0, vec1), space)
    rec_joint = homodyne_sample(joint, (0, 1), shots=4000, seed=21)
    single = QuantumState(vec1.copy(), ModeSpace((6,)))
    rec_single = homodyne_sample(single, (0,), shots=4000, seed=22)
    # Kolmogorov-Smirnov: second-mode samples from the joint product state
    # match the single-mode law
    _, p_value = stats.ks_2samp(rec_joint.samples[:, 1], rec_single.samples[:, 0])
    assert p_value > 0.01


def test_threshold_bits():
    record = type("R", (), {})()
    samples = np.array([[0.35, -0.1], [0.3162278, 0.5], [-1.0, -2.0]])
    from bosonic_mip.measurement import HomodyneRecord

    record = HomodyneRecord(samples, (0, 1), seed=0)
    freqs, threshold = threshold_bits(record, n_vertices=5)
    assert threshold == pytest.approx(1 / np.sqrt(10))
    assert freqs[(1, 0)] == pytest.approx(1 / 3)
    assert freqs[(1, 1)] == pytest.approx(1 / 3)  # equality counts as a click
    assert freqs[(0, 0)] == pytest.approx(1 / 3)


def test_exact_threshold_distribution_sums_to_one():
    space = ModeSpace((5, 5))
    spec = InitialStateSpec.uniform(0.5, 0.5, 2)
    state = product_state(spec, space)
    dist = exact_threshold_distribution(state, threshold=1 / np.sqrt(10))
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-6)
    assert all(p >= -1e-9 for p in dist.values())


def test_spad_success_concentrated():
    space = ModeSpace((3,) * 5)
    dist = fock_probabilities(basis_state(space, (1, 1, 0, 1, 0)))
    assert spad_success(dist, bright_modes=(0, 1, 3), zero_modes=(2, 4)) == 1.0
    assert spad_success(dist, bright_modes=(0, 2, 3), zero_modes=(1, 4)) == 0.0


def test_spad_success_vacuum_and_errors():
    space = ModeSpace((3, 3))
    dist = fock_probabilities(basis_state(space, (0, 0)))
    assert spad_success(dist, (0,), (1,)) == 0.0
    with pytest.raises(ConfigError):
        spad_success(dist, (0,), (0,))
    with pytest.raises(ConfigError):
        spad_success(dist, (), (1,))


def test_spad_counts_higher_occupations():
    space = ModeSpace((4, 4))
    amp = np.zeros(space.total_dim, dtype=complex)
    amp[space.index_of((2, 0))] = 1.0
    dist = fock_probabilities(QuantumState(amp, space))
    assert spad_success(dist, (0,), (1,)) == 1.0


def test_conditional_state_and_errors():
    space = ModeSpace((3, 3))
    amp = np.zeros(space.total_dim, dtype=complex)
    amp[space.index_of((1, 2))] = 1.0
    state = QuantumState(amp, space)
    cond, prob = conditional_state(state, (1,), (2,))
    assert prob == pytest.approx(1.0)
    assert cond.space.dims == (3,)
    with pytest.raises(ConditioningError):
        conditional_state(state, (1,), (0,))


def test_conditional_x2_vacuum():
    space = ModeSpace((6, 6))
    state = basis_state(space, (0, 0))
    result = conditional_x2(state, (1,), (0,), (0,), shots=4000, seed=9)
    assert result.exact[0] == pytest.approx(0.5, abs=1e-10)
    assert abs(result.sampled[0] - 0.5) < 3.5 * result.stderr[0] + 1e-12


def test_conditional_x2_sampled_tracks_exact():
    space = ModeSpace((8, 3))
    vec0, _ = squeezed_coherent(0.6j, 0.5, 8)
    amp = np.kron(vec0, np.array([0, 1, 0], dtype=complex))
    state = QuantumState(amp, space)
    result = conditional_x2(state, (1,), (1,), (0,), shots=20000, seed=13)
    assert abs(result.sampled[0] - result.exact[0]) < 3.0 * result.stderr[0]


def test_sampling_error_shrinks_with_shots():
    space = ModeSpace((8,))
    vec, _ = squeezed_coherent(0.4j, 0.4, 8)
    state = QuantumState(vec, space)
    x, _ = np.linalg.eigh(np.eye(8)), None  # placeholder to keep locals tidy
    from bosonic_mip.fock import quadratures

    xm, _ = quadratures(8)
    exact = float(np.real(np.vdot(vec, xm @ xm @ vec)))
    errs = []
    for shots in (500, 8000):
        rec = homodyne_sample(state, (0,), shots=shots, seed=17)
        errs.append(abs((rec.samples**2).mean() - exact))
    assert errs[1] < errs[0]


def test_fairness_metrics():
    space = ModeSpace((8, 8))
    amp = np.zeros(space.total_dim, dtype=complex)
    for i in range(6):
        amp[space.index_of((i, 5 - i))] = 1.0
    dist = fock_probabilities(QuantumState(amp / np.sqrt(6), space))
    report = fairness_metrics(dist, [[(i, 5 - i)] for i in range(6)])
    assert report.std_dev == pytest.approx(0.0, abs=1e-12)
    assert report.success == pytest.approx(1.0)
    assert report.bias is None

    two = fairness_metrics(dist, [[(0, 5)], [(1, 4)]])
    assert two.bias == pytest.approx(0.0, abs=1e-12)


def test_fairness_bias_formula():
    probs = np.zeros((2, 2))
    probs[0, 0] = 0.6
    probs[1, 1] = 0.3
    dist = FockDistribution(probs, (0, 1))
    report = fairness_metrics(dist, [[(0, 0)], [(1, 1)]])
    assert report.bias == pytest.approx(1 / 3)
    assert report.success == pytest.approx(0.9)


def test_fairness_undefined_bias():
    probs = np.zeros((2, 2))
    dist = FockDistribution(probs, (0, 1))
    report = fairness_metrics(dist, [[(0, 0)], [(1, 1)]])
    assert report.bias is None
