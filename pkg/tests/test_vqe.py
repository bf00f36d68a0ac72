import numpy as np
import pytest

from schwinger_vqe import (
    AnsatzConfig,
    ModelParams,
    OptimizerSettings,
    VqeRunRecord,
    ansatz_state,
    best_record,
    build_hamiltonian,
    classify_outliers,
    cost,
    cost_and_gradient,
    delta_n_operator,
    expand_params,
    gradient,
    ground_state,
    multi_start,
    optimize,
    random_initial_params,
    symmetry_operator,
    total_charge_operator,
    zero_charge_basis,
)
from schwinger_vqe.lbfgs import minimize_lbfgs
from schwinger_vqe.simulator import expectation, neel_state

from oracles import fd_gradient, neel_diagonal_energy


@pytest.fixture(scope="module")
def small_model():
    p = ModelParams(N=2, F=3, x=1.0, mu=(0.1, 0.1, 0.1), nu=(0.8, 0.0, -0.8))
    w = build_hamiltonian(p)
    spec = ground_state(w, zero_charge_basis(p), k=4)
    return p, w, spec


def test_parameter_counts():
    for n in (2, 4, 6, 8):
        m = 3 * n
        free = AnsatzConfig(num_qubits=m, layers=1, constrained=False)
        tied = AnsatzConfig(num_qubits=m, layers=1, constrained=True)
        assert free.params_per_layer == 6 * n - 1 == 2 * m - 1
        assert tied.params_per_layer == 3 * n == m // 2 + (m - 1 + 1) // 2
    assert AnsatzConfig(num_qubits=12, layers=1).params_per_layer == 23
    assert AnsatzConfig(num_qubits=12, layers=1, constrained=True).params_per_layer == 12


def test_config_validation():
    with pytest.raises(ValueError):
        AnsatzConfig(num_qubits=1, layers=1)
    with pytest.raises(ValueError):
        AnsatzConfig(num_qubits=4, layers=0)
    with pytest.raises(ValueError):
        AnsatzConfig(num_qubits=5, layers=1, constrained=True)


def test_expand_unconstrained_roundtrip():
    cfg = AnsatzConfig(num_qubits=6, layers=2, constrained=False)
    vals = np.arange(cfg.num_params, dtype=float)
    layers = expand_params(cfg, vals)
    assert np.array_equal(layers[0].theta_e, vals[:5])
    assert np.array_equal(layers[0].theta_s, vals[5:11])
    assert np.array_equal(layers[1].theta_e, vals[11:16])


def test_expand_constrained_structure():
    cfg = AnsatzConfig(num_qubits=6, layers=1, constrained=True)
    free = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    (layer,) = expand_params(cfg, free)
    # entanglers mirrored about the center pair
    assert np.array_equal(layer.theta_e, [1.0, 2.0, 3.0, 2.0, 1.0])
    # Z angles tied antisymmetrically
    assert np.array_equal(layer.theta_s, [4.0, 5.0, 6.0, -6.0, -5.0, -4.0])
    assert np.all(expand_params(cfg, np.zeros(6))[0].theta_e == 0)
    with pytest.raises(ValueError):
        expand_params(cfg, np.zeros(7))


def test_constrained_expansion_invariant_under_reflection_map():
    # applying the flip-reflect transformation rule to the expanded angles
    # reproduces them exactly
    cfg = AnsatzConfig(num_qubits=12, layers=1, constrained=True)
    rng = np.random.default_rng(0)
    (layer,) = expand_params(cfg, rng.uniform(-np.pi, np.pi, cfg.num_params))
    m = 12
    for k in range(m - 1):
        assert layer.theta_e[k] == pytest.approx(layer.theta_e[m - 2 - k])
    for k in range(m):
        assert layer.theta_s[k] == pytest.approx(-layer.theta_s[m - 1 - k])


def test_cost_at_zero_angles_is_neel_energy(small_model):
    p, w, _ = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=3, constrained=False)
    got = cost(w, cfg, np.zeros(cfg.num_params))
    assert got == pytest.approx(neel_diagonal_energy(p), abs=1e-12)


def test_cost_respects_ed_lower_bound(small_model):
    _, w, spec = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=2, constrained=False)
    rng = np.random.default_rng(1)
    for _ in range(10):
        c = cost(w, cfg, rng.uniform(-np.pi, np.pi, cfg.num_params))
        assert c >= spec.energies[0] - 1e-9


def test_unconstrained_cost_symmetric_under_parameter_reflection(small_model):
    # for a symmetric Hamiltonian, mapping theta_e -> reversed, theta_s ->
    # -reversed leaves the cost unchanged
    _, w, _ = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=2, constrained=False)
    rng = np.random.default_rng(2)
    theta = rng.uniform(-np.pi, np.pi, cfg.num_params)
    transformed = []
    for layer in expand_params(cfg, theta):
        transformed.extend(layer.theta_e[::-1])
        transformed.extend(-layer.theta_s[::-1])
    assert cost(w, cfg, theta) == pytest.approx(
        cost(w, cfg, np.array(transformed)), abs=1e-10
    )


@pytest.mark.parametrize("constrained", [False, True])
def test_gradient_matches_finite_differences(small_model, constrained):
    _, w, _ = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=5, constrained=constrained)
    rng = np.random.default_rng(3)
    for _ in range(3):
        theta = rng.uniform(-np.pi, np.pi, cfg.num_params)
        _, g = cost_and_gradient(w, cfg, theta)
        fd = fd_gradient(lambda t: cost(w, cfg, t), theta)
        rel = np.abs(g - fd) / np.maximum(1.0, np.maximum(np.abs(g), np.abs(fd)))
        assert rel.max() < 1e-5


def test_constrained_gradient_is_collapsed_unconstrained_gradient(small_model):
    _, w, _ = small_model
    ccfg = AnsatzConfig(num_qubits=6, layers=2, constrained=True)
    ucfg = AnsatzConfig(num_qubits=6, layers=2, constrained=False)
    rng = np.random.default_rng(4)
    free = rng.uniform(-np.pi, np.pi, ccfg.num_params)
    expanded = []
    for layer in expand_params(ccfg, free):
        expanded.extend(layer.theta_e)
        expanded.extend(layer.theta_s)
    g_u = gradient(w, ucfg, np.array(expanded))
    g_c = gradient(w, ccfg, free)
    m, half = 6, 3
    for l in range(2):
        ge = g_u[l * 11 : l * 11 + 5]
        gs = g_u[l * 11 + 5 : (l + 1) * 11]
        want_e = [ge[0] + ge[4], ge[1] + ge[3], ge[2]]
        want_s = [gs[0] - gs[5], gs[1] - gs[4], gs[2] - gs[3]]
        assert np.allclose(g_c[l * 6 : l * 6 + 3], want_e, atol=1e-12)
        assert np.allclose(g_c[l * 6 + 3 : (l + 1) * 6], want_s, atol=1e-12)


def test_gradient_small_at_converged_minimum(small_model):
    _, w, spec = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=3, constrained=True)
    rec = optimize(w, cfg, random_initial_params(cfg, [9, 0]), baseline=spec)
    assert rec.converged
    assert np.linalg.norm(gradient(w, cfg, rec.params)) < 1e-6


def test_optimize_at_minimizer_terminates_immediately(small_model):
    _, w, spec = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=3, constrained=True)
    rec = optimize(w, cfg, random_initial_params(cfg, [9, 1]), baseline=spec)
    assert rec.converged
    rec2 = optimize(w, cfg, rec.params, baseline=spec)
    assert rec2.iterations == 0
    assert rec2.energy == pytest.approx(rec.energy, abs=1e-14)


def test_accepted_steps_are_monotone(small_model):
    _, w, _ = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=3, constrained=False)
    values = []
    minimize_lbfgs(
        lambda t: cost_and_gradient(w, cfg, t),
        random_initial_params(cfg, [9, 2]),
        callback=lambda it, x, f, gn: values.append(f),
    )
    values = np.array(values)
    assert np.all(np.diff(values) <= 1e-12)


def test_ansatz_state_charge_sector(small_model):
    p, _, _ = small_model
    q = total_charge_operator(p)
    q2 = q @ q
    cfg = AnsatzConfig(num_qubits=6, layers=4, constrained=False)
    rng = np.random.default_rng(5)
    for _ in range(10):
        psi = ansatz_state(cfg, rng.uniform(-np.pi, np.pi, cfg.num_params))
        assert abs(expectation(psi, q)) < 1e-12
        assert abs(expectation(psi, q2)) < 1e-12


def test_constrained_states_are_symmetry_eigenstates(small_model):
    p, _, _ = small_model
    s = symmetry_operator(p)
    cfg = AnsatzConfig(num_qubits=6, layers=4, constrained=True)
    rng = np.random.default_rng(6)
    for _ in range(10):
        psi = ansatz_state(cfg, rng.uniform(-np.pi, np.pi, cfg.num_params))
        assert abs(abs(s.expectation(psi)) - 1.0) < 1e-10


def test_multi_start_deterministic(small_model):
    p, w, spec = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=2, constrained=True)
    delta_ops = [delta_n_operator(p, f) for f in range(3)]
    kwargs = dict(baseline=spec, delta_ops=delta_ops)
    a = multi_start(w, cfg, restarts=3, seed=123, **kwargs)
    b = multi_start(w, cfg, restarts=3, seed=123, **kwargs)
    for ra, rb in zip(a, b):
        assert ra.energy == rb.energy
        assert np.array_equal(ra.params, rb.params)
        assert ra.delta_n == rb.delta_n
        assert ra.seed == rb.seed
    c = multi_start(w, cfg, restarts=3, seed=124, **kwargs)
    assert any(not np.array_equal(ra.params, rc.params) for ra, rc in zip(a, c))


def test_multi_start_single_restart_not_outlier(small_model):
    p, w, spec = small_model
    cfg = AnsatzConfig(num_qubits=6, layers=3, constrained=True)
    recs = multi_start(
        w, cfg, restarts=1, seed=5, baseline=spec,
        delta_ops=[delta_n_operator(p, f) for f in range(3)],
    )
    assert len(recs) == 1
    assert not recs[0].outlier


def _record(energy, delta_n=(0.0, 0.0, 0.0)):
    return VqeRunRecord(
        energy=energy,
        params=np.zeros(1),
        delta_n=delta_n,
        overlap=None,
        converged=True,
        outlier=False,
        iterations=1,
        seed=(0,),
    )


def test_classify_outliers_energy_rule():
    recs = [_record(-3.0), _record(-2.9), _record(-1.5)]
    classify_outliers(recs)
    assert [r.outlier for r in recs] == [False, False, True]


def test_classify_outliers_equal_energies():
    recs = [_record(-2.0), _record(-2.0), _record(-2.0)]
    classify_outliers(recs)
    assert not any(r.outlier for r in recs)


def test_classify_outliers_non_integer_delta_n():
    recs = [_record(-3.0), _record(-3.0, delta_n=(0.5, 0.0, 0.0))]
    classify_outliers(recs)
    assert [r.outlier for r in recs] == [False, True]


def test_classify_outliers_idempotent_and_relative():
    recs = [_record(-3.0), _record(-2.9), _record(-1.5)]
    classify_outliers(recs)
    flags = [r.outlier for r in recs]
    classify_outliers(classify_outliers(recs))
    assert [r.outlier for r in recs] == flags
    with pytest.raises(ValueError):
        classify_outliers([])


def test_best_record_selection():
    recs = [_record(-2.0), _record(-3.0), _record(-2.5)]
    recs[1].outlier = True
    assert best_record(recs).energy == -2.5
    for r in recs:
        r.outlier = True
    assert best_record(recs) is None


def test_record_round_trip():
    r = _record(-1.25, delta_n=(1.0, 0.0, -1.0))
    r.overlap = 0.97
    d = r.to_dict()
    r2 = VqeRunRecord.from_dict(d)
    assert r2.energy == r.energy
    assert r2.delta_n == r.delta_n
    assert r2.overlap == r.overlap
    assert np.array_equal(r2.params, r.params)
