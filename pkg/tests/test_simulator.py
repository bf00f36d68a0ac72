import numpy as np
import pytest

from schwinger_vqe import (
    LayerAngles,
    ModelParams,
    NonHermitianError,
    PauliSum,
    apply_ansatz,
    apply_rz,
    apply_xxyy,
    build_hamiltonian,
    compile_operator,
    dump_statevector,
    expectation,
    neel_state,
    overlap,
    symmetry_operator,
    total_charge_operator,
)

from oracles import basis_index, dense_layer, dense_operator, dense_rz, dense_xxyy


def random_state(m, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return psi / np.linalg.norm(psi)


def random_layers(m, layers, seed):
    rng = np.random.default_rng(seed)
    return [
        LayerAngles(
            theta_e=rng.uniform(-np.pi, np.pi, m - 1),
            theta_s=rng.uniform(-np.pi, np.pi, m),
        )
        for _ in range(layers)
    ]


def test_neel_state():
    psi = neel_state(2)
    assert psi[basis_index("10")] == 1.0 and np.abs(psi).sum() == 1.0
    psi6 = neel_state(6)
    p = ModelParams(N=2, F=3)
    assert expectation(psi6, total_charge_operator(p)) == pytest.approx(0.0, abs=1e-14)
    s = symmetry_operator(p)
    assert np.array_equal(s.apply(psi6), psi6)
    with pytest.raises(ValueError):
        neel_state(0)


def test_rz_identity_and_period():
    psi = random_state(3, 1)
    assert np.allclose(apply_rz(psi, 1, 0.0), psi)
    out = apply_rz(psi, 1, 2 * np.pi)
    assert np.allclose(out, -psi)  # global phase -1 at theta = 2 pi
    assert overlap(psi, out) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        apply_rz(psi, 3, 0.1)


def test_rz_matches_dense_oracle():
    psi = random_state(3, 2)
    for j in range(3):
        got = apply_rz(psi, j, 0.7)
        want = dense_rz(3, j, 0.7) @ psi
        assert np.allclose(got, want, atol=1e-12)


def test_xxyy_identity_and_example():
    psi = random_state(2, 3)
    assert np.allclose(apply_xxyy(psi, 0, 0.0), psi)
    out = apply_xxyy(neel_state(2), 0, np.pi / 2)
    want = np.zeros(4, dtype=complex)
    want[basis_index("01")] = -1.0j
    assert np.allclose(out, want, atol=1e-12)
    with pytest.raises(ValueError):
        apply_xxyy(psi, 1, 0.1)


def test_xxyy_matches_dense_oracle():
    for m, seed in ((2, 4), (4, 5)):
        psi = random_state(m, seed)
        for k in range(m - 1):
            got = apply_xxyy(psi, k, -1.3)
            want = dense_xxyy(m, k, -1.3) @ psi
            assert np.allclose(got, want, atol=1e-12)


def test_xxyy_preserves_weight_sectors():
    m = 5
    psi = random_state(m, 6)
    weights = np.bitwise_count(np.arange(1 << m).astype(np.uint64))
    before = [np.linalg.norm(psi[weights == w]) for w in range(m + 1)]
    out = apply_xxyy(apply_xxyy(psi, 0, 0.9), 2, -0.4)
    after = [np.linalg.norm(out[weights == w]) for w in range(m + 1)]
    assert np.allclose(before, after, atol=1e-12)


def test_ansatz_zero_angles_is_identity():
    psi0 = neel_state(4)
    layers = [LayerAngles(np.zeros(3), np.zeros(4))] * 2
    assert np.allclose(apply_ansatz(psi0, layers), psi0)


def test_ansatz_matches_dense_layer_unitary():
    m = 4
    psi0 = neel_state(m)
    layers = random_layers(m, 1, 7)
    got = apply_ansatz(psi0, layers)
    want = dense_layer(m, layers[0].theta_e, layers[0].theta_s) @ psi0
    assert np.allclose(got, want, atol=1e-12)
    # two layers compose in order
    layers2 = random_layers(m, 2, 8)
    got2 = apply_ansatz(psi0, layers2)
    u = dense_layer(m, layers2[1].theta_e, layers2[1].theta_s) @ dense_layer(
        m, layers2[0].theta_e, layers2[0].theta_s
    )
    assert np.allclose(got2, u @ psi0, atol=1e-12)


def test_ansatz_conserves_charge_and_norm():
    p = ModelParams(N=2, F=3)
    q = total_charge_operator(p)
    q2 = q @ q
    psi0 = neel_state(6)
    for seed in range(5):
        psi = apply_ansatz(psi0, random_layers(6, 3, 10 + seed))
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10
        qv = expectation(psi, q)
        assert abs(qv) < 1e-12
        assert abs(expectation(psi, q2) - qv * qv) < 1e-12


def test_projection_commutes_with_evolution():
    m = 6
    rng = np.random.default_rng(11)
    psi = random_state(m, 12)
    layers = random_layers(m, 2, 13)
    weights = np.bitwise_count(np.arange(1 << m).astype(np.uint64))
    proj = weights == 3
    evolved_then_projected = apply_ansatz(psi, layers)
    evolved_then_projected[~proj] = 0
    projected = psi.copy()
    projected[~proj] = 0
    projected_then_evolved = apply_ansatz(projected, layers)
    assert np.allclose(evolved_then_projected, projected_then_evolved, atol=1e-12)


def test_ansatz_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_ansatz(neel_state(4), [LayerAngles(np.zeros(2), np.zeros(4))])


def test_expectation_basics():
    psi = neel_state(6)
    z0 = PauliSum.single(6, 0, "Z")
    assert expectation(psi, z0) == pytest.approx(1.0)  # qubit 0 is |1>
    assert expectation(psi, PauliSum.identity(6)) == pytest.approx(1.0)
    z1 = PauliSum.single(6, 1, "Z")
    assert expectation(psi, z1) == pytest.approx(-1.0)


def test_expectation_matches_dense_quadratic_form():
    rng = np.random.default_rng(14)
    psi = random_state(3, 15)
    terms = [(float(rng.normal()), w) for w in ("XYZ", "ZZI", "IIZ", "XXI", "III")]
    op = PauliSum(3, terms)
    want = (psi.conj() @ dense_operator(op, 3) @ psi).real
    assert expectation(psi, op) == pytest.approx(want, abs=1e-12)


def test_expectation_rejects_non_hermitian():
    psi = random_state(2, 16)
    bad = PauliSum(2, [(1.0j, "XI")])
    with pytest.raises(NonHermitianError):
        expectation(psi, bad)
    with pytest.raises(ValueError):
        expectation(neel_state(3), PauliSum.identity(2))


def test_compiled_operator_apply_matches_dense():
    rng = np.random.default_rng(17)
    op = PauliSum(3, [(0.3, "XYZ"), (-1.2, "ZIZ"), (0.7, "IXI"), (2.0, "III")])
    mat = dense_operator(op, 3)
    psi = random_state(3, 18)
    assert np.allclose(compile_operator(op).apply(psi), mat @ psi, atol=1e-12)


def test_overlap_properties():
    psi = random_state(4, 19)
    phi = random_state(4, 20)
    assert overlap(psi, psi) == pytest.approx(1.0)
    e0 = np.zeros(4, dtype=complex)
    e0[0] = 1
    e1 = np.zeros(4, dtype=complex)
    e1[1] = 1
    assert overlap(e0, e1) == 0.0
    assert overlap(psi, np.exp(0.7j) * psi) == pytest.approx(1.0)
    assert 0.0 <= overlap(psi, phi) <= 1.0
    with pytest.raises(ValueError):
        overlap(psi, e0)


def test_dump_statevector():
    psi = neel_state(2)
    lines = dump_statevector(psi)
    assert lines == ["1 1 0"]
    psi2 = apply_xxyy(psi, 0, np.pi / 4)
    lines2 = dump_statevector(psi2)
    assert len(lines2) == 2
    idx, re, im = lines2[0].split()
    assert int(idx) == 1 and float(re) == pytest.approx(np.cos(np.pi / 4))
