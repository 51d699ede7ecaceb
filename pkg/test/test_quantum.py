import numpy as np
import pytest

from ksion.analysis.calibration import exact_chsh
from ksion.quantum.core import (
    IDENTITY_2,
    PAULIS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    QuantumState,
    apply_depolarizing,
    apply_local,
    bell_state,
    correlation_tensor,
    embed,
    expectation,
    fidelity_to_pure,
    is_unitary,
    observable_bloch_vector,
    observable_from_phase,
    ObservableSpec,
    partial_trace,
    rotation,
    tensor,
)
from ksion.utils.errors import DimensionError, ParameterError


@pytest.mark.parametrize("theta,phi", [(np.pi / 2, 0.0), (np.pi, 1.3), (0.7, -2.1)])
def test_rotation_is_unitary(theta, phi):
    assert is_unitary(rotation(theta, phi))


def test_pi_pulse_flips_dark_state():
    flipped = rotation(np.pi, 0.0) @ np.array([1, 0], dtype=complex)
    np.testing.assert_allclose(flipped, [0, -1j], atol=1e-12)


def test_state_validation():
    with pytest.raises(ParameterError):
        QuantumState(np.eye(4) / 2)
    with pytest.raises(DimensionError):
        QuantumState(np.eye(2) / 2)
    with pytest.raises(ParameterError):
        QuantumState.from_ket(np.zeros(4))
    rho = np.diag([1.5, -0.5, 0, 0])
    with pytest.raises(ParameterError):
        QuantumState(rho)


def test_state_is_read_only(bell):
    with pytest.raises(ValueError):
        bell.rho[0, 0] = 0


def test_embed_checks_slot_and_shape():
    with pytest.raises(DimensionError):
        embed(np.eye(2), 2, (2, 2))
    with pytest.raises(DimensionError):
        embed(np.eye(3), 0, (2, 2))
    z0 = embed(PAULIS[2], 0, (2, 2))
    np.testing.assert_allclose(z0, tensor(PAULIS[2], np.eye(2)))


def test_bell_state_reduced_states_are_mixed(bell):
    for keep in ((0,), (1,)):
        reduced = partial_trace(bell, keep)
        np.testing.assert_allclose(reduced.rho, np.eye(2) / 2, atol=1e-12)


def test_bell_correlations(bell):
    t = correlation_tensor(bell)
    expected = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    np.testing.assert_allclose(t, expected, atol=1e-12)


def test_expectation_rejects_bad_observables(bell):
    with pytest.raises(ParameterError):
        expectation(bell, np.array([[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))
    with pytest.raises(DimensionError):
        expectation(bell, PAULIS[0])


def test_depolarizing_limits(bell):
    np.testing.assert_allclose(apply_depolarizing(bell, 0.0).rho, bell.rho, atol=1e-12)
    np.testing.assert_allclose(apply_depolarizing(bell, 1.0).rho, np.eye(4) / 4, atol=1e-12)
    with pytest.raises(ParameterError):
        apply_depolarizing(bell, 1.5)


def test_local_unitary_preserves_fidelity_of_rotated_target():
    ket = np.array([1, 0, 0, 1j]) / np.sqrt(2)
    state = QuantumState.from_ket(ket)
    r = rotation(0.4, 0.9)
    moved = apply_local(state, r, 1)
    assert fidelity_to_pure(moved, tensor(np.eye(2), r) @ ket) == pytest.approx(1.0)


@pytest.mark.parametrize("phase", [0.0, np.pi / 3, 5 * np.pi / 4])
@pytest.mark.parametrize("sign", [1, -1])
def test_observable_matches_bloch_vector(phase, sign):
    spec = ObservableSpec(index=0, phase=phase, convention_sign=sign, frame_offset=0.2)
    n = observable_bloch_vector(spec)
    expected = sum(c * p for c, p in zip(n, PAULIS))
    np.testing.assert_allclose(observable_from_phase(spec), expected, atol=1e-12)


def test_observable_spec_checks_ion():
    assert ObservableSpec(index=1, phase=0.0).ion == "Ba"
    with pytest.raises(ParameterError):
        ObservableSpec(index=0, phase=0.0, ion="Ba")
    with pytest.raises(ParameterError):
        ObservableSpec(index=4, phase=0.0)
    with pytest.raises(ParameterError):
        ObservableSpec(index=2, phase=0.0, convention_sign=0)


def test_bell_phase():
    state = bell_state(0.0)
    np.testing.assert_allclose(state.rho[3, 0], 0.5, atol=1e-12)


def _random_angles(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-4 * np.pi, 4 * np.pi, size=(n, 2))


def _random_state(rng, dims=(2, 2)):
    d = int(np.prod(dims))
    return QuantumState.from_ket(rng.normal(size=d) + 1j * rng.normal(size=d), dims)


def _random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def test_rotation_unitary_for_random_angles():
    for theta, phi in _random_angles(10000):
        assert is_unitary(rotation(theta, phi), tol=1e-12)


def test_rotation_is_undone_by_negative_angle():
    for theta, phi in _random_angles(1000, seed=1):
        np.testing.assert_allclose(rotation(theta, phi) @ rotation(-theta, phi), IDENTITY_2, atol=1e-12)


@pytest.mark.parametrize(
    "theta,phi,expected",
    [
        (0.0, 0.0, IDENTITY_2),
        (0.0, 2.3, IDENTITY_2),
        (np.pi, 0.0, -1j * SIGMA_X),
        (np.pi / 2, np.pi / 2, np.array([[1, -1], [1, 1]]) / np.sqrt(2)),
    ],
)
def test_rotation_examples(theta, phi, expected):
    np.testing.assert_allclose(rotation(theta, phi), expected, atol=1e-12)


@pytest.mark.parametrize("phase,expected", [(3 * np.pi / 2, SIGMA_X), (np.pi, -SIGMA_Y), (0.0, SIGMA_Y)])
def test_observable_examples(phase, expected):
    observable = observable_from_phase(ObservableSpec(index=0, phase=phase))
    np.testing.assert_allclose(observable, expected, atol=1e-12)


def test_observables_square_to_identity():
    rng = np.random.default_rng(2)
    for (phase, offset), sign, index in zip(
        _random_angles(200, seed=3), rng.choice([1, -1], 200), rng.integers(0, 4, 200)
    ):
        spec = ObservableSpec(index=int(index), phase=phase, convention_sign=int(sign), frame_offset=offset)
        o = observable_from_phase(spec)
        np.testing.assert_allclose(o @ o, IDENTITY_2, atol=1e-12)
        assert abs(np.trace(o)) < 1e-12


def test_tensor_examples(bell):
    np.testing.assert_allclose(tensor(IDENTITY_2, IDENTITY_2), np.eye(4))
    ground = QuantumState.basis_state(0)
    assert expectation(ground, tensor(SIGMA_Z, IDENTITY_2)) == pytest.approx(1.0)
    assert expectation(bell, tensor(SIGMA_X, SIGMA_Y)) == pytest.approx(1.0)
    assert expectation(bell, tensor(SIGMA_X, SIGMA_X)) == pytest.approx(0.0, abs=1e-12)


def test_tensor_is_associative():
    rng = np.random.default_rng(4)
    a, b, c = (rng.normal(size=s) + 1j * rng.normal(size=s) for s in ((2, 2), (2, 3), (3, 2)))
    np.testing.assert_allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)
    np.testing.assert_allclose(tensor(a, b, c), tensor(a, tensor(b, c)), atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (2, 2, 3)])
def test_expectation_of_identity_is_one(dims):
    rng = np.random.default_rng(5)
    for state in (_random_state(rng, dims), QuantumState.maximally_mixed(dims)):
        assert expectation(state, np.eye(state.dim)) == pytest.approx(1.0, abs=1e-12)


def test_expectation_is_linear():
    rng = np.random.default_rng(6)
    state = _random_state(rng)
    a, b = _random_hermitian(rng, 4), _random_hermitian(rng, 4)
    combined = expectation(state, 0.3 * a - 1.7 * b)
    assert combined == pytest.approx(0.3 * expectation(state, a) - 1.7 * expectation(state, b), abs=1e-10)


def test_mixed_state_expectations_vanish():
    mixed = QuantumState.maximally_mixed()
    for a in PAULIS:
        for b in (IDENTITY_2,) + PAULIS:
            assert expectation(mixed, tensor(a, b)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p", [0.08, 0.3, 0.5])
def test_depolarizing_scales_c(bell, calibrated_specs, p):
    clean = exact_chsh(bell, calibrated_specs)
    noisy = exact_chsh(apply_depolarizing(bell, p), calibrated_specs)
    assert noisy == pytest.approx((1 - p) * clean, abs=1e-12)
    assert np.trace(apply_depolarizing(bell, p).rho).real == pytest.approx(1.0)
