import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from bosonic_qoc.targets import (HADAMARD, SIGMA_X, SIGMA_Z, TargetGate, build_layer, dft_matrix,
                                 mixing_qubit, mixing_qutrit, normalize_angle, phase_separation,
                                 qudit_qubit_map, ring_graph)

angles = st.floats(-math.pi, math.pi, allow_nan=False)


def is_unitary(u, tol=1e-12):
    return np.abs(u.conj().T @ u - np.eye(len(u))).max() < tol


@given(angles)
def test_qutrit_mixer_fixes_uniform_state(beta):
    v = np.ones(3) / math.sqrt(3)
    assert np.abs(mixing_qutrit(beta) @ v - v).max() < 1e-12


@given(angles)
def test_qutrit_mixer_is_dft_conjugated_phase(beta):
    f = dft_matrix(3)
    want = f @ np.diag([1, np.exp(-1j * beta), np.exp(1j * beta)]) @ f.conj().T
    assert np.abs(mixing_qutrit(beta) - want).max() < 1e-12


@given(angles)
def test_qubit_mixer_is_x_rotation(beta):
    assert np.abs(mixing_qubit(beta) - expm(-0.5j * beta * SIGMA_X)).max() < 1e-12


@given(angles)
def test_two_qubit_phase_is_zz_rotation(gamma):
    want = np.exp(0.5j * gamma) * expm(0.5j * gamma * np.kron(SIGMA_Z, SIGMA_Z))
    assert np.abs(phase_separation(2, gamma) - want).max() < 1e-12


def test_qutrit_phase_pattern():
    d = np.diag(phase_separation(3, 0.3))
    same = [0, 4, 8]
    assert np.allclose(d[same], np.exp(0.3j))
    assert np.allclose(np.delete(d, same), 1.0)


def test_qudit_map_msb_first():
    to_bits, to_level = qudit_qubit_map(8, 3)
    assert to_bits(2) == (0, 1, 0)
    assert to_bits(4) == (1, 0, 0)
    assert all(to_level(to_bits(k)) == k for k in range(8))
    with pytest.raises(ValueError):
        qudit_qubit_map(6, 3)
    with pytest.raises(ValueError):
        to_bits(8)


def test_ring_graph():
    assert ring_graph(3) == [(0, 1), (1, 2), (2, 0)]
    assert ring_graph(2) == [(0, 1)]
    assert ring_graph(1) == []


def test_preset_a_phase_layer_is_ring_on_three_qubits(system_a):
    gamma = 0.7
    gate = build_layer(system_a, "phase", gamma)
    # oracle: product of pairwise qubit gates on the ring, bits MSB first
    diag = np.ones(8, dtype=complex)
    for s in range(8):
        bits = [(s >> 2) & 1, (s >> 1) & 1, s & 1]
        for i, j in [(0, 1), (1, 2), (2, 0)]:
            if bits[i] == bits[j]:
                diag[s] *= np.exp(1j * gamma)
    assert np.allclose(gate.unitary, np.kron(np.eye(2), np.diag(diag)))
    assert gate.layout["graph"] == [(0, 1), (1, 2), (2, 0)]


def test_preset_b_layers(system_b):
    beta = math.pi / 5
    mix = build_layer(system_b, "mix", beta)
    assert mix.dim == 18
    assert np.allclose(mix.unitary, np.kron(np.eye(2), np.kron(mixing_qutrit(beta), mixing_qutrit(beta))))
    phase = build_layer(system_b, "phase", beta)
    assert np.allclose(phase.unitary, np.kron(np.eye(2), phase_separation(3, beta)))
    init = build_layer(system_b, "hadamard")
    assert np.allclose(init.unitary, np.kron(np.eye(2), np.kron(dft_matrix(3), dft_matrix(3))))


def test_preset_a_hadamard(system_a):
    h3 = np.kron(HADAMARD, np.kron(HADAMARD, HADAMARD))
    assert np.allclose(build_layer(system_a, "hadamard").unitary, np.kron(np.eye(2), h3))


@pytest.mark.parametrize("kind", ["hadamard", "mix", "phase"])
@pytest.mark.parametrize("name", ["A", "B"])
def test_all_layers_unitary(kind, name, system_a, system_b):
    system = system_a if name == "A" else system_b
    for angle in np.linspace(-math.pi, math.pi, 11):
        assert is_unitary(build_layer(system, kind, angle).unitary)


@given(st.floats(-20, 20, allow_nan=False))
def test_angle_periodicity(angle):
    wrapped = normalize_angle(angle)
    assert -math.pi <= wrapped <= math.pi
    assert abs(np.exp(1j * wrapped) - np.exp(1j * angle)) < 1e-9


def test_target_validation():
    with pytest.raises(ValueError):
        TargetGate("custom", 0.0, np.ones((2, 2)))
    with pytest.raises(ValueError):
        TargetGate("bogus", 0.0, np.eye(2))
    with pytest.raises(ValueError):
        TargetGate("custom", 0.0, np.eye(3)[:2])
