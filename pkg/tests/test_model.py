import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosonic_qoc.fockspace import ModeSpec, state_index
from bosonic_qoc.model import (CAVITY_L, CAVITY_M, TRANSMON, SystemSpec, build_multimode,
                               build_static_hamiltonian, drive_operators, geometric_coupling,
                               preset, static_energies)
from bosonic_qoc.units import ghz, mhz, to_mhz


def test_lab_frame_single_excitations(system_a):
    e = static_energies(system_a, "lab")
    i = state_index(system_a.basis, (1, 1))
    want = ghz(5) + mhz(200) + ghz(3) + mhz(0.6) + math.sqrt(mhz(0.6) * mhz(200))
    assert e[i] == pytest.approx(want, rel=1e-14)
    assert e[0] == 0.0


def test_rotating_frame_kerr_remainder(system_a):
    e = static_energies(system_a, "rotating")
    assert e[state_index(system_a.basis, (0, 2))] == pytest.approx(4 * mhz(0.6), rel=1e-12)


def test_frames_differ_by_offsets(system_b):
    diff = static_energies(system_b, "lab") - static_energies(system_b, "rotating")
    occ = system_b.basis.occupations
    assert np.allclose(diff, occ @ system_b.frame_offsets("rotating"), rtol=1e-14)


def test_geometric_couplings(system_b):
    assert to_mhz(system_b.coupling("T", "m")) == pytest.approx(10.954, abs=1e-3)
    assert to_mhz(system_b.coupling("l", "T")) == pytest.approx(13.416, abs=1e-3)
    assert round(to_mhz(system_b.coupling("T", "m")), 2) == 10.95
    assert round(to_mhz(system_b.coupling("T", "l")), 2) == 13.42
    assert system_b.coupling("l", "m") == 0.0


def test_static_hamiltonian_real_diagonal(system_b):
    h = build_static_hamiltonian(system_b)
    assert np.array_equal(h, np.diag(np.diag(h)))
    assert np.isrealobj(h)


def test_drive_operators_adjoint_pairs(system_b):
    ops = drive_operators(system_b)
    assert list(ops) == ["T", "l", "m"]
    for a, ad in ops.values():
        assert np.allclose(ad, a.conj().T)


def test_build_multimode_reproduces_presets():
    t = ModeSpec("T", 2, 3, **TRANSMON)
    l = ModeSpec("l", 3, 2, **CAVITY_L)
    m = ModeSpec("m", 3, 2, **CAVITY_M)
    b = build_multimode(t, [l, m])
    assert np.allclose(static_energies(b), static_energies(preset("B")), rtol=0, atol=1e-6)
    a = build_multimode(t, [ModeSpec("m", 8, 2, **CAVITY_M)], n=1)
    assert np.allclose(static_energies(a), static_energies(preset("A")), rtol=0, atol=1e-6)


def test_three_qutrit_modes():
    t = ModeSpec("T", 2, 0, **TRANSMON)
    modes = [ModeSpec(f"c{i}", 3, 0, frequency=ghz(3 + i), self_kerr=mhz(0.5)) for i in range(3)]
    assert build_multimode(t, modes, n=3).basis.dim_essential == 54
    with pytest.raises(ValueError):
        build_multimode(t, modes, n=4)
    with pytest.raises(ValueError):
        build_multimode(t, modes, n=0)


def test_spec_validation():
    t = ModeSpec("T", 2)
    with pytest.raises(ValueError):
        SystemSpec(t, (ModeSpec("T", 2),))
    with pytest.raises(ValueError):
        SystemSpec(t, (ModeSpec("m", 2),), {("T", "x"): 1.0})
    with pytest.raises(ValueError):
        SystemSpec(t, (ModeSpec("m", 2),), rotating_frame={"x": 1.0})
    with pytest.warns(UserWarning):
        SystemSpec(t, (ModeSpec("m", 2),), {("m", "T"): -1.0})
    with pytest.raises(ValueError):
        preset("C")
    with pytest.raises(ValueError):
        t_only = SystemSpec(t)
        t_only.frame_offsets("sideways")


@given(st.floats(0, 1e3), st.floats(0, 1e3))
def test_geometric_coupling_symmetric(a, b):
    assert geometric_coupling(a, b) == geometric_coupling(b, a)
    assert min(a, b) - 1e-9 <= geometric_coupling(a, b) <= max(a, b) + 1e-9
