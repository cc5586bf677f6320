import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosonic_qoc.fockspace import (CompositeBasis, ModeSpec, embed_essential, lowering_operator,
                                   number_operator, occupations_of, restrict_essential,
                                   single_mode_lowering, state_index)

mode_lists = st.lists(
    st.tuples(st.integers(1, 4), st.integers(0, 3)), min_size=1, max_size=3
).map(lambda specs: [ModeSpec(f"q{i}", e, g) for i, (e, g) in enumerate(specs)])


def test_preset_dimensions(system_a, system_b):
    assert (system_a.basis.dim_full, system_a.basis.dim_essential) == (50, 16)
    assert (system_b.basis.dim_full, system_b.basis.dim_essential) == (125, 18)


def test_ordering_control_slowest(system_b):
    basis = system_b.basis
    assert state_index(basis, (0, 0, 1)) == 1
    assert state_index(basis, (0, 1, 0)) == 5
    assert state_index(basis, (1, 0, 0)) == 25


@given(mode_lists, st.data())
def test_index_roundtrip(modes, data):
    basis = CompositeBasis(modes)
    i = data.draw(st.integers(0, basis.dim_full - 1))
    assert state_index(basis, occupations_of(basis, i)) == i


def test_index_errors_name_mode(system_b):
    with pytest.raises(ValueError, match="'l'"):
        state_index(system_b.basis, (0, 5, 0))
    with pytest.raises(ValueError):
        state_index(system_b.basis, (0, 0))
    with pytest.raises(ValueError):
        occupations_of(system_b.basis, 125)
    with pytest.raises(KeyError):
        system_b.basis.mode_index("x")


def test_lowering_matrix_elements():
    a = single_mode_lowering(5)
    for n in range(1, 5):
        assert a[n - 1, n] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 4


@given(mode_lists)
def test_commutators(modes):
    basis = CompositeBasis(modes)
    ops = [lowering_operator(basis, j) for j in range(len(modes))]
    for j, a in enumerate(ops):
        n = number_operator(basis, j)
        assert np.allclose(a.conj().T @ a, n)
        for k, b in enumerate(ops):
            if k != j:
                assert np.allclose(a @ b, b @ a)
                assert np.allclose(a @ b.conj().T, b.conj().T @ a)


def test_lowering_index_error(system_a):
    with pytest.raises(IndexError):
        lowering_operator(system_a.basis, 2)


def test_essential_mask_and_embedding(system_a):
    basis = system_a.basis
    occ = basis.occupations
    expected = (occ[:, 0] < 2) & (occ[:, 1] < 8)
    assert np.array_equal(basis.essential_mask, expected)
    rng = np.random.default_rng(0)
    m = rng.normal(size=(16, 16))
    full = embed_essential(basis, m)
    assert np.allclose(restrict_essential(basis, full), m)
    assert np.count_nonzero(full) == np.count_nonzero(m)
    with pytest.raises(ValueError):
        embed_essential(basis, np.eye(3))


def test_modespec_validation():
    with pytest.raises(ValueError):
        ModeSpec("x", 0)
    with pytest.raises(ValueError):
        ModeSpec("x", 2, -1)
    with pytest.raises(ValueError):
        CompositeBasis([ModeSpec("x", 2), ModeSpec("x", 3)])
