"""Truncated tensor-product Fock space.

Basis states are ordered row-major over the mode occupations, with the first
mode (the control mode T) varying slowest. Each mode carries its essential
(computational) levels followed by guard levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class ModeSpec:
    """One bosonic mode: level counts plus its frequency and self-Kerr (rad/s)."""

    label: str
    essential_levels: int
    guard_levels: int = 0
    frequency: float = 0.0
    self_kerr: float = 0.0

    def __post_init__(self):
        if self.essential_levels < 1:
            raise ValueError(f"mode {self.label!r}: essential_levels must be positive")
        if self.guard_levels < 0:
            raise ValueError(f"mode {self.label!r}: guard_levels must be non-negative")

    @property
    def total_levels(self) -> int:
        return self.essential_levels + self.guard_levels


class CompositeBasis:
    def __init__(self, modes):
        self.modes = tuple(modes)
        if not self.modes:
            raise ValueError("a basis needs at least one mode")
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels: {labels}")
        self.dims = tuple(m.total_levels for m in self.modes)
        self.essential_dims = tuple(m.essential_levels for m in self.modes)
        self.dim_full = int(np.prod(self.dims))
        self.dim_essential = int(np.prod(self.essential_dims))

    def __repr__(self):
        return f"CompositeBasis({[m.label for m in self.modes]}, dims={self.dims})"

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    def mode_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown mode {label!r}; have {self.labels}") from None

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim_full, n_modes) integer table of occupation tuples in index order."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        return grids.T.copy()

    @cached_property
    def essential_mask(self) -> np.ndarray:
        ess = np.array(self.essential_dims)
        return np.all(self.occupations < ess, axis=1)

    @cached_property
    def essential_indices(self) -> np.ndarray:
        return np.flatnonzero(self.essential_mask)

    def state_label(self, index: int) -> str:
        return "|" + ",".join(str(n) for n in self.occupations[index]) + ">"


def state_index(basis: CompositeBasis, occupations) -> int:
    occupations = tuple(int(n) for n in occupations)
    if len(occupations) != len(basis.dims):
        raise ValueError(f"expected {len(basis.dims)} occupations, got {len(occupations)}")
    for mode, n in zip(basis.modes, occupations):
        if not 0 <= n < mode.total_levels:
            raise ValueError(
                f"occupation {n} out of range for mode {mode.label!r} "
                f"({mode.total_levels} levels)"
            )
    return int(np.ravel_multi_index(occupations, basis.dims))


def occupations_of(basis: CompositeBasis, index: int) -> tuple[int, ...]:
    if not 0 <= index < basis.dim_full:
        raise ValueError(f"index {index} outside [0, {basis.dim_full})")
    return tuple(int(n) for n in np.unravel_index(index, basis.dims))


def single_mode_lowering(levels: int) -> np.ndarray:
    """Truncated annihilation operator: <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def embed_mode_operator(basis: CompositeBasis, mode_index: int, op: np.ndarray) -> np.ndarray:
    """Kronecker-embed a single-mode operator, identity on the other factors."""
    out = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(basis.dims):
        out = np.kron(out, op if i == mode_index else np.eye(d))
    return out


def lowering_operator(basis: CompositeBasis, mode_index: int) -> np.ndarray:
    if not 0 <= mode_index < len(basis.dims):
        raise IndexError(f"mode index {mode_index} outside [0, {len(basis.dims)})")
    return embed_mode_operator(basis, mode_index, single_mode_lowering(basis.dims[mode_index]))


def number_operator(basis: CompositeBasis, mode_index: int) -> np.ndarray:
    return np.diag(basis.occupations[:, mode_index].astype(complex))


def embed_essential(basis: CompositeBasis, essential_matrix: np.ndarray) -> np.ndarray:
    """Place an essential-subspace matrix into the full space, zero elsewhere."""
    essential_matrix = np.asarray(essential_matrix)
    e = basis.dim_essential
    if essential_matrix.shape != (e, e):
        raise ValueError(f"expected a {e}x{e} matrix, got {essential_matrix.shape}")
    out = np.zeros((basis.dim_full, basis.dim_full), dtype=complex)
    idx = basis.essential_indices
    out[np.ix_(idx, idx)] = essential_matrix
    return out


def restrict_essential(basis: CompositeBasis, full_matrix: np.ndarray) -> np.ndarray:
    """Essential rows of a full matrix; columns too when it is square over the full space."""
    full_matrix = np.asarray(full_matrix)
    idx = basis.essential_indices
    rows = full_matrix[idx]
    if rows.shape[1] == basis.dim_full:
        return rows[:, idx]
    return rows
