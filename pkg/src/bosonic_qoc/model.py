"""Static dispersive Hamiltonians and drive operators for a transmon + cavity-mode system.

All Hamiltonian terms are diagonal in the Fock basis:

    E(t, n_1, ...) = sum_j [w_j n_j + xi_j n_j^2] + sum_{j<k} xi_jk n_j n_k - sum_j f_j n_j

where f_j is the rotating-frame offset of mode j (zero in the lab frame).
Units: hbar = 1, angular frequencies in rad/s.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .fockspace import CompositeBasis, ModeSpec, lowering_operator
from .units import ghz, mhz

FRAMES = ("rotating", "lab")


@dataclass(frozen=True, eq=False)
class SystemSpec:
    control_mode: ModeSpec
    computational_modes: tuple[ModeSpec, ...] = ()
    cross_kerr: dict = field(default_factory=dict)
    rotating_frame: dict | None = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "computational_modes", tuple(self.computational_modes))
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels {labels}")
        normalized = {}
        for key, value in dict(self.cross_kerr).items():
            a, b = key
            if a not in labels or b not in labels or a == b:
                raise ValueError(f"cross-Kerr key {key!r} does not name two distinct modes")
            if value < 0:
                warnings.warn(f"negative cross-Kerr {key!r}; outside the dispersive regime assumed here")
            pair = tuple(sorted((a, b), key=labels.index))
            normalized[pair] = float(value)
        object.__setattr__(self, "cross_kerr", normalized)
        if self.rotating_frame is not None:
            unknown = set(self.rotating_frame) - set(labels)
            if unknown:
                raise ValueError(f"rotating frame names unknown modes {sorted(unknown)}")

    @property
    def modes(self) -> tuple[ModeSpec, ...]:
        return (self.control_mode, *self.computational_modes)

    @cached_property
    def basis(self) -> CompositeBasis:
        return CompositeBasis(self.modes)

    def frame_offsets(self, frame: str = "rotating") -> np.ndarray:
        if frame not in FRAMES:
            raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
        if frame == "lab":
            return np.zeros(len(self.modes))
        custom = self.rotating_frame or {}
        return np.array([custom.get(m.label, m.frequency) for m in self.modes], dtype=float)

    def coupling(self, a: str, b: str) -> float:
        labels = [m.label for m in self.modes]
        pair = tuple(sorted((a, b), key=labels.index))
        return self.cross_kerr.get(pair, 0.0)


def static_energies(spec: SystemSpec, frame: str = "rotating") -> np.ndarray:
    """Diagonal of the static Hamiltonian over the full (guarded) basis."""
    occ = spec.basis.occupations.astype(float)
    omega = np.array([m.frequency for m in spec.modes])
    kerr = np.array([m.self_kerr for m in spec.modes])
    energies = occ @ (omega - spec.frame_offsets(frame)) + (occ**2) @ kerr
    labels = spec.basis.labels
    for (a, b), xi in spec.cross_kerr.items():
        energies = energies + xi * occ[:, labels.index(a)] * occ[:, labels.index(b)]
    return energies


def build_static_hamiltonian(spec: SystemSpec, frame: str = "rotating") -> np.ndarray:
    h = np.diag(static_energies(spec, frame))
    assert np.allclose(h, h.conj().T)
    return h


def drive_operators(spec: SystemSpec) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """(a_m, a_m^dagger) embedded in the full space, keyed by mode label."""
    ops = {}
    for i, mode in enumerate(spec.modes):
        a = lowering_operator(spec.basis, i)
        ops[mode.label] = (a, a.conj().T)
    return ops


def geometric_coupling(xi_a: float, xi_b: float) -> float:
    return math.sqrt(xi_a * xi_b)


def build_multimode(control: ModeSpec, modes, n: int | None = None, cross_kerr=None, name=None) -> SystemSpec:
    """Control mode coupled to ``n`` cavity modes (all of ``modes`` by default).

    Transmon-cavity couplings default to the geometric mean of the two
    self-Kerr coefficients; cavity-cavity cross-Kerr is neglected.
    """
    modes = tuple(modes)
    n = len(modes) if n is None else n
    if n < 1:
        raise ValueError("need at least one computational mode")
    if n > len(modes):
        raise ValueError(f"requested {n} modes but only {len(modes)} were specified")
    chosen = modes[:n]
    couplings = {(control.label, m.label): geometric_coupling(m.self_kerr, control.self_kerr) for m in chosen}
    couplings.update(cross_kerr or {})
    return SystemSpec(control, chosen, couplings, name=name or f"multi{n}")


# Reference parameters (linear frequencies) and guard counts of the prototype systems.
TRANSMON = dict(frequency=ghz(5.0), self_kerr=mhz(200.0))
CAVITY_M = dict(frequency=ghz(3.0), self_kerr=mhz(0.6))
CAVITY_L = dict(frequency=ghz(4.0), self_kerr=mhz(0.9))


def preset(name: str, guard_control: int = 3, guard_cavity: int = 2) -> SystemSpec:
    """Named reference systems: "A" (transmon + one 8-level mode), "B" (transmon + two qutrits)."""
    t = ModeSpec("T", 2, guard_control, **TRANSMON)
    if name == "A":
        m = ModeSpec("m", 8, guard_cavity, **CAVITY_M)
        return build_multimode(t, [m], name="A")
    if name == "B":
        l = ModeSpec("l", 3, guard_cavity, **CAVITY_L)
        m = ModeSpec("m", 3, guard_cavity, **CAVITY_M)
        return build_multimode(t, [l, m], name="B")
    raise ValueError(f"unknown preset {name!r}; choose 'A' or 'B'")
