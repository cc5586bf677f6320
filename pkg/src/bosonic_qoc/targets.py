"""Target unitaries for QAOA-style layers on qubits (binary-encoded in a cavity mode) and qutrits.

Every target acts on the essential subspace and as the identity on the
control mode T, which is expected to return to its initial state.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .model import SystemSpec

LAYER_KINDS = ("initialization", "mixing", "phase_separation", "custom")
# CLI spellings of the layer kinds
LAYER_ALIASES = {"hadamard": "initialization", "mix": "mixing", "phase": "phase_separation"}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class TargetGate:
    layer_kind: str
    angle: float
    unitary: np.ndarray
    layout: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.layer_kind not in LAYER_KINDS:
            raise ValueError(f"layer_kind must be one of {LAYER_KINDS}")
        u = np.asarray(self.unitary, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("target must be a square matrix")
        if not np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12):
            raise ValueError("target is not unitary")
        self.unitary = u

    @property
    def dim(self) -> int:
        return len(self.unitary)


def normalize_angle(angle: float) -> float:
    """Wrap into [-pi, pi]; all layer families are 2*pi periodic up to global phase."""
    if -math.pi <= angle <= math.pi:
        return float(angle)
    return float((angle + math.pi) % (2 * math.pi) - math.pi)


def mixing_qubit(beta: float) -> np.ndarray:
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def dft_matrix(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d)


def mixing_qutrit(beta: float) -> np.ndarray:
    """Circulant rotation about the uniform superposition (1, 1, 1)/sqrt(3)."""
    c, s = math.cos(beta), math.sin(beta)
    r3 = math.sqrt(3)
    row = np.array([1 + 2 * c, 1 - c - r3 * s, 1 - c + r3 * s]) / 3
    return np.array([np.roll(row, k) for k in range(3)], dtype=complex)


def phase_separation(d: int, gamma: float) -> np.ndarray:
    """Two-qudit diagonal gate: phase e^{i gamma} where both qudits are in the same state."""
    if d < 2:
        raise ValueError("qudit dimension must be >= 2")
    same = np.equal.outer(np.arange(d), np.arange(d)).ravel()
    return np.diag(np.where(same, np.exp(1j * gamma), 1.0))


def qudit_qubit_map(d: int, n_qubits: int):
    """Binary encoding level <-> bits, most significant bit first (|2> <-> (1, 0)).

    Returns ``(to_bits, to_level)`` callables.
    """
    if d != 2**n_qubits:
        raise ValueError(f"d={d} is not 2**{n_qubits}")

    def to_bits(level: int) -> tuple[int, ...]:
        if not 0 <= level < d:
            raise ValueError(f"level {level} outside [0, {d})")
        return tuple((level >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits))

    def to_level(bits) -> int:
        bits = tuple(bits)
        if len(bits) != n_qubits or any(b not in (0, 1) for b in bits):
            raise ValueError(f"bad bit tuple {bits}")
        return sum(b << (n_qubits - 1 - k) for k, b in enumerate(bits))

    return to_bits, to_level


def _kron_all(mats):
    return reduce(np.kron, mats, np.ones((1, 1), dtype=complex))


def _qubit_count(d: int) -> int | None:
    n = int(round(math.log2(d))) if d > 1 else 0
    return n if n >= 1 and 2**n == d else None


def _registers(system: SystemSpec):
    """Per computational mode: ('qutrit', 1) or ('qubits', n)."""
    regs = []
    for mode in system.computational_modes:
        d = mode.essential_levels
        if d == 3:
            regs.append(("qutrit", 1))
        elif _qubit_count(d):
            regs.append(("qubits", _qubit_count(d)))
        else:
            raise ValueError(f"mode {mode.label!r} with {d} essential levels has no supported layout")
    if not regs:
        raise ValueError("system has no computational modes")
    return regs


def ring_graph(n: int) -> list[tuple[int, int]]:
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n) for i in range(n)]


def _phase_layer(system: SystemSpec, gamma: float, graph):
    """Diagonal of the phase-separation layer over the computational modes' essential space."""
    regs = _registers(system)
    if all(kind == "qutrit" for kind, _ in regs):
        # qutrit registers, one per mode
        d = 3
        n = len(regs)
        graph = list(graph) if graph is not None else list(itertools.combinations(range(n), 2))
        digits = np.array(list(np.ndindex(*([d] * n))))
    elif len(regs) == 1:
        n = regs[0][1]
        graph = list(graph) if graph is not None else ring_graph(n)
        to_bits, _ = qudit_qubit_map(2**n, n)
        digits = np.array([to_bits(s) for s in range(2**n)])
    else:
        # one qubit per two-level mode
        if any(kind != "qubits" or k != 1 for kind, k in regs):
            raise ValueError("mixed register layouts are not supported for phase separation")
        n = len(regs)
        graph = list(graph) if graph is not None else ring_graph(n)
        digits = np.array(list(np.ndindex(*([2] * n))))
    phase = np.zeros(len(digits))
    for i, j in graph:
        phase += np.where(digits[:, i] == digits[:, j], gamma, 0.0)
    return np.exp(1j * phase), graph


def initialization(system: SystemSpec) -> np.ndarray:
    """Generalized Hadamard on the computational modes (no T factor)."""
    mats = []
    for kind, n in _registers(system):
        mats.append(dft_matrix(3) if kind == "qutrit" else _kron_all([HADAMARD] * n))
    return _kron_all(mats)


def build_layer(system: SystemSpec, layer_kind: str, angle: float = 0.0, graph=None) -> TargetGate:
    """Essential-subspace target for one QAOA layer, identity on T."""
    kind = LAYER_ALIASES.get(layer_kind, layer_kind)
    angle = normalize_angle(angle)
    regs = _registers(system)
    layout = {
        "control": system.control_mode.label,
        "registers": {m.label: r for m, r in zip(system.computational_modes, regs)},
    }
    if kind == "initialization":
        gate = initialization(system)
    elif kind == "mixing":
        mats = []
        for kind_, n in regs:
            mats.append(mixing_qutrit(angle) if kind_ == "qutrit" else _kron_all([mixing_qubit(angle)] * n))
        gate = _kron_all(mats)
    elif kind == "phase_separation":
        diag, graph = _phase_layer(system, angle, graph)
        layout["graph"] = [tuple(e) for e in graph]
        gate = np.diag(diag)
    else:
        raise ValueError(f"unsupported layer kind {layer_kind!r}")
    unitary = np.kron(np.eye(system.control_mode.essential_levels), gate)
    return TargetGate(kind, angle, unitary, layout)
