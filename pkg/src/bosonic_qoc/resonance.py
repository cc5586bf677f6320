"""Single-boson transition frequencies used as pulse carriers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fockspace import state_index
from .model import SystemSpec, static_energies
from .units import TWO_PI

# Lines closer than this (1 kHz) are merged; far below the 1.2 MHz minimum spacing of the presets.
DEDUP_TOL = TWO_PI * 1e3


@dataclass(frozen=True)
class Transition:
    mode: str
    source: tuple[int, ...]
    dest: tuple[int, ...]
    frequency: float  # rad/s
    group: int = -1   # index into the mode's distinct-frequency list


@dataclass
class TransitionTable:
    entries: list[Transition]
    distinct_frequencies: dict[str, np.ndarray] = field(default_factory=dict)
    frame: str = "rotating"

    def __len__(self):
        return len(self.entries)

    def for_mode(self, label: str) -> list[Transition]:
        return [e for e in self.entries if e.mode == label]

    def total_distinct(self) -> int:
        return sum(len(v) for v in self.distinct_frequencies.values())


def _group(frequencies: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-linkage clustering of sorted frequencies; returns (centres, label per input)."""
    order = np.argsort(frequencies, kind="stable")
    labels = np.empty(len(frequencies), dtype=int)
    centres, members = [], []
    for i in order:
        f = frequencies[i]
        if members and f - frequencies[members[-1][-1]] <= tol:
            members[-1].append(i)
        else:
            members.append([i])
    for g, idx in enumerate(members):
        centres.append(float(np.mean(frequencies[idx])))
        labels[idx] = g
    return np.array(centres), labels


def enumerate_transitions(spec: SystemSpec, frame: str = "rotating", tol: float = DEDUP_TOL) -> TransitionTable:
    """All n_j -> n_j + 1 transitions inside the essential subspace, others held fixed."""
    basis = spec.basis
    energies = static_energies(spec, frame)
    raw = []
    for j, mode in enumerate(spec.modes):
        for occ in np.ndindex(*basis.essential_dims):
            if occ[j] + 1 >= mode.essential_levels:
                continue
            dest = list(occ)
            dest[j] += 1
            dest = tuple(dest)
            freq = energies[state_index(basis, dest)] - energies[state_index(basis, occ)]
            raw.append((mode.label, tuple(occ), dest, float(freq)))

    entries, distinct = [], {}
    for mode in spec.modes:
        rows = [r for r in raw if r[0] == mode.label]
        if not rows:
            distinct[mode.label] = np.zeros(0)
            continue
        centres, labels = _group(np.array([r[3] for r in rows]), tol)
        distinct[mode.label] = centres
        entries.extend(Transition(*r, group=int(g)) for r, g in zip(rows, labels))
    return TransitionTable(entries, distinct, frame)


def carrier_sets(table: TransitionTable) -> dict[str, np.ndarray]:
    """Carrier frequencies (rad/s) per driven mode; modes without transitions get none."""
    return {label: freqs.copy() for label, freqs in table.distinct_frequencies.items() if len(freqs)}
