"""CSV and JSON writers for pulses, spectra, trajectories and resonance tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .controls import PulseParams, sample_drives
from .resonance import TransitionTable
from .units import to_mhz

RESONANCE_COLUMNS = ["mode", "from", "to", "freq_MHz", "degeneracy_group"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(path, columns: list[str], rows) -> Path:
    """Write dict rows with a fixed column order; floats use repr so they round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def read_rows(path) -> tuple[list[str], list[dict]]:
    """Read a CSV written by this module, converting numeric fields back to int/float."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        columns = list(reader.fieldnames or [])
        rows = [{k: _parse(v) for k, v in row.items()} for row in reader]
    return columns, rows


def _parse(text):
    if not isinstance(text, str):  # None for a short row, a list for surplus fields
        return text
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text in ("True", "False"):
        return text == "True"
    return text


def check_roundtrip(path, columns: list[str], n_rows: int | None = None) -> None:
    """Schema self-check: header matches and every row parses with the expected width."""
    found, rows = read_rows(path)
    if found != columns:
        raise ValueError(f"{path}: header {found} != expected {columns}")
    if n_rows is not None and len(rows) != n_rows:
        raise ValueError(f"{path}: {len(rows)} rows, expected {n_rows}")
    for i, row in enumerate(rows):
        if None in row or any(v is None for v in row.values()):
            raise ValueError(f"{path}: row {i} has the wrong number of fields")


def _ket(occupations) -> str:
    return "|" + ",".join(str(n) for n in occupations) + ">"


def resonance_rows(table: TransitionTable) -> list[dict]:
    return [
        {"mode": t.mode, "from": _ket(t.source), "to": _ket(t.dest),
         "freq_MHz": to_mhz(t.frequency), "degeneracy_group": t.group}
        for t in table.entries
    ]


def write_resonances(path, table: TransitionTable) -> Path:
    return write_rows(path, RESONANCE_COLUMNS, resonance_rows(table))


def write_pulse_json(path, params: PulseParams) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(params.to_json(indent=1) + "\n")
    return path


def read_pulse_json(path) -> PulseParams:
    return PulseParams.from_json(Path(path).read_text())


def pulse_columns(modes) -> list[str]:
    cols = ["t_ns"]
    for m in modes:
        cols += [f"re_{m}_MHz", f"im_{m}_MHz"]
    return cols


def write_pulse_samples(path, params: PulseParams, n_samples: int = 1001) -> Path:
    """Sampled drives d_m(t) in linear MHz (d / 2 pi)."""
    t = np.linspace(0.0, params.duration, n_samples)
    drives = sample_drives(params, t)
    rows = []
    for i, ti in enumerate(t):
        row = {"t_ns": float(ti * 1e9)}
        for m, d in drives.items():
            row[f"re_{m}_MHz"] = float(to_mhz(d[i].real))
            row[f"im_{m}_MHz"] = float(to_mhz(d[i].imag))
        rows.append(row)
    return write_rows(path, pulse_columns(params.modes), rows)


def write_spectrum(path, freqs_hz: np.ndarray, magnitude: np.ndarray) -> Path:
    rows = ({"freq_MHz": float(f / 1e6), "magnitude": float(a)} for f, a in zip(freqs_hz, magnitude))
    return write_rows(path, ["freq_MHz", "magnitude"], rows)


def write_trajectory(path, times: np.ndarray, populations: np.ndarray, labels) -> Path:
    """Populations (n_times, n_states) with one column per labeled basis state."""
    labels = list(labels)
    rows = []
    for i, t in enumerate(times):
        row = {"t_ns": float(t * 1e9)}
        row.update({lab: float(p) for lab, p in zip(labels, populations[i])})
        rows.append(row)
    return write_rows(path, ["t_ns", *labels], rows)


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path
