import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosonic_qoc.controls import (INIT_AMPLITUDE, PulseParams, bspline_basis, carrier_basis,
                                  evaluate_drive, knot_vector, pulse_spectrum, random_init,
                                  zero_pulse)
from bosonic_qoc.units import TWO_PI, mhz


def cox_de_boor(i, k, knots, t):
    """Textbook recursion, right-closed at the final knot."""
    if k == 0:
        if knots[i] <= t < knots[i + 1]:
            return 1.0
        if t == knots[-1] and knots[i] < knots[i + 1] == knots[-1]:
            return 1.0
        return 0.0
    out = 0.0
    if knots[i + k] > knots[i]:
        out += (t - knots[i]) / (knots[i + k] - knots[i]) * cox_de_boor(i, k - 1, knots, t)
    if knots[i + k + 1] > knots[i + 1]:
        out += (knots[i + k + 1] - t) / (knots[i + k + 1] - knots[i + 1]) * cox_de_boor(i + 1, k - 1, knots, t)
    return out


@pytest.mark.parametrize("n", [3, 4, 10])
def test_basis_matches_cox_de_boor(n):
    tau = 1e-6
    knots = knot_vector(n, tau)
    t = np.linspace(0, tau, 97)
    got = bspline_basis(n, tau, t)
    want = np.array([[cox_de_boor(b, 2, knots, ti) for b in range(n)] for ti in t])
    assert np.abs(got - want).max() < 1e-13


def test_knot_span():
    knots = knot_vector(10, 800e-9)
    spans = np.diff(np.unique(knots))
    assert np.allclose(spans, 800e-9 / 8)
    with pytest.raises(ValueError):
        knot_vector(2, 1.0)


@given(st.integers(3, 30), st.floats(0, 1))
def test_partition_of_unity(n, s):
    values = bspline_basis(n, 2.0, 2.0 * s)
    assert values.sum() == pytest.approx(1.0, abs=1e-13)
    assert np.all(values >= 0)


def test_basis_rejects_outside_window():
    with pytest.raises(ValueError):
        bspline_basis(10, 1.0, 1.5)
    with pytest.raises(ValueError):
        bspline_basis(10, 1.0, -0.1)


def _random_params(seed, carriers=None, n=6, tau=300e-9):
    carriers = carriers or {"T": [mhz(200), mhz(211)], "m": [mhz(0.6)]}
    return random_init(carriers, tau, n, seed)


@given(st.integers(0, 2**31))
def test_pack_unpack_roundtrip(seed):
    p = _random_params(seed)
    q = p.with_vector(p.pack())
    for k in p.alphas:
        assert np.array_equal(p.alphas[k], q.alphas[k])
    assert p.size == len(p.pack()) == 2 * (2 + 1) * 6


def test_pack_layout():
    p = zero_pulse({"T": [0.0, 1.0]}, 1e-6, 3)
    x = np.arange(12.0)
    q = p.with_vector(x)
    assert np.array_equal(q.alphas["T"][0], [0 + 3j, 1 + 4j, 2 + 5j])
    assert np.array_equal(q.alphas["T"][1], [6 + 9j, 7 + 10j, 8 + 11j])
    with pytest.raises(ValueError):
        p.with_vector(np.zeros(5))


def test_drive_matches_naive_sum():
    p = _random_params(3)
    t = np.linspace(0, p.duration, 41)
    s = bspline_basis(p.splines, p.duration, t)
    for label in p.modes:
        want = np.zeros(len(t), dtype=complex)
        for i, ti in enumerate(t):
            for k, w in enumerate(p.carriers[label]):
                for b in range(p.splines):
                    want[i] += np.exp(1j * w * ti) * p.alphas[label][k, b] * s[i, b]
        assert np.allclose(evaluate_drive(p, label, t), want, rtol=1e-13, atol=0)
        basis = carrier_basis(p, label, t)
        assert np.allclose(np.einsum("nkb,kb->n", basis, p.alphas[label]), want)


def test_drive_unknown_mode():
    with pytest.raises(KeyError, match="not driven"):
        evaluate_drive(_random_params(0), "l", 0.0)


def test_random_init_range_and_seed():
    p = _random_params(11)
    x = p.pack()
    assert np.all((x >= 0) & (x < INIT_AMPLITUDE))
    assert np.array_equal(x, _random_params(11).pack())
    assert not np.array_equal(x, _random_params(12).pack())


def test_json_roundtrip():
    p = _random_params(5)
    q = PulseParams.from_json(p.to_json())
    assert q.duration == pytest.approx(p.duration, rel=1e-15)
    assert q.seed == 5
    for k in p.modes:
        assert np.allclose(q.alphas[k], p.alphas[k], rtol=1e-15)
        assert np.allclose(q.carriers[k], p.carriers[k], rtol=1e-12)


def test_shape_validation():
    with pytest.raises(ValueError):
        PulseParams({"T": np.zeros((1, 4))}, {"T": [0.0, 1.0]}, 1e-6, 4)
    with pytest.raises(ValueError):
        PulseParams({"T": np.zeros((1, 4))}, {"m": [0.0]}, 1e-6, 4)
    with pytest.raises(ValueError):
        zero_pulse({"T": [0.0]}, -1.0, 4)


def test_spectrum_peaks_at_carriers():
    tau = 2e-6
    carriers = {"T": [mhz(10.0), mhz(-25.0)]}
    p = zero_pulse(carriers, tau, 5)
    p.alphas["T"][0] = 1.0
    p.alphas["T"][1] = 0.5
    freqs, mag = pulse_spectrum(p, "T", 200e6)
    top = freqs[np.argsort(mag)[::-1][:2]] / 1e6
    assert sorted(np.round(top, 3)) == [-25.0, 10.0]
    assert mag[np.argmin(np.abs(freqs - 10e6))] == pytest.approx(1.0, rel=0.02)
    shifted, _ = pulse_spectrum(p, "T", 200e6, frame_offset=TWO_PI * 1e9)
    assert np.allclose(shifted - freqs, 1e9)
    with pytest.raises(ValueError):
        pulse_spectrum(p, "T", 50e6)
