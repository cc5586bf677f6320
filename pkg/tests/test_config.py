import math

import pytest

from bosonic_qoc.config import ConfigError, load_config, load_preset, parse_config
from bosonic_qoc.resonance import enumerate_transitions
from bosonic_qoc.units import ghz, mhz

from conftest import TINY_CONFIG

MINIMAL = """
[system]
preset = "A"
[pulse]
duration_ns = 500
"""


def test_presets_load_table_values():
    a, b = load_preset("A"), load_preset("B")
    assert a.system.basis.dim_full == 50 and a.system.basis.dim_essential == 16
    assert b.system.basis.dim_full == 125 and b.system.basis.dim_essential == 18
    assert (a.pulse.splines, b.pulse.splines) == (10, 10)
    assert (a.optimizer.max_iterations, b.optimizer.max_iterations) == (100, 150)
    assert b.max_iterations_range == (30, 150)
    assert a.optimizer.target_fidelity == b.optimizer.target_fidelity == 0.99
    assert len(a.gate.angles_over_pi) == 11
    assert a.gate.angles[0] == pytest.approx(-math.pi)
    for cfg in (a, b):
        assert enumerate_transitions(cfg.system).total_distinct() == cfg.pulse.expected_carriers


def test_seed_override_and_hash():
    a0, a7 = load_preset("A"), load_preset("A", seed=7)
    assert a0.optimizer.seed == 0 and a7.optimizer.seed == 7
    assert a0.config_hash == a7.config_hash
    assert a0.config_hash != load_preset("B").config_hash


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.pulse.durations_ns == [500.0]
    assert cfg.frame == "rotating"
    assert cfg.optimizer.restarts == 10


def test_missing_duration_names_field():
    with pytest.raises(ConfigError, match=r"^pulse\.duration_ns: missing"):
        parse_config('[system]\npreset = "A"\n[pulse]\nsplines = 10\n')


@pytest.mark.parametrize("text, field", [
    (MINIMAL + "[gate]\nlayr = 'mix'\n", "gate.layr"),
    (MINIMAL.replace("[pulse]", "[pulse]\nspline = 3"), "pulse.spline"),
    (MINIMAL + "[extra]\n", "<root>.extra"),
    (MINIMAL.replace('"A"', '"C"'), "system.preset"),
    (MINIMAL.replace("500", "-5"), "pulse.duration_ns"),
    (MINIMAL + "[optimizer]\nmax_iterations = 0\n", "optimizer.max_iterations"),
    (MINIMAL + "[optimizer]\nmax_iterations = 200\nmax_iterations_range = [30, 150]\n", "optimizer.max_iterations"),
    (MINIMAL + "[gate]\nlayer = 'swap'\n", "gate.layer"),
    (MINIMAL.replace('preset = "A"', 'preset = "A"\nframe = "spinning"'), "system.frame"),
])
def test_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert str(info.value).startswith(field)


def test_bad_frequency_unit():
    text = TINY_CONFIG.replace('"5 GHz"', '"5 parsecs"')
    with pytest.raises(ConfigError, match=r"system\.modes\[0\]\.frequency"):
        parse_config(text)


def test_explicit_modes(tiny_config_path):
    cfg = load_config(tiny_config_path)
    t, m = cfg.system.modes
    assert (t.label, t.essential_levels, t.guard_levels) == ("T", 2, 1)
    assert t.frequency == pytest.approx(ghz(5.0)) and m.self_kerr == pytest.approx(mhz(0.6))
    assert cfg.system.basis.dim_full == 6
    assert cfg.pulse.durations_ns == [100.0, 200.0]


def test_cross_kerr_key_checked():
    with pytest.raises(ConfigError, match=r"system\.cross_kerr\.T-x"):
        parse_config(TINY_CONFIG.replace('"T-m"', '"T-x"'))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.toml")
