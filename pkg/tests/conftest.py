import numpy as np
import pytest

from bosonic_qoc.model import preset


@pytest.fixture(scope="session")
def system_a():
    return preset("A")


@pytest.fixture(scope="session")
def system_b():
    return preset("B")


def random_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


TINY_CONFIG = """
[system]
name = "tiny"
[[system.modes]]
label = "T"
essential = 2
guard = 1
frequency = "5 GHz"
self_kerr = "200 MHz"
[[system.modes]]
label = "m"
essential = 2
frequency = "3 GHz"
self_kerr = "0.6 MHz"
[system.cross_kerr]
"T-m" = "10.95 MHz"

[pulse]
splines = 6
duration_ns = [100, 200]

[gate]
layer = "mix"
angles_over_pi = [0.5]

[optimizer]
max_iterations = 3
restarts = 2
seed = 3
"""


@pytest.fixture
def tiny_config_path(tmp_path):
    """Transmon qubit + guard level and a two-level cavity: dimension 6, quick to optimize."""
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_CONFIG)
    return path
