import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from terpgeom.errors import ValidationError
from terpgeom.example3 import (Example3Config, example3_dC, example3_expected, example3_gamma,
                               example3_lattice, locate_wall, polarization_sign, principal_nilpotent,
                               wall_modulus)
from terpgeom.io import lattice_to_dict, load_lattice, save_lattice
from terpgeom.terp import check_pairing

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = [ROOT / "fixtures" / "example3.json", ROOT / "src" / "terpgeom" / "fixtures" / "example3.json"]


def test_basis_matches_sections():
    r, t = 0.7 - 0.2j, 0.3 + 0.1j
    A = example3_lattice(Example3Config(r=r, t=t)).basis_matrix()
    z = 0.9 + 0.4j
    # columns are v1, v2, v3 in the reference sections s1, s2, s3
    v1 = [1, r / z, r * r / 2 / z ** 2 + t / z]
    v2 = [0, 1, r / z]
    v3 = [0, 0, 1]
    assert np.allclose(A.evaluate(z), np.array([v1, v2, v3]).T)


@pytest.mark.parametrize("alpha1", [Fraction(-5, 4), Fraction(-6, 5), Fraction(-7, 5)])
def test_gamma_by_reflection(alpha1):
    # Gamma(a + 2) Gamma(-a - 1) = pi / sin(pi (a + 2))
    a = float(alpha1)
    expect = 1j / (2 * math.sin(math.pi * (a + 2)))
    assert example3_gamma(alpha1) == pytest.approx(expect, rel=1e-14)
    assert example3_gamma() == pytest.approx(1j / math.sqrt(2), rel=1e-15)


@pytest.mark.parametrize("bad", ["-3/2", "-1", "0", "-5/4+1i"])
def test_alpha1_range(bad):
    with pytest.raises(ValidationError):
        Example3Config(alpha1=bad)


def test_expected_closed_forms():
    e = example3_expected(Example3Config(r=1.0))
    assert e.rho == 0.5 and e.metric_rr == pytest.approx(40.0)
    assert e.metric_inv_r == pytest.approx(8 * 0.25 * 1.25 * 16)
    assert e.wall == pytest.approx(0.25) and e.pure
    assert not example3_expected(Example3Config(r=0.0, t=1.0)).pure
    assert wall_modulus(2.0) == pytest.approx(1.0)


def test_fixtures_identical_and_match_family():
    a, b = (load_lattice(p) for p in FIXTURES)
    assert lattice_to_dict(a) == lattice_to_dict(b)
    ref = example3_lattice(Example3Config())
    assert np.allclose(a.topo.S, ref.topo.S, atol=1e-15)
    assert all(np.allclose(x, y) for x, y in zip(a.C, ref.C))


def test_save_load_roundtrip(tmp_path):
    lat = example3_lattice(Example3Config(r=0.25 + 1j, t=-0.5))
    p = tmp_path / "lat.json"
    save_lattice(lat, p)
    back = load_lattice(p)
    assert all(np.array_equal(x, y) for x, y in zip(back.C, lat.C))
    assert [str(x) for x in back.topo.alpha_ref] == ["-5/4", "0", "5/4"]


def test_pairing_on_grid():
    rs = np.linspace(-2, 2, 10)
    ts = np.linspace(-2, 2, 10)
    for r in rs:
        for t in ts:
            rep = check_pairing(example3_lattice(Example3Config(r=r + 0.3j * t, t=t - 0.1j * r)))
            assert rep.holds


def test_tangent_directions():
    cfg = Example3Config(r=0.5)
    dr = example3_dC(cfg, "r")
    assert dr[0][1, 0] == 1 and dr[0][2, 1] == 1 and dr[1][2, 0] == 0.5
    inv = example3_dC(cfg, "inv_r")
    assert np.allclose(inv[0], -0.25 * dr[0])
    with pytest.raises(ValidationError):
        example3_dC(Example3Config(), "inv_r")
    with pytest.raises(ValidationError):
        example3_dC(cfg, "s")


@pytest.mark.parametrize("r", [0.0, 0.6, 1.2, 1.7, 2.2])
@pytest.mark.parametrize("phase", [0.0, 1.1])
def test_purity_sign_off_wall(r, phase):
    w = wall_modulus(r)
    for frac in (0.3, 0.9, 1.1, 2.0):
        s = frac * w
        sign = polarization_sign(Example3Config(r=r, t=s * np.exp(1j * phase)))
        assert sign == (1 if frac < 1 else -1)


@pytest.mark.parametrize("r,phase", [(0.0, 0.0), (0.8, 0.4), (1.9, 2.0)])
def test_locate_wall(r, phase):
    assert locate_wall(r, phase) == pytest.approx(wall_modulus(r), abs=1e-6)


def test_locate_wall_bad_bracket():
    with pytest.raises(ValidationError):
        locate_wall(0.5, lo=2.0, hi=3.0)


@pytest.mark.parametrize("mu", [2, 3, 7])
def test_principal_nilpotent(mu):
    A = principal_nilpotent(mu)
    assert np.allclose(A, A.T) and np.linalg.norm(A) == pytest.approx(1.0)
    assert np.abs(np.linalg.matrix_power(A, mu)).max() < 1e-12
    assert np.linalg.matrix_rank(A) == mu - 1
