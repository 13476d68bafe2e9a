import numpy as np
import pytest

from chargetransfer.grids import Grid
from chargetransfer.potentials import (
    MatrixPotentialSpec, MovingPotential, PotentialSpec, ScenarioValidationError,
    resolution_ok, sample_matrix_potential, sample_potential,
    validate_scalar_scenario,
)


def well(amplitude=-1.0, width=1.0, family="gaussian", center=(0.0,)):
    return PotentialSpec(family, amplitude, width, center)


def test_gaussian_profile_values():
    g = Grid(1, 64, 8.0)
    mover = MovingPotential(well(-2.0, 1.5), (0.0,), (0.0,))
    v = sample_potential(mover, 0.0, g)
    i0 = np.argmin(np.abs(g.axis))
    assert v[i0] == pytest.approx(-2.0)
    i1 = np.argmin(np.abs(g.axis - 1.5))
    assert v[i1] == pytest.approx(-2.0 * np.exp(-0.5))


def test_sech2_profile_values():
    g = Grid(1, 64, 8.0)
    mover = MovingPotential(well(3.0, 2.0, family="sech2"), (0.0,), (0.0,))
    v = sample_potential(mover, 0.0, g)
    i0 = np.argmin(np.abs(g.axis))
    assert v[i0] == pytest.approx(3.0)
    i1 = np.argmin(np.abs(g.axis - 2.0))
    assert v[i1] == pytest.approx(3.0 / np.cosh(1.0) ** 2)


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        PotentialSpec("yukawa", -1.0, 1.0, (0.0,))


def test_moving_center_and_wraparound():
    g = Grid(1, 64, 8.0)
    mover = MovingPotential(well(-1.0, 0.5), (1.0,), (6.0,))
    assert mover.center_at(0.0)[0] == pytest.approx(6.0)
    v = sample_potential(mover, 4.0, g)  # center 10 wraps to -6
    assert g.axis[np.argmin(v)] == pytest.approx(-6.0)


def test_static_flag():
    assert MovingPotential(well(), (0.0,), (0.0,)).is_static()
    assert not MovingPotential(well(), (0.5,), (0.0,)).is_static()


def test_resolution_check():
    g = Grid(1, 16, 8.0)  # h = 1
    wide = MovingPotential(well(-1.0, 3.0), (0.0,), (0.0,))
    narrow = MovingPotential(well(-1.0, 0.05), (0.0,), (0.0,))
    assert resolution_ok(g, [wide])
    assert not resolution_ok(g, [narrow])


def test_scenario_validation_flags_bad_setups():
    g = Grid(1, 32, 8.0)
    too_wide = MovingPotential(well(-1.0, 20.0), (0.0,), (0.0,))
    with pytest.raises(ScenarioValidationError):
        validate_scalar_scenario(g, [too_wide])


def test_matrix_potential_phase_and_entries():
    g = Grid(1, 64, 16.0)
    u = well(-2.0, 1.0, family="sech2")
    w = well(1.0, 1.0, family="sech2")
    ms = MatrixPotentialSpec(u, w, alpha=1.0, gamma=0.3, velocity=(0.0,), offset=(0.0,))
    assert ms.mu == pytest.approx(0.5)
    a, b, c = sample_matrix_potential(ms, 0.0, g)
    # off-diagonal entries are conjugate phases times the same profile
    assert np.allclose(b * c, -np.abs(b) ** 2 * np.sign(1.0))
    assert np.allclose(np.abs(b), np.abs(c))
    i0 = np.argmin(np.abs(g.axis))
    assert a[i0] == pytest.approx(-2.0)


def test_matrix_phase_advances_in_time():
    g = Grid(1, 32, 8.0)
    u = well(-1.0, 1.0, family="sech2")
    w = well(0.5, 1.0, family="sech2")
    ms = MatrixPotentialSpec(u, w, alpha=1.2, gamma=0.0, velocity=(0.0,), offset=(0.0,))
    th0 = ms.theta(0.0, g)
    th1 = ms.theta(1.0, g)
    assert np.allclose(th1 - th0, 1.2**2)
