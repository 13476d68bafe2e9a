import numpy as np
import pytest

from chargetransfer.grids import (
    Grid, ScalarField, SpinorField, WeightProfile, chirped_packet, gaussian_packet,
    linf_l2_l1_norms, lp_norm, mixed_norm, pair_norms, random_band_limited,
    spectral_taper, weighted_multiply,
)


def test_grid_rejects_bad_sizes():
    with pytest.raises(ValueError):
        Grid(3, 7, 10.0)
    with pytest.raises(ValueError):
        Grid(4, 16, 10.0)
    with pytest.raises(ValueError):
        Grid(2, 16, -1.0)


def test_grid_geometry():
    g = Grid(1, 8, 4.0)
    assert g.h == 1.0
    assert np.allclose(g.axis, [-4, -3, -2, -1, 0, 1, 2, 3])
    assert g.kmax == pytest.approx(np.pi)
    assert g.cell_volume == pytest.approx(1.0)


def test_minimum_image_wrap():
    g = Grid(1, 16, 8.0)
    # distance from 7 to -7 across the seam is 2, not 14
    d = g.wrap(np.array([7.0 - (-7.0)]))
    assert abs(d[0]) == pytest.approx(2.0)


def test_norm_is_riemann_sum():
    g = Grid(1, 64, 10.0)
    f = ScalarField(g, np.ones(64, dtype=complex))
    # ||1||_2^2 = box length = 20
    assert f.norm() == pytest.approx(np.sqrt(20.0))


def test_gaussian_packet_normalized():
    g = Grid(3, 16, 6.0)
    f = gaussian_packet(g, 0.0, 1.2)
    assert f.norm() == pytest.approx(1.0, abs=1e-12)


def test_lp_norm_limits():
    g = Grid(1, 32, 8.0)
    f = gaussian_packet(g, 0.0, 1.0, normalize=False)
    linf, l2, l1 = linf_l2_l1_norms(f)
    assert linf == pytest.approx(1.0, abs=1e-12)
    assert lp_norm(f, np.inf) == pytest.approx(linf)
    assert lp_norm(f, 2) == pytest.approx(f.norm())
    # interpolation: ||f||_4^4 <= ||f||_inf^2 ||f||_2^2
    assert lp_norm(f, 4) ** 4 <= linf**2 * l2**2 + 1e-12


def test_pair_norms_upper_bounds_interpolants():
    g = Grid(1, 64, 12.0)
    rng = np.random.default_rng(0)
    f = random_band_limited(g, rng, band=1.0, envelope_width=3.0)
    bound = pair_norms(f)
    linf, l2, _ = linf_l2_l1_norms(f)
    # the split bound dominates both endpoints up to the quantile resolution
    assert bound <= l2 + linf + 1e-12
    assert bound >= max(0.5 * min(l2, linf), 0.0)


def test_mixed_norm_simple_cases():
    t = np.linspace(0.0, 1.0, 11)
    v = np.ones(11)
    assert mixed_norm(t, v, 2) == pytest.approx(1.0)
    assert mixed_norm(t, v, np.inf) == pytest.approx(1.0)
    assert mixed_norm(t, 2 * v, 2) == pytest.approx(2.0)


def test_weight_profile_decays_and_travels():
    g = Grid(1, 64, 16.0)
    w = WeightProfile(2.0, (0.0,), (1.0,))
    w0 = w.sample(g, 0.0)
    assert w0.max() == pytest.approx(1.0)
    assert w0[0] < 1e-2
    w5 = w.sample(g, 5.0)
    assert g.axis[np.argmax(w5)] == pytest.approx(5.0)


def test_weighted_multiply_contracts():
    g = Grid(1, 64, 16.0)
    f = gaussian_packet(g, 0.0, 2.0)
    w = WeightProfile(2.0, (0.0,))
    assert weighted_multiply(f, w, 0.0).norm() <= f.norm()


def test_spectral_taper_removes_high_modes():
    g = Grid(1, 128, 16.0)
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(128) + 1j * rng.standard_normal(128)
    f = spectral_taper(ScalarField(g, vals), 0.5, 1.0)
    from chargetransfer.grids import fftn
    spec = np.abs(fftn(f.values, 1))
    assert spec[np.sqrt(g.k2) > 1.0 + 1e-12].max() < 1e-14


def test_random_band_limited_seeded():
    g = Grid(1, 64, 8.0)
    a = random_band_limited(g, np.random.default_rng(5), band=0.8)
    b = random_band_limited(g, np.random.default_rng(5), band=0.8)
    assert np.array_equal(a.values, b.values)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)


def test_chirped_packet_has_unit_mass_and_focus_phase():
    g = Grid(1, 128, 20.0)
    f = chirped_packet(g, 0.0, 2.0, focus=10.0)
    assert f.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(np.angle(f.values[64 + 8] / f.values[64])) > 0


def test_spinor_charge_signature():
    g = Grid(1, 32, 8.0)
    up = gaussian_packet(g, 0.0, 1.0).values
    f = SpinorField(g, up, np.zeros_like(up))
    assert f.charge() == pytest.approx(1.0, abs=1e-12)
    flipped = SpinorField(g, np.zeros_like(up), up)
    assert flipped.charge() == pytest.approx(-1.0, abs=1e-12)
