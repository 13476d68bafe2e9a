import numpy as np
import pytest

from chargetransfer.grids import Grid, ScalarField, SpinorField, gaussian_packet
from chargetransfer.potentials import MatrixPotentialSpec, MovingPotential, PotentialSpec
from chargetransfer.evolution import (
    GuardTripped, HamiltonianSpec, SourceTerm, StepperConfig, boundary_mass,
    dense_matrix_hamiltonian, dense_scalar_hamiltonian, free_propagate,
    matrix_propagate, oracle_propagate, propagate, propagate_stack,
    propagate_with_source,
)


def static_well(amplitude=-2.0, width=1.0):
    spec = PotentialSpec("gaussian", amplitude, width, (0.0,))
    return HamiltonianSpec("scalar", (MovingPotential(spec, (0.0,), (0.0,)),))


def free_gaussian(grid, width, t):
    """Closed-form free solution for a resting Gaussian datum."""
    w2 = width**2
    z = w2 + 1j * t
    x = grid.mesh[0]
    vals = (w2 / z) ** (grid.dim / 2.0) * np.exp(-np.sum(
        np.stack([m**2 for m in grid.mesh]), axis=0) / (2.0 * z))
    return ScalarField(grid, vals.astype(complex))


def test_free_propagate_matches_closed_form_1d():
    g = Grid(1, 256, 20.0)
    f = ScalarField(g, free_gaussian(g, 1.5, 0.0).values)
    out = free_propagate(f, 2.0)
    ref = free_gaussian(g, 1.5, 2.0)
    assert (out - ref).norm() / ref.norm() < 1e-12


def test_split_step_is_unitary_and_second_order():
    g = Grid(1, 128, 10.0)
    ham = static_well()
    f = gaussian_packet(g, 0.5, 0.8)
    errs = []
    ref = oracle_propagate(ham, f, 0.0, 0.5, dt=2.5e-5).final()
    for dt in (4e-3, 2e-3):
        cfg = StepperConfig(dt=dt, snapshot_every=10**9, boundary_mass_guard=1.0)
        out = propagate(ham, f, 0.0, 0.5, cfg).final()
        assert abs(out.norm() - f.norm()) < 1e-12
        errs.append((out - ref).norm())
    ratio = errs[0] / errs[1]
    assert 3.5 < ratio < 4.5


def test_backward_propagation_reverses_forward():
    g = Grid(1, 128, 10.0)
    ham = static_well()
    f = gaussian_packet(g, 0.0, 1.0)
    cfg = StepperConfig(dt=1e-2, snapshot_every=10**9, boundary_mass_guard=1.0)
    fwd = propagate(ham, f, 0.0, 1.0, cfg).final()
    back = propagate(ham, fwd, 1.0, 0.0, cfg).final()
    assert (back - f).norm() < 1e-11


def test_boundary_mass_guard_trips():
    g = Grid(1, 64, 8.0)
    ham = HamiltonianSpec("scalar", ())
    f = gaussian_packet(g, 0.0, 0.5, velocity=(2.0,))
    cfg = StepperConfig(dt=1e-2, snapshot_every=5, boundary_mass_guard=1e-10)
    trace = propagate(ham, f, 0.0, 5.0, cfg)
    assert not trace.valid
    assert "boundary" in trace.guard_message
    with pytest.raises(GuardTripped):
        propagate(ham, f, 0.0, 5.0, cfg, raise_on_trip=True)


def test_boundary_mass_measures_edge_shell():
    g = Grid(1, 64, 8.0)
    inner = gaussian_packet(g, 0.0, 0.5)
    outer = gaussian_packet(g, 7.5, 0.5)
    assert boundary_mass(inner.values, g) < 1e-12
    assert boundary_mass(outer.values, g) > 0.5


def test_propagate_stack_matches_single_runs():
    g = Grid(1, 64, 8.0)
    ham = static_well(-1.0, 1.0)
    cfg = StepperConfig(dt=5e-3, snapshot_every=10**9, boundary_mass_guard=1.0)
    data = [gaussian_packet(g, c, 0.8) for c in (-1.0, 0.0, 1.0)]
    stack = np.stack([f.values for f in data])
    out, _ = propagate_stack(ham, g, stack, 0.0, 0.4, cfg)
    for row, f in zip(out, data):
        single = propagate(ham, f, 0.0, 0.4, cfg).final()
        assert np.max(np.abs(row - single.values)) < 1e-13


def test_source_term_injects_mass_linearly():
    g = Grid(1, 128, 10.0)
    ham = HamiltonianSpec("scalar", ())
    zero = ScalarField(g, np.zeros(128, dtype=complex))
    prof = gaussian_packet(g, 0.0, 1.0).values
    src = SourceTerm(lambda grid: prof, lambda t: np.exp(-((t - 0.5) / 0.2) ** 2))
    cfg = StepperConfig(dt=1e-3, snapshot_every=100, boundary_mass_guard=1.0)
    one = propagate_with_source(ham, zero, 0.0, 1.5, src, cfg).final()
    src2 = SourceTerm(lambda grid: 2.0 * prof, lambda t: np.exp(-((t - 0.5) / 0.2) ** 2))
    two = propagate_with_source(ham, zero, 0.0, 1.5, src2, cfg).final()
    assert (two - one * 2.0).norm() < 1e-12 * two.norm() + 1e-12


def test_oracle_agrees_with_split_step():
    g = Grid(1, 128, 10.0)
    ham = static_well()
    f = gaussian_packet(g, 0.3, 1.0)
    cfg = StepperConfig(dt=5e-4, snapshot_every=10**9, boundary_mass_guard=1.0)
    a = propagate(ham, f, 0.0, 1.0, cfg).final()
    b = oracle_propagate(ham, f, 0.0, 1.0, dt=1e-4).final()
    assert (a - b).norm() / f.norm() < 1e-6


def test_dense_scalar_hamiltonian_is_hermitian():
    g = Grid(1, 32, 6.0)
    h = dense_scalar_hamiltonian(static_well(), g, 0.0)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def sech2_matrix_ham(alpha=1.0):
    u = PotentialSpec("sech2", -2.0, 1.0, (0.0,))
    w = PotentialSpec("sech2", 1.0, 1.0, (0.0,))
    ms = MatrixPotentialSpec(u, w, alpha, velocity=(0.0,), offset=(0.0,), gamma=0.0)
    return HamiltonianSpec("matrix", (ms,))


def test_matrix_step_conserves_indefinite_charge():
    g = Grid(1, 128, 12.0)
    ham = sech2_matrix_ham()
    up = gaussian_packet(g, 0.5, 1.0).values
    dn = 0.3 * gaussian_packet(g, -0.5, 1.2).values
    f = SpinorField(g, up, dn)
    cfg = StepperConfig(dt=1e-3, snapshot_every=10**9, boundary_mass_guard=1.0)
    out = matrix_propagate(ham, f, 0.0, 1.0, cfg).final()
    assert abs(out.charge() - f.charge()) < 1e-10


def test_matrix_sigma3_symmetry_of_dense_operator():
    # sigma3 H sigma3 = H* pointwise: the dense matrix satisfies the
    # pseudo-Hermiticity that makes the indefinite charge a constant
    g = Grid(1, 32, 6.0)
    h = dense_matrix_hamiltonian(sech2_matrix_ham(), g)
    n = h.shape[0] // 2
    s3 = np.diag(np.concatenate([np.ones(n), -np.ones(n)]))
    assert np.max(np.abs(s3 @ h.conj().T @ s3 - h)) < 1e-12
