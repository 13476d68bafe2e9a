"""Propagation basics: free flow against the closed form, then a well.

A resting Gaussian under the free flow has an exact closed-form evolution,
which pins the spectral kinetic step to machine precision.  Adding a static
attractive well brings in the split-step potential factor; halving the step
size should cut the error by 4x (second order), measured against the dense
unitary reference integrator.
"""

import numpy as np

from chargetransfer import (
    Grid, ScalarField, HamiltonianSpec, MovingPotential, PotentialSpec,
    StepperConfig, free_propagate, gaussian_packet, oracle_propagate, propagate,
)


def free_gaussian(grid, width, t):
    z = width**2 + 1j * t
    vals = (width**2 / z) ** (grid.dim / 2.0) * np.exp(
        -grid.mesh[0] ** 2 / (2.0 * z))
    return ScalarField(grid, vals.astype(complex))


def main():
    g = Grid(1, 256, 20.0)
    f = free_gaussian(g, 1.5, 0.0)
    err = (free_propagate(f, 2.0) - free_gaussian(g, 1.5, 2.0)).norm()
    print(f"free flow vs closed form at t=2: {err:.3e}")

    spec = PotentialSpec("gaussian", -2.0, 1.0, (0.0,))
    ham = HamiltonianSpec("scalar", (MovingPotential(spec, (0.0,), (0.0,)),))
    datum = gaussian_packet(g, 0.3, 1.0)
    ref = oracle_propagate(ham, datum, 0.0, 1.0, dt=2.5e-5).final()
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        cfg = StepperConfig(dt=dt, snapshot_every=10**9, boundary_mass_guard=1.0)
        out = propagate(ham, datum, 0.0, 1.0, cfg).final()
        errs.append((out - ref).norm())
        print(f"split-step dt={dt:g}: error vs dense reference {errs[-1]:.3e}")
    print(f"error ratios under halving: {errs[0]/errs[1]:.2f}, {errs[1]/errs[2]:.2f} "
          "(4.0 = second order)")


if __name__ == "__main__":
    main()
