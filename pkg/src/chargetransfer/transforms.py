"""Boost, translation and internal-phase symmetries of the flows.

The boost map at time t acts as

    (B f)(x) = e^{i |v|^2 t / 2} e^{-i (x + y + t v) . v} f(x + y + t v)

which commutes with the free flow: boosting the datum at time 0 and evolving
freely agrees with evolving first and boosting at time t.  Translations are
implemented as exact Fourier phase shifts, so off-lattice displacements are
fine; velocities should sit on the dual lattice (pi/box times integers) when
machine-level identities are wanted, since e^{-i x.v} is sampled pointwise.
"""

from dataclasses import dataclass

import numpy as np

from .grids import ScalarField, SpinorField, fftn, ifftn


@dataclass(frozen=True)
class GalileiParams:
    velocity: tuple
    shift: tuple = None

    def v(self, dim):
        return np.broadcast_to(np.asarray(self.velocity, dtype=float), (dim,))

    def y(self, dim):
        if self.shift is None:
            return np.zeros(dim)
        return np.broadcast_to(np.asarray(self.shift, dtype=float), (dim,))


def translate(f, a):
    """Periodic translation f(x) -> f(x + a) via Fourier phases."""
    grid = f.grid
    a = np.broadcast_to(np.asarray(a, dtype=float), (grid.dim,))
    spec = fftn(f.values, grid.dim)
    phase = np.exp(1j * sum(ai * ki for ai, ki in zip(a, grid.kmesh)))
    return ScalarField(grid, ifftn(spec * phase, grid.dim))


def galilei(f, params, t):
    """Apply the boost with parameters (v, y) at time t."""
    grid = f.grid
    v = params.v(grid.dim)
    y = params.y(grid.dim)
    a = y + t * v
    xv = sum(vi * xi for vi, xi in zip(v, grid.mesh))
    g = ScalarField(grid, f.values * np.exp(-1j * xv))
    g = translate(g, a)
    phase = np.exp(0.5j * float(v @ v) * t)
    return ScalarField(grid, phase * g.values)


def galilei_inverse(f, params, t):
    """Inverse boost: a constant phase times the (-v, -y) boost."""
    grid = f.grid
    v = params.v(grid.dim)
    y = params.y(grid.dim)
    g = galilei(f, GalileiParams(tuple(-v), tuple(-y)), t)
    return ScalarField(grid, np.exp(1j * float(y @ v)) * g.values)


@dataclass(frozen=True)
class ModulationParams:
    alpha: float
    gamma: float = 0.0

    def omega(self, t):
        return self.alpha**2 * t + self.gamma


def modulation(f, params, t, inverse=False):
    """Diagonal internal phase e^{-i omega sigma3 / 2} on a spinor."""
    half = 0.5 * params.omega(t)
    s = +1.0 if inverse else -1.0
    return SpinorField(f.grid, f.plus * np.exp(s * 1j * half), f.minus * np.exp(-s * 1j * half))


def vector_galilei(f, params, t, inverse=False):
    """Component-wise boost acting conjugate-linearly on the second entry."""
    grid = f.grid
    up = ScalarField(grid, f.plus)
    dn = ScalarField(grid, np.conj(f.minus))
    if inverse:
        up2 = galilei_inverse(up, params, t)
        dn2 = galilei_inverse(dn, params, t)
    else:
        up2 = galilei(up, params, t)
        dn2 = galilei(dn, params, t)
    return SpinorField(grid, up2.values, np.conj(dn2.values))
