"""Potential well families, straight-line motion, and 2x2 matrix potentials."""

from dataclasses import dataclass, field

import numpy as np

from .grids import Grid

FAMILIES = ("gaussian", "sech2")


@dataclass(frozen=True)
class PotentialSpec:
    """Radial well profile amplitude * shape(|x - center| / width).

    gaussian: exp(-r^2 / (2 w^2));  sech2: sech(r / w)^2.  Negative amplitude
    means an attractive well.
    """

    family: str
    amplitude: float
    width: float
    center: tuple = (0.0,)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.width <= 0:
            raise ValueError("width must be positive")

    def profile(self, r2):
        if self.family == "gaussian":
            return self.amplitude * np.exp(-r2 / (2.0 * self.width**2))
        r = np.sqrt(r2)
        return self.amplitude / np.cosh(r / self.width) ** 2

    def sample_static(self, grid, extra_shift=None):
        c = np.broadcast_to(np.asarray(self.center, dtype=float), (grid.dim,))
        if extra_shift is not None:
            c = c + np.broadcast_to(np.asarray(extra_shift, dtype=float), (grid.dim,))
        return self.profile(grid.radius2(c))


@dataclass(frozen=True)
class MovingPotential:
    """Well translated along center + offset + velocity * t."""

    spec: PotentialSpec
    velocity: tuple = (0.0,)
    offset: tuple = (0.0,)

    def center_at(self, t):
        c = np.asarray(self.spec.center, dtype=float)
        y = np.asarray(self.offset, dtype=float)
        v = np.asarray(self.velocity, dtype=float)
        return c + y + t * v

    def is_static(self):
        return not np.any(np.asarray(self.velocity, dtype=float))


def sample_potential(mover, t, grid):
    """Real potential values at time t, minimum-image distances on the box."""
    c = np.broadcast_to(mover.center_at(t), (grid.dim,))
    return mover.spec.profile(grid.radius2(c))


def resolution_ok(grid, movers, points_per_width=8):
    """The stepper wants the well core (diameter ~4 widths) resolved."""
    for m in movers:
        if points_per_width * grid.h > 4.0 * m.spec.width:
            return False
    return True


@dataclass(frozen=True)
class MatrixPotentialSpec:
    """Self-coupling U, conjugation coupling W, internal frequency alpha,
    translation velocity, and phase offset gamma for one matrix well.

    The time-dependent coupling phase is theta(t, x) = (|v|^2 + alpha^2) t
    + 2 x.v + gamma, evaluated at the co-moving point x - v t - offset.
    """

    u_spec: PotentialSpec
    w_spec: PotentialSpec
    alpha: float
    velocity: tuple = (0.0,)
    offset: tuple = (0.0,)
    gamma: float = 0.0

    @property
    def mu(self):
        """Half-gap of the stationary internal Hamiltonian."""
        return 0.5 * self.alpha**2

    def center_at(self, t):
        y = np.asarray(self.offset, dtype=float)
        v = np.asarray(self.velocity, dtype=float)
        return y + t * v

    def is_static(self):
        return not np.any(np.asarray(self.velocity, dtype=float))

    def theta(self, t, grid):
        v = np.broadcast_to(np.asarray(self.velocity, dtype=float), (grid.dim,))
        c = np.broadcast_to(self.center_at(t), (grid.dim,))
        moving_dot = sum(vi * grid.wrap(xi, ci) for vi, xi, ci in zip(v, grid.mesh, c))
        return (float(v @ v) + self.alpha**2) * t + 2.0 * moving_dot + self.gamma


def sample_matrix_potential(mspec, t, grid):
    """Pointwise 2x2 blocks (a, b, c) of [[a, b], [c, -a]] at time t.

    a = U, b = -e^{i theta} W, c = e^{-i theta} W, all evaluated in the frame
    moving with the well.
    """
    c = np.broadcast_to(mspec.center_at(t), (grid.dim,))
    r2 = grid.radius2(c)
    u = mspec.u_spec.profile(r2)
    w = mspec.w_spec.profile(r2)
    phase = np.exp(1j * mspec.theta(t, grid))
    return u, -phase * w, np.conj(phase) * w


class ScenarioValidationError(ValueError):
    pass


def validate_scalar_scenario(grid, movers, bound_energies=None, threshold_margin=1e-3):
    """Reject ill-posed well configurations before any propagation.

    bound_energies, when provided, is a sequence of (per-well) eigenvalue
    arrays; eigenvalues within threshold_margin of zero indicate a near
    threshold state the box cannot represent faithfully.
    """
    for m in movers:
        if 4.0 * m.spec.width > grid.box:
            raise ScenarioValidationError("well broader than the box")
    if not resolution_ok(grid, movers):
        raise ScenarioValidationError("grid too coarse for the well width")
    if bound_energies is not None:
        for evs in bound_energies:
            evs = np.asarray(evs, dtype=float)
            if evs.size and np.any(np.abs(evs) < threshold_margin):
                raise ScenarioValidationError("near-threshold bound state")
    return True
