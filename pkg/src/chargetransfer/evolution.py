"""Time evolution: exact free flow, Strang split-step, and a dense oracle.

The scalar flow is i d/dt psi = -(1/2) Lap psi + V(t) psi; the matrix flow
uses the indefinite kinetic block diag(-Lap/2, +Lap/2) plus a pointwise 2x2
potential with off-diagonal coupling phases.  Split-step evaluates potentials
at the step midpoint, which keeps second order accuracy for moving wells.

The oracle path assembles the dense discrete Hamiltonian (circulant spectral
Laplacian, so both routes share the same spatial operator) and steps it with
Crank-Nicolson.  It is meant for cross-checks on small grids only.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
import scipy.linalg

from .grids import Grid, ScalarField, SpinorField, fftn, ifftn
from .potentials import MatrixPotentialSpec, MovingPotential, sample_potential, sample_matrix_potential


class GuardTripped(RuntimeError):
    """A run diagnostic left its configured envelope."""


@dataclass(frozen=True)
class HamiltonianSpec:
    """Scalar: list of MovingPotential.  Matrix: list of MatrixPotentialSpec."""

    kind: str
    potentials: tuple = ()

    def __post_init__(self):
        if self.kind not in ("scalar", "matrix"):
            raise ValueError("kind must be 'scalar' or 'matrix'")
        want = MovingPotential if self.kind == "scalar" else MatrixPotentialSpec
        for p in self.potentials:
            if not isinstance(p, want):
                raise ValueError(f"potential entries must be {want.__name__}")

    def is_static(self):
        return all(p.is_static() for p in self.potentials)


@dataclass
class StepperConfig:
    dt: float = 0.01
    snapshot_every: int = 25
    boundary_mass_guard: float = 1e-6
    guard_fraction: float = 0.25  # boundary shell thickness as fraction of box
    growth_c: float = 10.0       # matrix growth envelope c (1 + |t-s|)^m0
    growth_m0: float = 2.0
    coalescence_tol: float = 1e-8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


@dataclass
class PropagatorTrace:
    """Snapshots of one run plus per-snapshot diagnostics."""

    times: list
    fields: list
    l2: list
    boundary_mass: list
    charge: list = None
    valid: bool = True
    guard_message: str = ""

    def final(self):
        return self.fields[-1]

    def spatial_series(self, norm_fn):
        return np.array([norm_fn(f) for f in self.fields])


@dataclass(frozen=True)
class SourceTerm:
    """Forcing F(t, x) = profile(x) * envelope(t), both supplied as callables
    returning arrays on the grid / scalars."""

    profile: object
    envelope: object

    def sample(self, grid, t):
        return np.asarray(self.profile(grid)) * complex(self.envelope(t))


def kinetic_phase(grid, tau):
    """Fourier multiplier of exp(i tau Lap / 2)."""
    return np.exp(-0.5j * grid.k2 * tau)


def free_propagate(f, tau):
    """Exact free flow e^{i tau Lap / 2} as a Fourier multiplier."""
    grid = f.grid
    if isinstance(f, SpinorField):
        up = ifftn(fftn(f.plus, grid.dim) * kinetic_phase(grid, tau), grid.dim)
        dn = ifftn(fftn(f.minus, grid.dim) * np.conj(kinetic_phase(grid, tau)), grid.dim)
        return SpinorField(grid, up, dn)
    return ScalarField(grid, ifftn(fftn(f.values, grid.dim) * kinetic_phase(grid, tau), grid.dim))


def _boundary_mask(grid, fraction):
    shell = np.zeros(grid.shape(), dtype=bool)
    edge = grid.box * (1.0 - fraction)
    for x in grid.mesh:
        shell |= np.abs(x) > edge
    return shell


def boundary_mass(values, grid, fraction=0.25):
    mask = _boundary_mask(grid, fraction)
    dens = np.abs(values) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    # batched fields: reduce over the trailing grid axes only
    if values.ndim > grid.dim:
        flat = dens.reshape(values.shape[: values.ndim - grid.dim] + (-1,))
        m = mask.reshape(-1)
        return float(np.max(flat[..., m].sum(axis=-1) / flat.sum(axis=-1)))
    return float(dens[mask].sum() / total)


def _steps(s, t, dt):
    """Uniform steps of signed dt from s to t, shorter final step if needed."""
    span = t - s
    if span == 0:
        return []
    sign = 1.0 if span > 0 else -1.0
    n_full = int(abs(span) // dt)
    steps = [sign * dt] * n_full
    rem = abs(span) - n_full * dt
    if rem > 1e-12 * max(1.0, abs(span)):
        steps.append(sign * rem)
    return steps


def _scalar_midpoint_potential(ham, grid, t_mid):
    v = np.zeros(grid.shape())
    for mover in ham.potentials:
        v = v + sample_potential(mover, t_mid, grid)
    return v


def _matrix_step_factors(ham, grid, t_mid, dt, coalescence_tol, stationary_frame=False):
    """Pointwise exp(-i dt M) for the traceless 2x2 midpoint potential M.

    In the stationary frame the coupling phase is frozen out and the constant
    internal-gap shift alpha^2/2 joins the diagonal."""
    a = np.zeros(grid.shape(), dtype=complex)
    b = np.zeros(grid.shape(), dtype=complex)
    c = np.zeros(grid.shape(), dtype=complex)
    for ms in ham.potentials:
        if stationary_frame:
            r2 = grid.radius2(np.broadcast_to(ms.center_at(t_mid), (grid.dim,)))
            ai = ms.u_spec.profile(r2) + ms.mu
            wi = ms.w_spec.profile(r2)
            bi, ci = -wi, +wi
        else:
            ai, bi, ci = sample_matrix_potential(ms, t_mid, grid)
        a = a + ai
        b = b + bi
        c = c + ci
    s = np.sqrt((a * a + b * c).astype(complex))
    sd = s * dt
    cos = np.cos(sd)
    small = np.abs(s) < coalescence_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        sinc = np.where(small, dt * (1.0 - sd * sd / 6.0), np.sin(sd) / np.where(small, 1.0, s))
    m11 = cos - 1j * sinc * a
    m12 = -1j * sinc * b
    m21 = -1j * sinc * c
    m22 = cos + 1j * sinc * a
    return m11, m12, m21, m22


def _record(trace, t, grid, stack, kind, cfg):
    if kind == "scalar":
        vals = stack if stack.ndim == grid.dim else stack
        trace.times.append(t)
        trace.fields.append(ScalarField(grid, stack.copy()) if stack.ndim == grid.dim else stack.copy())
        dens_norm = np.sqrt(np.sum(np.abs(stack) ** 2) * grid.cell_volume)
        trace.l2.append(float(dens_norm))
        trace.boundary_mass.append(boundary_mass(stack, grid, cfg.guard_fraction))
    else:
        sp = SpinorField.from_stack(grid, stack.copy())
        trace.times.append(t)
        trace.fields.append(sp)
        trace.l2.append(sp.norm())
        trace.boundary_mass.append(boundary_mass(stack, grid, cfg.guard_fraction))
        trace.charge.append(sp.charge())


def _check_guards(trace, cfg, kind, t0, raise_on_trip):
    bm = trace.boundary_mass[-1]
    if bm > cfg.boundary_mass_guard:
        trace.valid = False
        trace.guard_message = f"boundary mass {bm:.3e} above guard at t={trace.times[-1]:.3f}"
        if raise_on_trip:
            raise GuardTripped(trace.guard_message)
    if kind == "matrix":
        t = trace.times[-1]
        envelope = cfg.growth_c * (1.0 + abs(t - t0)) ** cfg.growth_m0
        if trace.l2[-1] > envelope * max(trace.l2[0], 1e-300):
            trace.valid = False
            trace.guard_message = f"norm outside growth envelope at t={t:.3f}"
            if raise_on_trip:
                raise GuardTripped(trace.guard_message)


def propagate(ham, f, s, t, cfg=None, source=None, raise_on_trip=False):
    """Split-step evolution of a ScalarField from time s to time t.

    Returns a PropagatorTrace whose snapshots include both endpoints.  Works
    on batched stacks too (leading axes before the grid axes) when f is a
    plain ndarray; in that case the trace stores raw arrays.
    """
    if ham.kind != "scalar":
        raise ValueError("propagate expects a scalar Hamiltonian")
    cfg = cfg or StepperConfig()
    grid = f.grid if isinstance(f, ScalarField) else None
    if grid is None:
        raise ValueError("propagate expects a ScalarField; use propagate_stack for batches")
    stack, trace = _run_scalar(ham, grid, f.values.astype(complex), s, t, cfg, source, raise_on_trip)
    return trace


def propagate_stack(ham, grid, stack, s, t, cfg=None, source=None, raise_on_trip=False):
    """Batched scalar evolution; stack has shape batch + grid.shape()."""
    cfg = cfg or StepperConfig()
    out, trace = _run_scalar(ham, grid, np.asarray(stack, dtype=complex), s, t, cfg, source, raise_on_trip)
    return out, trace


def _run_scalar(ham, grid, stack, s, t, cfg, source, raise_on_trip):
    batched = stack.ndim > grid.dim
    trace = PropagatorTrace([], [], [], [])
    record = lambda tt, arr: _record(trace, tt, grid, arr, "scalar", cfg) if not batched else _record_batch(trace, tt, grid, arr, cfg)
    record(s, stack)
    tcur = s
    static_v = None
    if ham.is_static():
        static_v = _scalar_midpoint_potential(ham, grid, 0.0)
    for i, dt in enumerate(_steps(s, t, cfg.dt)):
        t_mid = tcur + 0.5 * dt
        v = static_v if static_v is not None else _scalar_midpoint_potential(ham, grid, t_mid)
        half = kinetic_phase(grid, 0.5 * dt)
        stack = ifftn(fftn(stack, grid.dim) * half, grid.dim)
        if source is not None:
            stack = stack - 0.5j * dt * source.sample(grid, t_mid)
        stack = stack * np.exp(-1j * dt * v)
        if source is not None:
            stack = stack - 0.5j * dt * source.sample(grid, t_mid)
        stack = ifftn(fftn(stack, grid.dim) * half, grid.dim)
        tcur = tcur + dt
        if (i + 1) % cfg.snapshot_every == 0:
            record(tcur, stack)
            _check_guards(trace, cfg, "scalar", s, raise_on_trip)
    if trace.times[-1] != tcur:
        record(tcur, stack)
        _check_guards(trace, cfg, "scalar", s, raise_on_trip)
    return stack, trace


def _record_batch(trace, t, grid, stack, cfg):
    trace.times.append(t)
    trace.fields.append(stack.copy())
    nrm = np.sqrt(np.sum(np.abs(stack) ** 2, axis=tuple(range(-grid.dim, 0))) * grid.cell_volume)
    trace.l2.append(nrm)
    trace.boundary_mass.append(boundary_mass(stack, grid, cfg.guard_fraction))


def propagate_with_source(ham, f, s, t, source, cfg=None, raise_on_trip=False):
    return propagate(ham, f, s, t, cfg=cfg, source=source, raise_on_trip=raise_on_trip)


def matrix_propagate(ham, f, s, t, cfg=None, raise_on_trip=False, stationary_frame=False):
    """Split-step evolution of a SpinorField under the matrix flow.

    stationary_frame evolves under the autonomous companion operator instead
    (coupling phase removed, internal-gap shift on the diagonal); composing it
    with the modulation phases reproduces the lab-frame flow for a single
    resting well.
    """
    if ham.kind != "matrix":
        raise ValueError("matrix_propagate expects a matrix Hamiltonian")
    cfg = cfg or StepperConfig()
    grid = f.grid
    stack = f.stack().astype(complex)
    trace = PropagatorTrace([], [], [], [], charge=[])
    _record(trace, s, grid, stack, "matrix", cfg)
    tcur = s
    for i, dt in enumerate(_steps(s, t, cfg.dt)):
        t_mid = tcur + 0.5 * dt
        m11, m12, m21, m22 = _matrix_step_factors(
            ham, grid, t_mid, dt, cfg.coalescence_tol, stationary_frame=stationary_frame
        )
        half = kinetic_phase(grid, 0.5 * dt)
        up = ifftn(fftn(stack[0], grid.dim) * half, grid.dim)
        dn = ifftn(fftn(stack[1], grid.dim) * np.conj(half), grid.dim)
        up, dn = m11 * up + m12 * dn, m21 * up + m22 * dn
        stack[0] = ifftn(fftn(up, grid.dim) * half, grid.dim)
        stack[1] = ifftn(fftn(dn, grid.dim) * np.conj(half), grid.dim)
        tcur = tcur + dt
        if (i + 1) % cfg.snapshot_every == 0:
            _record(trace, tcur, grid, stack, "matrix", cfg)
            _check_guards(trace, cfg, "matrix", s, raise_on_trip)
    if trace.times[-1] != tcur:
        _record(trace, tcur, grid, stack, "matrix", cfg)
        _check_guards(trace, cfg, "matrix", s, raise_on_trip)
    return trace


# ---------------------------------------------------------------------------
# dense oracle


def dense_laplacian_1d(grid):
    """Exact spectral second-derivative matrix (circulant) on one axis."""
    F = scipy.linalg.dft(grid.n)
    k2 = (2.0 * np.pi * sfft.fftfreq(grid.n, d=grid.h)) ** 2
    lap = (np.conj(F.T) @ (k2[:, None] * F)) / grid.n
    return -lap.real


def dense_kinetic(grid):
    """-Lap/2 on the full grid via Kronecker sums of the 1d blocks."""
    lap1 = dense_laplacian_1d(grid)
    eye = np.eye(grid.n)
    if grid.dim == 1:
        lap = lap1
    elif grid.dim == 2:
        lap = np.kron(lap1, eye) + np.kron(eye, lap1)
    else:
        lap = (
            np.kron(np.kron(lap1, eye), eye)
            + np.kron(np.kron(eye, lap1), eye)
            + np.kron(np.kron(eye, eye), lap1)
        )
    return -0.5 * lap


def dense_scalar_hamiltonian(ham, grid, t):
    h = dense_kinetic(grid).astype(complex)
    v = _scalar_midpoint_potential(ham, grid, t)
    h[np.diag_indices_from(h)] += v.reshape(-1)
    return h


def dense_matrix_hamiltonian(ham, grid, include_alpha_shift=True):
    """Stationary matrix Hamiltonian for a single static well (theta frozen
    out: the off-diagonal coupling enters without its modulation phase)."""
    if len(ham.potentials) != 1 or not ham.potentials[0].is_static():
        raise ValueError("dense matrix assembly expects one static well")
    ms = ham.potentials[0]
    k = dense_kinetic(grid)
    npts = grid.npoints
    r2 = grid.radius2(np.broadcast_to(ms.center_at(0.0), (grid.dim,)))
    u = ms.u_spec.profile(r2).reshape(-1)
    w = ms.w_spec.profile(r2).reshape(-1)
    shift = ms.mu if include_alpha_shift else 0.0
    top = k + np.diag(u + shift)
    a = np.zeros((2 * npts, 2 * npts), dtype=complex)
    a[:npts, :npts] = top
    a[npts:, npts:] = -top
    a[:npts, npts:] = -np.diag(w)
    a[npts:, :npts] = +np.diag(w)
    return a


MAX_ORACLE_POINTS = 4096


def oracle_propagate(ham, f, s, t, dt=1e-3, snapshot_every=10**9):
    """Crank-Nicolson reference propagation on the densely assembled operator.

    Static potentials reuse one LU factorization; moving ones re-assemble at
    every midpoint.  Scalar fields only; grids above 4096 points are refused.
    """
    grid = f.grid
    if grid.npoints > MAX_ORACLE_POINTS:
        raise ValueError("oracle limited to 4096 grid points")
    if ham.kind == "scalar":
        psi = f.values.reshape(-1).astype(complex)
        h_static = dense_scalar_hamiltonian(ham, grid, 0.0) if ham.is_static() else None
    else:
        psi = f.stack().reshape(-1).astype(complex)
        h_static = dense_matrix_hamiltonian(ham, grid)
        if not ham.is_static():
            raise ValueError("matrix oracle supports static wells only")
    lu = None
    rhs_m = None
    if h_static is not None:
        n = h_static.shape[0]
        a = np.eye(n) + 0.5j * dt * h_static
        rhs_m = np.eye(n) - 0.5j * dt * h_static
        lu = scipy.linalg.lu_factor(a)
    times = [s]
    fields = [psi.copy()]
    tcur = s
    for i, step in enumerate(_steps(s, t, dt)):
        if h_static is not None and abs(step - dt) < 1e-15:
            psi = scipy.linalg.lu_solve(lu, rhs_m @ psi)
        else:
            h = h_static if h_static is not None else dense_scalar_hamiltonian(ham, grid, tcur + 0.5 * step)
            n = h.shape[0]
            psi = np.linalg.solve(np.eye(n) + 0.5j * step * h, psi - 0.5j * step * (h @ psi))
        tcur += step
        if (i + 1) % snapshot_every == 0:
            times.append(tcur)
            fields.append(psi.copy())
    if times[-1] != tcur:
        times.append(tcur)
        fields.append(psi.copy())
    shape = grid.shape()
    if ham.kind == "scalar":
        out = [ScalarField(grid, p.reshape(shape)) for p in fields]
    else:
        out = [SpinorField.from_stack(grid, p.reshape((2,) + shape)) for p in fields]
    l2 = np.array([g.norm() for g in out])
    bmass = np.array([boundary_mass(p.reshape((-1,) + shape), grid) for p in fields])
    charge = np.array([g.charge() for g in out]) if ham.kind == "matrix" else None
    return PropagatorTrace(np.asarray(times), out, l2, bmass, charge)
