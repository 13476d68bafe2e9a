"""Bound states of scalar wells and spectral data of the matrix generator.

Scalar bound states are computed iteratively (Lanczos on an FFT-applied
operator) and can be cross-checked against dense diagonalization on small
grids.  The matrix generator is non-selfadjoint; its zero generalized
eigenspace is found by SVD nullspaces and the remaining gap spectrum is read
off after deflating that cluster, which keeps Jordan-block sensitivity out of
the reality check.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .grids import Grid, ScalarField, SpinorField, fftn, ifftn
from .evolution import boundary_mass, dense_kinetic, dense_matrix_hamiltonian
from .potentials import sample_potential

NULLSPACE_RTOL = 1e-8


@dataclass
class BoundStateSet:
    energies: np.ndarray
    states: list           # ScalarField, orthonormal
    residuals: np.ndarray

    def __len__(self):
        return len(self.states)


def _scalar_apply(grid, vpot):
    def apply(vec):
        arr = vec.reshape(grid.shape())
        out = ifftn(fftn(arr, grid.dim) * (0.5 * grid.k2), grid.dim) + vpot * arr
        return out.reshape(-1)

    return apply


def bound_states(ham, grid, k_max=8, tol=1e-10, threshold=-1e-10, t=0.0,
                 localization_cut=0.2, initial_guess=None):
    """Negative-energy eigenpairs of -Lap/2 + V(t) on the grid.

    The potential configuration is frozen at time t (use the natural time at
    which a traveling well sits at its reference position).  Returns states
    sorted by energy; residuals are measured in L2 against the same discrete
    operator that the split-step propagator applies.

    A shallow well on a periodic box drags the zero-momentum box mode slightly
    below zero without binding anything; states carrying more than
    localization_cut of their mass in the outer quarter shell are therefore
    dropped as delocalized.
    """
    vpot = np.zeros(grid.shape())
    for mover in ham.potentials:
        vpot = vpot + sample_potential(mover, t, grid)
    apply = _scalar_apply(grid, vpot)
    n = grid.npoints
    op = spla.LinearOperator((n, n), matvec=apply, dtype=complex)
    k = min(k_max, n - 2)
    v0 = None if initial_guess is None else np.asarray(initial_guess).reshape(-1)
    vals, vecs = spla.eigsh(op, k=k, which="SA", tol=tol, v0=v0)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    keep = vals < threshold
    vals, vecs = vals[keep], vecs[:, keep]
    states, residuals, energies = [], [], []
    for e, v in zip(vals, vecs.T):
        arr = v.reshape(grid.shape())
        if boundary_mass(arr, grid) > localization_cut:
            continue
        v = v / np.sqrt(np.sum(np.abs(v) ** 2) * grid.cell_volume)
        res = apply(v) - e * v
        residuals.append(np.sqrt(np.sum(np.abs(res) ** 2) * grid.cell_volume))
        states.append(ScalarField(grid, v.reshape(grid.shape()).astype(complex)))
        energies.append(e)
    return BoundStateSet(np.asarray(energies), states, np.asarray(residuals))


def dense_bound_states(ham, grid, threshold=-1e-10, t=0.0):
    """Dense-diagonalization reference for small grids (<= 4096 points)."""
    if grid.npoints > 4096:
        raise ValueError("dense reference limited to 4096 points")
    h = dense_kinetic(grid)
    vpot = np.zeros(grid.shape())
    for mover in ham.potentials:
        vpot = vpot + sample_potential(mover, t, grid)
    h = h + np.diag(vpot.reshape(-1))
    vals, vecs = np.linalg.eigh(h)
    keep = vals < threshold
    vals, vecs = vals[keep], vecs[:, keep]
    states, energies = [], []
    for e, v in zip(vals, vecs.T):
        if boundary_mass(v.reshape(grid.shape()), grid) > 0.2:
            continue
        v = v / np.sqrt(np.sum(np.abs(v) ** 2) * grid.cell_volume)
        states.append(ScalarField(grid, v.reshape(grid.shape()).astype(complex)))
        energies.append(e)
    return BoundStateSet(np.asarray(energies), states, np.zeros(len(states)))


def nullspace(mat, rtol=NULLSPACE_RTOL):
    """Orthonormal nullspace basis by SVD with a relative threshold."""
    u, s, vh = np.linalg.svd(mat)
    if s.size == 0:
        return vh.conj().T, 0.0
    if s[0] == 0.0:
        return np.eye(mat.shape[1], dtype=complex), 0.0
    cut = rtol * s[0]
    dim = int(np.sum(s < cut))
    gap_ok = dim == 0 or dim == mat.shape[1] or (s[-dim - 1] if dim < s.size else np.inf) > 10 * cut
    basis = vh.conj().T[:, vh.shape[0] - dim:] if dim else np.zeros((mat.shape[1], 0))
    return basis, (0.0 if gap_ok else 1.0)


def generalized_eigenspace(a, omega, order, rtol=NULLSPACE_RTOL):
    """Basis of ker (a - omega)^order with an ambiguity flag when the singular
    spectrum has no clean gap at the threshold."""
    m = np.linalg.matrix_power(a - omega * np.eye(a.shape[0]), order)
    basis, ambiguous = nullspace(m, rtol)
    return basis, basis.shape[1], bool(ambiguous)


@dataclass
class MatrixSpectralData:
    """Spectral data of one stationary matrix well: gap eigenvalues, right and
    left root vectors, the oblique bound projection, and Jordan dimensions."""

    grid: Grid
    mu: float
    eigenvalues: np.ndarray          # raw dense spectrum
    gap_eigenvalues: np.ndarray      # cluster representatives inside the gap
    right_vectors: np.ndarray        # columns: root vectors of the gap part
    left_vectors: np.ndarray         # biorthogonal duals, <left_i, right_j> = delta
    jordan_dims: dict                # omega -> [dim ker, dim ker^2, dim ker^3]
    biorth_defect: float
    max_imag_gap: float

    def bound_project(self, stack):
        vec = stack.reshape(-1)
        hv = self.grid.cell_volume
        coeff = (self.left_vectors.conj().T @ vec) * hv
        return (self.right_vectors @ coeff).reshape(stack.shape)

    def scatter_project(self, stack):
        return stack - self.bound_project(stack)


def matrix_spectrum(ham, grid, zero_cluster_radius=1e-5, max_order=3):
    """Dense spectral analysis of a single static matrix well.

    The zero cluster is resolved by SVD nullspaces of powers of the operator
    (robust against Jordan sensitivity); other gap eigenvalues come from the
    dense spectrum after removing the cluster, with left vectors from the
    adjoint problem, biorthogonalized against the right family.
    """
    a = dense_matrix_hamiltonian(ham, grid)
    n2 = a.shape[0]
    if n2 > 4096:
        raise ValueError("dense matrix analysis limited to 2048 grid points")
    mu = ham.potentials[0].mu
    evals = np.linalg.eigvals(a)

    jordan = {}
    chains = []
    chains_left = []
    # zero cluster via nullspace growth
    dims = []
    for order in (1, 2, 3):
        _, d, _ = generalized_eigenspace(a, 0.0, order)
        dims.append(d)
    if dims[-1]:
        jordan[0.0] = dims
        basis, _, _ = generalized_eigenspace(a, 0.0, max_order)
        lbasis, _, _ = generalized_eigenspace(a.conj().T, 0.0, max_order)
        chains.append((0.0, basis))
        chains_left.append((0.0, lbasis))

    # nonzero gap clusters from the dense spectrum
    in_gap = np.abs(evals.real) < mu * (1 - 1e-9)
    away = np.abs(evals) > zero_cluster_radius
    cand = evals[in_gap & away]
    used = np.zeros(len(cand), dtype=bool)
    for i in range(len(cand)):
        if used[i]:
            continue
        close = np.abs(cand - cand[i]) < zero_cluster_radius
        used |= close
        omega = cand[close].mean()
        dims = []
        for order in (1, 2, 3):
            _, d, _ = generalized_eigenspace(a, omega, order)
            dims.append(d)
        if dims[-1] == 0:
            continue
        jordan[complex(omega)] = dims
        basis, _, _ = generalized_eigenspace(a, omega, max_order)
        lbasis, _, _ = generalized_eigenspace(a.conj().T, np.conj(omega), max_order)
        chains.append((omega, basis))
        chains_left.append((omega, lbasis))

    if chains:
        right = np.hstack([b for _, b in chains])
        left = np.hstack([b for _, b in chains_left])
        hv = grid.cell_volume
        overlap = (left.conj().T @ right) * hv
        left = left @ np.linalg.inv(overlap).conj().T
        defect = float(np.abs((left.conj().T @ right) * hv - np.eye(right.shape[1])).max())
    else:
        right = np.zeros((n2, 0))
        left = np.zeros((n2, 0))
        defect = 0.0

    gap_eigs = np.array([om for om, _ in chains])
    nonzero = gap_eigs[np.abs(gap_eigs) > 0] if gap_eigs.size else np.array([])
    max_imag = float(np.abs(nonzero.imag).max()) if nonzero.size else 0.0
    return MatrixSpectralData(
        grid=grid,
        mu=mu,
        eigenvalues=evals,
        gap_eigenvalues=gap_eigs,
        right_vectors=right,
        left_vectors=left,
        jordan_dims=jordan,
        biorth_defect=defect,
        max_imag_gap=max_imag,
    )


def _localization_rate(grid, vec_stack):
    """Fit log |v| ~ -rate * |x| on the tail; positive rate = localized."""
    amp = np.abs(vec_stack).reshape(2, -1).max(axis=0)
    r = np.sqrt(grid.radius2(np.zeros(grid.dim))).reshape(-1)
    # tail only: skip the core, stop before the wrap-around shadow
    sel = (r > 0.25 * grid.box) & (r < 0.75 * grid.box) & (amp > 1e-14)
    if sel.sum() < 8:
        return 0.0
    coeff = np.polyfit(r[sel], np.log(amp[sel]), 1)
    return float(-coeff[0])


@dataclass
class AdmissibilityReport:
    verdicts: dict
    details: dict

    def ok(self):
        return all(v in ("pass", "unchecked") for v in self.verdicts.values())

    def to_dict(self):
        return {"verdicts": dict(self.verdicts), "details": dict(self.details)}


def admissibility_report(ham, grid, imag_tol=1e-8, zero_cluster_radius=1e-5):
    """Check the spectral admissibility conditions for one static matrix well.

    Conditions on the generator: (real-gap) gap spectrum real after zero
    cluster deflation; (no-embedded) no exponentially localized eigenvector
    with real part beyond the gap edge; (jordan) nilpotent degree at most two
    at zero, none elsewhere in the gap; (localized) gap root vectors decay
    exponentially; (adjoint) the same holds for the adjoint operator.  Edge
    resonances and range closedness are reported as unchecked.
    """
    data = matrix_spectrum(ham, grid, zero_cluster_radius=zero_cluster_radius)
    a = dense_matrix_hamiltonian(ham, grid)
    verdicts, details = {}, {}

    verdicts["real_gap_spectrum"] = "pass" if data.max_imag_gap <= imag_tol else "fail"
    details["max_imag_gap"] = data.max_imag_gap

    # embedded point spectrum: localized eigenvectors beyond the gap edge
    vals, vecs = np.linalg.eig(a)
    beyond = np.where((np.abs(vals.real) > data.mu * (1 + 1e-6)) & (np.abs(vals.imag) < 1e-6))[0]
    embedded = []
    for idx in beyond:
        rate = _localization_rate(grid, vecs[:, idx])
        if rate > 0.5:  # clearly faster than any box mode
            embedded.append((complex(vals[idx]), rate))
    verdicts["no_embedded_eigenvalues"] = "pass" if not embedded else "fail"
    details["embedded_candidates"] = [(str(v), r) for v, r in embedded]

    jordan_ok = True
    for omega, dims in data.jordan_dims.items():
        if omega == 0.0:
            jordan_ok &= dims[0] < dims[1] == dims[2]
        else:
            jordan_ok &= dims[0] == dims[1] == dims[2]
    verdicts["jordan_structure"] = "pass" if jordan_ok else "fail"
    details["jordan_dims"] = {str(k): list(v) for k, v in data.jordan_dims.items()}

    rates = [
        _localization_rate(grid, data.right_vectors[:, j].reshape(2, -1))
        for j in range(data.right_vectors.shape[1])
    ]
    verdicts["localized_root_vectors"] = "pass" if all(r > 0.05 for r in rates) else "fail"
    details["localization_rates"] = rates

    adj_rates = [
        _localization_rate(grid, data.left_vectors[:, j].reshape(2, -1))
        for j in range(data.left_vectors.shape[1])
    ]
    adj_dims = {}
    aH = a.conj().T
    for order in (1, 2, 3):
        _, d, _ = generalized_eigenspace(aH, 0.0, order)
        adj_dims[order] = d
    adj_ok = all(r > 0.05 for r in adj_rates)
    if 0.0 in data.jordan_dims:
        want = data.jordan_dims[0.0]
        adj_ok &= [adj_dims[1], adj_dims[2], adj_dims[3]] == list(want)
    verdicts["adjoint_conditions"] = "pass" if adj_ok else "fail"
    details["adjoint_jordan_dims"] = adj_dims
    details["biorth_defect"] = data.biorth_defect

    verdicts["edge_resonances"] = "unchecked"
    verdicts["closed_ranges"] = "unchecked"
    return AdmissibilityReport(verdicts, details)


def _cn_stepper(a, dt):
    n = a.shape[0]
    lu = scipy.linalg.lu_factor(np.eye(n) + 0.5j * dt * a)
    rhs = np.eye(n) - 0.5j * dt * a

    def step(v):
        return scipy.linalg.lu_solve(lu, rhs @ v)

    return step


def stability_probe(ham, grid, spec_data=None, horizon=100.0, dt=0.05, n_probes=6,
                    sample_every=20, seed=0, seed_generalized=False):
    """March e^{-i t A} on dense data and track norms of projected probes.

    With seed_generalized the probes point along generalized (not proper)
    zero-eigenvectors, whose norm is expected to grow linearly; otherwise the
    probes are scatter-projected random data, whose max-over-probes norm
    series should stay flat.  Returns (times, max_norm_series).
    """
    a = dense_matrix_hamiltonian(ham, grid)
    if spec_data is None:
        spec_data = matrix_spectrum(ham, grid)
    rng = np.random.default_rng(seed)
    n2 = a.shape[0]
    probes = []
    if seed_generalized:
        basis1, d1, _ = generalized_eigenspace(a, 0.0, 1)
        basis2, d2, _ = generalized_eigenspace(a, 0.0, 2)
        # component of ker^2 orthogonal to ker
        proj = basis2 - basis1 @ (basis1.conj().T @ basis2)
        for j in range(proj.shape[1]):
            col = proj[:, j]
            nrm = np.linalg.norm(col)
            if nrm > 1e-6:
                probes.append(col / nrm)
        if not probes:
            raise ValueError("no generalized direction to seed")
    else:
        for _ in range(n_probes):
            v = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
            v = spec_data.scatter_project(v)
            probes.append(v / np.linalg.norm(v))
    step = _cn_stepper(a, dt)
    nsteps = int(round(horizon / dt))
    times, series = [0.0], [max(np.linalg.norm(p) for p in probes)]
    cur = [p.copy() for p in probes]
    for i in range(1, nsteps + 1):
        cur = [step(p) for p in cur]
        if i % sample_every == 0 or i == nsteps:
            times.append(i * dt)
            series.append(max(np.linalg.norm(p) for p in cur))
    return np.asarray(times), np.asarray(series)
