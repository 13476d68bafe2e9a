"""Dispersive rate diagnostics: decay fits, weighted norms, space-time ratios.

All rates are measured on truncated windows of a periodic box, so every fit
carries its window and the guards of the underlying run; nothing here claims
an asymptotic constant, only stability of finite-window proxies.
"""

from dataclasses import dataclass, field

import numpy as np

from .grids import (
    ScalarField, WeightProfile, lp_norm, mixed_norm, pair_norms, weighted_multiply,
)
from .evolution import StepperConfig, propagate, propagate_stack, propagate_with_source


@dataclass(frozen=True)
class AdmissiblePair:
    """Space-time exponent pair (p, q) for the dispersive trade-off in
    dimension n: 2/p = n/2 - n/q, with p >= 2."""

    p: float
    q: float
    n: int = 3

    def __post_init__(self):
        if self.p < 2.0 - 1e-12:
            raise ValueError("time exponent below 2 is not admissible")
        if abs(self.defect()) > 1e-9:
            raise ValueError(f"pair ({self.p}, {self.q}) misses the scaling line")

    def defect(self):
        return 2.0 / self.p - (self.n / 2.0 - self.n / self.q)

    def is_endpoint(self):
        return abs(self.p - 2.0) < 1e-12


def endpoint_pair(n=3):
    if n < 3:
        raise ValueError("no endpoint pair below dimension 3")
    return AdmissiblePair(2.0, 2.0 * n / (n - 2.0), n)


def admissible_pairs(n=3, count=7):
    """Sample the admissible line from (inf, 2) down to the endpoint."""
    out = []
    p_end = 2.0
    for frac in np.linspace(0.0, 1.0, count):
        if frac == 0.0:
            q = 2.0
            p = np.inf
        else:
            p = p_end / frac
            q = n / (n / 2.0 - 2.0 / p)
        out.append(AdmissiblePair(p, q, n))
    return out


@dataclass
class DecayFit:
    exponent: float
    amplitude: float
    window: tuple
    residual: float
    times: np.ndarray
    values: np.ndarray

    def evaluate(self, t):
        return self.amplitude * np.asarray(t, dtype=float) ** self.exponent


def decay_fit(times, values, window=None):
    """Least-squares slope of log(value) against log(t) inside the window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        keep = (times >= window[0]) & (times <= window[1])
        times, values = times[keep], values[keep]
    else:
        window = (float(times.min()), float(times.max()))
    if times.size < 3:
        raise ValueError("need at least three samples inside the fit window")
    if np.any(times <= 0) or np.any(values <= 0):
        raise ValueError("log-log fit needs positive times and values")
    lt, lv = np.log(times), np.log(values)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lt + intercept)) ** 2)))
    return DecayFit(float(slope), float(np.exp(intercept)), tuple(window), resid, times, values)


def pair_norm_series(trace):
    """L2 + Linf split upper bound at every stored snapshot."""
    vals = []
    for f in trace.fields:
        vals.append(pair_norms(f))
    return np.asarray(trace.times), np.asarray(vals)


def weighted_norm_series(trace, weight):
    """||w(t) psi(t)||_2 at every stored snapshot."""
    vals = [weighted_multiply(f, weight, t).norm() for t, f in zip(trace.times, trace.fields)]
    return np.asarray(trace.times), np.asarray(vals)


def kato_jensen_probe(ham, grid, basis, t0, t_list, weight, probes=10, cfg=None, seed=0):
    """Norm estimates of the weighted projected propagator at each time.

    The operator is weight(t) . flow(t, t0) . channel complement . weight(t0).
    Scalar flows give the adjoint by reverse propagation, so the estimate is
    `probes` power iterations on the normal composition and converges to the
    operator norm from below.  Matrix flows have no reverse adjoint here; the
    estimate is the best Rayleigh quotient over `probes` random inputs and is
    labeled as a lower bound in the diagnostics.
    """
    cfg = cfg or StepperConfig(dt=0.1, snapshot_every=10**9, boundary_mass_guard=1.0)
    rng = np.random.default_rng(seed)
    estimates = []
    labels = []
    carry = None  # converged iterate warm-starts the next time point
    for t in t_list:
        if ham.kind == "matrix":
            best = 0.0
            for _ in range(probes):
                g = _random_field(grid, rng)
                f = _apply_weighted_matrix(ham, grid, basis, t0, t, weight, g, cfg)
                best = max(best, f.norm() / g.norm())
            estimates.append(best)
            labels.append("rayleigh-lower-bound")
            continue
        g = carry if carry is not None else _random_field(grid, rng)
        g = g * (1.0 / g.norm())
        value = 0.0
        for _ in range(probes):
            h = _apply_normal(ham, basis, t0, t, weight, g, cfg)
            value = h.norm()
            if value <= 0:
                break
            g = h * (1.0 / value)
        carry = g
        estimates.append(float(np.sqrt(value)))
        labels.append("power-iteration")
    return np.asarray(t_list, dtype=float), np.asarray(estimates), labels


def _random_field(grid, rng):
    vals = rng.standard_normal(grid.shape()) + 1j * rng.standard_normal(grid.shape())
    return ScalarField(grid, vals)


def _apply_half(ham, basis, t0, t, weight, f, cfg):
    """weight(t) . flow(t, t0) . complement . weight(t0) applied to f."""
    g = weighted_multiply(f, weight, t0)
    g = basis.scatter_project(g)
    if t != t0:
        g = propagate(ham, g, t0, t, cfg).final()
    return weighted_multiply(g, weight, t)


def _apply_normal(ham, basis, t0, t, weight, f, cfg):
    """The composition with its adjoint: reverse propagation realizes the
    adjoint of the unitary flow, the other factors are self-adjoint."""
    g = _apply_half(ham, basis, t0, t, weight, f, cfg)
    g = weighted_multiply(g, weight, t)
    if t != t0:
        g = propagate(ham, g, t, t0, cfg).final()
    g = basis.scatter_project(g)
    return weighted_multiply(g, weight, t0)


def _apply_weighted_matrix(ham, grid, basis, t0, t, weight, f, cfg):
    from .evolution import matrix_propagate
    from .grids import SpinorField
    w0 = weight.sample(grid, t0)
    g = SpinorField(grid, f.values * w0, np.zeros_like(f.values))
    if basis is not None:
        g = basis.scatter_project(g)
    if t != t0:
        g = matrix_propagate(ham, g, t0, t, cfg).final()
    wt = weight.sample(grid, t)
    return SpinorField(grid, g.plus * wt, g.minus * wt)


def local_decay_norm(trace, weight, window=None):
    """Square-integrated weighted norm over the window, from snapshots."""
    times, vals = weighted_norm_series(trace, weight)
    if window is not None:
        keep = (times >= window[0]) & (times <= window[1])
        times, vals = times[keep], vals[keep]
    return float(np.sqrt(np.trapezoid(vals**2, times)))


def local_decay_study(ham, grid, data, basis, weight, t_end, cfg=None):
    """Windowed weighted square-norms for a batch of scattering-projected
    data, at the full window and its half, in one batched run."""
    cfg = cfg or StepperConfig(dt=0.1, snapshot_every=10, boundary_mass_guard=1.0)
    stack = []
    for f in data:
        g = basis.scatter_project(f)
        stack.append(g.values / g.norm())
    stack = np.stack(stack)
    sample_dt = cfg.dt * cfg.snapshot_every
    grid_times = np.arange(basis.time, t_end + 0.5 * sample_dt, sample_dt)
    wnorm = np.zeros((len(data), grid_times.size))

    def measure(i_t, tt, snap):
        w = weight.sample(grid, tt)
        wnorm[:, i_t] = np.sqrt(
            np.sum(np.abs(snap * w) ** 2, axis=tuple(range(1, snap.ndim))) * grid.cell_volume
        )

    measure(0, basis.time, stack)
    cur, t = stack, basis.time
    for i_t, tt in enumerate(grid_times[1:], start=1):
        cur, _ = propagate_stack(ham, grid, cur, t, float(tt), cfg)
        t = float(tt)
        measure(i_t, t, cur)
    times = grid_times
    full = np.sqrt(np.trapezoid(wnorm**2, times, axis=1))
    half_mask = times <= basis.time + 0.5 * (t_end - basis.time)
    half = np.sqrt(np.trapezoid(wnorm[:, half_mask] ** 2, times[half_mask], axis=1))
    return times, wnorm, half, full


def strichartz_ratio(trace, pair, window=None, datum_norm=None):
    """Mixed-norm of a run divided by the datum mass, for one exponent pair."""
    times = np.asarray(trace.times)
    spatial = np.array([lp_norm(f, pair.q) for f in trace.fields])
    if window is not None:
        keep = (times >= window[0]) & (times <= window[1])
        times, spatial = times[keep], spatial[keep]
    num = mixed_norm(times, spatial, pair.p)
    den = datum_norm if datum_norm is not None else trace.fields[0].norm()
    if den <= 0:
        raise ValueError("undefined ratio: zero initial datum")
    return num / den


def strichartz_study(ham, grid, data, basis, pair, t_end, cfg=None):
    """Homogeneous mixed-norm ratios for several scattering-projected data
    over the window and its half."""
    cfg = cfg or StepperConfig(dt=0.1, snapshot_every=10, boundary_mass_guard=1.0)
    full, half = [], []
    for f in data:
        g = basis.scatter_project(f)
        g = g * (1.0 / g.norm())
        trace = propagate(ham, g, basis.time, t_end, cfg)
        times = np.asarray(trace.times)
        spatial = np.array([lp_norm(x, pair.q) for x in trace.fields])
        full.append(mixed_norm(times, spatial, pair.p))
        keep = times <= basis.time + 0.5 * (t_end - basis.time)
        half.append(mixed_norm(times[keep], spatial[keep], pair.p))
    return np.asarray(half), np.asarray(full)


def dual_exponent(p):
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def source_mixed_norm(source, grid, times, pair):
    """||F||_{L^p'_t L^q'_x} of a source term sampled on the given times."""
    qd = dual_exponent(pair.q)
    pd = dual_exponent(pair.p)
    spatial = []
    for t in times:
        vals = source.sample(grid, float(t))
        spatial.append(lp_norm(ScalarField(grid, vals), qd))
    return mixed_norm(np.asarray(times, dtype=float), np.asarray(spatial), pd)


def inhomogeneous_ratio(ham, grid, source, pair, t_end, cfg=None, basis=None,
                        datum=None, dual_pair=None):
    """Mixed norm of the driven run over datum mass plus the dual mixed norm
    of the pulse, at the full window and its half.  The source profile is
    projected off the channels first when a basis is supplied."""
    cfg = cfg or StepperConfig(dt=0.1, snapshot_every=10, boundary_mass_guard=1.0)
    dual_pair = dual_pair or pair
    src = source
    if basis is not None:
        prof = basis.scatter_project(ScalarField(grid, np.asarray(source.profile(grid), dtype=complex)))
        from .evolution import SourceTerm
        src = SourceTerm(lambda g, vals=prof.values: vals, source.envelope)
    f0 = datum if datum is not None else ScalarField(grid, np.zeros(grid.shape(), dtype=complex))
    trace = propagate_with_source(ham, f0, 0.0, t_end, src, cfg)
    times = np.asarray(trace.times)
    spatial = np.array([lp_norm(f, pair.q) for f in trace.fields])
    num_full = mixed_norm(times, spatial, pair.p)
    keep = times <= 0.5 * t_end
    num_half = mixed_norm(times[keep], spatial[keep], pair.p)
    dense_times = np.arange(0.0, t_end + 0.5 * cfg.dt, cfg.dt)
    den = f0.norm() + source_mixed_norm(src, grid, dense_times, dual_pair)
    if den <= 0:
        raise ValueError("undefined ratio: zero datum and zero source")
    return num_half / den, num_full / den
