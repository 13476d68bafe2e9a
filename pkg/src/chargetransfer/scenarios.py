"""Scenario configs, experiment orchestration and report emission.

A scenario is one JSON document: grid, wells, datum recipe, run window and a
list of estimator requests.  Unknown keys anywhere in the document are hard
errors, so a typo cannot silently weaken a verification run.  Reports are a
JSON summary, a fixed-column CSV of estimator rows and optional SVG log-log
plots with one fitted-line overlay per decay series.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .grids import (
    Grid, ScalarField, WeightProfile, chirped_packet, concentrated_packet,
    gaussian_packet, pair_norms, random_band_limited,
)
from .potentials import (
    MatrixPotentialSpec, MovingPotential, PotentialSpec, ScenarioValidationError,
)
from .evolution import (
    GuardTripped, HamiltonianSpec, SourceTerm, StepperConfig, oracle_propagate,
    propagate, propagate_with_source,
)
from .spectral import admissibility_report, bound_states, matrix_spectrum, stability_probe
from .channels import WaveOperatorConfig, ac_residual, channel_basis_series
from .estimates import (
    AdmissiblePair, decay_fit, inhomogeneous_ratio, kato_jensen_probe,
    local_decay_norm, local_decay_study, strichartz_study, weighted_norm_series,
)


class ScenarioConfigError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


_SCHEMA = {
    "name": None,
    "kind": None,
    "seed": None,
    "grid": {"dim": None, "n": None, "box": None},
    "wells": [{
        "family": None, "amplitude": None, "width": None, "center": None,
        "velocity": None, "offset": None,
    }],
    "matrix_wells": [{
        "u_family": None, "u_amplitude": None, "w_family": None, "w_amplitude": None,
        "width": None, "alpha": None, "gamma": None, "velocity": None, "offset": None,
    }],
    "datum": {
        "type": None, "center": None, "width": None, "velocity": None, "focus": None,
        "space_core": None, "space_edge": None, "band": None, "band_lo": None,
        "band_hi": None, "iterations": None, "envelope_width": None, "count": None,
        "scatter_project": None,
    },
    "source": {"width": None, "center": None, "pulse_time": None, "pulse_width": None,
               "amplitude": None},
    "evolution": {"dt": None, "t_end": None, "snapshot_every": None,
                  "boundary_guard": None},
    "wave_operator": {"horizon": None, "dt": None, "tail_tolerance": None},
    "channels": None,
    "estimators": [{
        "name": None, "window": None, "p": None, "q": None, "n": None, "sigma": None,
        "center": None, "t_list": None, "times": None, "probes": None,
        "oracle_dt": None, "k_max": None, "horizon": None, "sample_dt": None,
    }],
}


def _check_keys(obj, schema, path):
    if isinstance(schema, dict):
        if not isinstance(obj, dict):
            raise ScenarioConfigError(f"expected a mapping at {path or 'top level'}")
        for key, val in obj.items():
            if key not in schema:
                raise ScenarioConfigError(f"unknown key '{path + key}'")
            if schema[key] is not None:
                _check_keys(val, schema[key], path + key + ".")
    elif isinstance(schema, list):
        if not isinstance(obj, list):
            raise ScenarioConfigError(f"expected a list at {path}")
        for i, item in enumerate(obj):
            _check_keys(item, schema[0], f"{path}{i}.")


@dataclass
class Scenario:
    raw: dict

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw):
        _check_keys(raw, _SCHEMA, "")
        for required in ("name", "grid"):
            if required not in raw:
                raise ScenarioConfigError(f"missing key '{required}'")
        return cls(raw)

    @property
    def name(self):
        return self.raw["name"]

    @property
    def kind(self):
        return self.raw.get("kind", "scalar")

    @property
    def seed(self):
        return int(self.raw.get("seed", 0))

    def grid(self):
        g = self.raw["grid"]
        return Grid(int(g.get("dim", 3)), int(g["n"]), float(g["box"]))

    def hamiltonian(self, grid):
        if self.kind == "matrix":
            movers = []
            for w in self.raw.get("matrix_wells", []):
                u = PotentialSpec(w.get("u_family", "sech2"), float(w["u_amplitude"]),
                                  float(w["width"]), (0.0,) * grid.dim)
                ww = PotentialSpec(w.get("w_family", "sech2"), float(w["w_amplitude"]),
                                   float(w["width"]), (0.0,) * grid.dim)
                movers.append(MatrixPotentialSpec(
                    u, ww, float(w.get("alpha", 1.0)),
                    velocity=tuple(w.get("velocity", (0.0,) * grid.dim)),
                    offset=tuple(w.get("offset", (0.0,) * grid.dim)),
                    gamma=float(w.get("gamma", 0.0))))
            return HamiltonianSpec("matrix", tuple(movers))
        movers = []
        for w in self.raw.get("wells", []):
            spec = PotentialSpec(w.get("family", "gaussian"), float(w["amplitude"]),
                                 float(w["width"]),
                                 tuple(w.get("center", (0.0,) * grid.dim)))
            movers.append(MovingPotential(spec,
                                          tuple(w.get("velocity", (0.0,) * grid.dim)),
                                          tuple(w.get("offset", (0.0,) * grid.dim))))
        return HamiltonianSpec("scalar", tuple(movers))

    def datum(self, grid, rng):
        d = dict(self.raw.get("datum", {"type": "gaussian", "width": 2.0}))
        kind = d.get("type", "gaussian")
        center = d.get("center", 0.0)
        if kind == "gaussian":
            return gaussian_packet(grid, center, float(d.get("width", 2.0)),
                                   d.get("velocity"))
        if kind == "chirped":
            return chirped_packet(grid, center, float(d.get("width", 2.0)),
                                  d.get("focus"), d.get("velocity"))
        if kind == "concentrated":
            return concentrated_packet(
                grid, width=float(d.get("width", 3.4)), focus=float(d.get("focus", 14.0)),
                space_core=float(d.get("space_core", 16.0)),
                space_edge=float(d.get("space_edge", 22.0)),
                band_lo=float(d.get("band_lo", 1.0)), band_hi=float(d.get("band_hi", 1.1)),
                iterations=int(d.get("iterations", 300)), center=center)
        if kind == "random":
            return random_band_limited(grid, rng, band=float(d.get("band", 0.8)),
                                       envelope_width=d.get("envelope_width"),
                                       center=center)
        raise ScenarioConfigError(f"unknown datum type '{kind}'")

    def source(self, grid):
        s = self.raw.get("source")
        if s is None:
            return None
        width = float(s.get("width", 2.0))
        center = s.get("center", 0.0)
        amp = float(s.get("amplitude", 1.0))
        t_p = float(s.get("pulse_time", 1.0))
        w_p = float(s.get("pulse_width", 0.7))
        prof = gaussian_packet(grid, center, width).values * amp
        return SourceTerm(lambda g, vals=prof: vals,
                          lambda t: np.exp(-((t - t_p) / w_p) ** 2))

    def stepper(self):
        e = self.raw.get("evolution", {})
        return StepperConfig(dt=float(e.get("dt", 0.1)),
                             snapshot_every=int(e.get("snapshot_every", 10)),
                             boundary_mass_guard=float(e.get("boundary_guard", 1.0)))

    def t_end(self):
        return float(self.raw.get("evolution", {}).get("t_end", 10.0))

    def wave_operator(self):
        w = self.raw.get("wave_operator", {})
        return WaveOperatorConfig(horizon=float(w.get("horizon", 40.0)),
                                  dt=float(w.get("dt", 0.1)),
                                  tail_tolerance=float(w.get("tail_tolerance", 1e-4)))


@dataclass
class EstimatorRow:
    estimator: str
    params: dict
    value: float
    diagnostics: dict
    series: tuple = None  # (times, values, fitted callable or None)


@dataclass
class RunReport:
    scenario: dict
    rows: list
    diagnostics: dict
    passed: bool = True
    guard_message: str = ""

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "rows": [{
                "estimator": r.estimator, "params": r.params, "value": r.value,
                "diagnostics": r.diagnostics,
            } for r in self.rows],
            "diagnostics": self.diagnostics,
            "passed": self.passed,
            "guard_message": self.guard_message,
        }


def _fmt(x):
    return f"{float(x):.17g}"


def run_scenario(config, seed=None):
    """Execute one scenario end to end and return its report.

    config may be a path or a parsed dict; seed overrides the config seed.
    Estimators run in dependency order: bound-state solves and channel bases
    first, then the main trace, then rate estimators over it.
    """
    sc = config if isinstance(config, Scenario) else (
        Scenario.load(config) if isinstance(config, (str, os.PathLike)) else Scenario.from_dict(config))
    rng = np.random.default_rng(sc.seed if seed is None else int(seed))
    grid = sc.grid()
    ham = sc.hamiltonian(grid)
    cfg = sc.stepper()
    requests = sc.raw.get("estimators", [])
    rows = []
    diagnostics = {"kind": sc.kind, "grid": [grid.dim, grid.n, grid.box]}

    if sc.kind == "matrix":
        return _run_matrix(sc, grid, ham, requests, rows, diagnostics)

    needs_channels = sc.raw.get("channels", False) or any(
        r["name"] in ("kato-jensen", "local-decay", "ac-residual", "strichartz")
        for r in requests) or sc.raw.get("datum", {}).get("scatter_project", False)
    basis = None
    bound = None
    if ham.potentials and (needs_channels or any(r["name"] == "bound-states" for r in requests)):
        try:
            bound = bound_states(ham_static_single(ham, grid), grid,
                                 k_max=int(_first(requests, "bound-states", "k_max", 4)))
        except Exception as exc:
            raise SolverError(str(exc)) from exc
        diagnostics["bound_energies"] = [float(e) for e in bound.energies]
    if needs_channels and bound is not None and bound.states:
        wcfg = sc.wave_operator()
        basis = channel_basis_series(ham, tuple(bound for _ in ham.potentials), [0.0], wcfg)[0]

    datum = sc.datum(grid, rng)
    if sc.raw.get("datum", {}).get("scatter_project") and basis is not None:
        datum = basis.scatter_project(datum)
        datum = datum * (1.0 / datum.norm())
    source = sc.source(grid)

    trace = propagate_with_source(ham, datum, 0.0, sc.t_end(), source, cfg) \
        if source is not None else propagate(ham, datum, 0.0, sc.t_end(), cfg)
    diagnostics["boundary_mass_max"] = float(np.max(trace.boundary_mass)) if len(trace.boundary_mass) else 0.0
    diagnostics["norm_drift"] = float(abs(trace.l2[-1] - trace.l2[0])) if source is None else None
    diagnostics["guard_valid"] = bool(trace.valid)

    for req in requests:
        name = req["name"]
        params = {k: v for k, v in req.items() if k != "name"}
        if name == "bound-states":
            val = float(bound.energies[0]) if bound is not None and len(bound.energies) else 0.0
            rows.append(EstimatorRow(name, params, val, {
                "energies": [float(e) for e in (bound.energies if bound is not None else [])],
                "residuals": [float(r) for r in (bound.residuals if bound is not None else [])],
            }))
        elif name == "decay-fit":
            times = np.asarray(trace.times)
            vals = np.array([pair_norms(f) for f in trace.fields])
            window = tuple(req.get("window", (5.0, sc.t_end())))
            fit = decay_fit(times, vals, window)
            rows.append(EstimatorRow(name, params, fit.exponent,
                                     {"residual": fit.residual, "amplitude": fit.amplitude,
                                      "window": list(fit.window)},
                                     (fit.times, fit.values, fit)))
        elif name == "weighted-decay":
            weight = _weight(req, grid)
            times, vals = weighted_norm_series(trace, weight)
            window = tuple(req.get("window", (5.0, sc.t_end())))
            fit = decay_fit(times, vals, window)
            rows.append(EstimatorRow(name, params, fit.exponent,
                                     {"residual": fit.residual, "amplitude": fit.amplitude},
                                     (fit.times, fit.values, fit)))
        elif name == "strichartz":
            pair = AdmissiblePair(float(req.get("p", 2.0)), float(req.get("q", 6.0)),
                                  int(req.get("n", grid.dim)))
            if source is not None:
                half, full = inhomogeneous_ratio(ham, grid, source, pair, sc.t_end(),
                                                 cfg, basis=basis)
            elif basis is not None:
                half_a, full_a = strichartz_study(ham, grid, [datum], basis, pair,
                                                  sc.t_end(), cfg)
                half, full = float(half_a[0]), float(full_a[0])
            else:
                from .grids import lp_norm, mixed_norm
                times = np.asarray(trace.times)
                sp = np.array([lp_norm(f, pair.q) for f in trace.fields])
                den = trace.fields[0].norm()
                full = mixed_norm(times, sp, pair.p) / den
                keep = times <= 0.5 * sc.t_end()
                half = mixed_norm(times[keep], sp[keep], pair.p) / den
            rows.append(EstimatorRow(name, params, float(full),
                                     {"half_window": float(half),
                                      "growth": float(full / half - 1.0)}))
        elif name == "local-decay":
            weight = _weight(req, grid)
            full = local_decay_norm(trace, weight)
            half = local_decay_norm(trace, weight, (0.0, 0.5 * sc.t_end()))
            rows.append(EstimatorRow(name, params, float(full),
                                     {"half_window": float(half),
                                      "growth": float(full / half - 1.0)}))
        elif name == "kato-jensen":
            weight = _weight(req, grid)
            t_list = [float(t) for t in req.get("t_list", (2.0, 4.0, 7.0, 11.0, 16.0))]
            pcfg = StepperConfig(dt=cfg.dt, snapshot_every=10**9, boundary_mass_guard=1.0)
            ts, est, labels = kato_jensen_probe(ham, grid, basis, 0.0, t_list, weight,
                                                probes=int(req.get("probes", 6)),
                                                cfg=pcfg, seed=sc.seed)
            fit = decay_fit(ts, est)
            rows.append(EstimatorRow(name, params, fit.exponent,
                                     {"estimates": [float(v) for v in est],
                                      "method": labels[0], "residual": fit.residual},
                                     (ts, est, fit)))
        elif name == "ac-residual":
            times = [float(t) for t in req.get("times", (0.0, sc.t_end()))]
            vals = []
            for tt in times:
                idx = int(np.argmin(np.abs(np.asarray(trace.times) - tt)))
                vals.append(ac_residual(trace.fields[idx], ham,
                                        tuple(bound for _ in ham.potentials),
                                        float(trace.times[idx])))
            rows.append(EstimatorRow(name, params, float(vals[-1]),
                                     {"times": times, "series": [float(v) for v in vals]}))
        elif name == "oracle-compare":
            ref = oracle_propagate(ham, datum, 0.0, sc.t_end(),
                                   dt=float(req.get("oracle_dt", 1e-3)))
            err = (trace.final() - ref.final()).norm() / datum.norm()
            rows.append(EstimatorRow(name, params, float(err), {}))
        else:
            raise ScenarioConfigError(f"unknown estimator '{name}'")

    report = RunReport(sc.raw, rows, diagnostics, passed=bool(trace.valid),
                       guard_message=trace.guard_message)
    return report


def _run_matrix(sc, grid, ham, requests, rows, diagnostics):
    data = None
    for req in requests:
        name = req["name"]
        params = {k: v for k, v in req.items() if k != "name"}
        if name == "matrix-admissibility":
            rep = admissibility_report(ham, grid)
            rows.append(EstimatorRow(name, params, 1.0 if rep.ok() else 0.0,
                                     {"verdicts": rep.to_dict()}))
        elif name == "stability-probe":
            if data is None:
                data = matrix_spectrum(ham, grid)
            times, norms = stability_probe(ham, grid, data,
                                           horizon=float(req.get("horizon", 100.0)))
            fit = np.polyfit(times[1:], np.log(norms[1:]), 1)
            rows.append(EstimatorRow(name, params, float(fit[0]),
                                     {"max_norm": float(np.max(norms))},
                                     (times[1:], norms[1:], None)))
        else:
            raise ScenarioConfigError(f"estimator '{name}' not available for matrix runs")
    return RunReport(sc.raw, rows, diagnostics)


def _weight(req, grid):
    return WeightProfile(float(req.get("sigma", 2.0)),
                         tuple(req.get("center", (0.0,) * grid.dim)))


def _first(requests, name, key, default):
    for r in requests:
        if r["name"] == name and key in r:
            return r[key]
    return default


def ham_static_single(ham, grid):
    """Centered resting copy of the first well, for the shared eigensolve."""
    if not ham.potentials:
        raise SolverError("no wells to solve")
    spec = ham.potentials[0].spec
    centered = PotentialSpec(spec.family, spec.amplitude, spec.width, (0.0,) * grid.dim)
    return HamiltonianSpec("scalar", (MovingPotential(centered, (0.0,) * grid.dim,
                                                      (0.0,) * grid.dim),))


# ---------------------------------------------------------------------------
# report emission


def emit_report(report, out_dir, formats=("json", "csv")):
    """Write the report files and return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    name = report.scenario.get("name", "scenario")
    if "json" in formats:
        p = os.path.join(out_dir, f"{name}.json")
        with open(p, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(p)
    if "csv" in formats:
        p = os.path.join(out_dir, f"{name}.csv")
        with open(p, "w", newline="") as fh:
            fh.write("scenario,estimator,param_json,value,diag_json\r\n")
            for r in report.rows:
                pj = json.dumps(r.params, sort_keys=True)
                dj = json.dumps(r.diagnostics, sort_keys=True)
                fh.write(",".join([_csv_quote(name), _csv_quote(r.estimator),
                                   _csv_quote(pj), _fmt(r.value), _csv_quote(dj)]) + "\r\n")
        paths.append(p)
        for i, r in enumerate(report.rows):
            if r.series is not None:
                sp = os.path.join(out_dir, f"{name}_{r.estimator}_{i}.csv")
                with open(sp, "w", newline="") as fh:
                    fh.write("t,value\r\n")
                    for t, v in zip(r.series[0], r.series[1]):
                        fh.write(f"{_fmt(t)},{_fmt(v)}\r\n")
                paths.append(sp)
    if "svg" in formats:
        series_rows = [r for r in report.rows if r.series is not None]
        if series_rows:
            p = os.path.join(out_dir, f"{name}.svg")
            with open(p, "w") as fh:
                fh.write(render_svg(series_rows))
            paths.append(p)
    return paths


def _csv_quote(s):
    if any(c in s for c in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def parse_csv(path):
    """Bundled strict parser for the emitted CSV dialect."""
    rows = []
    with open(path, newline="") as fh:
        import csv as _csv
        reader = _csv.reader(fh)
        header = next(reader)
        for rec in reader:
            rows.append(dict(zip(header, rec)))
    return rows


def render_svg(series_rows, width=640, height=420):
    """Log-log plot of each stored series with one fitted line overlay per
    series that carries a fit (class "fit-line")."""
    pad = 50.0
    pts_all = []
    for r in series_rows:
        t = np.asarray(r.series[0], dtype=float)
        v = np.asarray(r.series[1], dtype=float)
        keep = (t > 0) & (v > 0)
        pts_all.append((np.log10(t[keep]), np.log10(v[keep])))
    xs = np.concatenate([p[0] for p in pts_all])
    ys = np.concatenate([p[1] for p in pts_all])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1.0
    y1 = y1 if y1 > y0 else y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colors = ["#1b6ca8", "#a83232", "#2e8b57", "#8b5a2e", "#5a2e8b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    out.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>')
    out.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
    for i, (r, (lx, ly)) in enumerate(zip(series_rows, pts_all)):
        col = colors[i % len(colors)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(lx, ly))
        out.append(f'<polyline class="series" fill="none" stroke="{col}" points="{pts}"/>')
        fit = r.series[2]
        if fit is not None:
            fy0 = np.log10(fit.evaluate(10.0 ** lx[0]))
            fy1 = np.log10(fit.evaluate(10.0 ** lx[-1]))
            out.append(
                f'<line class="fit-line" x1="{sx(lx[0]):.2f}" y1="{sy(fy0):.2f}" '
                f'x2="{sx(lx[-1]):.2f}" y2="{sy(fy1):.2f}" stroke="{col}" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{width - pad - 150}" y="{pad + 16 * (i + 1)}" fill="{col}" '
                   f'font-size="12">{r.estimator}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
