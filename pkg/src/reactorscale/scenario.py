"""
Scenario documents: parsing, validation and per-model runners.

A scenario is a JSON object::

    {"schema_version": 1, "model": "packing", "seed": 7,
     "output": {"dir": "out", "format": "csv"},
     "packing": {...model block...}}

Exactly one model block, named after ``model``, must be present. All
quantities are SI.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from reactorscale import io
from reactorscale.plots import emit_plot_series

SCHEMA_VERSION = 1
MODELS = ("reactor", "sorption", "mixing", "packing", "scale")
FORMATS = ("csv", "json")


class ScenarioError(ValueError):
    """The scenario document is malformed or inconsistent."""


class StrictRangeError(RuntimeError):
    """A correlation was evaluated outside its fitted range in strict mode."""


@dataclass(frozen=True)
class Scenario:
    schema_version: int
    model: str
    block: dict
    output: dict = field(default_factory=dict)
    seed: int = None
    verify: bool = False

    def to_dict(self):
        d = {"schema_version": self.schema_version, "model": self.model, self.model: self.block}
        if self.output:
            d["output"] = self.output
        if self.seed is not None:
            d["seed"] = self.seed
        if self.verify:
            d["verify"] = True
        return d


def parse_scenario(doc):
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    model = doc.get("model")
    if model not in MODELS:
        raise ScenarioError(f"model must be one of {MODELS}, got {model!r}")
    present = [m for m in MODELS if m in doc]
    if present != [model]:
        raise ScenarioError(f"exactly one model block '{model}' required, found {present}")
    block = doc[model]
    if not isinstance(block, dict):
        raise ScenarioError(f"'{model}' block must be an object")
    known = {"schema_version", "model", "output", "seed", "verify", *MODELS}
    extra = set(doc) - known
    if extra:
        raise ScenarioError(f"unknown top-level keys {sorted(extra)}")
    output = doc.get("output", {})
    if not isinstance(output, dict):
        raise ScenarioError("'output' must be an object")
    fmt = output.get("format", "csv")
    if fmt not in FORMATS:
        raise ScenarioError(f"output format must be one of {FORMATS}")
    seed = doc.get("seed")
    if seed is not None:
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
            raise ScenarioError("seed must be a 64-bit non-negative integer")
    if model == "packing" and seed is None:
        raise ScenarioError("packing scenarios require a seed")
    return Scenario(version, model, block, output, seed, bool(doc.get("verify", False)))


def load_scenario(path):
    if not os.path.isfile(path):
        raise ScenarioError(f"scenario not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


# -- output helpers -----------------------------------------------------------------


class _Writer:
    def __init__(self, out_dir, fmt):
        self.out_dir = out_dir
        self.fmt = fmt
        self.files = []

    def table(self, name, header, rows, units=None):
        if self.fmt == "json":
            path = os.path.join(self.out_dir, name + ".json")
            io.write_json(path, {"columns": list(header), "units": list(units) if units else None,
                                 "rows": [list(r) for r in rows]})
        else:
            path = os.path.join(self.out_dir, name + ".csv")
            io.write_csv(path, header, rows, units)
        self.files.append(path)
        return path

    def report(self, name, obj):
        path = os.path.join(self.out_dir, name + ".json")
        io.write_json(path, obj)
        self.files.append(path)
        return path


def _require(block, *keys):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ScenarioError(f"missing keys {missing}")


# -- reactor ------------------------------------------------------------------------


def _reactor_config(block):
    from reactorscale.kinetics_reactor import ArrheniusKinetics, ReactorConfig

    _require(block, "config", "kinetics")
    kin = ArrheniusKinetics(**{k: float(v) for k, v in block["kinetics"].items()})
    cfg = dict(block["config"])
    if "dirichlet_right" in cfg and cfg["dirichlet_right"] is not None:
        cfg["dirichlet_right"] = tuple(cfg["dirichlet_right"])
    try:
        config = ReactorConfig(kinetics=kin, **cfg)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc
    config.validate()
    return config


def run_reactor(sc, writer, strict=False):
    from reactorscale import kinetics_reactor as kr

    b = sc.block
    config = _reactor_config(b)
    us = b.get("uniform_state", {"C_total": config.C_X0})
    state = kr.equilibrium_state(config, float(us["C_total"]), us.get("T"))
    report = {"uniform_state": list(state)}
    wk = b.get("wavenumbers", {})
    ks = np.geomspace(float(wk.get("min", 2 * math.pi / config.length)),
                      float(wk.get("max", 2e3 * math.pi / config.length)), int(wk.get("count", 200)))
    stab = kr.linear_stability(config, state, ks)
    writer.table("stability", ("k", "growth_real", "growth_imag"),
                 [(s.wavenumber, s.growth_rate_real[0], s.growth_rate_imag[0]) for s in stab],
                 ("1/m", "1/s", "1/s"))
    report["max_growth_rate"] = max(s.max_real for s in stab)
    L_min = kr.min_reactor_length(config, state)
    report["min_reactor_length"] = L_min
    if "steady_state" in b:
        ss = b["steady_state"]
        cx, cy = kr.steady_state_isothermal(config, float(ss.get("T_fixed", config.inlet_temperature)),
                                            n_nodes=int(ss.get("n_nodes", 201)))
        writer.table("steady", ("z", "C_X", "C_Y"), np.column_stack([cx.grid, cx.values, cy.values]),
                     ("m", "mol/m^3", "mol/m^3"))
    if "transient" in b:
        tr = b["transient"]
        n = int(tr.get("n_nodes", 128))
        z = kr.reactor_grid(config, n)
        amp = float(tr.get("perturbation", 1e-3))
        mode = int(tr.get("mode", 1))
        shape = np.cos(2 * math.pi * mode * z / config.length)
        init = (np.full(n, state[0]), np.full(n, state[1]), state[2] * (1.0 + amp * shape))
        res = kr.simulate_transient(config, init, dt=float(tr["dt"]), t_end=float(tr["t_end"]),
                                    save_every=int(tr.get("save_every", 1)), on_bound="stop")
        writer.table("transient", ("t", "z", "C_X", "C_Y", "T"), res.rows(), ("s", "m", "mol/m^3", "mol/m^3", "K"))
        report["transient_status"] = res.status
        try:
            report["structure"] = kr.classify_structures(res, probe=tr.get("probe", "T"))
        except ValueError as exc:
            report["structure"] = f"unclassified: {exc}"
    writer.report("report", report)
    return report


# -- sorption -------------------------------------------------------------------------

SORPTION_KEYS = ("D_BB", "D_BE", "D_EB", "D_EE", "D_AA", "D_AE", "D_EA", "alpha",
                 "C_A_inf", "C_B_inf", "henry", "p_A", "layer_depth")


def _sorption_params(block):
    from reactorscale.chemisorption import default_params

    given = dict(block.get("params", {}))
    unknown = set(given) - set(SORPTION_KEYS)
    if unknown:
        raise ScenarioError(f"unknown sorption parameters {sorted(unknown)}")
    return default_params().replace(**{k: float(v) for k, v in given.items()}).validate()


def correlation_checks(params, t_p=None):
    """Correlation predictions for a run, with extrapolation flags."""
    from reactorscale.chemisorption import correlation_hp, correlation_product_decay, correlation_tp

    out = {}
    tp = correlation_tp(params.C_B_inf, params.henry, params.p_A, params.D_AA, params.D_BB)
    out["t_p"] = {"value": float(tp), "extrapolated": tp.extrapolated}
    hp = correlation_hp(params.D_EE, params.D_BB, params.D_AA)
    out["h_p"] = {"value": float(hp), "extrapolated": hp.extrapolated}
    if t_p is not None:
        dec = correlation_product_decay(params.D_EE, params.D_AA, t_p, t_p)
        out["product_decay_at_t_p"] = {"value": float(dec), "extrapolated": dec.extrapolated}
    return out


def run_sorption(sc, writer, strict=False):
    from reactorscale.chemisorption import compute_tstar, derive_laplace_coefficients, solve_moving_plane

    b = sc.block
    params = _sorption_params(b)
    corr = correlation_checks(params)
    flagged = [k for k, v in corr.items() if v["extrapolated"]]
    if strict and flagged:
        raise StrictRangeError(f"correlations outside fitted range: {flagged}")
    coeffs = derive_laplace_coefficients(params)
    t_star = compute_tstar(params, coeffs)
    t_end = float(b["t_end"]) if "t_end" in b else float(b.get("t_end_over_tstar", 20.0)) * t_star
    sol = solve_moving_plane(params, coeffs, t_end=t_end, n_zone1=int(b.get("n_zone1", 400)),
                             n_zone2=int(b.get("n_zone2", 1600)))
    writer.table("summary", ("t", "y", "V_f", "C_AS", "C_BS", "C_Efr"), sol.summary_rows(),
                 ("s", "m", "m/s", "mol/m^3", "mol/m^3", "mol/m^3"))
    if writer.fmt == "csv":
        for kind in ("velocity", "surface_A", "product"):
            writer.files += emit_plot_series(sol, kind, os.path.join(writer.out_dir, f"series_{kind}.csv"))
    r1, r2 = sol.stoichiometry_residual
    ea, ee = sol.accounting_error
    report = {
        "t_star": t_star, "t_p": sol.t_p, "h_p": sol.h_p, "C_ES_star": sol.C_ES_star,
        "max_velocity": float(np.max(sol.velocity)),
        "stoichiometry_residual": float(np.max(r2)), "accounting_error": float(max(ea.max(), ee.max())),
        "correlations": correlation_checks(params, sol.t_p), "extrapolated": flagged,
    }
    writer.report("report", report)
    return report


# -- mixing -----------------------------------------------------------------------


def _rtd(spec):
    if spec is None or isinstance(spec, str):
        return spec or "exponential"
    return [tuple(map(float, p)) for p in spec]


def run_mixing(sc, writer, strict=False):
    from reactorscale import micromixing as mm

    b = sc.block
    report = {}
    if "volume" in b:
        _require(b, "volume", "t_bar")
        model = mm.MixingModel(float(b["volume"]), float(b["t_bar"]), float(b.get("gamma", 0.0)),
                               _rtd(b.get("rtd")), float(b.get("crucial_age", math.inf)))
        lam = b.get("lambda", {"max": 5.0 * model.t_bar, "count": 51})
        lams = np.asarray(lam, dtype=float) if isinstance(lam, list) else np.linspace(0.0, float(lam["max"]), int(lam["count"]))
        d_lam = float(b.get("d_lambda", model.t_bar / 100.0))
        method = b.get("method", "quadrature")
        rows = [(l, mm.segregation_transfer_rate(model, l, d_lam, method=method)) for l in lams]
        writer.table("transfer", ("lambda", "dG"), rows, ("s", "m^3"))
        report["transfer_points"] = len(rows)
    if "cells" in b:
        cells = [mm.Cell(c["kind"], float(c["t_bar"]), _rtd(c.get("rtd")) if c.get("rtd") else None,
                         float(c.get("crucial_age", math.inf))) for c in b["cells"]]
        dt = float(b.get("dt", min(c.t_bar for c in cells) / 50.0))
        inlet = b.get("inlet", "impulse")
        if inlet == "impulse":
            sig = np.zeros(1)
            sig[0] = 1.0 / dt
        else:
            sig = np.asarray(inlet, dtype=float)
        resp = mm.cell_sequence_response(cells, sig, dt)
        writer.table("response", ("t", "response"), resp.rows(), ("s", "1/s"))
        report["response_integral"] = resp.integral()
        report["mean_residence_time"] = resp.mean_time()
        report["sum_t_bar"] = sum(c.t_bar for c in cells)
    if not report:
        raise ScenarioError("mixing block needs 'volume'/'t_bar' or 'cells'")
    writer.report("report", report)
    return report


# -- packing ----------------------------------------------------------------------


def run_packing(sc, writer, strict=False):
    from reactorscale import packing as pk

    b = sc.block
    _require(b, "geometry")
    try:
        g = pk.PackingGeometry(**b["geometry"])
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc
    lay_b = b.get("layout", {"equally_spaced": 1})
    if "sources" in lay_b:
        layout = pk.IrrigationLayout(tuple(tuple(s) for s in lay_b["sources"]), lay_b.get("n"))
    else:
        layout = pk.IrrigationLayout.equally_spaced(g, int(lay_b["equally_spaced"]), float(lay_b.get("total_flow", 1.0)))
    walkers = int(b.get("walkers", 1_000_000))
    f = pk.random_walk_simulate(g, layout, walkers, sc.seed, batches=int(b.get("batches", 8)))
    writer.table("intensity", ("level", "depth", "x", "intensity"), f.rows(), ("", "m", "m", "m^3/(m^2 s)"))
    un = [pk.unevenness_coefficient(f, l) for l in range(f.depths.size)]
    writer.table("unevenness", ("level", "k_u", "axis_wall_ratio"),
                 [(l, u.k_u, u.axis_wall_ratio) for l, u in enumerate(un)])
    target = float(b.get("k_u_target", 1.15))
    sz = pk.spreading_zone_height(g, layout, target, field=f)
    ra = pk.stabilized_radius_empirical(f)
    # minimum local intensity at the end of the spreading zone
    i_min = float(f.intensity[sz.level if sz.reached else g.levels].min())
    writer.table("summary", ("H_s", "R_a", "H_a", "i_min"), [(sz.height, ra.radius, ra.depth, i_min)],
                 ("m", "m", "m", "m^3/(m^2 s)"))
    report = {"H_s": sz.height, "spreading_reached": sz.reached, "k_u_at_H_s": sz.k_u,
              "R_a": ra.radius, "H_a": ra.depth, "R_a_stabilized": ra.stabilized, "i_min": i_min,
              "lateral_cells": g.lateral_cells, "substeps": g.substeps, "walkers": walkers}
    if "spreading_sweep" in b:
        sw = b["spreading_sweep"]
        res = pk.spreading_sweep(sw["D_over_a"], sw["n"], g.unit_radius, g.layer_height, target,
                                 int(sw.get("walkers", walkers)), sc.seed)
        if writer.fmt == "csv":
            writer.files += emit_plot_series(res, "spreading", os.path.join(writer.out_dir, "series_spreading.csv"))
        report["spreading_sweep"] = {str(k): v.tolist() for k, v in res.heights.items()}
    writer.report("report", report)
    return report


# -- scale ------------------------------------------------------------------------


def run_scale(sc, writer, strict=False):
    from reactorscale import scale_effect as se

    b = dict(sc.block)
    gamma = b.pop("gamma", None)
    reading = b.pop("min_intensity_reading", "product")
    try:
        params = se.ScaleEffectParams.from_dict(b)
    except KeyError as exc:
        raise ScenarioError(f"missing scale parameter {exc}") from exc
    rep = se.scale_effect_report(params, None if gamma is None else float(gamma), reading)
    d = rep.as_dict()
    cols = ("gamma", "i_min", "chi", "N", "h_tilde", "delta_h", "min_intensity_reading", "height_reading")
    writer.table("report_row", cols, [tuple(d[c] for c in cols)])
    writer.report("report", d)
    return d


RUNNERS = {"reactor": run_reactor, "sorption": run_sorption, "mixing": run_mixing,
           "packing": run_packing, "scale": run_scale}


def run(sc, out_dir, fmt=None, strict=False):
    """Run a parsed scenario, writing into ``out_dir``; returns (report, files)."""
    fmt = fmt or sc.output.get("format", "csv")
    if fmt not in FORMATS:
        raise ScenarioError(f"format must be one of {FORMATS}")
    writer = _Writer(out_dir, fmt)
    os.makedirs(out_dir, exist_ok=True)
    report = RUNNERS[sc.model](sc, writer, strict)
    writer.report("scenario.echo", sc.to_dict())
    return report, writer.files
