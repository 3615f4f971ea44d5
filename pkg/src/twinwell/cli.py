"""Configuration-driven command line front end.

Subcommands: connections, epsilon-star, sigma-star, minimize2d, flow,
verify, report.  Each one reads a JSON config, writes CSV/JSON artifacts
(optionally SVG plots) under the output directory, and exits 0 when every
check passed, 2 when the run completed but carries reconciliation entries
(closed-form vs quadrature disagreements), 1 on error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import traceback
from dataclasses import dataclass, field as dc_field
from pathlib import Path as FilePath

import numpy as np

from . import __version__, connections as conn, flow as flowmod, kernels
from . import minimizer2d as m2d
from . import potential as pot
from . import svg
from .artifacts import (read_json, read_path_csv, write_field_csv,
                        write_json, write_junction_csv, write_path_csv)

RECONCILE_REL_TOL = 0.02


class ConfigError(ValueError):
    pass


def _take(d: dict, section: str, keys: dict, path: str) -> dict:
    """Pick validated keys from a config section; unknown keys are errors."""
    out = {}
    d = dict(d or {})
    for key, (conv, default) in keys.items():
        if key in d:
            try:
                out[key] = conv(d.pop(key))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}.{key}: {exc}") from exc
        else:
            out[key] = default
    if d:
        raise ConfigError(f"unknown keys under {path}: {sorted(d)}")
    return out


@dataclass
class RunConfig:
    potential: pot.PotentialSpec
    path_N: int = 301
    scalar_N: int = 2001
    scan_n: int = 400
    scan_top: float = 2.4
    bracket: tuple = (0.1, 2.0)
    sigma_bracket: tuple = (0.7, 2.0)
    grid: dict = dc_field(default_factory=lambda: dict(R=6.0, mu=3.0, eta=0.75,
                                                       h=0.1, r=0.2))
    solver: dict = dc_field(default_factory=lambda: dict(max_iter=20000,
                                                         tol_rel=1e-10,
                                                         fold_every=10))
    flow: dict = dc_field(default_factory=lambda: dict(eps_flow=1.0, t_end=4.0,
                                                       x2_split=0.0))
    out_dir: str = "out"
    emit_svg: bool = True
    seed: int = 0
    raw: dict = dc_field(default_factory=dict)

    @classmethod
    def parse(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if "potential" not in d:
            raise ConfigError("config needs a potential section")
        spec = pot.PotentialSpec.from_json(d.pop("potential"))
        path_sec = _take(d.pop("path", {}), "path",
                         {"N": (int, 301), "scalar_N": (int, 2001)}, "path")
        if path_sec["N"] < 101:
            raise ConfigError("path.N must be >= 101")
        shoot = _take(d.pop("shoot", {}), "shoot",
                      {"n_scan": (int, 400), "u2_top": (float, 2.4)}, "shoot")
        cross = _take(d.pop("crossing", {}), "crossing",
                      {"bracket": (tuple, (0.1, 2.0)),
                       "sigma_bracket": (tuple, (0.7, 2.0))}, "crossing")
        grid = _take(d.pop("grid", {}), "grid",
                     {"R": (float, 6.0), "mu": (float, 3.0), "eta": (float, 0.75),
                      "h": (float, 0.1), "r": (float, 0.2)}, "grid")
        solver = _take(d.pop("solver", {}), "solver",
                       {"max_iter": (int, 20000), "tol_rel": (float, 1e-10),
                        "fold_every": (int, 10)}, "solver")
        flow_sec = _take(d.pop("flow", {}), "flow",
                         {"eps_flow": (float, 1.0), "t_end": (float, 4.0),
                          "x2_split": (float, 0.0),
                          "grid": (dict, dict(R=8.0, mu=2.0, eta=0.75, h=0.1))},
                         "flow")
        outputs = _take(d.pop("outputs", {}), "outputs",
                        {"dir": (str, "out"), "emit_svg": (bool, True)}, "outputs")
        seed = int(d.pop("seed", 0))
        if d:
            raise ConfigError(f"unknown top-level config keys: {sorted(d)}")
        for name, val in (("grid.R", grid["R"]), ("grid.h", grid["h"]),
                          ("grid.r", grid["r"]), ("flow.t_end", flow_sec["t_end"])):
            if val <= 0:
                raise ConfigError(f"{name} must be positive")
        cfg = cls(potential=spec, path_N=path_sec["N"], scalar_N=path_sec["scalar_N"],
                  scan_n=shoot["n_scan"], scan_top=shoot["u2_top"],
                  bracket=tuple(cross["bracket"]),
                  sigma_bracket=tuple(cross["sigma_bracket"]),
                  grid=grid, solver=solver, flow=flow_sec,
                  out_dir=outputs["dir"], emit_svg=outputs["emit_svg"], seed=seed)
        cfg.raw = cfg.canonical()
        return cfg

    def canonical(self) -> dict:
        return {
            "potential": self.potential.to_json(),
            "path": {"N": self.path_N, "scalar_N": self.scalar_N},
            "shoot": {"n_scan": self.scan_n, "u2_top": self.scan_top},
            "crossing": {"bracket": list(self.bracket),
                         "sigma_bracket": list(self.sigma_bracket)},
            "grid": dict(self.grid),
            "solver": dict(self.solver),
            "flow": dict(self.flow),
            "outputs": {"dir": self.out_dir, "emit_svg": self.emit_svg},
            "seed": self.seed,
        }

    def hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def check(name: str, value, tolerance, passed, status=None) -> dict:
    """One report entry: a measured value with its tolerance and verdict."""
    return {
        "name": name,
        "value": value,
        "tolerance": tolerance,
        "status": status if status is not None else ("pass" if passed else "fail"),
    }


def provenance(cfg: RunConfig, counters: dict) -> dict:
    return {
        "config_hash": cfg.hash(),
        "versions": {
            "twinwell": __version__,
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "kernel_lane": kernels.BACKEND,
        },
        "timing": dict(counters),   # deterministic effort counters, not seconds
        "threads": os.environ.get("TOOL_THREADS", "0"),
    }


def _status_exit(entries) -> int:
    statuses = {e["status"] for e in entries}
    if "fail" in statuses or "error" in statuses:
        return 1
    if "reconcile" in statuses:
        return 2
    return 0


# ---------------------------------------------------------------------------
# pipelines


def compute_connection_set(cfg: RunConfig):
    """Scalar + minimized off-axis families + shooting enumeration."""
    spec = cfg.potential
    qopts = conn.QuadratureOptions(path_N=cfg.path_N, scalar_N=cfg.scalar_N)
    minimized = []
    if spec.family == "W1":
        up = conn.minimize_path(spec, conn.upper_init(spec, cfg.path_N), qopts.minimize)
        minimized = [up, conn.connection_result(spec, up.path.mirrored())]
    else:
        inner, outer = conn.w2_pair_actions(spec, qopts)
        minimized = [inner, conn.connection_result(spec, inner.path.mirrored()),
                     outer, conn.connection_result(spec, outer.path.mirrored())]
    c0 = pot.build_C0(spec, [m.path for m in minimized])
    shot = conn.shoot_connections(spec, (0.0, cfg.scan_top), cfg.scan_n,
                                  c0=c0, scalar_N=cfg.scalar_N)
    return minimized, shot, c0


def cmd_connections(cfg: RunConfig) -> int:
    spec = cfg.potential
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    minimized, shot, c0 = compute_connection_set(cfg)

    names = {}
    for res in shot:
        cls = res.path.classification
        key = {"scalar": "e0"}.get(cls)
        if key is None:
            tag = "plus" if res.theta2_0 > 0 else "minus"
            stem = f"e_{tag}" if spec.family == "W1" else \
                f"e{1 if conn.family_of(spec, res) == 'inner' else 2}_{tag}"
            key = stem
        names[key] = res
        write_path_csv(out / f"{key}.csv", res.path)
    for k, res in zip(("min_upper", "min_lower", "min_upper2", "min_lower2"), minimized):
        write_path_csv(out / f"{k}.csv", res.path)

    zero_set = conn.implicit_curve(spec, half="both")
    order = np.argsort(zero_set[:, 0], kind="stable") if len(zero_set) else []
    write_path_csv(out / "implicit_zero_set.csv", zero_set[order])

    entries = []
    scalar_action = next((r.action for r in shot
                          if r.path.classification == "scalar"), None)
    offaxis_min = min((r.action for r in shot
                       if r.path.classification != "scalar"), default=None)
    if scalar_action is not None and offaxis_min is not None:
        entries.append(check("offaxis_action_below_scalar",
                             {"E_offaxis_min": offaxis_min,
                              "E_scalar": scalar_action},
                             None, offaxis_min < scalar_action))
    upmin = min((r for r in minimized), key=lambda r: r.action)
    match = min(abs(r.theta2_0 - upmin.theta2_0) for r in shot
                if r.path.classification == "upper")
    entries.append(check("shooting_vs_minimization_height_gap", match, 0.02,
                         match <= 0.02))
    for res in shot:
        imp = res.implicit_residual
        entries.append(check(
            f"implicit_residual_{res.path.classification}_{res.theta2_0:+.3f}",
            imp, None, True, status="reported"))

    doc = {
        "potential": spec.to_json(),
        "c0_radius": c0.radius,
        "c0_growth_ok": c0.growth_ok,
        "count": len(shot),
        "connections": [r.summary() for r in shot],
        "minimized": [r.summary() for r in minimized],
        "checks": entries,
        "provenance": provenance(cfg, {"n_shot": len(shot),
                                       "n_minimized": len(minimized)}),
    }
    write_json(out / "connections.json", doc)

    if cfg.emit_svg:
        svg.plot_connections(out / "connections.svg",
                             [r.path.nodes for r in shot], spec.poles(),
                             title="connection curves")
        svg.plot_level_sets(out / "level_sets.svg", spec)
    return _status_exit(entries)


def _crossing_cmd(cfg: RunConfig, mode: str) -> int:
    spec = cfg.potential
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    qopts = conn.QuadratureOptions(path_N=cfg.path_N, scalar_N=cfg.scalar_N)
    if mode == "eps_star":
        make_spec = lambda e: pot.PotentialSpec(  # noqa: E731
            "W1", e, mollify_radius=spec.mollify_radius, cap_value=spec.cap_value)
        bracket = cfg.bracket
        reference = 0.4416
    else:
        make_spec = lambda e2: pot.PotentialSpec(  # noqa: E731
            "W2", spec.eps1, e2, mollify_radius=spec.mollify_radius,
            cap_value=spec.cap_value)
        bracket = cfg.sigma_bracket
        reference = None

    entries = []
    tables = {}
    results = {}
    for source in ("closed-form", "quadrature"):
        try:
            res = conn.find_crossing(make_spec, bracket, mode, source, qopts=qopts)
            results[source] = res
            tables[source] = res.probes
            entries.append(check(f"{mode}_{source}_bracket_width",
                                 res.bracket[1] - res.bracket[0], 1e-4,
                                 res.bracket[1] - res.bracket[0] <= 1e-4))
        except conn.BracketError as exc:
            tables[source] = exc.probes
            entries.append(check(f"{mode}_{source}_bracket", None, None, False,
                                 status="reconcile"))

    for source, probes in tables.items():
        with open(out / f"{mode}_{source}_gaps.csv", "w", encoding="utf-8") as fh:
            fh.write("parameter,action_a,action_b\n")
            for p, a, b in probes:
                fh.write(f"{p:.17g},{a:.17g},{b:.17g}\n")

    reconciliation = {}
    if "quadrature" in results and "closed-form" in results:
        q, c = results["quadrature"].root, results["closed-form"].root
        rel = abs(q - c) / max(abs(q), 1e-300)
        reconciliation["quadrature_root"] = q
        reconciliation["closed_form_root"] = c
        reconciliation["relative_difference"] = rel
        entries.append(check(f"{mode}_formula_vs_quadrature", rel,
                             RECONCILE_REL_TOL, rel <= RECONCILE_REL_TOL,
                             status="pass" if rel <= RECONCILE_REL_TOL
                             else "reconcile"))
    if reference is not None and "quadrature" in results:
        dq = abs(results["quadrature"].root - reference)
        reconciliation["reference"] = reference
        reconciliation["quadrature_vs_reference"] = dq
        entries.append(check(f"{mode}_vs_reference", dq, None, True,
                             status="reported"))

    doc = {
        "mode": mode,
        "bracket": list(bracket),
        "results": {k: {"root": v.root, "gap_at_root": v.gap_at_root}
                    for k, v in results.items()},
        "reconciliation": reconciliation,
        "checks": entries,
        "provenance": provenance(cfg, {"probes": sum(len(t) for t in tables.values())}),
    }
    write_json(out / f"{mode}.json", doc)
    return _status_exit(entries)


def cmd_epsilon_star(cfg: RunConfig) -> int:
    return _crossing_cmd(cfg, "eps_star")


def cmd_sigma_star(cfg: RunConfig) -> int:
    if cfg.potential.family != "W2":
        raise ConfigError("sigma-star requires a W2 potential")
    return _crossing_cmd(cfg, "sigma_star")


def cmd_minimize2d(cfg: RunConfig) -> int:
    spec = cfg.potential
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = cfg.grid
    dom = m2d.StripDomain(R=g["R"], mu=g["mu"], eta=g["eta"], h=g["h"])
    mi = pot.minima_and_convexity(spec)
    if g["r"] >= mi.r0:
        raise ConfigError(f"grid.r = {g['r']} must be below the convexity radius "
                          f"r0 = {mi.r0}")
    qopts = conn.QuadratureOptions(path_N=cfg.path_N, scalar_N=cfg.scalar_N)
    up = conn.minimize_path(spec, conn.upper_init(spec, cfg.path_N), qopts.minimize)
    lo = conn.connection_result(spec, up.path.mirrored())
    c0 = pot.build_C0(spec, [up.path, lo.path])
    init = m2d.comparison_map(dom, up.path, constraint_r=g["r"])
    opts = m2d.Solve2DOptions(max_iter=cfg.solver["max_iter"],
                              tol_rel=cfg.solver["tol_rel"],
                              fold_every=cfg.solver["fold_every"])
    field, rep = m2d.minimize(spec, init, c0, opts, minima=mi,
                              connections=[up, lo])

    write_field_csv(out / "field.csv", field)
    m2d.save_checkpoint(field, out / "checkpoint_field.csv",
                        out / "checkpoint_meta.json",
                        iteration=rep.iterations,
                        energy_tail=rep.energy_trace[-10:])

    tr = np.asarray(rep.energy_trace)
    entries = [
        check("energy_trace_monotone", float(np.max(np.diff(tr))), 0.0,
              bool(np.all(np.diff(tr) <= 1e-12))),
        check("nontrivial", float(np.max(np.linalg.norm(field.values, axis=2))),
              0.5, bool(np.max(np.linalg.norm(field.values, axis=2)) >= 0.5)),
        check("equivariance", rep.equivariance_error, 1e-12,
              rep.equivariance_error <= 1e-12),
        check("cosh_bound_violations", rep.cosh_check["cosh_violations"], 0,
              rep.cosh_check["cosh_violations"] == 0),
        check("decay_rate_vs_half_c", rep.decay_fit[1], 0.5 * mi.c,
              rep.decay_fit[1] >= 0.5 * mi.c),
        check("sandwich_lower", rep.upper_bound["J"],
              rep.upper_bound["lower_bound"],
              rep.upper_bound["J"] >= rep.upper_bound["lower_bound"]),
        check("sandwich_upper", rep.upper_bound["J"],
              rep.upper_bound["J_comparison"],
              rep.upper_bound["J"] <= rep.upper_bound["J_comparison"] + 1e-9),
        check("boundary_row_distance", max(rep.slice_limit_distances), 0.1,
              max(rep.slice_limit_distances) <= 0.1),
        check("interior_residual", rep.interior_residual, 0.05,
              rep.interior_residual <= 0.05),
    ]
    doc = {
        "domain": dom.to_json(),
        "constraint_r": g["r"],
        "c": mi.c,
        "r0": mi.r0,
        "report": rep.to_json(),
        "checks": entries,
        "provenance": provenance(cfg, {"iterations": rep.iterations,
                                       "folds": rep.fold_count}),
    }
    write_json(out / "minimize2d.json", doc)

    if cfg.emit_svg:
        x1 = dom.x1()
        rho = np.linalg.norm(field.values - pot.A_PLUS, axis=2).max(axis=1)
        mask = x1 >= 0.5
        svg.plot_semilog(out / "decay.svg", x1[mask], rho[mask],
                         "distance to the right well (log scale)",
                         fit=rep.decay_fit)
        sa = np.asarray(rep.slice_actions)
        svg.plot_profile(out / "slice_actions.svg", sa[:, 0], sa[:, 1],
                         "row energies", hline=rep.upper_bound["E_min"])
    return _status_exit(entries)


def cmd_flow(cfg: RunConfig) -> int:
    spec = cfg.potential
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    conn_doc = out / "connections.json"
    if not conn_doc.exists():
        raise ConfigError("flow requires a prior `connections` run in the same "
                          "output directory (missing connections.json)")
    read_json(conn_doc)  # validates the prerequisite artifact
    if spec.family == "W2":
        upper_file, lower_file = out / "e1_plus.csv", out / "e2_plus.csv"
    else:
        upper_file, lower_file = out / "e_plus.csv", out / "e_minus.csv"
    for f in (upper_file, lower_file):
        if not f.exists():
            raise ConfigError(f"flow requires the connection artifact {f.name}")
    x1u, nu = read_path_csv(upper_file)
    x1l, nl = read_path_csv(lower_file)
    upper = conn.Path(nu, param="x1-graph", x1=x1u, classification="upper")
    lower = conn.Path(nl, param="x1-graph", x1=x1l,
                      classification="upper" if spec.family == "W2" else "lower")

    fg = cfg.flow["grid"]
    dom = m2d.StripDomain(R=fg["R"], mu=fg["mu"], eta=fg["eta"], h=fg["h"])
    state = flowmod.init_two_phase(dom, upper, lower, cfg.flow["x2_split"],
                                   spec=spec, eps_flow=cfg.flow["eps_flow"])
    state = flowmod.evolve(state, spec, cfg.flow["t_end"])
    speed, r2 = flowmod.measure_speed(state)

    write_junction_csv(out / "junction.csv", state.junction_history)
    entries = [check("junction_fit_r2", r2, 0.0, True, status="reported"),
               check("junction_speed", speed, None, True, status="reported")]
    flow_doc = {
        "eps_flow": cfg.flow["eps_flow"],
        "dt": state.dt,
        "t_end": state.time,
        "steps": state.steps_taken,
        "speed": speed,
        "fit_r2": r2,
        "n_junction_samples": len(state.junction_history),
        "checks": entries,
        "provenance": provenance(cfg, {"steps": state.steps_taken}),
    }
    write_json(out / "flow.json", flow_doc)
    if cfg.emit_svg:
        hist = np.asarray(state.junction_history)
        svg.plot_profile(out / "junction.svg", hist[:, 0], hist[:, 1],
                         "junction position over time")
    return _status_exit(entries)


def cmd_verify(cfg: RunConfig) -> int:
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries, doc = validate_hypotheses(cfg)
    doc["provenance"] = provenance(cfg, doc.pop("_counters"))
    write_json(out / "verify.json", doc)
    return _status_exit(entries)


def validate_hypotheses(cfg: RunConfig):
    """Numerical checks of the five structural hypotheses."""
    spec = cfg.potential
    entries = []

    mi = pot.minima_and_convexity(spec)
    h1_ok = (float(np.linalg.norm(spec.gradient(mi.a_plus))) <= 1e-10
             and mi.c > 0)
    entries.append(check("H1_minima_and_convexity", {"c": mi.c, "r0": mi.r0,
                                                     "hess_eigs": list(mi.hess_eigs),
                                                     "degenerate": mi.degenerate},
                         None, h1_ok))

    sym = pot.check_symmetry(spec, 1024, seed=cfg.seed)
    entries.append(check("H2_symmetry", sym, 1e-12, sym <= 1e-12))

    minimized, shot, c0 = compute_connection_set(cfg)
    entries.append(check("H2_bounding_disk",
                         {"radius": c0.radius, "margin": c0.margin,
                          "growth_ok": c0.growth_ok}, None, c0.margin >= 0.2))

    qrep = pot.check_Q_monotonicity(spec, "radial", 10_000, seed=cfg.seed)
    entries.append(check("H3_radial_monotonicity",
                         {"violation_fraction": qrep.fraction, "worst": qrep.worst},
                         None, True, status="reported"))

    scalar = [r for r in shot if r.path.classification == "scalar"]
    offaxis = [r for r in shot if r.path.classification != "scalar"]
    h4_ok = bool(scalar and offaxis
                 and min(r.action for r in offaxis) < scalar[0].action)
    entries.append(check("H4_axis_not_minimal",
                         {"E_scalar": scalar[0].action if scalar else None,
                          "E_offaxis_min": min((r.action for r in offaxis),
                                               default=None)}, None, h4_ok))

    refined = conn.shoot_connections(spec, (0.0, cfg.scan_top), 2 * cfg.scan_n,
                                     c0=c0, scalar_N=cfg.scalar_N)
    expected = 3 if spec.family == "W1" else 5
    h5_ok = len(shot) == len(refined) == expected
    minimal = [r for r in shot
               if r.action <= min(x.action for x in shot) * (1.0 + 1e-3)]
    entries.append(check("H5_discrete_connection_set",
                         {"count": len(shot), "count_refined": len(refined),
                          "expected": expected, "n_minimal": len(minimal)},
                         None, h5_ok))

    doc = {
        "potential": spec.to_json(),
        "hypotheses": entries,
        "connection_count": len(shot),
        "actions": sorted(r.action for r in shot),
        "_counters": {"n_shot": len(shot), "n_refined": len(refined)},
    }
    return entries, doc


def cmd_report(cfg: RunConfig) -> int:
    out = FilePath(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sections = {}
    entries = []
    for name in ("connections", "eps_star", "sigma_star", "minimize2d", "flow",
                 "verify"):
        f = out / f"{name}.json"
        if f.exists():
            sections[name] = read_json(f)
            entries.extend(sections[name].get("checks", []))
            entries.extend(sections[name].get("hypotheses", []))
    doc = {
        "sections": sorted(sections),
        "report": sections,
        "n_checks": len(entries),
        "statuses": {s: sum(1 for e in entries if e["status"] == s)
                     for s in ("pass", "fail", "reconcile", "reported")},
        "provenance": provenance(cfg, {"sections": len(sections)}),
    }
    write_json(out / "report.json", doc)
    return _status_exit(entries)


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "connections": cmd_connections,
    "epsilon-star": cmd_epsilon_star,
    "sigma-star": cmd_sigma_star,
    "minimize2d": cmd_minimize2d,
    "flow": cmd_flow,
    "verify": cmd_verify,
    "report": cmd_report,
}


def _apply_overrides(raw: dict, overrides) -> dict:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        dotted, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        keys = dotted.split(".")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override through non-object {k!r}")
        node[keys[-1]] = value
    return raw


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twinwell",
        description="Connections and equivariant strip minimizers for planar "
                    "two-well gradient systems.")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry (dotted path)")
    parser.add_argument("--out", help="override the output directory")
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        raw = _apply_overrides(raw, args.set)
        if args.out:
            raw.setdefault("outputs", {})["dir"] = args.out
        cfg = RunConfig.parse(raw)
    except (OSError, json.JSONDecodeError, ConfigError, pot.PotentialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        return _COMMANDS[args.subcommand](cfg)
    except (ConfigError, pot.PotentialError, conn.PathError, m2d.DomainError,
            flowmod.FlowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
