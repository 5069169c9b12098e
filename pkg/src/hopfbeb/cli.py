"""Command-line front end: ``hopfbeb <verb> [model.json | --builtin NAME] [options]``.

Exit status is 0 on success, 2 when the analysis itself fails (for example a
half-system with real eigenvalues) and 1 for usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import halfmaps, limit_cycles, sim, sliding
from .classify import classification_report, equilibria, sliding_region
from .model import BUILTINS, AnalysisError, ModelError, builtin, load_model, serialize_model, to_fraction

VERBS = ("classify", "pseudo", "cycles", "map", "simulate", "portrait", "builtin")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_text(rows: list[dict], columns=None) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    columns = columns or list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _flat_rows(report: dict, prefix="") -> list[dict]:
    rows = []
    for k, v in report.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flat_rows(v, key + "."))
        elif isinstance(v, (list, tuple)):
            for i, item in enumerate(v):
                if isinstance(item, dict):
                    rows.extend(_flat_rows(item, f"{key}.{i}."))
                else:
                    rows.append({"key": f"{key}.{i}", "value": item})
        else:
            rows.append({"key": key, "value": v})
    return rows


def _load(args):
    if args.builtin and args.model:
        raise UsageError("give either a model file or --builtin, not both")
    if args.lambda_l is not None and args.builtin != "ex1":
        raise UsageError("--lambda-l applies to --builtin ex1 only")
    if args.builtin:
        mu = args.mu if args.mu is not None else "1"
        return builtin(args.builtin, mu=to_fraction(mu), lambda_l=args.lambda_l)
    if not args.model:
        raise UsageError("a model file or --builtin is required")
    try:
        sys_ = load_model(args.model)
    except OSError as exc:
        raise UsageError(f"cannot read model file: {exc}") from None
    if args.mu is not None:
        sys_ = sys_.with_mu(to_fraction(args.mu))
    return sys_


def _emit(args, payload, rows=None, columns=None):
    if args.format == "csv":
        text = _csv_text(rows if rows is not None else _flat_rows(payload), columns)
    else:
        text = json.dumps(_clean(payload), indent=2) + "\n"
    if args.output_file:
        Path(args.output_file).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# verbs

def cmd_builtin(args):
    if args.format == "csv":
        raise UsageError("builtin prints a model file; use --format json")
    sys.stdout.write(serialize_model(_load(args)) + "\n")


def cmd_classify(args):
    s = _load(args)
    report = classification_report(s)
    if args.beb:
        report["beb_summary"] = limit_cycles.beb_summary(s)
    _emit(args, report)


def cmd_pseudo(args):
    s = _load(args)
    rep = sliding.pseudo_equilibria(s)
    payload = {
        "name": s.name, "mu": s.mu, "c": rep.c, "d_L": rep.d_L, "d_R": rep.d_R, "Q": rep.Q,
        "case": rep.case, "roots": [asdict(r) for r in rep.roots],
        "admissible_count": len(rep.admissible_roots), "notes": list(rep.notes),
    }
    try:
        nq = sliding.normalized_quadratic(s)
        payload["normalized"] = {"c": nq.c, "d_L": nq.d_L, "d_R": nq.d_R, "z_crit": nq.z_crit}
    except AnalysisError as exc:
        payload["normalized"] = {"error": str(exc)}
    rows = sliding.sample_sliding_field(s, args.q_points or 201) if args.format == "csv" else None
    _emit(args, payload, rows, ["y", "g_slide", "theta", "h"])


def cmd_cycles(args):
    s = _load(args)
    n = args.q_points or limit_cycles.N_SCAN
    if args.format == "csv":
        rows = limit_cycles.displacement_table(s, args.q_max, n)
        _emit(args, None, rows, ["q", "displacement", "via_sliding"])
        return
    notes = []
    fps = limit_cycles.find_fixed_points(s, args.q_max, n, notes=notes)
    records = []
    for fp in fps:
        rec = asdict(fp)
        if fp.via_sliding:
            rec["certificate"] = None
            rec["note"] = "sliding-mediated cycle: stability from finite differences of the simulated map"
        else:
            try:
                cert = limit_cycles.certify_cycle(s, fp.y, args.tol or limit_cycles.RESIDUAL_TOL)
                rec["certificate"] = limit_cycles.certificate_dict(cert)
            except AnalysisError as exc:
                rec["certificate"] = None
                rec["note"] = str(exc)
        records.append(rec)
    _emit(args, {"name": s.name, "mu": s.mu, "count": len(records),
                 "stabilities": [r["stability"] for r in records], "cycles": records, "notes": notes})


def cmd_map(args):
    s = _load(args)
    zr = halfmaps.side_data(s, "R").zeta
    scale = max(1.0, abs(zr), abs(s.mu))
    q_min = args.q_min if args.q_min is not None else zr + 1e-3 * scale
    q_max = args.q_max if args.q_max is not None else zr + 10 * scale
    n = args.q_points or 64
    if not q_max > q_min or n < 1:
        raise UsageError("need q_max > q_min and a positive number of points")
    q = np.linspace(q_min, q_max, n)
    rows = halfmaps.tabulate(s, q) if args.tol is None else _tabulate_tol(s, q, args.tol)
    _emit(args, {"name": s.name, "mu": s.mu, "rows": rows}, rows, ["q", "P_R", "T_R", "P", "dP_dq", "h"])


def _tabulate_tol(s, q, tol):
    out, _ = halfmaps._composed_arrays(s, q, tol)
    return [{"q": float(q[i]), "P_R": float(out["p_right"][i]), "T_R": float(out["t_right"][i]),
             "P": float(out["p"][i]), "dP_dq": float(out["dp_dq"][i]), "h": float(out["h"][i])}
            for i in range(q.size)]


def _trajectory_rows(traj):
    return [{"t": t, "x": x, "y": y, "mode": m} for t, x, y, m in traj.samples]


def _event_rows(traj):
    return [{"t": e.t, "kind": e.kind, "y": e.y} for e in traj.events]


def cmd_simulate(args):
    s = _load(args)
    ctl = sim.SimControls(event_tol=args.tol or 1e-12)
    traj = sim.integrate(s, args.x0, args.y0, args.t_max, ctl, side=args.side)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{s.name}_mu{_mu_label(s.mu)}"
        (out / f"{stem}_trajectory.csv").write_text(_csv_text(_trajectory_rows(traj), ["t", "x", "y", "mode"]))
        (out / f"{stem}_events.csv").write_text(_csv_text(_event_rows(traj), ["t", "kind", "y"]))
    payload = {"name": s.name, "mu": s.mu, "status": traj.status, "final": list(traj.final),
               "events": [asdict(e) for e in traj.events], "n_samples": len(traj.samples)}
    _emit(args, payload, _trajectory_rows(traj), ["t", "x", "y", "mode"])


def _mu_label(mu: float) -> str:
    return f"{mu:g}"


def portrait(s, out: Path, n_ring: int = 12, t_max: float | None = None) -> dict:
    """Write a trajectory bundle for one system and mu; returns the manifest."""
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{s.name}_mu{_mu_label(s.mu)}"
    files = []
    ctl = sim.SimControls(max_events=2000)
    eq = equilibria(s)
    try:
        region = sliding_region(s)
        zl, zr = region.zeta_L, region.zeta_R
    except AnalysisError:
        region, zl, zr = None, 0.0, 0.0
    radius = 2.0 * max(abs(s.mu), abs(zl), abs(zr), 1e-300) if s.mu != 0 else 1.0
    period = 2 * math.pi / min(sim._Half(s, "L").om, sim._Half(s, "R").om)
    horizon = t_max if t_max is not None else 6 * period
    for i in range(n_ring):
        th = 2 * math.pi * i / n_ring
        x0, y0 = radius * math.cos(th), radius * math.sin(th)
        try:
            traj = sim.integrate(s, x0, y0, horizon, ctl)
            status = traj.status
        except AnalysisError as exc:
            traj, status = None, f"error: {exc}"
        name = f"{stem}_{i}.csv"
        rows = _trajectory_rows(traj) if traj else []
        (out / name).write_text(_csv_text(rows, ["t", "x", "y", "mode"]) if rows else "t,x,y,mode\n")
        files.append({"file": name, "kind": "trajectory", "x0": x0, "y0": y0, "status": status})
    if region is not None and region.exists:
        lo, hi = region.interval
        name = f"{stem}_sliding.csv"
        rows = sliding.sample_sliding_field(s, 101)
        (out / name).write_text(_csv_text(rows, ["y", "g_slide", "theta", "h"]))
        files.append({"file": name, "kind": "sliding_" + region.kind, "y_min": lo, "y_max": hi})
    if s.mu != 0:
        try:
            fps = limit_cycles.find_fixed_points(s)
        except AnalysisError:
            fps = []
        for k, fp in enumerate(fps):
            traj = sim.integrate(s, 0.0, fp.y, _cycle_period(s, fp) * 1.0000001, ctl, side="right",
                                 stop_on=lambda e: e.into == sim.RIGHT)
            name = f"{stem}_cycle{k}.csv"
            (out / name).write_text(_csv_text(_trajectory_rows(traj), ["t", "x", "y", "mode"]))
            files.append({"file": name, "kind": "closed_orbit", "y": fp.y, "stability": fp.stability,
                          "via_sliding": fp.via_sliding})
    features = {
        "folds": {"zeta_L": zl, "zeta_R": zr},
        "equilibria": [asdict(e) for e in eq],
    }
    manifest = {"name": s.name, "mu": s.mu, "files": files, "features": features}
    (out / f"{stem}_manifest.json").write_text(json.dumps(_clean(manifest), indent=2) + "\n")
    return manifest


def _cycle_period(s, fp):
    if not fp.via_sliding:
        try:
            cert = limit_cycles.certify_cycle(s, fp.y)
            return cert.period
        except AnalysisError:
            pass
    return 1e3 * 2 * math.pi / min(sim._Half(s, "L").om, sim._Half(s, "R").om)


def cmd_portrait(args):
    s = _load(args)
    out = Path(args.out or ".")
    manifest = portrait(s, out, args.q_points or 12, args.t_max if args.t_max_set else None)
    _emit(args, manifest, [{"file": f["file"], "kind": f["kind"]} for f in manifest["files"]], ["file", "kind"])


COMMANDS = {"classify": cmd_classify, "pseudo": cmd_pseudo, "cycles": cmd_cycles, "map": cmd_map,
            "simulate": cmd_simulate, "portrait": cmd_portrait, "builtin": cmd_builtin}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hopfbeb", description="Hopf-like boundary equilibrium bifurcations of planar "
                                            "piecewise-linear Filippov systems")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("model", nargs="?", help="model JSON file")
    p.add_argument("--builtin", choices=BUILTINS)
    p.add_argument("--mu", help="parameter value (number or p/q)")
    p.add_argument("--lambda-l", dest="lambda_l", help="lambda_L of ex1 (default 1/20)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output directory (portrait, simulate)")
    p.add_argument("--output-file", help="write the report here instead of stdout")
    p.add_argument("--q-min", type=float)
    p.add_argument("--q-max", type=float)
    p.add_argument("--q-points", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--beb", action="store_true", help="classify: add the mu = -1, 0, 1 summary")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--y0", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--side", choices=("left", "right"))
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.t_max_set = args.t_max is not None
    if args.t_max is None:
        args.t_max = 50.0
    try:
        if args.tol is not None and not args.tol > 0:
            raise UsageError("--tol must be positive")
        if args.q_points is not None and args.q_points < 1:
            raise UsageError("--q-points must be positive")
        if args.t_max <= 0:
            raise UsageError("--t-max must be positive")
        COMMANDS[args.verb](args)
    except (UsageError, ModelError, ValueError) as exc:
        print(f"hopfbeb: error: {exc}", file=sys.stderr)
        return 1
    except AnalysisError as exc:
        print(f"hopfbeb: analysis error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
