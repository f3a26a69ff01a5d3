"""Command-line entry point: parameter scans, simulator oracle runs and the validation suite.

Exit codes: 0 ok, 2 configuration error, 3 runtime or numerical error,
4 validation failure.
"""

import argparse
import hashlib
import io
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, kernels
from .config import RunConfig, floquet_angle, load_config, regime_classify, validity_warnings
from .core import as_complex
from .embedding import asymptotic_table, build_table, flux_audit
from .errors import ConfigError, ParabolicScreenError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VALIDATION = 0, 2, 3, 4

COEF_COLUMNS = ("R1", "T1", "R2", "T2", "Twg", "Rwg")
# twice the largest simulator vs asymptotic mismatch seen over 3..12 x crossover
ORACLE_BAND = 0.03

_SIM_KEYS = {"n_points", "h_div", "sponge_fraction", "probe", "rtol", "restart",
             "edge_cells", "edge_h_div", "edge_half_width", "sigma", "embedding_orders",
             "band"}


def fmt(x) -> str:
    """17 significant digits, locale-free."""
    return format(float(x), ".17g")


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(cfg.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode("utf-8")).hexdigest()[:12]


def _versions() -> str:
    import scipy
    return (f"parabolic_screen={__version__} numpy={np.__version__} scipy={scipy.__version__} "
            f"kernels={kernels.BACKEND}")


def _header(cfg, pipeline, notes, extra=()):
    lines = [f"# pipeline: {pipeline}",
             f"# config_hash: {config_hash(cfg)}",
             f"# config: {json.dumps(cfg.canonical(), sort_keys=True)}",
             f"# versions: {_versions()}",
             "# waveguide_phase: exp(i*pi*n*epsilon) with n the table order",
             "# regime_factor: 3 (transmission below crossover/3, reflection above 3*crossover)"]
    lines.extend(f"# {e}" for e in extra)
    if notes:
        lines.extend(f"# warning: {w}" for w in notes)
    else:
        lines.append("# warning: none")
    return lines


def _columns(extra=()):
    cols = ["theta_in", "n", "mode_index"]
    for c in COEF_COLUMNS:
        cols += [f"{c}_re", f"{c}_im"]
    cols += ["flux_defect", "regime_label"]
    return cols + list(extra)


def _table_rows(theta, table, defect, regime, extra=None):
    rows = []
    for i in table.physical_rows():
        row = [fmt(theta), str(int(table.n[i])), str(int(table.mode_index[i]))]
        for c in COEF_COLUMNS:
            v = complex(getattr(table, c)[i])
            row += [fmt(v.real), fmt(v.imag)]
        row += [fmt(defect), regime]
        if extra is not None:
            row += extra(int(table.n[i]))
        rows.append(row)
    return rows


def _write(path, lines):
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


# --------------------------------------------------------------------- scan

def _scan_point(args):
    cfg, theta = args
    spec = cfg.spec(theta)
    geom = cfg.geometry
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = asymptotic_table(spec, geom)
        audit = flux_audit(table, spec)
        regime = regime_classify(spec, geom).value
    notes = validity_warnings(spec, geom) + _summarize(caught, table, spec, geom)
    return theta, table, audit.relative, regime, notes


def _summarize(caught, table, spec, geom):
    """Collapse per-angle lambda_1 warnings into one note; keep the rest verbatim."""
    notes = []
    lam = False
    for w in caught:
        msg = str(w.message)
        if msg.startswith("k(a-b)theta"):
            lam = True
        elif msg not in notes:
            notes.append(msg)
    if lam:
        k = spec.medium(geom).k_real
        flagged = [int(n) for n, p in zip(table.n, table.psi) if abs(k * geom.q * p) > 1.0]
        if flagged:
            listed = " ".join(str(n) for n in flagged)
            notes.insert(0, f"k(a-b)|psi_n| > 1 for orders [{listed}]: the lambda_1 = 1 "
                            "step is inaccurate there")
    return notes


def _map(func, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


def run_scan(cfg: RunConfig, jobs=1):
    return _map(_scan_point, [(cfg, float(t)) for t in cfg.thetas()], jobs)


def _dedupe(notes):
    seen = []
    for n in notes:
        if n not in seen:
            seen.append(n)
    return seen


def cmd_scan(args) -> int:
    cfg = load_config(args.config)
    results = run_scan(cfg, args.jobs)
    notes = _dedupe([f"theta_in={fmt(t)}: {n}" for t, _, _, _, ns in results for n in ns])
    lines = _header(cfg, "asymptotic", notes)
    lines.append(",".join(_columns()))
    for theta, table, defect, regime, _ in results:
        lines += [",".join(r) for r in _table_rows(theta, table, defect, regime)]
    _write(args.out, lines)
    if args.svg is not None:
        svg_path = _svg_path(args)
        if len(results) == 1:
            _, table, _, _, _ = results[0]
            rows = table.physical_rows()
            svg = svg_plot([(table.mode_index[rows], np.abs(table.Twg[rows]), "|Twg|")],
                           "mode index", f"theta_in = {results[0][0]:g}", logx=False)
        else:
            th = np.array([r[0] for r in results])
            tw = np.array([abs(r[1]["Twg", 0]) for r in results])
            rw = np.array([abs(r[1]["Rwg", 0]) for r in results])
            svg = svg_plot([(th, tw, "|Twg[0]|"), (th, rw, "|Rwg[0]|")], "theta_in",
                           f"ka = {cfg.ka:g}, epsilon = {cfg.epsilon:g}", logx=True)
        with open(svg_path, "w", encoding="ascii") as fh:
            fh.write(svg)
    return EXIT_OK


def _svg_path(args):
    if args.svg:
        return args.svg
    base = args.out if args.out not in (None, "-") else "scan"
    return os.path.splitext(base)[0] + ".svg"


# --------------------------------------------------------------------- svg

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def svg_plot(series, xlabel, title, logx=False, width=640, height=400):
    """Minimal polyline plot; ``series`` is a list of (x, y, label)."""
    left, right, top, bottom = 60, 20, 30, 50
    xs = np.concatenate([np.asarray(s[0], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    tx = np.log10 if logx else (lambda v: np.asarray(v, dtype=float))
    x0, x1 = float(np.min(tx(xs))), float(np.max(tx(xs)))
    y0, y1 = 0.0, max(1.0, float(np.max(ys)))
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1.0 - (np.asarray(v, dtype=float) - y0) / (y1 - y0)) * ph

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n')
    out.write(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
              'stroke="black"/>\n')
    out.write(f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="13">'
              f'{title}</text>\n')
    out.write(f'<text x="{width / 2:.1f}" y="{height - 10}" text-anchor="middle" '
              f'font-size="12">{xlabel}{" (log scale)" if logx else ""}</text>\n')
    for frac in (0.0, 0.5, 1.0):
        yv = y0 + frac * (y1 - y0)
        out.write(f'<text x="{left - 6}" y="{float(py(yv)) + 4:.1f}" text-anchor="end" '
                  f'font-size="11">{yv:.2g}</text>\n')
    for tick in (x0, x1):
        label = f"{10 ** tick:.3g}" if logx else f"{tick:.3g}"
        xp = left + (tick - x0) / (x1 - x0) * pw
        out.write(f'<text x="{xp:.1f}" y="{top + ph + 16}" text-anchor="middle" '
                  f'font-size="11">{label}</text>\n')
    for j, (x, y, label) in enumerate(series):
        color = _COLORS[j % len(_COLORS)]
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(np.asarray(x)), py(y)))
        out.write(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>\n')
        out.write(f'<text x="{left + pw - 8}" y="{top + 16 + 14 * j}" text-anchor="end" '
                  f'font-size="12" fill="{color}">{label}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


# ------------------------------------------------------------------- oracle

def _sim_settings(cfg: RunConfig):
    sim = dict(cfg.simulator)
    for key in sim:
        if key not in _SIM_KEYS:
            raise ConfigError(f"unknown simulator key '{key}'", _line(cfg, key))
    return sim


def _line(cfg, key):
    from .config import _line_of
    return _line_of(cfg.source_text, key)


def run_oracle(cfg: RunConfig):
    """Solver tables and numeric-directivity embedding for every theta of ``cfg``."""
    from .simulator.edge import EdgeConfig, numeric_directivities, numeric_directivity_set
    from .simulator.quasiperiodic import SolverConfig, quasi_periodic_solve

    sim = _sim_settings(cfg)
    geom = cfg.geometry
    thetas = cfg.thetas()
    solver_cfg = SolverConfig(**{k: sim[k] for k in ("n_points", "h_div", "sponge_fraction",
                                                     "probe", "rtol", "restart") if k in sim})
    orders = [int(n) for n in sim.get("embedding_orders", (0, 1, 2))]
    edge_kw = {"n_cells": sim.get("edge_cells"), "h_div": sim.get("edge_h_div", 16.0),
               "half_width": sim.get("edge_half_width", 40.0), "sigma": sim.get("sigma", 1e-3)}
    runs = None
    if not geom.unbranched:
        angles = []
        for t in thetas:
            spec = cfg.spec(t)
            angles += [as_complex(floquet_angle(n, spec)) for n in orders]
        angles = sorted(set(angles), key=lambda z: (z.real, z.imag))
        runs = numeric_directivities(geom, cfg.spec(thetas[0]).medium(geom), angles,
                                     EdgeConfig(**edge_kw))
    results = []
    for t in thetas:
        spec = cfg.spec(t)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table, sol = quasi_periodic_solve(spec, geom, solver_cfg)
            asym = asymptotic_table(spec, geom) if not geom.unbranched else None
            emb = None
            if runs is not None:
                emb = build_table(spec, geom,
                                  lambda ang: numeric_directivity_set(runs[0], runs[1], ang),
                                  orders, pipeline="numeric-embedding")
            audit = flux_audit(table, spec)
            regime = regime_classify(spec, geom).value
        notes = validity_warnings(spec, geom) + _summarize(caught, table, spec, geom)
        results.append((t, table, sol, emb, asym, audit.relative, regime, notes))
    return results


def _mismatch(table, asym):
    if asym is None:
        return 0.0
    worst = 0.0
    for n in (0, 1, 2):
        try:
            worst = max(worst, abs(table["Twg", n] - asym["Twg", n]),
                        abs(table["Rwg", n] - asym["Rwg", n]))
        except KeyError:
            continue
    return float(worst)


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    if cfg.absorption <= 0 and cfg.epsilon > 0:
        raise ConfigError("the oracle needs absorption > 0", _line(cfg, "absorption") or 1)
    sim = _sim_settings(cfg)
    band = float(sim.get("band", ORACLE_BAND))
    results = run_oracle(cfg)
    extra_cols = ["emb_R1_re", "emb_R1_im", "emb_T1_re", "emb_T1_im", "gmres_residual",
                  "matvecs", "scan_mismatch"]
    notes = _dedupe([f"theta_in={fmt(r[0])}: {n}" for r in results for n in r[7]])
    lines = _header(cfg, "simulator", notes,
                    extra=[f"scan_band: {fmt(band)} (max |Twg, Rwg difference| over n = 0..2)"])
    lines.append(",".join(_columns(extra_cols)))
    worst = 0.0
    for theta, table, sol, emb, asym, defect, regime, _ in results:
        mism = _mismatch(table, asym)
        worst = max(worst, mism)

        def extra(n, emb=emb, sol=sol, mism=mism):
            if emb is not None and n in set(emb.n.tolist()):
                r1, t1 = complex(emb["R1", n]), complex(emb["T1", n])
                cols = [fmt(r1.real), fmt(r1.imag), fmt(t1.real), fmt(t1.imag)]
            else:
                cols = ["", "", "", ""]
            return cols + [fmt(sol.residual), str(sol.iterations), fmt(mism)]
        lines += [",".join(r) for r in _table_rows(theta, table, defect, regime, extra)]
    _write(args.out, lines)
    if args.strict and worst > band:
        print(f"oracle: scan mismatch {worst:.3g} exceeds band {band:.3g}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# ----------------------------------------------------------------- validate

def cmd_validate(args) -> int:
    from .acceptance import format_line, run_criteria
    results = run_criteria(args.filter, flip_branch=args.perturb_branch)
    for r in results:
        print(format_line(r), file=sys.stderr, flush=True)
    report = {"versions": _versions(), "filter": args.filter,
              "perturbed_branch": bool(args.perturb_branch),
              "all_passed": all(r.passed for r in results),
              "criteria": [r.as_dict() for r in results]}
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out in (None, "-"):
        print(text)
    else:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    return EXIT_OK if report["all_passed"] else EXIT_VALIDATION


# --------------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="parabolic-screen",
                                description="Scattering coefficients of a periodic screen "
                                            "array in the parabolic approximation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scan", help="asymptotic coefficients over a theta grid")
    s.add_argument("--config", required=True, help="JSON configuration file")
    s.add_argument("--out", default=None, help="CSV output path (default stdout)")
    s.add_argument("--svg", nargs="?", const="", default=None,
                   help="also write an SVG plot (optional path)")
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    s.set_defaults(func=cmd_scan)

    o = sub.add_parser("oracle", help="simulator coefficients with numeric directivities")
    o.add_argument("--config", required=True, help="JSON configuration file")
    o.add_argument("--out", default=None, help="CSV output path (default stdout)")
    o.add_argument("--strict", action="store_true",
                   help="exit 4 when the simulator departs from the scan beyond the band")
    o.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; runs serially")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("validate", help="run the acceptance criteria")
    v.add_argument("--filter", default=None, help="criterion id, name or tag")
    v.add_argument("--out", default=None, help="JSON report path (default stdout)")
    v.add_argument("--perturb-branch", action="store_true",
                   help="test hook: use the wrong root of 1/i")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParabolicScreenError, ArithmeticError, ValueError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
