"""Command-line entry point: nhphase <command> [options].

Every command resolves a RunConfig (defaults, then --config, then --set,
then explicit flags), runs, and writes its tables as CSV and/or one JSON
ResultEnvelope into --out. Exit codes: 0 ok, 1 computation failure,
2 configuration error.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .atlas import diagram, drift_monotone, finite_size_report, parse_constraint, _axis_values
from .dense import EigenError, eig
from .greens import GreensError, locate_transition, nonbloch_radius, spectral_map, transition_scan
from .io import PRESETS, ConfigError, ResultEnvelope, Table, load_config, write_csv
from .kernels import BACKEND
from .lattice import build_obc_hamiltonian, rescale_cells
from .skin import SkinError, crosscheck_dense, localization_profile, quantize
from .svg import heat_map, line_plot, scatter_plot, write_svg
from .validate import format_line, run_all
from .winding import WindingError, find_topological_transition, topological_criterion, winding_number

__all__ = [
    "main",
    "build_parser",
    "cmd_spectrum",
    "cmd_winding",
    "cmd_skin",
    "cmd_greens",
    "cmd_phase_diagram",
    "cmd_finite_size",
    "cmd_validate",
    "ComputationError",
]

QUICK_N = 100
ZERO_MODE_TOL = 1e-6


class ComputationError(RuntimeError):
    """A command produced no usable result."""


class Result:
    """Tables, summary, diagnostics and plots produced by one command."""

    def __init__(self):
        self.tables = []
        self.summary = {}
        self.warnings = []
        self.flagged = []
        self.convergence = {}
        self.svgs = {}
        self.failed = False

    def add(self, name, columns, rows):
        self.tables.append(Table(name, list(columns), [list(r) for r in rows]))


def _complex_cols(z):
    return float(np.real(z)), float(np.imag(z))


# ------------------------------------------------------------------ commands

def cmd_spectrum(cfg):
    """OBC eigenvalues with residuals, and |psi| per cell for every eigenstate."""
    p = cfg.model
    opt = cfg.section("spectrum")
    res = Result()
    H = build_obc_hamiltonian(p)
    r = 1.0
    if opt["frame"] == "nonbloch":
        r = nonbloch_radius(p)
        H = rescale_cells(H, r)
    dec = eig(H)
    res.add("eigenvalues", ["index", "re_E", "im_E", "residual"],
            [(i + 1, *_complex_cols(e), float(rr)) for i, (e, rr) in enumerate(zip(dec.eigenvalues, dec.residuals))])
    amp = np.abs(dec.right_eigenvectors).reshape(p.N, 2, -1)
    cell = np.sqrt((amp ** 2).sum(axis=1))  # (N, 2N)
    if opt["states"]:
        rows = [(m + 1, n + 1, float(cell[n, m])) for m in range(2 * p.N) for n in range(p.N)]
        res.add("states", ["m", "n", "abs_psi"], rows)
    nzero = int(np.count_nonzero(np.abs(dec.eigenvalues - p.eps0) <= ZERO_MODE_TOL))
    res.summary = {
        "n_eigenvalues": int(dec.eigenvalues.size),
        "n_zero_modes": nzero,
        "max_abs_im_E": float(np.max(np.abs(dec.eigenvalues.imag))),
        "frame": opt["frame"],
        "radius": float(r),
    }
    res.convergence = {"max_residual": float(dec.max_residual), "norm_fro": float(dec.norm_fro),
                       "defective": bool(dec.defective)}
    res.warnings.extend(dec.warnings)
    if not dec.residual_ok:
        raise EigenError(f"eigen-residual {dec.max_residual:.3g} exceeds tolerance")
    res.svgs["spectrum"] = scatter_plot(dec.eigenvalues.real, dec.eigenvalues.imag, "OBC spectrum", "Re E", "Im E")
    res.svgs["states"] = heat_map(cell.T, np.arange(1, p.N + 1), np.arange(1, 2 * p.N + 1),
                                  "|psi| per cell", "n", "m")
    return res


def _winding_row(p):
    rep = topological_criterion(p)
    R = float(np.sqrt(rep.max_za * rep.min_zb)) if np.isfinite(rep.min_zb) and rep.max_za > 0 else 1.0
    try:
        wa, wb = winding_number("a", p, R), winding_number("b", p, R)
    except WindingError:
        wa = wb = None
    return rep, R, wa, wb


def cmd_winding(cfg):
    """Root moduli, criterion gap and windings along a one-parameter sweep, plus the transition."""
    p = cfg.model
    opt = cfg.section("winding")
    res = Result()
    rows = []
    errors = 0
    for v in np.linspace(opt["lo"], opt["hi"], opt["steps"]):
        q = p.with_(**{opt["sweep"]: float(v)})
        try:
            rep, R, wa, wb = _winding_row(q)
            rows.append((float(v), rep.max_za, rep.min_zb, rep.gap, rep.topological, wa, wb, R, ""))
            if rep.boundary_degenerate:
                res.flagged.append({opt["sweep"]: float(v), "reason": "gap below degeneracy tolerance"})
        except (ValueError, ArithmeticError) as exc:
            errors += 1
            rows.append((float(v), np.nan, np.nan, np.nan, None, None, None, np.nan, f"{type(exc).__name__}: {exc}"))
    res.add("winding_sweep", [opt["sweep"], "max_za", "min_zb", "gap", "topological", "W_a", "W_b", "radius", "error"],
            rows)
    if errors == len(rows):
        raise ComputationError("every sweep point failed")
    try:
        x = find_topological_transition(p, opt["sweep"], opt["lo"], opt["hi"], opt["tol"])
        res.add("winding_transition", ["parameter", "value"], [(opt["sweep"], x)])
    except WindingError as exc:
        x = None
        res.warnings.append(str(exc))
    rep, R, wa, wb = _winding_row(p)
    res.summary = {
        "transition": x,
        "model_point": {"max_za": rep.max_za, "min_zb": rep.min_zb, "gap": rep.gap,
                        "topological": rep.topological, "W_a": wa, "W_b": wb},
        "failed_points": errors,
    }
    res.warnings.extend(rep.notes)
    xs = [r[0] for r in rows]
    res.svgs["winding"] = line_plot([("max|za|", xs, [r[1] for r in rows]), ("min|zb|", xs, [r[2] for r in rows])],
                                    "Root moduli", opt["sweep"], "|z|")
    return res


def cmd_skin(cfg):
    """Exact skin modes, the alpha(theta) curve and optional mode amplitudes."""
    p = cfg.model
    opt = cfg.section("skin")
    res = Result()
    modes = quantize(p, method=opt["method"], tol={"zero_mode": opt["zero_mode_tol"]})
    rows = [(m.m, m.theta, m.alpha, *_complex_cols(m.energy), m.penetration_length, m.complex_energy,
             m.alpha_residual, m.recurrence_residual) for m in sorted(modes, key=lambda m: m.m)]
    res.add("modes", ["m", "theta", "alpha", "re_E", "im_E", "penetration_length", "complex_energy",
                      "alpha_residual", "recurrence_residual"], rows)
    res.add("zero_modes", ["re_E", "im_E"], [_complex_cols(e) for e in modes.zero_modes])
    prof = localization_profile(p, opt["n_theta"])
    res.add("alpha_curve", ["theta", "alpha", "solvable"],
            [(float(t), float(a), bool(s)) for t, a, s in zip(prof.theta, prof.alpha, prof.solvable)])
    by_m = {m.m: m for m in modes}
    srows = []
    for k in opt["state_modes"]:
        md = by_m.get(int(k))
        if md is None or md.amplitudes_A is None:
            res.warnings.append(f"state for m={k} not available")
            continue
        for n in range(p.N):
            srows.append((md.m, n + 1, float(abs(md.amplitudes_A[n])), float(abs(md.amplitudes_B[n]))))
    if opt["state_modes"]:
        res.add("mode_states", ["m", "n", "abs_A", "abs_B"], srows)
    res.summary = {"method": modes.method, "counts": dict(modes.counts), "expected_total": 2 * p.N}
    if opt["crosscheck"]:
        cc = crosscheck_dense(p, modes)
        res.summary["crosscheck"] = cc
        if not cc["count_match"]:
            res.warnings.append(f"count mismatch: {cc['n_reconstructed']} reconstructed vs {cc['n_dense']} dense")
    res.warnings.extend(modes.diagnostics)
    res.warnings.extend(str(b) for b in modes.branch_failures)
    if not len(modes) and not modes.zero_modes:
        raise ComputationError("no modes found")
    res.svgs["alpha_curve"] = line_plot([("alpha", prof.theta, prof.alpha)], "Localization parameter", "theta",
                                        "alpha")
    E = modes.energies
    res.svgs["skin_spectrum"] = scatter_plot(E.real, E.imag, "Exact spectrum", "Re E", "Im E")
    return res


def cmd_greens(cfg):
    """Zero-energy surface and bulk spectral functions along t2."""
    p = cfg.model
    opt = cfg.section("greens")
    jobs = cfg.output["jobs"]
    res = Result()
    grid = np.linspace(opt["t2_lo"], opt["t2_hi"], opt["steps"])
    rows = transition_scan(p, grid, opt["eta"], None, opt["frame"], opt["tol"], opt["max_iter"], jobs)
    res.add("greens_scan", ["t2", "A_surface", "A_surface_right", "A_bulk", "iterations", "radius", "error"], rows)
    failed = [r for r in rows if r[-1]]
    for r in failed:
        res.flagged.append({"t2": r[0], "reason": r[-1]})
    if len(failed) == len(rows):
        raise ComputationError("every scan point failed")
    x = locate_transition(rows)
    res.add("greens_transition", ["t2"], [(x,)] if x is not None else [])
    if x is None:
        res.warnings.append("no surface-peak drop-off inside the scanned range")
    res.summary = {"transition": x, "failed_points": len(failed)}
    it = [r[4] for r in rows if r[4] >= 0]
    res.convergence = {"max_iterations": max(it) if it else None, "eta": opt["eta"], "tol": opt["tol"]}
    if opt["E_steps"] > 0:
        Eg = np.linspace(opt["E_lo"], opt["E_hi"], opt["E_steps"])
        mrows = spectral_map(p, Eg, grid, opt["eta"], opt["frame"], jobs)
        res.add("spectral_map", ["t2", "E", "A_surface", "A_bulk", "error"], mrows)
        Z = np.array([r[2] for r in mrows], dtype=float).reshape(len(grid), len(Eg)).T
        res.svgs["spectral_map"] = heat_map(np.log10(np.maximum(Z, 1e-300)), grid, Eg, "log10 A_surface", "t2", "E")
    res.svgs["greens"] = line_plot([("A_surface", grid, [r[1] for r in rows]), ("A_bulk", grid, [r[3] for r in rows])],
                                   "Spectral function at E = eps0", "t2", "A", logy=True)
    return res


def cmd_phase_diagram(cfg):
    """Phase label on a two-axis grid."""
    opt = cfg.section("phase_diagram")
    res = Result()
    try:
        con = parse_constraint(opt["constraint"] or None)
        n1, v1 = _axis_values(opt["axis1"])
        n2, v2 = _axis_values(opt["axis2"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid = diagram(cfg.model, opt["axis1"], opt["axis2"], con, opt["alpha_tol"], cfg.output["jobs"])
    rows = []
    labels = []
    for i, (a, line) in enumerate(zip(v1, grid)):
        labels.append([])
        for j, (b, pt) in enumerate(zip(v2, line)):
            q = pt.params
            labels[-1].append(pt.phase)
            rows.append((i, j, q.t0, q.t1R, q.t1L, q.t2, q.eps0, pt.phase, pt.topological, pt.skin, pt.skin_side,
                         pt.max_abs_alpha, pt.evidence.get("gap", np.nan), pt.flagged, pt.flag_reason, pt.error))
            if pt.flagged:
                res.flagged.append({n1: float(a), n2: float(b), "reason": pt.flag_reason or pt.error})
    # i indexes axis1, j indexes axis2; the parameter columns hold the values after the constraint
    res.add("phase_grid", ["i", "j", "t0", "t1R", "t1L", "t2", "eps0", "phase", "topological", "skin", "skin_side",
                           "max_abs_alpha", "gap", "flagged", "flag_reason", "error"], rows)
    counts = {k: sum(1 for r in rows if r[7] == k) for k in ("I", "II", "III", "IV")}
    errs = sum(1 for r in rows if r[-1])
    if errs == len(rows):
        raise ComputationError("every grid point failed")
    res.summary = {"axis1": n1, "axis2": n2, "constraint": str(con) if con else "", "label_counts": counts,
                   "flagged": len(res.flagged), "errors": errs}
    # rows of the heat map run along axis2 (y), columns along axis1 (x)
    lab = [[labels[i][j] for i in range(len(v1))] for j in range(len(v2))]
    res.svgs["phase_diagram"] = heat_map(None, v1, v2, "Phase diagram", n1, n2, labels=lab)
    return res


def cmd_finite_size(cfg):
    """Empirical zero-mode transition per N against the winding-criterion value."""
    opt = cfg.section("finite_size")
    res = Result()
    grid = np.round(np.arange(opt["t2_lo"], opt["t2_hi"] + 1e-12, opt["t2_step"]), 12)
    rows = finite_size_report(cfg.model, opt["N_list"], grid, opt["gap_tol"], jobs=cfg.output["jobs"])
    res.add("finite_size", ["N", "empirical", "analytic", "drift"], [(r.N, r.empirical, r.analytic, r.drift) for r in rows])
    crow = [(float(t), r.N, c, m) for r in rows for t, c, m in zip(grid, r.counts, r.min_abs)]
    res.add("zero_mode_counts", ["t2", "N", "count", "min_abs_E"], crow)
    for r in rows:
        if r.empirical is None:
            res.warnings.append(f"N={r.N}: no stretch with exactly two zero modes within gap_tol")
    res.summary = {"drift_monotone": bool(drift_monotone(rows, opt["t2_step"])), "gap_tol": opt["gap_tol"]}
    res.svgs["finite_size"] = line_plot([(f"N={r.N}", grid, r.counts) for r in rows], "Zero-mode count", "t2", "count")
    return res


def cmd_validate(cfg):
    """Acceptance suite; the report (stdout and table) omits wall-clock values."""
    res = Result()
    results = run_all(cfg.output["quick"], cfg.seed, cfg.output["jobs"],
                      echo=lambda s: print(s, file=sys.stderr, flush=True))
    rows = [(r.cid, r.name, r.status, "(timing)" if r.volatile else r.measured, r.threshold, r.detail) for r in results]
    res.add("validate", ["id", "name", "status", "measured", "required", "detail"], rows)
    res.summary = {k: sum(1 for r in results if r.status == k) for k in ("PASS", "FAIL", "SKIP")}
    res.report = "".join(format_line(r) + "\n" for r in results)
    res.failed = res.summary["FAIL"] > 0
    return res


COMMANDS = {
    "spectrum": cmd_spectrum,
    "winding": cmd_winding,
    "skin": cmd_skin,
    "greens": cmd_greens,
    "phase-diagram": cmd_phase_diagram,
    "finite-size": cmd_finite_size,
    "validate": cmd_validate,
}


# ------------------------------------------------------------------ plumbing

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help=f"TOML config file or preset name ({', '.join(PRESETS)})")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--format", choices=("csv", "json", "both"), help="output format")
    common.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    common.add_argument("--jobs", type=int, metavar="K", help="worker processes for sweeps")
    common.add_argument("--quick", action="store_true", default=None, help=f"cap N at {QUICK_N}")
    common.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VALUE", help="override a config value")
    for name in ("t0", "t1R", "t1L", "t2", "eps0"):
        common.add_argument(f"--{name}", type=float, help=f"model {name}")
    common.add_argument("--N", type=int, help="number of unit cells")
    common.add_argument("--seed", type=int, help="seed for randomized checks")

    ap = argparse.ArgumentParser(prog="nhphase", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"nhphase {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__.splitlines()[0])
    return ap


def _flags(args):
    f = {("output", k): getattr(args, k) for k in ("out", "format", "svg", "jobs", "quick")}
    for k in ("t0", "t1R", "t1L", "t2", "eps0", "N"):
        f[("model", k)] = getattr(args, k)
    f[("validate", "seed")] = args.seed
    return f


def _apply_quick(cfg):
    notes = []
    if not cfg.output["quick"]:
        return notes
    if cfg.model.N > QUICK_N:
        notes.append(f"quick: N {cfg.model.N} -> {QUICK_N}")
        cfg.model = cfg.model.with_(N=QUICK_N)
        cfg.sections["model"]["N"] = QUICK_N
    fs = cfg.sections["finite_size"]
    kept = [n for n in fs["N_list"] if n <= QUICK_N]
    if kept != fs["N_list"]:
        notes.append(f"quick: finite-size N list {fs['N_list']} -> {kept}")
        fs["N_list"] = kept
    return notes


def _write(cfg, res, command):
    out = cfg.output["out"]
    os.makedirs(out, exist_ok=True)
    fmt = cfg.output["format"]
    written = []
    if fmt in ("csv", "both"):
        for t in res.tables:
            path = os.path.join(out, f"{t.name}.csv")
            write_csv(t, path)
            written.append(path)
    if fmt in ("json", "both"):
        payload = {"summary": res.summary, "tables": {t.name: t.to_obj() for t in res.tables}}
        diag = {"warnings": res.warnings, "flagged": res.flagged, "convergence": res.convergence, "backend": BACKEND}
        env = ResultEnvelope(command, cfg.echo(), payload, diag)
        path = os.path.join(out, f"{command.replace('-', '_')}.json")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(env.dumps())
        written.append(path)
    if getattr(res, "report", None) is not None:
        path = os.path.join(out, "validate_report.txt")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(res.report)
        written.append(path)
    if cfg.output["svg"]:
        for name, text in res.svgs.items():
            path = os.path.join(out, f"{name}.svg")
            write_svg(text, path)
            written.append(path)
    return written


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set, args.command, _flags(args))
        notes = _apply_quick(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        res = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ComputationError, EigenError, SkinError, GreensError, WindingError, np.linalg.LinAlgError,
            ArithmeticError, ValueError) as exc:
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    res.warnings[:0] = notes
    try:
        written = _write(cfg, res, args.command)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 1
    if getattr(res, "report", None) is not None:
        sys.stdout.write(res.report)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return 1 if res.failed else 0


if __name__ == "__main__":
    sys.exit(main())
