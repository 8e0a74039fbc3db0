"""Configuration-driven experiment runner.

One JSON config per run; every experiment writes into a fresh timestamped
subdirectory of the output directory: the data files listed below plus a
`manifest.json` echoing the config and recording outputs and convergence.
Numeric output is serialized with 17 significant digits, so repeated runs
of the same config produce byte-identical CSV files.

Commands and their artifacts:
  solve      solve.json   {lambda, iterations, residual, converged}
  sweep      sweep.csv    one row per length, fixed 17-column schema
  ladder     ladder.csv   {ell, lambda_tilde, monotone_ok} + nu_estimate.json
  spectrum   spectrum.csv {k, lambda, iterations, residual, converged}
  gap-check  gapcheck.json  cross-section gap diagnostics
  decay      decay.csv (slab profile) + decay.json (fitted ratio)
  beta2      beta2.csv    {ell, beta2_upper, lambda_half_plus, lambda_half_minus}
  report     report.txt / report.csv from previous run manifests
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from . import asymptotics as asy
from .coeffs import (CoefficientFamily, FamilyKind, load_tabulated_csv,
                     make_coefficients, satisfies_symmetry_S)
from .eigensolve import (Init, Side, SolveOptions, cross_section_ground_state,
                         half_cylinder_eigen, linear_spectrum,
                         minimize_rayleigh)
from .errors import ConfigurationError
from .mesh import BC, DomainSpec, Shape, build_mesh, slab_integrals

SWEEP_HEADER = ("ell,p,family,lambda_mixed,lambda_dirichlet,lambda_half_plus,"
                "lambda_half_minus,mu1,gap,alpha_hat,d_plus,d_minus,n_plus,"
                "n_minus,iterations,residual,converged")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _g17(x):
    return format(float(x), ".17g")


def _json_value(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(
            f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return "null" if not np.isfinite(x) else _g17(x)
    return json.dumps(obj)


def _dump_json(obj):
    return _json_value(obj) + "\n"


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


class _Schema:
    """Strict key/type checking; unknown keys are rejected."""

    def __init__(self, cfg, context="config"):
        if not isinstance(cfg, dict):
            raise ConfigurationError(f"{context} must be a JSON object")
        self.cfg = dict(cfg)
        self.context = context
        self.seen = set()

    def get(self, key, kind, default=None, required=False, choices=None):
        self.seen.add(key)
        if key not in self.cfg:
            if required:
                raise ConfigurationError(f"{self.context}: missing key {key!r}")
            return default
        val = self.cfg[key]
        if kind is float and isinstance(val, int):
            val = float(val)
        if kind is not None and not isinstance(val, kind):
            raise ConfigurationError(
                f"{self.context}: key {key!r} must be {kind}, got {type(val)}")
        if choices is not None and val not in choices:
            raise ConfigurationError(
                f"{self.context}: key {key!r} must be one of {sorted(choices)}")
        return val

    def finish(self):
        unknown = set(self.cfg) - self.seen
        if unknown:
            raise ConfigurationError(
                f"{self.context}: unknown keys {sorted(unknown)}")


EXPERIMENTS = ("solve", "sweep", "ladder", "spectrum", "gap_check",
               "decay", "beta2", "report")

_FAMILY_KINDS = {k.value: k for k in FamilyKind}
_SHAPES = {"full": Shape.FULL_CYLINDER, "half_plus": Shape.HALF_PLUS,
           "half_minus": Shape.HALF_MINUS, "cross_section": Shape.CROSS_SECTION}
_BCS = {"mixed": BC.MIXED, "dirichlet": BC.DIRICHLET_ALL, "half": BC.HALF_CYLINDER}


def _parse_family(raw, p, nx2):
    sch = _Schema(raw, "family")
    kind = sch.get("kind", str, required=True, choices=set(_FAMILY_KINDS))
    c = sch.get("c", float, default=0.0)
    csv_path = sch.get("csv", str, default=None)
    sch.finish()
    kind = _FAMILY_KINDS[kind]
    if kind is FamilyKind.TABULATED:
        if csv_path is None:
            raise ConfigurationError("tabulated family needs a 'csv' path")
        return load_tabulated_csv(csv_path)
    if kind is FamilyKind.GRAD_ALIGNED:
        ident = make_coefficients(CoefficientFamily(FamilyKind.IDENTITY))
        cross = cross_section_ground_state(nx2, ident, p)
        return make_coefficients(CoefficientFamily(kind, c), cross=cross)
    return make_coefficients(CoefficientFamily(kind, c))


def _parse_solver(raw):
    if raw is None:
        return SolveOptions()
    sch = _Schema(raw, "solver")
    opts = SolveOptions(
        tol_residual=sch.get("tol_residual", float, default=1e-8),
        tol_stagnation=sch.get("tol_stagnation", float, default=1e-12),
        max_iters=sch.get("max_iters", int, default=50000),
        armijo_c=sch.get("armijo_c", float, default=1e-4),
        armijo_shrink=sch.get("armijo_shrink", float, default=0.5),
        init=Init(sch.get("init", str, default="lifted_w",
                          choices={i.value for i in Init})),
        positivity_projection=sch.get("positivity_projection", bool, default=True),
        precondition=sch.get("precondition", bool, default=True),
    )
    sch.finish()
    return opts


class RunPlan:
    """Validated experiment configuration (everything checked up front)."""

    def __init__(self, cfg, experiment, cli_output_dir=None, seed=None):
        sch = _Schema(cfg)
        declared = sch.get("experiment", str, default=None, choices=set(EXPERIMENTS))
        if declared is not None and declared != experiment:
            raise ConfigurationError(
                f"config declares experiment {declared!r}, command is {experiment!r}")
        self.experiment = experiment
        self.config_echo = cfg
        self.output_dir = cli_output_dir or sch.get("output_dir", str, default="runs")
        self.seed = sch.get("seed", int, default=0) if seed is None else seed

        if experiment == "report":
            self.manifests = sch.get("manifests", list, required=True)
            for m in self.manifests:
                if not isinstance(m, str):
                    raise ConfigurationError("manifests must be a list of paths")
            sch.finish()
            return

        resolution = _Schema(sch.get("resolution", dict, required=True), "resolution")
        self.nx2 = resolution.get("nx2", int, required=True)
        self.cells_per_unit = resolution.get("cells_per_unit", int, required=True)
        resolution.finish()
        if self.nx2 < 4 or self.cells_per_unit < 2:
            raise ConfigurationError("resolution too coarse: nx2 >= 4, cells_per_unit >= 2")

        self.p = sch.get("p", float, required=True)
        if self.p < 2:
            raise ConfigurationError(f"p must be >= 2, got {self.p}")
        self.opts = _parse_solver(sch.get("solver", dict, default=None))
        self.opts.seed = self.seed
        self.family = _parse_family(sch.get("family", dict, required=True),
                                    self.p, self.nx2)

        if experiment == "solve":
            self.shape = _SHAPES[sch.get("shape", str, default="full",
                                         choices=set(_SHAPES))]
            default_bc = {"full": "mixed", "half_plus": "half",
                          "half_minus": "half", "cross_section": "dirichlet"}
            raw_bc = sch.get("bc", str,
                             default=default_bc[self.shape.value
                                                if self.shape.value in default_bc
                                                else "full"],
                             choices=set(_BCS))
            self.bc = _BCS[raw_bc]
            self.ell = sch.get("ell", float, default=1.0)
            if self.shape is not Shape.CROSS_SECTION:
                DomainSpec(self.shape, self.ell, self.bc,
                           self.cells_per_unit, self.nx2)
        elif experiment in ("sweep", "beta2", "ladder"):
            self.ells = sch.get("ells", list, required=True)
            if (not self.ells or
                    not all(isinstance(e, (int, float)) for e in self.ells)):
                raise ConfigurationError("ells must be a nonempty numeric list")
            self.ells = [float(e) for e in self.ells]
            if any(b <= a for a, b in zip(self.ells, self.ells[1:])):
                raise ConfigurationError("ells must be strictly increasing")
            if experiment == "ladder":
                if len(self.ells) < 3:
                    raise ConfigurationError("ladder needs at least 3 lengths")
                self.side = Side(sch.get("side", str, default="plus",
                                         choices={"plus", "minus"}))
        elif experiment == "spectrum":
            self.ell = sch.get("ell", float, required=True)
            self.k = sch.get("k", int, default=3)
            if self.k < 1:
                raise ConfigurationError("k must be >= 1")
            if self.p != 2:
                raise ConfigurationError("spectrum requires p = 2")
        elif experiment == "decay":
            self.ell = sch.get("ell", float, required=True)
            window = sch.get("window", list, default=None)
            if window is not None:
                if (len(window) != 2 or not all(isinstance(w, int) for w in window)):
                    raise ConfigurationError("window must be [first, last]")
                self.window = (window[0], window[1])
            else:
                self.window = asy.default_window(self.ell)
            lo, hi = self.window
            n_slabs = int(np.floor(2 * self.ell))
            if lo < 0 or min(hi, n_slabs - 1) - lo < 2:
                raise ConfigurationError(
                    f"decay window {self.window} needs >= 3 slabs inside the "
                    f"{n_slabs}-slab profile")
        elif experiment == "gap_check":
            self.eps_list = sch.get("eps", list, default=[0.1, 0.01])
            if not all(isinstance(e, (int, float)) and e > 0 for e in self.eps_list):
                raise ConfigurationError("eps must be a list of positive reals")
            self.eps_list = [float(e) for e in self.eps_list]
        sch.finish()

    @property
    def resolution(self):
        return (self.nx2, self.cells_per_unit)


def _utc_now():
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y%m%dT%H%M%S.%fZ")


def _make_run_dir(base, experiment):
    os.makedirs(base, exist_ok=True)
    stamp = _utc_now()
    for suffix in [""] + [f"-{i}" for i in range(1, 1000)]:
        path = os.path.join(base, f"{stamp}-{experiment}{suffix}")
        try:
            os.mkdir(path)
            return path
        except FileExistsError:
            continue
    raise OSError(f"could not create a fresh run directory under {base}")


def _csv_bool(b):
    return "true" if b else "false"


def _run_solve(plan, outdir):
    if plan.shape is Shape.CROSS_SECTION:
        cross = cross_section_ground_state(plan.nx2, plan.family, plan.p,
                                           plan.opts)
        payload = {"lambda": cross.mu1, "iterations": cross.iterations,
                   "residual": cross.residual, "converged": True}
    else:
        mesh = build_mesh(DomainSpec(plan.shape, plan.ell, plan.bc,
                                     plan.cells_per_unit, plan.nx2))
        if plan.p == 2:
            r = linear_spectrum(mesh, plan.family, 1, plan.opts)[0]
        else:
            r = minimize_rayleigh(mesh, plan.family, plan.p, plan.opts)
        payload = {"lambda": r.lam, "iterations": r.iterations,
                   "residual": r.final_residual, "converged": r.converged}
    _atomic_write(os.path.join(outdir, "solve.json"), _dump_json(payload))
    return ["solve.json"], payload.get("converged", True), payload


def _run_sweep(plan, outdir):
    table = asy.sweep_lambda(plan.ells, plan.family, plan.p,
                             plan.resolution, plan.opts)
    lines = [SWEEP_HEADER]
    for r in table.rows:
        lines.append(",".join([
            _g17(r.ell), _g17(r.p), r.family,
            _g17(r.lambda_mixed), _g17(r.lambda_dirichlet),
            _g17(r.lambda_half_plus), _g17(r.lambda_half_minus),
            _g17(r.mu1), _g17(r.gap), _g17(r.alpha_hat),
            _g17(r.d_plus), _g17(r.d_minus), _g17(r.n_plus), _g17(r.n_minus),
            str(r.iterations), _g17(r.residual), _csv_bool(r.converged)]))
    _atomic_write(os.path.join(outdir, "sweep.csv"), "\n".join(lines) + "\n")
    converged = all(r.converged for r in table.rows)
    summary = {
        "rows": len(table.rows),
        "mu1": table.rows[-1].mu1,
        "gap_last": table.rows[-1].gap,
        "lambda_mixed_last": table.rows[-1].lambda_mixed,
        "symmetry_S": satisfies_symmetry_S(plan.family, 1e-9),
    }
    return ["sweep.csv"], converged, summary


def _run_ladder(plan, outdir):
    est = asy.nu_infinity_estimate(plan.side, plan.family, plan.p,
                                   plan.ells, plan.resolution, plan.opts)
    lines = ["ell,lambda_tilde,monotone_ok"]
    for ell, lam in est.ladder:
        lines.append(f"{_g17(ell)},{_g17(lam)},{_csv_bool(est.monotone_ok)}")
    _atomic_write(os.path.join(outdir, "ladder.csv"), "\n".join(lines) + "\n")
    payload = {"side": est.side.value, "last_value": est.last_value,
               "extrapolated": est.extrapolated, "monotone_ok": est.monotone_ok}
    _atomic_write(os.path.join(outdir, "nu_estimate.json"), _dump_json(payload))
    return ["ladder.csv", "nu_estimate.json"], True, payload


def _run_spectrum(plan, outdir):
    mesh = build_mesh(DomainSpec(Shape.FULL_CYLINDER, plan.ell, BC.MIXED,
                                 plan.cells_per_unit, plan.nx2))
    results = linear_spectrum(mesh, plan.family, plan.k, plan.opts)
    lines = ["k,lambda,iterations,residual,converged"]
    for i, r in enumerate(results, start=1):
        lines.append(f"{i},{_g17(r.lam)},{r.iterations},"
                     f"{_g17(r.final_residual)},{_csv_bool(r.converged)}")
    _atomic_write(os.path.join(outdir, "spectrum.csv"), "\n".join(lines) + "\n")
    converged = all(r.converged for r in results)
    return ["spectrum.csv"], converged, {"eigenvalues": [r.lam for r in results]}


def _run_gap_check(plan, outdir):
    cross = cross_section_ground_state(plan.nx2, plan.family, plan.p, plan.opts)
    gi = asy.gap_integral_I2(cross, plan.family, plan.p)
    printed, printed_clamps = asy.slab_bound(cross, plan.family, plan.p, "as_printed")
    squared, squared_clamps = asy.slab_bound(cross, plan.family, plan.p, "squared")
    exp_tests = [{"eps": e,
                  "value": asy.exp_test_upper_bound(
                      e, cross, plan.family, plan.p, np.ceil(10.0 / e))}
                 for e in plan.eps_list]
    payload = {
        "mu1": cross.mu1,
        "poincare_cp": cross.poincare_cp,
        "ellipticity_margin": plan.family.lambda_margin,
        "symmetry_S": satisfies_symmetry_S(plan.family, 1e-9),
        "gap_integral": gi.value,
        "a12_gradw_vanishes": gi.a12_gradw_vanishes,
        "slab_bound_as_printed": printed,
        "slab_bound_as_printed_clamped_points": printed_clamps,
        "slab_bound_squared": squared,
        "slab_bound_squared_clamped_points": squared_clamps,
        "exp_test": exp_tests,
    }
    _atomic_write(os.path.join(outdir, "gapcheck.json"), _dump_json(payload))
    return ["gapcheck.json"], True, payload


def _run_decay(plan, outdir):
    mesh = build_mesh(DomainSpec(Shape.FULL_CYLINDER, plan.ell, BC.MIXED,
                                 plan.cells_per_unit, plan.nx2))
    if plan.p == 2:
        r = linear_spectrum(mesh, plan.family, 1, plan.opts)[0]
    else:
        r = minimize_rayleigh(mesh, plan.family, plan.p, plan.opts)
    profile = slab_integrals(mesh, plan.family, r.field, plan.p)
    oriented = asy.orient_profile(profile)
    lines = ["slab,grad_energy,p_mass,a_energy"]
    for i in range(len(oriented)):
        lines.append(f"{i},{_g17(oriented.grad_energy[i])},"
                     f"{_g17(oriented.p_mass[i])},{_g17(oriented.a_energy[i])}")
    _atomic_write(os.path.join(outdir, "decay.csv"), "\n".join(lines) + "\n")
    fit = asy.fit_decay(oriented, plan.window)
    payload = {"lambda": r.lam, "alpha_hat": fit.alpha_hat,
               "r_squared": fit.r_squared,
               "window": list(fit.window), "no_decay": fit.no_decay,
               "converged": r.converged}
    _atomic_write(os.path.join(outdir, "decay.json"), _dump_json(payload))
    return ["decay.csv", "decay.json"], r.converged, payload


def _run_beta2(plan, outdir):
    lines = ["ell,beta2_upper,lambda_half_plus,lambda_half_minus"]
    last = None
    for ell in plan.ells:
        rp = half_cylinder_eigen(Side.PLUS, ell, plan.resolution,
                                 plan.family, plan.p, plan.opts)
        rm = half_cylinder_eigen(Side.MINUS, ell, plan.resolution,
                                 plan.family, plan.p, plan.opts)
        last = max(rp.lam, rm.lam)
        lines.append(f"{_g17(ell)},{_g17(last)},{_g17(rp.lam)},{_g17(rm.lam)}")
    _atomic_write(os.path.join(outdir, "beta2.csv"), "\n".join(lines) + "\n")
    return ["beta2.csv"], True, {"beta2_upper_last": last}


def _sandwich_fits(rows):
    fits = []
    for r in rows:
        excess = r["lambda_dirichlet"] - r["mu1"]
        fits.append({"ell": r["ell"], "c_ell": excess * r["ell"],
                     "c_ell2": excess * r["ell"] ** 2})
    return fits


def _run_report(plan, outdir):
    txt = [f"cylspectra report ({__version__})", ""]
    csv_rows = ["section,key,value"]
    n_section = 0
    for path in plan.manifests:
        mpath = path
        if os.path.isdir(path):
            mpath = os.path.join(path, "manifest.json")
        if not os.path.exists(mpath):
            txt.append(f"[absent] {path}")
            csv_rows.append(f"{path},status,absent")
            continue
        with open(mpath) as fh:
            manifest = json.load(fh)
        n_section += 1
        exp = manifest.get("experiment", "?")
        section = f"{exp}#{n_section}"
        txt.append(f"== {section}: {mpath}")
        csv_rows.append(f"{section},manifest,{mpath}")
        rundir = os.path.dirname(mpath)
        if exp == "sweep" and os.path.exists(os.path.join(rundir, "sweep.csv")):
            rows = _read_sweep_csv(os.path.join(rundir, "sweep.csv"))
            mu1 = rows[-1]["mu1"]
            gaps = [r["gap"] for r in rows]
            txt.append(f"  family {rows[-1]['family']}, p={rows[-1]['p']:g}, "
                       f"mu1={mu1:.10g}")
            txt.append(f"  gap by ell: " + ", ".join(
                f"{r['ell']:g}:{r['gap']:.6g}" for r in rows))
            if len(gaps) >= 2 and abs(gaps[-1]) > 0:
                plateau = abs(gaps[-1] - gaps[-2]) / max(abs(gaps[-1]), 1e-300)
                txt.append(f"  gap plateau (last step rel change): {plateau:.3g}")
                csv_rows.append(f"{section},gap_plateau_rel_change,{_g17(plateau)}")
            if abs(gaps[-1]) <= 1e-6 * mu1:
                txt.append("  no gap detected "
                           f"(max |gap| = {max(abs(g) for g in gaps):.3g})")
                csv_rows.append(f"{section},no_gap,true")
            for fit in _sandwich_fits(rows):
                csv_rows.append(f"{section},sandwich_c_ell_{fit['ell']:g},"
                                f"{_g17(fit['c_ell'])}")
            txt.append("  dirichlet sandwich (lamD-mu1)*ell: " + ", ".join(
                f"{f['ell']:g}:{f['c_ell']:.4g}" for f in _sandwich_fits(rows)))
            alpha = rows[-1]["alpha_hat"]
            txt.append(f"  decay alpha_hat (last row): {alpha:.6g}")
            csv_rows.append(f"{section},alpha_hat_last,{_g17(alpha)}")
            ok = all(r["d_plus"] + r["d_minus"] - 1 < 1e-8 for r in rows)
            txt.append(f"  mass-split identity: {'pass' if ok else 'FAIL'}")
            csv_rows.append(f"{section},mass_split_identity,"
                            f"{'pass' if ok else 'fail'}")
        elif exp == "ladder":
            results = manifest.get("results", {})
            txt.append(f"  side {results.get('side')}: last "
                       f"{results.get('last_value')}, extrapolated "
                       f"{results.get('extrapolated')}, monotone "
                       f"{results.get('monotone_ok')}")
            csv_rows.append(f"{section},nu_extrapolated,"
                            f"{_json_value(results.get('extrapolated'))}")
        else:
            for key, val in sorted(manifest.get("results", {}).items()):
                if isinstance(val, (int, float, bool, str)):
                    txt.append(f"  {key}: {val}")
                    csv_rows.append(f"{section},{key},{val}")
    if n_section == 0:
        txt.append("(no sections)")
    _atomic_write(os.path.join(outdir, "report.txt"), "\n".join(txt) + "\n")
    _atomic_write(os.path.join(outdir, "report.csv"), "\n".join(csv_rows) + "\n")
    return ["report.txt", "report.csv"], True, {"sections": n_section}


def _read_sweep_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            row = {}
            for key, val in zip(header, parts):
                if key == "family":
                    row[key] = val
                elif key == "converged":
                    row[key] = val == "true"
                elif key == "iterations":
                    row[key] = int(val)
                else:
                    row[key] = float(val)
            rows.append(row)
    return rows


_RUNNERS = {
    "solve": _run_solve, "sweep": _run_sweep, "ladder": _run_ladder,
    "spectrum": _run_spectrum, "gap_check": _run_gap_check,
    "decay": _run_decay, "beta2": _run_beta2, "report": _run_report,
}


def run_config(path, experiment, output_dir=None, threads=None):
    """Validate and execute one experiment config; returns (manifest, exit code)."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
        return None, EXIT_CONFIG
    try:
        plan = RunPlan(cfg, experiment, cli_output_dir=output_dir)
    except (ConfigurationError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return None, EXIT_CONFIG

    started = _utc_now()
    try:
        outdir = _make_run_dir(plan.output_dir, experiment)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return None, EXIT_IO

    try:
        outputs, converged, results = _RUNNERS[experiment](plan, outdir)
    except OSError as exc:
        print(f"error: I/O failure during run: {exc}", file=sys.stderr)
        return None, EXIT_IO
    except ConfigurationError as exc:
        # configuration problems only detectable against computed data
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return None, EXIT_CONFIG

    manifest = {
        "tool": "cylspectra",
        "version": __version__,
        "experiment": experiment,
        "config": plan.config_echo,
        "threads": threads if threads is not None else 1,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": outputs,
        "converged": converged,
        "results": results,
        "run_dir": outdir,
    }
    try:
        _atomic_write(os.path.join(outdir, "manifest.json"), _dump_json(manifest))
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return None, EXIT_IO
    print(outdir)
    return manifest, EXIT_OK


def _threads_from(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CYLSPECTRA_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError(
                f"CYLSPECTRA_THREADS must be an integer, got {env!r}")
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cylspectra",
        description="Eigenvalue experiments on long cylinders")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "ladder", "spectrum", "gap-check",
                 "decay", "beta2", "report"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--output-dir", default=None)
        cmd.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)
    experiment = args.command.replace("-", "_")
    try:
        threads = _threads_from(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if threads < 1:
        print("error: threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    _, code = run_config(args.config, experiment,
                         output_dir=args.output_dir, threads=threads)
    return code


if __name__ == "__main__":
    sys.exit(main())
