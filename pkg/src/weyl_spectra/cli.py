"""``weyl-spectra`` command line.

Exit codes: 0 success/PASS, 1 analytic check failed or undecided,
2 bad arguments or invalid interval, 3 I/O failure or malformed input file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import counterexample as ce
from . import extension_model as em
from . import herglotz as hz
from . import sturm_liouville as sl
from .errors import (AtomHit, AtomNearEndpoint, CriterionFails, DiskNotShrinking,
                     Inconclusive, InvalidInterval, InvalidMeasure, NoTailBound,
                     NonScalar, PotentialError, SpectraError, StepUnderflow)
from .potential import Potential

log = logging.getLogger("weyl_spectra")

EXIT_OK, EXIT_FAIL, EXIT_ARGS, EXIT_IO = 0, 1, 2, 3
THREADS_ENV = "WEYL_SPECTRA_THREADS"
SL_COLUMNS = ("lambda_re", "lambda_im", "quantity", "value_re", "value_im", "error")
EIG_COLUMNS = ("tau", "lambda", "left_bracket", "right_bracket", "residual")


class UsageError(Exception):
    """Bad option values detected after argparse (exit 2)."""


class FileError(Exception):
    """Missing, unreadable or malformed input file (exit 3)."""


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _real(text):
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None


def _complex(text):
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _complexes(text):
    """Comma list; a leading '-' would otherwise be taken for an option."""
    return tuple(_complex(x) for x in text.split(",") if x.strip())


def _reals(text):
    return tuple(_real(x) for x in text.split(",") if x.strip())


def _positive_reals(text):
    vals = _reals(text)
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("expected comma-separated positive numbers")
    return vals


def _positive(text):
    v = _real(text)
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _posint(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _grid(text):
    """``a:b:n`` -> n evenly spaced points, or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be a:b:n")
        a, b, n = _real(parts[0]), _real(parts[1]), _posint(parts[2])
        return tuple(np.linspace(a, b, n).tolist())
    return _reals(text)


def thread_count():
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer")
    return n


def _pmap(fn, items):
    """Ordered map, parallel up to the thread cap."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def _read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileError(f"{path} is not valid JSON: {exc.msg}") from exc


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc.strerror}") from exc
    log.info("wrote %s", path)


def _check_writable(path):
    if path is None or path == "-":
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise FileError(f"output directory does not exist: {parent}")


def _json_text(doc):
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                    for k, v in r.items()})
    return buf.getvalue()


def _plot_path(args, default_stem):
    """PNG next to the output file, or ``<stem>.png`` for stdout output."""
    out = getattr(args, "out", None)
    if out and out != "-":
        return str(Path(out).with_suffix(".png"))
    return f"{default_stem}.png"


def _load_measure(path):
    """Counterexample file (rebuilt with exact tails) or a plain measure file."""
    doc = _read_json(path)
    try:
        if isinstance(doc, dict) and "meta" in doc and "spec" in doc.get("meta", {}):
            cm = ce.from_json(doc)
            return cm.herglotz(), cm
        return hz.herglotz_from_json(doc), None
    except (InvalidMeasure, InvalidInterval, KeyError, TypeError, ValueError) as exc:
        raise FileError(f"malformed measure file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------

def cmd_measure_build(args):
    _check_writable(args.out)
    spec = ce.CounterexampleSpec(args.mu1, args.mu2, args.K, args.J, args.defect,
                                 args.outside_atoms)
    cm = ce.build(spec)
    _write(args.out, _json_text(ce.to_json(cm)))
    if args.plot:
        from . import plotting
        mu = cm.measure
        plotting.measure_figure(mu.t, mu.directional(np.eye(mu.dim)[0]),
                                cm.accumulation_points, _plot_path(args, "measure"),
                                interval=cm.interval)
    return EXIT_OK


def cmd_measure_evaluate(args):
    _check_writable(args.out)
    phi, _ = _load_measure(args.input)
    rows = []
    for z in args.z:
        ev = hz.evaluate(phi, z, args.truncation)
        rows.append({"z": [z.real, z.imag],
                     "value": hz._matrix_to_json(np.asarray(ev.value, dtype=complex)),
                     "error_bound": ev.error_bound})
    _write(args.out, _json_text({"evaluations": rows}))
    return EXIT_OK


def _result_json(r):
    doc = {"kind": r.kind.value}
    if r.is_finite:
        doc.update(value=r.value, error_bound=r.error_bound)
    else:
        doc["witness"] = r.witness.describe()
    return doc


def cmd_measure_moment(args):
    """Second moment and boundary quotient limit at each ``lam`` (direction e_h)."""
    _check_writable(args.out)
    phi, _ = _load_measure(args.input)
    h = np.zeros(phi.dim)
    if not 0 <= args.direction < phi.dim:
        raise UsageError("direction index out of range")
    h[args.direction] = 1.0
    rows = []
    for lam in args.lam:
        sm = hz.second_moment_at(phi.measure, lam, h)
        try:
            q = hz.imag_quotient_limit(phi, lam, h)
            qdoc = {"kind": q.kind.value, "estimate": q.estimate,
                    "error_bound": q.error_bound}
        except Inconclusive as exc:
            qdoc = {"kind": "inconclusive", "reason": str(exc)}
        rows.append({"lambda": lam, "second_moment": _result_json(sm),
                     "quotient_limit": qdoc})
    _write(args.out, _json_text({"points": rows}))
    return EXIT_OK


def cmd_verify(args):
    _check_writable(args.out)
    _, cm = _load_measure(args.input)
    if cm is None:
        raise FileError("verify needs a file written by 'measure build'")
    rep = ce.verify_counterexample(cm)
    doc = rep.to_json()
    doc["accumulation_points"] = ce.essential_spectrum_accumulation(cm, args.resolution)
    _write(args.out, _json_text(doc))
    print(f"verify: {doc['status']}", file=sys.stderr)
    if args.plot:
        from . import plotting
        checks = rep.checks
        plotting.series_figure([c.lam for c in checks],
                               [[c.window_value for c in checks],
                                [c.expected_window for c in checks]],
                               ["window part", "expected"], "lambda_k",
                               "second moment", _plot_path(args, "verify"), logy=True)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# extension
# ---------------------------------------------------------------------------

def _model(args):
    if args.input:
        phi, cm = _load_measure(args.input)
        try:
            if cm is not None:
                return em.TruncatedModel.from_counterexample(cm)
            return em.TruncatedModel.from_measure(phi.measure, c0=float(phi.c0[0, 0].real),
                                                  c1=float(phi.c1[0, 0].real))
        except InvalidMeasure as exc:
            raise FileError(str(exc)) from exc
    if not args.atoms:
        raise UsageError("give --in FILE or --atoms")
    masses = args.masses or tuple(1.0 for _ in args.atoms)
    if len(masses) != len(args.atoms):
        raise UsageError("--atoms and --masses differ in length")
    order = np.argsort(args.atoms)
    return em.TruncatedModel(np.asarray(args.atoms)[order], np.asarray(masses)[order],
                             args.c0, 0.0)


def cmd_extension_eigs(args):
    _check_writable(args.out)
    model = _model(args)
    window = tuple(args.window) if args.window else (-math.inf, math.inf)
    spectra = _pmap(lambda tau: em.extension_eigenvalues(model, tau, window), args.tau)
    rows = [r for s in spectra for r in s.rows()]
    _write(args.out, _csv_text(EIG_COLUMNS, rows))
    if args.plot:
        from . import plotting
        s = spectra[0]
        atoms = model.t[(model.t >= window[0]) & (model.t <= window[1])]
        plotting.spectrum_figure(atoms, s.eigenvalues, s.tau, _plot_path(args, "spectrum"))
    return EXIT_OK


def cmd_extension_accumulation_sum(args):
    _check_writable(args.out)
    phi, cm = _load_measure(args.input)
    if cm is None:
        raise FileError("accumulation-sum needs a file written by 'measure build'")
    mu = cm.measure
    pts = np.asarray(cm.accumulation_points)
    # c_k: total weight of the satellites of lam_k (their window)
    weights = []
    for a, b in cm.windows:
        inside = (mu.t >= a) & (mu.t < b)
        weights.append(mu.F[inside].sum(axis=0))
    reports = [em.accumulation_sum_check(pts, np.array(weights), lam).to_json()
               for lam in args.lam]
    _write(args.out, _json_text({"lambda_k": pts.tolist(), "reports": reports,
                                 "note": "sum over retained lambda_k only"}))
    return EXIT_OK


def cmd_extension_nowhere_dense(args):
    _check_writable(args.out)
    model = _model(args)
    interval = tuple(args.interval) if args.interval else None
    if interval is None:
        if model.generator is None:
            raise UsageError("give --interval for models without a generator")
        lo, hi = model.generator.interval
        lo = max(lo, float(model.t[0]) - 1.0) if math.isinf(lo) else lo
        hi = min(hi, float(model.t[-1]) + 1.0) if math.isinf(hi) else hi
        interval = (lo, hi)
    pts = em.extension_eigenvalues(model, args.tau, interval).eigenvalues
    probes = model.generator.accumulation_points if model.generator is not None else ()
    rep = em.nowhere_dense_witness(pts, interval, args.resolution, probes=probes)
    doc = rep.to_json()
    doc.update(tau=args.tau, interval=list(interval), n_points=int(len(pts)))
    _write(args.out, _json_text(doc))
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# Sturm-Liouville
# ---------------------------------------------------------------------------

def _problem(args):
    try:
        if args.potential_file:
            pot = Potential.from_json(_read_json(args.potential_file))
        else:
            pot = Potential.expr(args.potential)
        return sl.SLProblem(pot, args.theta)
    except PotentialError as exc:
        if args.potential_file:
            raise FileError(str(exc)) from exc
        raise UsageError(str(exc)) from exc


def _row(lam, quantity, value, error):
    lam = complex(lam)
    value = complex(value)
    return {"lambda_re": lam.real, "lambda_im": lam.imag, "quantity": quantity,
            "value_re": value.real, "value_im": value.imag, "error": float(error)}


def _sl_ivp(args, prob):
    sol = sl.solve_ivp(prob, args.lam, tuple(args.init) if args.init else None,
                       args.T, args.tol, np.linspace(0.0, args.T, args.points))
    rows = []
    for t, y, dy in zip(sol.grid, sol.y, sol.dy):
        rows.append(_row(args.lam, f"y(t={float(t)!r})", y, sol.error_estimate))
        rows.append(_row(args.lam, f"dy(t={float(t)!r})", dy, sol.error_estimate))
    rows.append(_row(args.lam, "wronskian_drift", sol.wronskian_drift, 0.0))
    plot = None
    if args.plot:
        plot = (sol.grid, [np.real(sol.y), np.imag(sol.y)], ["Re y", "Im y"], "t", "y")
    return rows, plot


def _sl_count(args, prob):
    rows = []
    for lam in args.lam_list:
        c = sl.count_l2_solutions(prob, lam, args.T_ladder, args.tol)
        rows.append(_row(lam, "l2_count", c.count, 0.0))
        rows.append(_row(lam, "wronskian_drift", c.wronskian_drift, 0.0))
    return rows, None


def _sl_deficiency(args, prob):
    d = sl.deficiency_indices(prob, args.T_ladder, args.tol)
    rows = [_row(1j, "n_plus", d.n_plus, 0.0), _row(-1j, "n_minus", d.n_minus, 0.0),
            _row(0.0, "consistent", 1.0 if d.consistent else 0.0, 0.0)]
    return rows, None


def _sl_m(args, prob):
    rows, plot = [], None
    for z in args.z:
        m = sl.weyl_m(prob, z, args.T_ladder, args.tol)
        rows.append(_row(z, "m", m.value, m.radius))
        for d in m.disks:
            rows.append(_row(z, f"disk_center(T={d.T!r})", d.center, d.radius))
        if args.plot and plot is None:
            plot = ([d.T for d in m.disks], [[d.radius for d in m.disks]], ["radius"],
                    "T", "disk radius")
    return rows, plot


def _sl_specmeasure(args, prob):
    est = sl.spectral_measure_estimate(prob, (args.a, args.b), args.eta_ladder,
                                       args.grid, which=args.which)
    rows = [_row(complex(0, e), f"mass(eta={e!r})", v, math.nan) for e, v in est.per_eta]
    rows.append(_row(0.0, "mass", est.mass, est.error))
    plot = None
    if args.plot:
        plot = ([e for e, _ in est.per_eta], [[v for _, v in est.per_eta]], ["F((a,b))"],
                "eta", "mass")
    return rows, plot


def _load_samples(path):
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise FileError(f"malformed samples in {path}: {exc}") from exc
    if arr.shape[1] != 2 or len(arr) < 4:
        raise FileError("function samples need rows 't,f' (at least 4)")
    return arr


def _sl_transform(args, prob):
    if args.f_file:
        f = _load_samples(args.f_file)
        support = float(f[-1, 0])
    else:
        g = Potential.expr(args.f_expr)  # same grammar as potentials
        support = args.support
        f = lambda t: float(g(t)) if 0.0 <= t <= support else 0.0  # noqa: E731
    lams = np.asarray(args.lambda_grid)
    V = sl.fourier_transform(prob, f, lams, support, args.tol)
    rows = [_row(lam, "Vf", v, args.tol) for lam, v in zip(lams, V)]
    if args.parseval_kmax:
        rep = sl.parseval_check(prob, f, support, args.parseval_kmax)
        rows.append(_row(0.0, "norm2", rep.norm2, 0.0))
        rows.append(_row(0.0, "spectral_norm2", rep.spectral_norm2, rep.relative_error))
    plot = None
    if args.plot:
        plot = (lams, [np.real(V)], ["Vf"], "lambda", "(Vf)(lambda)")
    return rows, plot


_SL_ACTIONS = {"ivp": _sl_ivp, "count-l2": _sl_count, "deficiency": _sl_deficiency,
               "m": _sl_m, "specmeasure": _sl_specmeasure, "transform": _sl_transform}


def cmd_sl(args):
    _check_writable(args.out)
    prob = _problem(args)
    rows, plot = _SL_ACTIONS[args.action](args, prob)
    _write(args.out, _csv_text(SL_COLUMNS, rows))
    if plot is not None:
        from . import plotting
        x, ys, labels, xl, yl = plot
        plotting.series_figure(x, ys, labels, xl, yl, _plot_path(args, f"sl_{args.action}"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _out(p, what):
    p.add_argument("--out", "-o", default=None, help=f"{what} output path (default stdout)")
    p.add_argument("--plot", action="store_true", help="also write a PNG next to --out")


def build_parser():
    ap = argparse.ArgumentParser(prog="weyl-spectra", description=(
        "Herglotz functions of atomic measures, extension spectra and "
        "half-line Sturm-Liouville analysis."))
    ap.add_argument("--log-level", default="WARNING",
                    choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = ap.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="build and query measures")
    msub = m.add_subparsers(dest="measure_cmd", required=True)
    b = msub.add_parser("build", help="construct a counterexample measure")
    b.add_argument("--mu1", type=_real, required=True)
    b.add_argument("--mu2", type=_real, required=True)
    b.add_argument("--K", type=_posint, default=3)
    b.add_argument("--J", type=_posint, default=50)
    b.add_argument("--defect", type=_posint, default=1)
    b.add_argument("--outside-atoms", type=_posint, default=ce.OUTSIDE_ATOMS)
    _out(b, "measure JSON")
    b.set_defaults(func=cmd_measure_build)
    e = msub.add_parser("evaluate", help="evaluate the Herglotz function")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--z", type=_complexes, required=True, help="comma list, e.g. 1+1j,-1j")
    e.add_argument("--truncation", type=_posint, default=None)
    e.add_argument("--out", "-o", default=None)
    e.set_defaults(func=cmd_measure_evaluate)
    mo = msub.add_parser("moment", help="second moment and boundary quotient limit")
    mo.add_argument("--in", dest="input", required=True)
    mo.add_argument("--lam", type=_reals, required=True, help="comma list")
    mo.add_argument("--direction", type=int, default=0)
    mo.add_argument("--out", "-o", default=None)
    mo.set_defaults(func=cmd_measure_moment)

    v = sub.add_parser("verify", help="verify a constructed measure")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--resolution", type=_positive, default=1e-3)
    _out(v, "report JSON")
    v.set_defaults(func=cmd_verify)

    x = sub.add_parser("extension", help="self-adjoint extension spectra")
    xsub = x.add_subparsers(dest="extension_cmd", required=True)

    def model_opts(p):
        p.add_argument("--in", dest="input", default=None, help="measure JSON")
        p.add_argument("--atoms", type=_reals, default=None, help="comma-separated atoms")
        p.add_argument("--masses", type=_positive_reals, default=None)
        p.add_argument("--c0", type=float, default=0.0)

    xe = xsub.add_parser("eigs", help="eigenvalues of the tau-extension (CSV)")
    model_opts(xe)
    xe.add_argument("--tau", type=_reals, required=True, help="comma list; inf allowed")
    xe.add_argument("--window", type=_real, nargs=2, default=None)
    _out(xe, "CSV")
    xe.set_defaults(func=cmd_extension_eigs)
    xc = xsub.add_parser("accumulation-sum", help="summability over accumulation points")
    xc.add_argument("--in", dest="input", required=True)
    xc.add_argument("--lam", type=_reals, required=True, help="comma list")
    xc.add_argument("--out", "-o", default=None)
    xc.set_defaults(func=cmd_extension_accumulation_sum)
    xn = xsub.add_parser("nowhere-dense", help="gap witnesses for extension spectra")
    model_opts(xn)
    xn.add_argument("--tau", type=_real, default=0.0)
    xn.add_argument("--interval", type=_real, nargs=2, default=None)
    xn.add_argument("--resolution", type=_positive, default=1e-3)
    xn.add_argument("--out", "-o", default=None)
    xn.set_defaults(func=cmd_extension_nowhere_dense)

    s = sub.add_parser("sl", help="half-line Sturm-Liouville analysis (CSV)")
    s.add_argument("action", choices=sorted(_SL_ACTIONS))
    s.add_argument("--potential", default="0", help="expression in t, e.g. 't^2'")
    s.add_argument("--potential-file", default=None, help="potential JSON")
    s.add_argument("--theta", type=float, default=0.0)
    s.add_argument("--tol", type=_positive, default=None)
    s.add_argument("--T", type=_positive, default=10.0)
    s.add_argument("--T-ladder", type=_positive_reals, default=sl.DEFAULT_T_LADDER)
    s.add_argument("--lam", type=_complex, default=0j, help="spectral parameter (ivp)")
    s.add_argument("--lam-list", type=_complexes, default=(-1 + 0j, 1 + 0j, 1j),
                   help="comma list (count-l2)")
    s.add_argument("--init", type=_complex, nargs=2, default=None)
    s.add_argument("--points", type=_posint, default=101)
    s.add_argument("--z", type=_complexes, default=(1j,), help="comma list (m)")
    s.add_argument("--a", type=_real, default=1.0)
    s.add_argument("--b", type=_real, default=4.0)
    s.add_argument("--eta-ladder", type=_positive_reals, default=sl.DEFAULT_ETA_LADDER)
    s.add_argument("--grid", type=_posint, default=201)
    s.add_argument("--which", choices=["m", "transform"], default="m")
    s.add_argument("--f-file", default=None, help="CSV of t,f samples")
    s.add_argument("--f-expr", default="exp(-1/(t*(3-t)))")
    s.add_argument("--support", type=_positive, default=3.0)
    s.add_argument("--lambda-grid", type=_grid, default=tuple(np.linspace(0, 25, 26).tolist()))
    s.add_argument("--parseval-kmax", type=_positive, default=None)
    _out(s, "CSV")
    s.set_defaults(func=cmd_sl)
    return ap


_SL_TOL = {"ivp": 1e-8, "count-l2": 1e-6, "deficiency": 1e-6, "m": 1e-10,
           "specmeasure": 1e-10, "transform": 1e-10}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(message)s")
    if getattr(args, "command", None) == "sl" and args.tol is None:
        args.tol = _SL_TOL[args.action]
    try:
        thread_count()
        return args.func(args)
    except (UsageError, InvalidInterval, NonScalar, AtomHit, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except FileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (Inconclusive, DiskNotShrinking, CriterionFails, AtomNearEndpoint,
            StepUnderflow, NoTailBound) as exc:
        print(f"analysis failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SpectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BrokenPipeError:  # output piped into e.g. head
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
