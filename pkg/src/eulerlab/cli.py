"""Command-line driver: eulerlab {verify,orbit,periodic,current,stabilize,counterexample}."""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np
from pydantic import ValidationError

from .chartcalc import OneForm
from .config import RunConfig, load_config
from .models import (
    CutoffProfile,
    cosine_profile,
    glued_counterexample,
    klein_mapping_torus,
    modified_contact,
    shear_mapping_torus,
    standardized_orbit_neighborhood,
)
from .sampling import chart_samples
from .serialization import dumps

MODELS = ["klein", "klein-printed", "shear", "contact", "modified", "counterexample"]
EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class NumericalFailure(RuntimeError):
    def __init__(self, stage, msg):
        self.stage = stage
        super().__init__(msg)


def _floats(text, n=None):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _chi(cfg: RunConfig):
    return CutoffProfile(cfg.eps, cfg.chi_lo, cfg.chi_hi, cfg.chi_order)


def build_models(cfg: RunConfig):
    """List of ModelSolution objects for the configured model."""
    h = cosine_profile(tuple(cfg.h_coeffs))
    if cfg.model == "klein":
        return [klein_mapping_torus(h)]
    if cfg.model == "klein-printed":
        return [klein_mapping_torus(h, variant="printed")]
    if cfg.model == "shear":
        return [shear_mapping_torus(cfg.shear_ell, cfg.shear_reflect, h)]
    if cfg.model == "contact":
        return [standardized_orbit_neighborhood(cfg.T0, cfg.eps)]
    if cfg.model == "modified":
        return [modified_contact(cfg.T0, _chi(cfg))]
    ce = glued_counterexample(cfg.T, cfg.delta, cfg.r_core, allow_equal_differences=True)
    return [r.solution for r in ce.regions.values()]


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------------
def cmd_verify(args, cfg):
    from .verify import EULER_TAGS, euler_suite

    rows = []
    ok = True
    for sol in build_models(cfg):
        pts = chart_samples(sol.chart, cfg.samples, cfg.seed)
        for rep in euler_suite(sol, pts, cfg.tol, cfg.seed, EULER_TAGS).values():
            rows.append({"model": sol.name, **rep.to_dict()})
            ok &= rep.passed
            print(f"{sol.name:16s} {rep.tag:10s} max={rep.max_residual:.3e} "
                  f"{'PASS' if rep.passed else 'FAIL'}", file=sys.stderr)
    worst = max(r["max"] for r in rows)
    print(f"max residual {worst:.3e}", file=sys.stderr)
    _emit(dumps({"config": cfg.model_dump(), "reports": rows, "passed": ok}) + "\n", args.out)
    if not ok:
        raise NumericalFailure("verify", f"residual {worst:.3e} above tolerance {cfg.tol:g}")


def cmd_orbit(args, cfg):
    from .flowlab import integrate

    sol = build_models(cfg)[0]
    seg = integrate(sol.X, sol.atlas, args.start, args.time, args.tol, sol.chart_id, args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "chart", "x", "y", "z"])
    for row in seg.to_rows():
        w.writerow([format(row[0], ".17g"), row[1], *(format(v, ".17g") for v in row[2:])])
    _emit(buf.getvalue(), args.out)


def cmd_periodic(args, cfg):
    from .flowlab import SectionMap, find_periodic

    sol = build_models(cfg)[0]
    axis = args.axis if args.axis is not None else (0 if cfg.model.startswith("klein") or cfg.model == "shear" else 2)
    section = SectionMap(sol.chart_id, axis, args.level)
    orbit = find_periodic(sol.X, sol.atlas, section, args.guess,
                          invariant=sol.extras.get("first_integral", sol.bernoulli))
    _emit(dumps(orbit) + "\n", args.out)


def cmd_current(args, cfg):
    from .currents import current_sweep, extension_region, klein_form, klein_region

    a, d, n = args.sweep
    if cfg.model.startswith("klein"):
        sol = build_models(cfg)[0]
        region = klein_region(sol)
        forms = {"lambda": region.lam, "dx": klein_form(region, OneForm([1.0, 0.0, 0.0]))}
    elif cfg.model == "counterexample":
        ce = glued_counterexample(cfg.T, cfg.delta, cfg.r_core, allow_equal_differences=True)
        region = extension_region(ce.regions[args.region])
        forms = {"lambda": region.lam}
    else:
        raise argparse.ArgumentTypeError("current supports --model klein or counterexample")
    forms["dtheta"] = OneForm([0.0, 1.0, 0.0])
    forms["dphi"] = OneForm([0.0, 0.0, 1.0])
    if args.form not in forms:
        raise argparse.ArgumentTypeError(f"--form must be one of {sorted(forms)}")
    lo, hi = region.interval
    if not (lo <= a < d <= hi):
        raise argparse.ArgumentTypeError(f"sweep must lie in [{lo:g}, {hi:g}]")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "c_r"])
    for r, c in current_sweep(forms[args.form], region, np.linspace(a, d, int(n))):
        w.writerow([format(r, ".17g"), format(c, ".17g")])
    _emit(buf.getvalue(), args.out)


def cmd_stabilize(args, cfg):
    from .stabilize import stabilizer_for_klein
    from .verify import check_shs, rescale_to_reeb

    if not cfg.model == "klein":
        raise argparse.ArgumentTypeError("stabilize supports --model klein only")
    sol = build_models(cfg)[0]
    nu = stabilizer_for_klein(sol)
    pts = chart_samples(sol.chart, cfg.samples, cfg.seed)
    Xt, lam_t, om = rescale_to_reeb(sol, nu, pts, cfg.tol)
    rep = check_shs(om, lam_t, Xt, pts, cfg.tol)
    print(f"nu = dx, SHS residual {rep.max_residual:.3e}", file=sys.stderr)
    _emit(dumps({"nu": [1.0, 0.0, 0.0], "shs": rep}) + "\n", args.out)
    if not rep.passed:
        raise NumericalFailure("stabilize", "rescaled structure fails the SHS check")


def cmd_counterexample(args, cfg):
    from .obstruction import StageError, counterexample_report

    try:
        rep = counterexample_report(args.t or cfg.T, cfg.delta, samples=min(cfg.samples, 4000),
                                    seed=cfg.seed, tol=cfg.tol, r_core=cfg.r_core)
    except StageError as exc:
        raise NumericalFailure(exc.stage, str(exc.cause)) from exc
    text = dumps(rep) + "\n"
    _emit(text, args.out)
    print(f"certificate: {rep['certificate']['solution']}", file=sys.stderr)
    if not rep["residuals_pass"]:
        raise NumericalFailure("residuals", "Euler residuals above tolerance")


# -- parser -------------------------------------------------------------------------
def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _sweep(text):
    try:
        a, d, n = text.split(":")
        return float(a), float(d), _positive_int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("sweep must be a:d:n")


def make_parser():
    p = argparse.ArgumentParser(prog="eulerlab", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--samples", type=_positive_int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, dest="cfg_tol")
    common.add_argument("--out", help="output file (default stdout)")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common], help="Euler residual suite").set_defaults(fn=cmd_verify)

    o = sub.add_parser("orbit", parents=[common], help="integrate an orbit, CSV output")
    o.add_argument("--start", type=lambda s: _floats(s, 3), required=True)
    o.add_argument("--time", type=float, required=True)
    o.add_argument("--n", type=_positive_int, default=101, help="output samples")
    o.set_defaults(fn=cmd_orbit, tol=1e-10)

    q = sub.add_parser("periodic", parents=[common], help="Newton search for a periodic orbit")
    q.add_argument("--guess", type=lambda s: _floats(s, 2), required=True)
    q.add_argument("--axis", type=int, choices=[0, 1, 2])
    q.add_argument("--level", type=float, default=0.0)
    q.set_defaults(fn=cmd_periodic)

    c = sub.add_parser("current", parents=[common], help="sweep of foliation currents, CSV output")
    c.add_argument("--sweep", type=_sweep, required=True)
    c.add_argument("--form", default="lambda")
    c.add_argument("--region", choices=["M12", "M34"], default="M12")
    c.set_defaults(fn=cmd_current)

    sub.add_parser("stabilize", parents=[common], help="stabilizing form for the Klein model").set_defaults(
        fn=cmd_stabilize)

    x = sub.add_parser("counterexample", parents=[common], help="build and certify the glued example")
    x.add_argument("--t", type=lambda s: _floats(s, 4))
    x.set_defaults(fn=cmd_counterexample)
    return p


_DEFAULT_MODEL = {"current": "counterexample", "counterexample": "counterexample"}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        model = args.model or (None if args.config else _DEFAULT_MODEL.get(args.command))
        cfg = load_config(args.config, model=model, samples=args.samples, seed=args.seed,
                          tol=args.cfg_tol)
        args.fn(args, cfg)
    except (ValidationError, argparse.ArgumentTypeError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"[{exc.stage}] numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"[{args.command}] numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
