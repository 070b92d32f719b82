"""Command-line front end.

    hitchin solve-radial --n 1
    hitchin scan-b --B-max 10 --steps 21
    hitchin solve-2d --sheet plus --a 0 --coord 8
    hitchin surface --sheet plus --a 3 --radius 3 --steps 21
    hitchin asymptotic --check-c

Every run writes CSV output and ``run-manifest.txt`` into ``--out``
(default: $HITCHIN_OUT_DIR, else ./hitchin-out).  A manifest can be fed
back through ``--config``; explicit flags override config values.

Exit codes: 0 success, 1 usage error, 2 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import output
from .asymptotics import (
    CONVERGES,
    ETA_FORM,
    UPSILON,
    AsymptoticChart,
    angle_distance,
    constant_c,
    constant_c_2d,
    norm_pk,
    upsilon,
)
from .core import ComplexPoly
from .elliptic import GridSpec, solve_psi
from .errors import ConvergenceError, HitchinError
from .geometry import scan_spec, sheet_factorization, surface_scan
from .radial import flux, painleve_residual, scan_B, solve_radial

log = logging.getLogger("hitchin")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
MANIFEST = "run-manifest.txt"
_INTERNAL = {"func", "config", "verbose", "command"}


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def default_out() -> Path:
    return Path(os.environ.get("HITCHIN_OUT_DIR", "hitchin-out"))


# -- commands -----------------------------------------------------------------


def cmd_solve_radial(args) -> int:
    out = args.out
    prof = solve_radial(args.n, args.B, args.R, args.points)
    total = flux(prof)
    print(f"n = {args.n}  B = {output.fmt(args.B)}  newton = {prof.newton_iters}  residual = {prof.residual_sup:.3e}")
    print(f"flux = {total:.8f}")
    print(f"flux / (n pi/2) = {total / (args.n * math.pi / 2):.8f}")
    if args.n == 1:
        res, tail = painleve_residual(prof)
        print(f"painleve residual = {res:.3e}")
        print(f"|h(t_max) - 1| = {tail:.3e}")
    path = output.radial_csv(prof, out / "profile.csv")
    if args.svg:
        output.svg_line(prof.r, prof.absF, out / "profile.svg", "r", "|F|")
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_scan_b(args) -> int:
    if args.steps < 2 or args.B_max <= 0:
        raise UsageError("scan-b needs --steps >= 2 and --B-max > 0")
    Bs = np.linspace(0.0, args.B_max, args.steps)
    t0 = time.perf_counter()
    table = scan_B(Bs, args.R, args.points, continuation=not args.no_continuation, jobs=args.jobs)
    print("B,flux_over_pi")
    for b, f in table:
        print(f"{output.fmt(b)},{output.fmt(f)}")
    vals = [f for _, f in table]
    mono = all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
    print(f"strictly decreasing = {str(mono).lower()}  ({time.perf_counter() - t0:.2f} s)")
    output.scan_csv(table, args.out / "scan.csv")
    if args.svg:
        output.svg_line(Bs, vals, args.out / "scan.svg", "B", "flux / pi")
    return EXIT_OK


def cmd_solve_2d(args) -> int:
    fac, _ = sheet_factorization(args.a, args.coord, args.sheet)
    spec = GridSpec(args.grid_L, args.grid_N) if args.grid_L else GridSpec.for_roots(fac.zeros(), args.grid_N)
    field = solve_psi(fac, spec)
    print(f"zeros = {[output.fmt_complex(z) for z in fac.zeros()]}")
    print(f"grid L = {output.fmt(spec.L)}  N = {spec.N}  newton = {field.newton_iters}  residual = {field.residual_sup:.3e}")
    total = field.flux()
    print(f"flux = {total:.8f}")
    print(f"flux / (3 pi/2) = {total / (1.5 * math.pi):.8f}")
    output.heatmap_csv(field, args.out / "heatmap.csv")
    if args.svg:
        output.svg_heatmap(spec.z, field.psi, args.out / "psi.svg", "psi", diverging=False)
        output.svg_heatmap(spec.z, field.absF, args.out / "absF.svg", "|F|", diverging=False)
    return EXIT_OK


def cmd_surface(args) -> int:
    t = np.linspace(-args.radius, args.radius, args.steps)
    coords = t[None, :] + 1j * t[:, None]
    spec = scan_spec(args.a, args.sheet, coords, N=args.grid_N, L=args.grid_L)
    t0 = time.perf_counter()
    scan = surface_scan(args.a, args.sheet, args.radius, args.steps, args.delta, spec, jobs=args.jobs)
    summary = scan.summary()
    summary["seconds"] = round(time.perf_counter() - t0, 1)
    text = output.summary_block(summary)
    print(text)
    output.surface_csv(scan, args.out / "surface.csv")
    (args.out / "summary.txt").write_text(text + "\n")
    if args.svg:
        output.svg_heatmap(coords, scan.curvature, args.out / "curvature.svg", f"C on S_{args.sheet}, a = {args.a:g}")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    ok = True
    if args.check_c:
        c1, c2 = constant_c(), constant_c_2d()
        ok = abs(c1 - 2.554) <= 1e-3 and abs(c1 - c2) <= 1e-4
        print(f"c (1D) = {c1:.12f}")
        print(f"c (2D) = {c2:.12f}")
        print(f"|difference| = {abs(c1 - c2):.2e}")
        print("PASS" if ok else "FAIL")
    elif args.norm_pk:
        n, k = args.norm_pk
        # generic polynomial with simple zeros: z^n - 1
        H = ComplexPoly((1.0,) + (0.0,) * (n - 1) + (-1.0,))
        res = norm_pk(n, k, H, args.R_cut)
        print(res.classification)
        print(f"value(R_cut = {output.fmt(args.R_cut)}) = {res.value:.6g}")
        if res.classification != CONVERGES:
            print(f"growth exponent = {res.growth_exponent:.3f}")
        rows = [(n, k, res.value, float(res.classification == CONVERGES))]
        output.write_csv(args.out / "norm_pk.csv", ["n", "k", "value", "converges"], rows)
    else:
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(args.samples):
            e1, e2 = rng.uniform(-math.pi, math.pi, 2)
            ch = AsymptoticChart(complex(*rng.normal(size=2)), e1, e2)
            back = upsilon(upsilon(upsilon(ch)))
            worst = max(worst, angle_distance([back.eta1, back.eta2], [ch.eta1, ch.eta2]))
        cube = np.linalg.matrix_power(UPSILON, 3)
        form = np.abs(UPSILON.T @ ETA_FORM @ UPSILON - ETA_FORM).max()
        ok = bool(np.array_equal(cube, np.eye(2, dtype=np.int64))) and worst < 1e-12 and form < 1e-15
        print(f"Upsilon^3 = id (matrix): {np.array_equal(cube, np.eye(2, dtype=np.int64))}")
        print(f"max angle error over {args.samples} charts = {worst:.2e}")
        print(f"eta-form invariance error = {form:.2e}")
        print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERIC


# -- parser --------------------------------------------------------------------


def build_parser() -> Parser:
    common = Parser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--config", type=Path, default=None, help="key = value file (flags override it)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = Parser(prog="hitchin", description="SU(2) Hitchin equations on the plane: solvers and moduli geometry.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    s = sub.add_parser("solve-radial", parents=[common], help="rotationally symmetric solution, H = z^n")
    s.add_argument("--n", type=int, default=1, choices=(1, 2))
    s.add_argument("--B", type=float, default=0.0)
    s.add_argument("--R", type=float, default=20.0)
    s.add_argument("--points", type=int, default=2000)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_solve_radial)

    s = sub.add_parser("scan-b", parents=[common], help="flux against B for n = 2")
    s.add_argument("--B-max", type=float, default=10.0)
    s.add_argument("--steps", type=int, default=21)
    s.add_argument("--R", type=float, default=20.0)
    s.add_argument("--points", type=int, default=2000)
    s.add_argument("--no-continuation", action="store_true")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_scan_b)

    s = sub.add_parser("solve-2d", parents=[common], help="one 2D solve on S_plus or S_minus")
    s.add_argument("--sheet", choices=("plus", "minus"), default="plus")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--coord", type=parse_complex, default=8.0, help="K on plus, W on minus")
    s.add_argument("--grid-N", type=int, default=513)
    s.add_argument("--grid-L", type=float, default=None)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_solve_2d)

    s = sub.add_parser("surface", parents=[common], help="conformal factor and curvature scan")
    s.add_argument("--sheet", choices=("plus", "minus"), default="plus")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--radius", type=float, default=3.0)
    s.add_argument("--steps", type=int, default=21)
    s.add_argument("--delta", type=float, default=0.02)
    s.add_argument("--grid-N", type=int, default=513)
    s.add_argument("--grid-L", type=float, default=None)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("asymptotic", parents=[common], help="singular-approximation checks")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--check-c", action="store_true")
    g.add_argument("--norm-pk", type=int, nargs=2, metavar=("N", "K"))
    g.add_argument("--upsilon-test", action="store_true")
    s.add_argument("--R-cut", type=float, default=10.0)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_asymptotic)
    return p


def _subparser(parser: Parser, name: str) -> Parser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _explicit_dests(sub: Parser, argv) -> set:
    """Destinations set on the command line (so they win over the config file)."""
    given = set()
    for action in sub._actions:
        for opt in action.option_strings:
            if any(a == opt or a.startswith(opt + "=") for a in argv):
                given.add(action.dest)
    return given


def _apply_config(sub: Parser, args, argv) -> None:
    cfg = output.read_config(args.config)
    manifest_cmd = cfg.pop("command", None)
    if manifest_cmd is not None and manifest_cmd != args.command:
        raise UsageError(f"config is for command {manifest_cmd!r}, not {args.command!r}")
    actions = {a.dest: a for a in sub._actions}
    given = _explicit_dests(sub, argv)
    for key, raw in cfg.items():
        if key not in actions or key in _INTERNAL:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if key in given:
            continue
        act = actions[key]
        if isinstance(act, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = _bool(raw)
        elif act.nargs not in (None, "?"):
            value = [act.type(v) if act.type else v for v in raw.replace(",", " ").split()]
        else:
            try:
                value = act.type(raw) if act.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
        if act.choices is not None and value not in act.choices:
            raise UsageError(f"{key} must be one of {list(act.choices)}")
        setattr(args, key, value)


def _manifest_params(args) -> dict:
    params = {}
    for k, v in sorted(vars(args).items()):
        if k in _INTERNAL or v is None or v is False:
            continue
        if isinstance(v, (list, tuple)):
            v = " ".join(str(x) for x in v)
        elif isinstance(v, complex):
            v = output.fmt_complex(v)
        params[k] = v
    return params


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.config is not None:
            _apply_config(_subparser(parser, args.command), args, argv)
        if args.command == "asymptotic" and not (args.check_c or args.norm_pk or args.upsilon_test):
            raise UsageError("one of --check-c, --norm-pk, --upsilon-test is required")
        args.out = Path(args.out) if args.out is not None else default_out()
        args.out.mkdir(parents=True, exist_ok=True)
        output.write_manifest(args.out / MANIFEST, args.command, _manifest_params(args))
        return args.func(args)
    except UsageError as exc:
        print(f"hitchin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"hitchin: not converged: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, HitchinError) as exc:
        # precondition, domain and sheet errors come from bad parameters
        print(f"hitchin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
