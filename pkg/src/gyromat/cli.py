"""``gyromat`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 domain or numerical error (the error
class name is printed on stderr), 3 verification failure.
"""

import argparse
import sys
import time

from gyromat import grassmann as gr
from gyromat import io, mlr, spd, verify
from gyromat.errors import ConfigError, GyroError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_matrix(kind, A, out, p=None):
    _emit(io.dumps(io.MatrixDocument(kind, A, p).to_dict()), out)


def _emit_scalar(x, out):
    _emit(f"{float(x)!r}\n", out)


# -- spd -------------------------------------------------------------------------


def _spd_points(args, names):
    return [io.load_matrix(getattr(args, n), expect=("spd",)).data for n in names]


def _cmd_spd(args):
    m = args.metric
    op = args.op
    if op == "add":
        P, Q = _spd_points(args, ("A", "B"))
        _emit_matrix("spd", spd.spd_add(m, P, Q), args.output)
    elif op == "inv":
        (P,) = _spd_points(args, ("A",))
        _emit_matrix("spd", spd.spd_inverse(m, P), args.output)
    elif op == "scale":
        (P,) = _spd_points(args, ("A",))
        _emit_matrix("spd", spd.spd_scale(m, args.t, P), args.output)
    elif op == "gyr":
        P, Q, R = _spd_points(args, ("A", "B", "C"))
        _emit_matrix("spd", spd.spd_gyr(m, P, Q, R), args.output)
    elif op == "dist":
        P, Q = _spd_points(args, ("A", "B"))
        _emit_scalar(spd.spd_gyrodistance(m, P, Q), args.output)
    elif op == "angle":
        P, Q, R = _spd_points(args, ("A", "B", "C"))
        _emit_scalar(spd.spd_gyroangle(m, P, Q, R), args.output)
    return EXIT_OK


def _cmd_mlr_dist(args):
    metric, planes = io.load_planes(args.plane)
    X = io.load_spd_blocks(args.X)
    if args.blocks:
        d = mlr.blockdiag_dist(metric, planes, X)
    else:
        if len(planes) != 1 or len(X) != 1:
            raise UsageError("multi-block inputs need --blocks")
        d = mlr.plane_distance(planes[0], X[0])
    _emit_scalar(d, args.output)
    return EXIT_OK


def _cmd_mlr_fit(args):
    for name in ("n", "K", "samples", "epochs"):
        if getattr(args, name) < 1:
            raise UsageError(f"--{name} must be positive")
    config = mlr.FitConfig(epochs=args.epochs, seed=args.seed)
    metrics = [s for s in args.metrics.split(",") if s]
    t0 = time.perf_counter()
    summary = mlr.demo_mlr(
        metrics=metrics, n=args.n, K=args.K, samples=args.samples, seed=args.seed, config=config
    )
    print(f"fit time {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    for r in summary["results"]:
        print(
            f"{r['metric']}: train accuracy {r['accuracy']:.4f}, "
            f"loss {r['initial_loss']:.4f} -> {r['final_loss']:.4f} over {r['epochs']} epochs"
        )
    if args.report:
        io.write_json(summary, args.report)
    return EXIT_OK


# -- grassmann -------------------------------------------------------------------


def _gr_points(args, names):
    kind = "projector" if args.perspective == "proj" else "onb"
    return [io.load_matrix(getattr(args, n), expect=(kind,)) for n in names]


def _cmd_gr(args):
    op = args.op
    proj = args.perspective == "proj"
    names = {"add": ("A", "B"), "inv": ("A",), "gyr": ("A", "B", "C"), "dist": ("A", "B")}[op]
    docs = _gr_points(args, names)
    mats = [d.data for d in docs]
    p = docs[0].p
    if op == "dist":
        if not proj:
            mats = [gr.tau(U) for U in mats]
        _emit_scalar(gr.gr_gyrodistance(*mats), args.output)
        return EXIT_OK
    if proj:
        fn = {"add": gr.gr_add, "inv": gr.gr_inverse, "gyr": gr.gr_gyr}[op]
        _emit_matrix("projector", fn(*mats), args.output, p)
    else:
        fn = {"add": gr.onb_add, "inv": gr.onb_inverse, "gyr": gr.onb_gyr}[op]
        _emit_matrix("onb", fn(*mats), args.output, p)
    return EXIT_OK


def _cmd_pangle(args):
    U = io.load_matrix(args.U, expect=("onb",)).data
    V = io.load_matrix(args.V, expect=("onb",)).data
    _emit_scalar(gr.principal_angle_distance(U, V), args.output)
    return EXIT_OK


# -- kgc -------------------------------------------------------------------------


def _cmd_kgc_score(args):
    model = io.load_kgc_model(args.model)
    parts = args.triple.split(",")
    if len(parts) != 3 or not all(parts):
        raise UsageError("--triple must look like subject,relation,object")
    _emit_scalar(model.score(*parts), args.output)
    return EXIT_OK


# -- verify ----------------------------------------------------------------------


def _parse_dims(text, suite):
    if text is None:
        return None
    dims = []
    for item in text.split(","):
        item = item.strip().lower()
        try:
            if suite in verify.GRASSMANN_SUITES:
                n, p = item.split("x")
                dims.append((int(n), int(p)))
            else:
                dims.append(int(item))
        except ValueError:
            form = "NxP" if suite in verify.GRASSMANN_SUITES else "N"
            raise UsageError(f"--dims entries must look like {form}, got {item!r}") from None
    return dims


def _cmd_verify(args):
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    cfg = verify.SuiteConfig(
        suite=args.suite,
        trials=args.trials,
        seed=args.seed,
        tol=args.tol,
        dims=_parse_dims(args.dims, args.suite),
    )
    report = verify.run_suite(cfg, workers=args.workers)
    if args.report:
        io.write_json(report.to_dict(), args.report)
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        worst = "n/a" if c.max_residual is None else f"{c.max_residual:.3e}"
        extra = f" errors={c.errors}" if c.errors else ""
        print(f"{status} {c.name} max_residual={worst} tol={c.tol:g}{extra}")
    print(f"suite {report.suite}: {'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_VERIFY


# -- parser ----------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="gyromat", description="Gyrovector-space operations on SPD and Grassmann manifolds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output(p):
        p.add_argument("-o", "--output", help="write the result here instead of stdout")

    sp = sub.add_parser("spd", help="SPD gyro-operations and MLR")
    spsub = sp.add_subparsers(dest="op", required=True, parser_class=_Parser)
    arity = {"add": "AB", "inv": "A", "scale": "A", "gyr": "ABC", "dist": "AB", "angle": "ABC"}
    for op, names in arity.items():
        p = spsub.add_parser(op)
        p.add_argument("--metric", required=True, choices=[m.value for m in spd.SpdMetric])
        for n in names:
            p.add_argument(f"-{n}", required=True, metavar="FILE")
        if op == "scale":
            p.add_argument("-t", "--t", type=float, required=True)
        output(p)
        p.set_defaults(func=_cmd_spd)

    p = spsub.add_parser("mlr-dist", help="distance from a point to a hypergyroplane")
    p.add_argument("--plane", required=True, metavar="FILE")
    p.add_argument("-X", required=True, metavar="FILE")
    p.add_argument("--blocks", action="store_true", help="block-diagonal plane and point")
    output(p)
    p.set_defaults(func=_cmd_mlr_dist)

    p = spsub.add_parser("mlr-fit", help="fit MLR on synthetic SPD clusters")
    p.add_argument("--demo", action="store_true", required=True)
    p.add_argument("--metrics", default="le,ai")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--epochs", type=int, default=mlr.FitConfig.epochs)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--report", metavar="FILE", help="write the JSON summary here")
    p.set_defaults(func=_cmd_mlr_fit)

    gp = sub.add_parser("gr", help="Grassmann gyro-operations")
    gpsub = gp.add_subparsers(dest="op", required=True, parser_class=_Parser)
    for op, names in {"add": "AB", "inv": "A", "gyr": "ABC", "dist": "AB"}.items():
        p = gpsub.add_parser(op)
        p.add_argument("--perspective", required=True, choices=["proj", "onb"])
        for n in names:
            p.add_argument(f"-{n}", required=True, metavar="FILE")
        output(p)
        p.set_defaults(func=_cmd_gr)
    p = gpsub.add_parser("pangle", help="principal-angle distance between two frames")
    p.add_argument("-U", required=True, metavar="FILE")
    p.add_argument("-V", required=True, metavar="FILE")
    output(p)
    p.set_defaults(func=_cmd_pangle)

    kp = sub.add_parser("kgc", help="knowledge-graph triple scoring")
    kpsub = kp.add_subparsers(dest="op", required=True, parser_class=_Parser)
    p = kpsub.add_parser("score")
    p.add_argument("--model", required=True, metavar="FILE")
    p.add_argument("--triple", required=True, help="subject,relation,object")
    output(p)
    p.set_defaults(func=_cmd_kgc_score)

    p = sub.add_parser("verify", help="run a property-verification suite")
    p.add_argument("--suite", required=True, choices=list(verify.SUITES))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", help="comma list: N for SPD suites, NxP for Grassmann suites")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--report", metavar="FILE")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GyroError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
