"""``nhwishart`` command line. Exit codes: 0 success, 1 usage or input error, 2 numerical failure."""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import _io, asymptotics, finite_n, harness, ingest
from .ensemble import ConvergenceError, EnsembleConfig, sample_spectrum

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if not 0 <= lo < hi:
        raise argparse.ArgumentTypeError(f"need 0 <= LO < HI, got {text!r}")
    return lo, hi


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _csv_text(header, columns) -> str:
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    lines = [",".join(header)] + [",".join(_io.fmt(c[i]) for c in cols) for i in range(cols[0].size)]
    return "\n".join(lines) + "\n"


def cmd_sample(args) -> int:
    cfg = EnsembleConfig(n=args.n, m=args.m, a2=args.a2, a2_prime=args.a2_prime,
                         trials=args.trials, seed=args.seed)
    u = sample_spectrum(cfg, workers=args.workers).flat()
    _emit(_csv_text(["re", "im"], [u.real, u.imag]), args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    lo, hi = args.r
    r = np.linspace(lo, hi, args.points)
    header = ["r", "exact"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", finite_n.OriginSingularityWarning)
        cols = [r, finite_n.mean_density_radial(args.n, args.nu, r)]
        if args.nu >= 1:
            header.append("regime1")
            cols.append(asymptotics.density_regime1(args.n, args.nu, r))
        header.append("regime2")
        cols.append(asymptotics.density_regime2(args.n, args.nu, r))
        if args.nu >= 1:
            header.append("regime3")
            cols.append(asymptotics.density_regime3(args.n, args.nu / args.n, r))
    _emit(_csv_text(header, cols), args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    harness.reproduce_figure(args.id, args.seed, args.out, trials=args.trials, workers=args.workers)
    print(f"figure {args.id} data written to {args.out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = EnsembleConfig(n=args.n, m=args.n + args.nu, trials=args.trials, seed=args.seed)
    sample = sample_spectrum(cfg, workers=args.workers)
    r_max = args.r_max if args.r_max else float(sample.moduli.max()) * (1 + 1e-12)
    curve = harness.radial_histogram(sample, bins=args.bins, r_max=r_max)

    def exact(r):
        return finite_n.mean_density_radial(args.n, args.nu, np.maximum(r, 1e-300))

    l1, sup = harness.curve_distance(curve, exact, (0.0, r_max))
    result = {"config": cfg.to_dict(), "bins": args.bins, "r_max": r_max,
              "out_of_range": curve.out_of_range, "l1": l1, "l1_over_n": l1 / args.n, "sup_rel": sup}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _io.write_csv(out / "radial.csv", ["r_lo", "r_hi", "density_emp", "density_analytic"],
                      [curve.bin_edges[:-1], curve.bin_edges[1:], curve.density, exact(curve.centers)])
        _io.write_json(out / "meta.json", result)
    sys.stdout.write(_io.dumps(result))
    return EXIT_OK


def cmd_mp_baseline(args) -> int:
    res = harness.mp_baseline_run(args.n, args.m, args.trials, args.seed, args.out, bins=args.bins,
                                  workers=args.workers)
    res.pop("histogram")
    sys.stdout.write(_io.dumps(res))
    return EXIT_OK


def cmd_denoise(args) -> int:
    report = ingest.denoise(args.x, args.y, args.null_trials, args.seed, args.threshold_k,
                            args.out, regime=args.regime, workers=args.workers)
    flagged = int(np.count_nonzero(report.flags))
    print(f"{flagged} of {len(report.flags)} eigenvalues above {report.threshold:.6g} "
          f"(regime {report.regime}); report: {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nhwishart", description="Non-Hermitian Wishart spectra: exact densities, "
                "limit laws, Monte Carlo and cross-correlation denoising.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def stochastic(sp):
        sp.add_argument("--seed", type=int, required=True, help="RNG seed (mandatory)")
        sp.add_argument("--workers", type=_positive_int, default=1)

    s = sub.add_parser("sample", help="eigenvalue scatter of W = X Y^H in standardized units")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--m", type=_positive_int, required=True)
    s.add_argument("--trials", type=_positive_int, default=1)
    s.add_argument("--a2", type=float, default=0.5)
    s.add_argument("--a2-prime", type=float, default=0.5)
    s.add_argument("--out", help="CSV path (default stdout)")
    stochastic(s)
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("density", help="exact density and applicable limit laws on a radial grid")
    d.add_argument("--n", type=_positive_int, required=True)
    d.add_argument("--nu", type=int, required=True)
    d.add_argument("--r", type=_range, required=True, metavar="LO..HI")
    d.add_argument("--points", type=_positive_int, default=200)
    d.add_argument("--out", help="CSV path (default stdout)")
    d.set_defaults(func=cmd_density)

    f = sub.add_parser("figure", help="write the data behind figure 1, 2, 3 or 4")
    f.add_argument("--id", type=int, choices=(1, 2, 3, 4), required=True)
    f.add_argument("--out", required=True)
    f.add_argument("--trials", type=_positive_int)
    stochastic(f)
    f.set_defaults(func=cmd_figure)

    c = sub.add_parser("compare", help="Monte Carlo radial histogram against the exact density")
    c.add_argument("--n", type=_positive_int, required=True)
    c.add_argument("--nu", type=int, required=True)
    c.add_argument("--trials", type=_positive_int, required=True)
    c.add_argument("--bins", type=_positive_int, default=harness.DEFAULT_BINS)
    c.add_argument("--r-max", type=float)
    c.add_argument("--out", help="output directory")
    stochastic(c)
    c.set_defaults(func=cmd_compare)

    mp = sub.add_parser("mp-baseline", help="Hermitian Wishart spectra against Marchenko-Pastur")
    mp.add_argument("--n", type=_positive_int, required=True)
    mp.add_argument("--m", type=_positive_int, required=True)
    mp.add_argument("--trials", type=_positive_int, required=True)
    mp.add_argument("--bins", type=_positive_int, default=60)
    mp.add_argument("--out", help="output directory")
    stochastic(mp)
    mp.set_defaults(func=cmd_mp_baseline)

    dn = sub.add_parser("denoise", help="flag cross-correlation eigenvalues beyond the null edge")
    dn.add_argument("--x", required=True, help="CSV panel X")
    dn.add_argument("--y", required=True, help="CSV panel Y")
    dn.add_argument("--null-trials", type=_positive_int, default=200)
    dn.add_argument("--threshold-k", type=float, default=ingest.DEFAULT_THRESHOLD_K)
    dn.add_argument("--regime", choices=("II", "III"), help="override the nu < 0.1 n rule")
    dn.add_argument("--out", required=True, help="report JSON path")
    stochastic(dn)
    dn.set_defaults(func=cmd_denoise)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (ConvergenceError, harness.FitError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
