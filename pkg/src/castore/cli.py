"""Command-line drivers: ``castore <command> [flags]``.

Exit codes: 0 success, 1 runtime or numeric error, 2 usage error.
Every output file gets a ``<output>.manifest.json`` next to it.
"""

import argparse
import csv
import json
import logging
import math
import sys
import time

import numpy as np

from . import __version__
from .complexity import (
    FitError,
    complexity_estimate,
    fit_power_law,
    geometric_points,
    information_curve,
)
from .compressor import CompressedStream, DecodeError, SymbolStream, compress, decompress
from .entropy import entropy_profile
from .genomics import (
    DEFAULT_WINDOWS,
    FastaError,
    extensivity_report,
    parse_fasta,
    read_region_labels,
    write_reports_csv,
)
from .symdyn import (
    LAMBDA_INF,
    NumericError,
    logistic_experiment,
    manneville_experiment,
)

log = logging.getLogger("castore")


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- helpers


def _int_list(text):
    try:
        vals = [int(float(v)) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range(text):
    vals = _float_list(text)
    if len(vals) != 2 or not 0 < vals[0] < vals[1]:
        raise argparse.ArgumentTypeError(f"expected LO,HI with 0 < LO < HI, got {text!r}")
    return tuple(vals)


def read_config(path):
    """key = value lines; keys use flag spelling with '-' or '_'."""
    cfg = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (p.strip() for p in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def load_symbols(path, alphabet):
    with open(path, "rb") as fh:
        data = fh.read()
    if alphabet == "bytes":
        return SymbolStream(256, np.frombuffer(data, dtype=np.uint8).astype(np.int64))
    try:
        return SymbolStream.from_text(data.decode("ascii"), alphabet)
    except (UnicodeDecodeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}")


def write_manifest(output, args, argv, started, outputs):
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "command": args.command,
        "argv": argv,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in config.items()},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "outputs": outputs,
        "duration_seconds": round(time.time() - started, 3),
    }
    with open(f"{output}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)


def _fmt(x):
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return x


# ---------------------------------------------------------------- commands


def cmd_compress(args):
    stream = load_symbols(args.input, args.alphabet)
    c = compress(stream)
    with open(args.output, "wb") as fh:
        fh.write(c.to_bytes())
    n = len(stream)
    bps = c.bit_length / n if n else 0.0
    print(f"n={n} bits={c.bit_length} payload_bits={c.payload_bits} bits_per_symbol={bps:.6f}")
    return [args.output]


def cmd_decompress(args):
    with open(args.input, "rb") as fh:
        c = CompressedStream.from_bytes(fh.read())
    stream = decompress(c)
    if args.alphabet == "bytes":
        if stream.alphabet_size > 256:
            raise UsageError("container alphabet exceeds 256; pass --alphabet")
        data = stream.symbols.astype(np.uint8).tobytes()
    else:
        if stream.alphabet_size != len(args.alphabet):
            raise UsageError(f"container alphabet has {stream.alphabet_size} symbols, "
                             f"--alphabet has {len(args.alphabet)}")
        data = stream.to_text(args.alphabet).encode("ascii")
    with open(args.output, "wb") as fh:
        fh.write(data)
    print(f"n={len(stream)}")
    return [args.output]


def cmd_curve(args):
    stream = load_symbols(args.input, args.alphabet)
    points = args.sample_points or geometric_points(len(stream)).tolist()
    if max(points) > len(stream):
        raise UsageError(f"sample point {max(points)} exceeds input length {len(stream)}")
    curve = information_curve(stream, sorted(set(points)), source_id=args.input)
    curve.to_csv(args.out)
    est = complexity_estimate(curve)
    summary = {"bits_per_symbol": est.bits_per_symbol, "trend": est.trend,
               "relative_slope": est.relative_slope}
    try:
        summary["fit"] = json.loads(fit_power_law(curve, args.fit_range).to_json())
    except FitError as exc:
        summary["fit"] = {"error": str(exc)}
    with open(f"{args.out}.fit.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    print(f"n={int(curve.n[-1])} bits={int(curve.bits[-1])} "
          f"bits_per_symbol={est.bits_per_symbol:.6f} trend={est.trend}")
    return [args.out, f"{args.out}.fit.json"]


def cmd_entropy(args):
    stream = load_symbols(args.input, args.alphabet)
    profile = entropy_profile(stream, min(args.l_max, len(stream)))
    profile.to_csv(args.out)
    return [args.out]


def cmd_manneville(args):
    res = manneville_experiment(
        args.z, n_orbits=args.orbits, orbit_length=args.length, sampling=args.sampling,
        seed=args.seed, k_max=args.k_max, sample_points=args.sample_points,
        fit_range=args.fit_range,
    )
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["orbit_id", "exponent", "residual"])
        for o in res.orbits:
            w.writerow([o.orbit_id, _fmt(o.exponent), _fmt(o.residual)])
        w.writerow(["mean", _fmt(res.mean_exponent), ""])
        w.writerow(["theory", _fmt(res.theoretical_exponent), ""])
    failed = sum(1 for o in res.orbits if o.error)
    print(f"z={args.z} orbits={len(res.orbits)} failed={failed} "
          f"mean_exponent={res.mean_exponent:.4f} theory={res.theoretical_exponent:.4f}")
    return [args.out]


def cmd_logistic(args):
    runs = logistic_experiment(args.lambdas, orbit_length=args.length, seed=args.seed,
                               sample_points=args.sample_points)
    summary_path = f"{args.out}.summary.csv"
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "n", "bits", "s_ratio"])
        for r in runs:
            if r.error:
                continue
            for (n, s), b in zip(r.s_ratio, r.curve.bits.tolist()):
                w.writerow([repr(r.lam), n, int(b), repr(s)])
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "bits_per_symbol", "trend", "s_trend", "exponent", "error"])
        for r in runs:
            if r.error:
                w.writerow([repr(r.lam), "", "", "", "", r.error])
            else:
                w.writerow([repr(r.lam), repr(r.estimate.bits_per_symbol), r.estimate.trend,
                            repr(r.s_trend), _fmt(r.exponent), ""])
    for r in runs:
        if r.error:
            print(f"lambda={r.lam!r} error={r.error}")
        else:
            print(f"lambda={r.lam!r} bits_per_symbol={r.estimate.bits_per_symbol:.4f} "
                  f"S={r.s_ratio[-1][1]:.3f} s_trend={r.s_trend:+.3f}")
    return [args.out, summary_path]


def cmd_dna(args):
    seqs = parse_fasta(args.fasta)
    if args.labels:
        labels = read_region_labels(args.labels)
        for s in seqs:
            s.region_label = labels.get(s.id, s.region_label)
    reports = [extensivity_report(s, args.windows, seed=args.seed) for s in seqs]
    write_reports_csv(reports, args.out)
    summary_path = f"{args.out}.summary.json"
    with open(summary_path, "w") as fh:
        json.dump([{"sequence_id": r.sequence_id, "extensive": r.extensive, "knee": r.knee,
                    "flatness": r.flatness, "raw_flatness": r.raw_flatness,
                    "dropped": s.dropped, "region_label": s.region_label,
                    "warnings": r.original.warnings}
                   for r, s in zip(reports, seqs)], fh, indent=2)
    for r in reports:
        print(f"{r.sequence_id}: extensive={r.extensive} flatness={r.flatness:.4f} knee={r.knee}")
    return [args.out, summary_path]


# ------------------------------------------------------------------ parser


def build_parser():
    p = argparse.ArgumentParser(prog="castore", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_seed=True):
        sp.add_argument("--config", help="key=value file supplying flag defaults")
        sp.add_argument("--out", required=True, help="output CSV path")
        if with_seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--sample-points", type=_int_list, default=None,
                        help="comma-separated prefix lengths (default: log-spaced)")
        sp.add_argument("--fit-range", type=_range, default=None, help="LO,HI for the power-law fit")

    alpha = dict(default="bytes", help="'bytes' or the ordered symbol characters, e.g. ACGT")

    sp = sub.add_parser("compress", help="compress a file into the bit container")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--alphabet", **alpha)
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help="restore a file from a container")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--alphabet", **alpha)
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("curve", help="information curve of a file")
    sp.add_argument("input")
    sp.add_argument("--alphabet", **alpha)
    common(sp, with_seed=False)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("entropy", help="empirical entropy profile of a file")
    sp.add_argument("input")
    sp.add_argument("--alphabet", **alpha)
    sp.add_argument("--l-max", type=int, default=8)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("manneville", help="growth exponents of Manneville orbits")
    sp.add_argument("--z", type=float, default=4.0)
    sp.add_argument("--orbits", type=int, default=20)
    sp.add_argument("--length", type=int, default=10 ** 6)
    sp.add_argument("--sampling", choices=["uniform", "invariant_burn_in"], default="uniform")
    sp.add_argument("--k-max", type=int, default=64)
    common(sp)
    sp.set_defaults(func=cmd_manneville)

    sp = sub.add_parser("logistic", help="S(n) curves of logistic orbits")
    sp.add_argument("--lambda", dest="lambdas", type=_float_list, default=None,
                    help=f"comma-separated parameters (default: bundled ladder around {LAMBDA_INF})")
    sp.add_argument("--length", type=int, default=10 ** 6)
    common(sp)
    sp.set_defaults(func=cmd_logistic)

    sp = sub.add_parser("dna", help="windowed complexity spectra of FASTA records")
    sp.add_argument("--fasta", required=True)
    sp.add_argument("--labels", help="sidecar of 'id<TAB>label' lines")
    sp.add_argument("--windows", type=_int_list, default=list(DEFAULT_WINDOWS))
    common(sp)
    sp.set_defaults(func=cmd_dna)
    return p


def _validate(args):
    if args.command == "manneville":
        if args.z <= 1:
            raise UsageError("--z must exceed 1")
        if args.orbits < 1 or args.length < 1:
            raise UsageError("--orbits and --length must be positive")
        if args.k_max < 2:
            raise UsageError("--k-max must be >= 2")
    if args.command == "logistic":
        if args.lambdas is not None and any(not 1 <= l <= 4 for l in args.lambdas):
            raise UsageError("--lambda values must lie in [1, 4]")
        if args.length < 4:
            raise UsageError("--length must be >= 4")
    if args.command == "dna" and any(w < 1 for w in args.windows):
        raise UsageError("--windows must be positive")
    if args.command == "entropy" and args.l_max < 1:
        raise UsageError("--l-max must be >= 1")
    if getattr(args, "sample_points", None) and min(args.sample_points) < 0:
        raise UsageError("--sample-points must be non-negative")


def parse_args(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            dest = "lambdas" if key == "lambda" else key
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r}")
            action = known[dest]
            defaults[dest] = action.type(value) if action.type else value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(parser, argv)
        _validate(args)
    except SystemExit as exc:   # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"castore: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        outputs = args.func(args)
    except UsageError as exc:
        print(f"castore: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DecodeError, FastaError, NumericError, FitError, ValueError) as exc:
        print(f"castore: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in outputs:
        write_manifest(path, args, argv, started, outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
