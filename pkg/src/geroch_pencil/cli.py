"""Command line entry point: analyze, single-k and catalog."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import CATALOG_NAMES
from .errors import GerochPencilError, ParseError
from . import report as rp
from .tensor_core import wave_covector

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


def _floats(text, what):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"cannot parse {what} {text!r}") from exc


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _velocity(policy):
    if policy in (None, "default"):
        return None, "default"
    if policy.startswith("constant:"):
        path = policy.split(":", 1)[1]
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        N = np.array(data["N_free"] if isinstance(data, dict) else data, dtype=float)
        return N, f"constant:{path}"
    raise ParseError(f"unknown velocity policy {policy!r}")


def cmd_analyze(args):
    symbol, generator = rp.load_system(args.system)
    gram = rp.load_gram(args.gram, symbol.u)
    constant_N, label = _velocity(args.velocity_policy)
    if constant_N is not None and constant_N.ndim == 1 and constant_N.size == 0:
        constant_N = constant_N.reshape(symbol.c, 0)
    report = rp.analyze(symbol, generator, samples=args.samples, seed=args.seed, tol=args.tol, gram=gram,
                        threshold=args.threshold, constant_N=constant_N, jobs=args.jobs,
                        gram_label=args.gram or "identity", policy_label=label)
    if args.report:
        # the report path gets JSON and a sibling .txt gets the human summary
        _emit(rp.dumps_report(report), args.report)
        _emit(rp.render_text(report), str(Path(args.report).with_suffix(".txt")))
        v = report["verdicts"]
        print(" ".join(f"{key}={'true' if v[key]['value'] else 'false'}" for key in ("hyperbolic", "SH", "SS_SH")))
    else:
        _emit(rp.dumps_report(report) if args.format == "json" else rp.render_text(report), None)
    if args.csv:
        rp.write_csv(report, args.csv)
    return EXIT_OK if rp.all_verdicts_true(report) else EXIT_NEGATIVE


def cmd_single_k(args):
    symbol, generator = rp.load_system(args.system)
    gram = rp.load_gram(args.gram, symbol.u)
    spatial = _floats(args.k, "wave vector")
    if len(spatial) != symbol.n_space:
        raise ParseError(f"--k needs {symbol.n_space} components")
    k = wave_covector(spatial)
    rec = rp.single_k(symbol, k, generator, tol=args.tol, gram=gram)
    text = json.dumps(rec, indent=2) + "\n" if args.format == "json" else rp.render_single_text(rec)
    _emit(text, args.report)
    good = (rec["structure"]["verified"] == "lemma2_certified" and rec["max_eig_imag"] == 0.0
            and rec.get("condition_v", True))
    return EXIT_OK if good else EXIT_NEGATIVE


def cmd_catalog(args):
    shift = _floats(args.shift, "shift")
    if len(shift) != 3:
        raise ParseError("--shift needs three components")
    _emit(rp.catalog_system_text(args.name, args.lapse, shift), args.output)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="geroch-pencil", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("system", help="system definition JSON file")
        sp.add_argument("--tol", type=float, default=1e-10, help="relative rank tolerance")
        sp.add_argument("--gram", default=None, help="JSON file with a u x u positive definite matrix")
        sp.add_argument("--report", default=None, help="write the report here instead of stdout (analyze adds a .txt summary)")
        sp.add_argument("--format", choices=("json", "text"), default="json")

    a = sub.add_parser("analyze", help="full pipeline over seeded wave vectors")
    common(a)
    a.add_argument("--samples", type=int, default=200)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--threshold", type=float, default=1e-3, help="minimum cosine for the SH verdict")
    a.add_argument("--velocity-policy", default="default", help="default | constant:<file with N_free>")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--csv", default=None)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("single-k", help="analysis at one wave vector")
    common(s)
    s.add_argument("--k", required=True, help="comma separated spatial components")
    s.set_defaults(func=cmd_single_k)

    c = sub.add_parser("catalog", help="emit a catalog system file")
    c.add_argument("name", help=f"one of {', '.join(CATALOG_NAMES)}")
    c.add_argument("--lapse", type=float, default=1.0)
    c.add_argument("--shift", default="0,0,0")
    c.add_argument("--output", "-o", default=None)
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GerochPencilError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
