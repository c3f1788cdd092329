"""Command-line front end.

Exit codes: 0 success / inequality satisfied, 2 violation found (check, hr,
simulate --check, tightness verification failure), 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import boxworld, cube, finner, hribbon, quantum, tightness
from .distributions import DistributionError, JointDistribution, from_counts, make_family
from .network import Network, NetworkError, enumerate_extreme_fis

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2

BUILTIN_NETWORKS = {
    "triangle": Network.triangle,
    "bilocality": Network.bilocality,
    "common-source": lambda: Network.common_source(3),
}


class CliError(Exception):
    pass


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=_json_default) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def load_network(source: str) -> Network:
    """A JSON file, or ``triangle``, ``bilocality``, ``common-source``, ``path:N``, ``cycle:N``."""
    if source in BUILTIN_NETWORKS:
        return BUILTIN_NETWORKS[source]()
    kind, _, size = source.partition(":")
    if kind in ("path", "cycle") and size.isdigit():
        return getattr(Network, kind)(int(size))
    path = Path(source)
    if not path.exists():
        raise CliError(f"network {source!r} is neither a file nor a built-in name")
    return Network.load(path)


def load_distribution(source: str) -> tuple[JointDistribution, int | None]:
    """A JSON file (probabilities or counts), or ``ghz``, ``w``, ``uniform``, ``pq:P,Q``, ``r:R``.

    Returns the distribution and the sample total for counts files.
    """
    name, _, params = source.partition(":")
    if name in ("ghz", "w", "uniform") and not params:
        return make_family(name), None
    if name == "pq" and params:
        p, q = params.split(",")
        return make_family("pq", p=p, q=q), None
    if name == "r" and params:
        return make_family("r_mix", r=params), None
    path = Path(source)
    if not path.exists():
        raise CliError(f"distribution {source!r} is neither a file nor a built-in name")
    data = json.loads(path.read_text())
    if "counts" in data:
        return from_counts(data["alphabets"], data["counts"])
    return JointDistribution.from_dict(data), None


def _backend(args):
    return None if args.backend == "auto" else args.backend


# commands -------------------------------------------------------------------------


def cmd_check(args) -> int:
    net = load_network(args.network)
    P, total = load_distribution(args.dist)
    rep = finner.check_probability_form(net, P, tol=args.tol, backend=_backend(args),
                                        marginal_forms=args.marginal_forms or finner._is_bilocality_type(net))
    out = rep.to_dict()
    if total is not None:
        out["samples"] = total
        out["statistical_margin"] = max(1 / math.sqrt(total), args.tol)
    _emit(args, out)
    return EXIT_VIOLATED if rep.violated else EXIT_OK


def cmd_fis(args) -> int:
    net = load_network(args.network)
    verts = enumerate_extreme_fis(net, method=args.method)
    _emit(args, {"network": net.to_dict(), "half_integral": verts.half_integral,
                 "vertices": [[str(v) for v in vert] for vert in verts]})
    return EXIT_OK


def cmd_scan_pq(args) -> int:
    scan = finner.scan_pq_region(args.grid, tol=args.tol, jobs=args.jobs)
    _emit(args, scan.to_csv())
    return EXIT_OK


def cmd_scan_r(args) -> int:
    scan = finner.scan_r_line(args.grid, tol=args.tol, jobs=args.jobs)
    _emit(args, scan.to_csv())
    return EXIT_OK


def _simulate(args):
    if args.kind == "cube":
        s = cube.CubeStrategy.load(args.strategy) if args.strategy else cube.random_strategy(np.random.default_rng(args.seed))
        return Network.triangle(), cube.evaluate_cube(s)
    if args.kind == "quantum":
        if args.strategy:
            qs = quantum.QuantumStrategy.load(args.strategy)
        else:
            qs = quantum.random_strategy(Network.triangle(), args.dim, args.seed)
        return qs.net, quantum.evaluate_quantum(qs)
    if args.strategy:
        boxnet, programs = boxworld.load_wiring(args.strategy)
    else:
        boxnet, programs = boxworld.random_wiring(args.seed)
    return boxnet.net, boxworld.evaluate_wiring(boxnet, programs)[0]


def cmd_simulate(args) -> int:
    net, P = _simulate(args)
    out = {"distribution": P.to_dict()}
    code = EXIT_OK
    if args.check:
        rep = finner.check_probability_form(net, P, tol=args.tol)
        out["finner"] = rep.to_dict()
        code = EXIT_VIOLATED if rep.violated else EXIT_OK
    _emit(args, out)
    return code


def cmd_hr(args) -> int:
    P, _ = load_distribution(args.dist)
    point = [float(Fraction(x)) for x in args.point.split(",")]
    verdicts = []
    if args.route in ("norms", "both"):
        verdicts.append(hribbon.falsify_by_norms(P, point, restarts=args.restarts, seed=args.seed, tol=args.tol))
    if args.route in ("mi", "both"):
        verdicts.append(hribbon.falsify_by_mutual_information(P, point, restarts=args.restarts, seed=args.seed,
                                                              tol=args.tol, u_cap=args.u_cap))
    _emit(args, {"verdicts": [v.to_dict() for v in verdicts]})
    return EXIT_VIOLATED if any(v.status == hribbon.NOT_MEMBER for v in verdicts) else EXIT_OK


def cmd_tightness(args) -> int:
    net = load_network(args.network)
    targets = [t.strip() for t in args.targets.split(",")]
    backend = None if args.backend == "auto" else args.backend
    cert = tightness.build_certificate(net, targets, backend=backend)
    rep = tightness.verify_certificate(cert, tol=args.tol)
    _emit(args, {"certificate": cert.to_dict(), "verification": rep.to_dict(),
                 "distribution": tightness.certificate_distribution(cert).to_dict()})
    return EXIT_OK if rep.passed else EXIT_VIOLATED


def cmd_topology(args) -> int:
    P, total = load_distribution(args.dist)
    candidates = {c: load_network(c) for c in args.candidates}
    verdicts = finner.certify_topology(P, candidates, tol=args.tol, backend=_backend(args))
    out = {"candidates": [v.to_dict() for v in verdicts]}
    if total is not None:
        out["samples"] = total
        out["statistical_margin"] = max(1 / math.sqrt(total), args.tol)
    _emit(args, out)
    return EXIT_OK


# parser ---------------------------------------------------------------------------


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--backend", choices=("auto", "exact", "float"), default=d("auto"))
    p.add_argument("--tol", type=float, default=d(finner.LOG_GAP_TOL))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--jobs", type=int, default=d(1))
    p.add_argument("--out", default=d(None), help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netfinner", description="Finner-inequality tests for network correlations.")
    _add_globals(parser, False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check a distribution against a network")
    p.add_argument("--network", required=True)
    p.add_argument("--dist", required=True)
    p.add_argument("--marginal-forms", action="store_true", help="also check marginals over each FIS support")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fis", parents=[common], help="list extreme fractional independent sets")
    p.add_argument("--network", required=True)
    p.add_argument("--method", choices=("auto", "half", "general"), default="auto")
    p.set_defaults(func=cmd_fis)

    p = sub.add_parser("scan-pq", parents=[common], help="scan the (p, q) family, CSV output")
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(func=cmd_scan_pq)

    p = sub.add_parser("scan-r", parents=[common], help="scan the r-mixture line, CSV output")
    p.add_argument("--grid", type=int, default=4096)
    p.set_defaults(func=cmd_scan_r)

    p = sub.add_parser("simulate", parents=[common], help="evaluate a cube, quantum or boxworld strategy")
    p.add_argument("kind", choices=("cube", "quantum", "boxworld"))
    p.add_argument("--strategy", help="strategy JSON; a seeded random strategy when omitted")
    p.add_argument("--dim", type=int, default=2, help="local dimension for random quantum strategies")
    p.add_argument("--check", action="store_true", help="run the Finner check on the result")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("hr", parents=[common], help="hypercontractivity-ribbon membership search")
    p.add_argument("--dist", required=True)
    p.add_argument("--point", required=True, help="comma-separated exponents, e.g. 1/2,1/2,1/2")
    p.add_argument("--route", choices=("norms", "mi", "both"), default="both")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--u-cap", type=int, default=None)
    p.set_defaults(func=cmd_hr)

    p = sub.add_parser("tightness", parents=[common], help="build and verify a saturating strategy")
    p.add_argument("--network", required=True)
    p.add_argument("--targets", required=True, help="comma-separated P(A_j=1), e.g. 1/4,1/4,2^-3/2")
    p.set_defaults(func=cmd_tightness)

    p = sub.add_parser("topology", parents=[common], help="rule out candidate networks for a distribution")
    p.add_argument("--dist", required=True, help="distribution or counts file")
    p.add_argument("--candidates", nargs="+", required=True)
    p.set_defaults(func=cmd_topology)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors; 2 is reserved for violations
        return EXIT_OK if not exc.code else EXIT_ERROR
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError, json.JSONDecodeError, NetworkError, DistributionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
