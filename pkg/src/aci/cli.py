"""``aci`` command-line entry point.

Every subcommand writes one JSON document (or CSV where noted) to stdout or
``--output``.  Exit status: 0 on success, 1 when a computation fails, 2 on
usage errors.  All randomness derives from ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ACIError

DIST_HELP = (
    "distribution spec: NAME:key=value,... with NAME one of "
    "zsource:p=P, connected:delta=D, independent_uniform:n=N,m=M, identical_uniform:n=N; "
    'or file:PATH for a JSON document {"x_labels": [...], "y_labels": [...], "pmf": [[...], ...]}'
)
PROTOCOL_HELP = (
    'protocol document: {"setup": null | pmf document | "dist spec", '
    '"rounds": [{"sender": "alice"|"bob", "alphabet": N or [symbols], "rule": {"view key": [probs]}, '
    '"private": false}], "outputs": {"alice": {"view key": "symbol"}, "bob": {...}}}; '
    "view keys join the party's setup symbol, public messages and own private coins with commas, "
    "'*' matches any token"
)
REGION_HELP = 'region document: {"inner_points": [[r1, r2, z], ...], "support": [{"w": [..], "value": v, "certainty": c}]}'


class UsageError(Exception):
    def __init__(self, message: str, schema: str | None = None):
        super().__init__(message)
        self.schema = schema


@dataclass
class RunConfig:
    seed: int = 0
    sweep_g: int = 20
    restarts: int = 32
    q_size: int | None = None
    tol: float = 1e-9
    output: str | None = None
    format: str = "json"

    def opt_options(self):
        from .auxopt import OptOptions

        return OptOptions(q_size=self.q_size, restarts=self.restarts, tolerance=self.tol, seed=self.seed)


# --- input helpers ------------------------------------------------------------

def _dist(text: str):
    from .probdist import parse_dist_spec

    try:
        return parse_dist_spec(text)
    except ACIError as exc:
        raise UsageError(f"bad distribution {text!r}: {exc}", DIST_HELP) from None


def _read_json(path: str, schema: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path!r}: {exc.strerror}", schema) from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path!r} is not valid JSON: {exc}", schema) from None


def _region_input(args, cfg: RunConfig, pmf):
    from .region import KRegionApprox, region_for

    if getattr(args, "region", None):
        try:
            return KRegionApprox.from_dict(_read_json(args.region, REGION_HELP))
        except (KeyError, TypeError, ValueError, ACIError) as exc:
            raise UsageError(f"bad region document: {exc}", REGION_HELP) from None
    return region_for(pmf, cfg.sweep_g, cfg.opt_options(), args.workers)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.integer):
        return int(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _finite(x: float):
    return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")


# --- subcommands ------------------------------------------------------------------

def cmd_info(args, cfg):
    from .probdist import info_summary

    pmf = _dist(args.dist)
    return _dumps({"dist": args.dist, "shape": list(pmf.shape), **info_summary(pmf).as_dict()})


def cmd_gk(args, cfg):
    from .gkops import gk_decompose

    return _dumps({"dist": args.dist, **gk_decompose(_dist(args.dist)).as_dict()})


def cmd_ww(args, cfg):
    from .gkops import ww_monotones

    m = ww_monotones(_dist(args.dist))
    return _dumps({"dist": args.dist, **asdict(m)})


def cmd_region(args, cfg):
    from .region import certify_region

    pmf = _dist(args.dist)
    reg = _region_input(args, cfg, pmf)
    if args.certify:
        reg = certify_region(reg, pmf, max_directions=args.certify_max)
    return reg.to_json() + "\n"


def cmd_slice(args, cfg):
    from .probdist import info_summary
    from .region import slice_region

    pmf = _dist(args.dist)
    info = info_summary(pmf)
    reg = _region_input(args, cfg, pmf)
    sl = slice_region(reg, args.kind, args.level, info.I_XY, args.resolution, h_xy=info.H_XY)
    if cfg.format == "csv":
        return sl.to_csv()
    return _dumps({"dist": args.dist, "kind": sl.kind, "level": sl.axis_value,
                   "frontier": [list(map(float, p)) for p in sl.frontier]})


def cmd_wyner(args, cfg):
    from .probdist import mutual_information
    from .region import wyner_direct, wyner_gap

    pmf = _dist(args.dist)
    base = mutual_information(pmf)
    reg = _region_input(args, cfg, pmf)
    gap = wyner_gap(reg, base)
    out = {"dist": args.dist, "I_XY": base, "wyner_gap": gap, "wyner_ci_from_region": gap + base}
    if not args.no_direct:
        d = wyner_direct(pmf, restarts=args.direct_restarts, seed=cfg.seed)
        out["wyner_ci_direct"] = d.value
        out["direct_residual"] = d.residual
    return _dumps(out)


def cmd_bound(args, cfg):
    from .cryptobound import RECONSTRUCTION_NOTE, is_trivial, k_bound, ww_bound
    from .region import certify_region, region_for

    setup, target = _dist(args.setup), _dist(args.target)
    opts = cfg.opt_options()
    ww = ww_bound(setup, target)
    s_reg = region_for(setup, cfg.sweep_g, opts, args.workers)
    t_reg = region_for(target, cfg.sweep_g, opts, args.workers)
    certified = target.n_cells <= 4 and args.certify_max > 0
    if certified:
        t_reg = certify_region(t_reg, target, max_directions=args.certify_max)
    kb = k_bound(s_reg, t_reg, certified_only=args.certified_only)
    notes = [RECONSTRUCTION_NOTE]
    if args.certified_only and not certified:
        notes.append("the target has more than four support cells, so no direction is certified")
    return _dumps({
        "setup": args.setup,
        "target": args.target,
        "ww": ww.to_dict(),
        "kregion": kb.to_dict(),
        "target_trivial": is_trivial(t_reg),
        "notes": notes,
    })


def cmd_gaussian(args, cfg):
    from .gaussianci import GaussianPair, curve_csv, gaussian_curve, zero_dependency_sigma2

    if args.r_step <= 0 or args.r_max < 0:
        raise UsageError("--r-step must be positive and --r-max non-negative")
    pair = GaussianPair(args.rho)
    n = int(round(args.r_max / args.r_step))
    rates = [round(k * args.r_step, 12) for k in range(n + 1)]
    rows = gaussian_curve(pair, rates)
    if cfg.format == "csv":
        return curve_csv(rows)
    return _dumps({"rho": args.rho, "base_I": pair.mutual_information,
                   "sigma2_zero": _finite(zero_dependency_sigma2(pair)),
                   "rows": [list(r) for r in rows]})


def cmd_protocol(args, cfg):
    from .probdist import pmf_to_dict
    from .protosim import example_protocols, load_protocol, run_protocol, security_check

    examples = example_protocols()
    if args.example:
        if args.example not in examples:
            raise UsageError(f"unknown example {args.example!r}; choose from {sorted(examples)}")
        spec, target, _ = examples[args.example]
    elif args.spec:
        try:
            spec = load_protocol(_read_json(args.spec, PROTOCOL_HELP))
        except ACIError as exc:
            raise UsageError(f"bad protocol document: {exc}", PROTOCOL_HELP) from None
        target = None
    else:
        raise UsageError("give --spec FILE or --example NAME", PROTOCOL_HELP)
    if args.target:
        target = _dist(args.target)
    res = run_protocol(spec)
    out = {"output_pmf": pmf_to_dict(res.output_pmf), "total_mass": res.total_mass}
    if target is not None:
        out["verdict"] = security_check(res, target, cfg.tol).to_dict()
    return _dumps(out)


def cmd_suite(args, cfg):
    from .protosim import monotonicity_suite, suite_options

    opts = suite_options(restarts=args.suite_restarts, seed=cfg.seed)
    rep = monotonicity_suite(args.instances, cfg.seed, g=args.suite_g, slack=args.slack,
                             opts=opts, workers=args.workers)
    return _dumps(rep.to_dict())


# --- parser -----------------------------------------------------------------------

COMMANDS = {
    "info": (cmd_info, "entropies and mutual information"),
    "gk": (cmd_gk, "common-part decomposition"),
    "ww": (cmd_ww, "the three axis monotones"),
    "region": (cmd_region, "inner approximation of the tradeoff region"),
    "slice": (cmd_slice, "two-dimensional slice frontier"),
    "wyner": (cmd_wyner, "Wyner common information, from the region and directly"),
    "bound": (cmd_bound, "lower bounds on the rate n2/n1"),
    "gaussian": (cmd_gaussian, "symmetric Gaussian tradeoff curve"),
    "protocol": (cmd_protocol, "run a protocol and check its security"),
    "suite": (cmd_suite, "monotone-region property suite"),
}
CSV_COMMANDS = {"slice", "gaussian"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n{DIST_HELP}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--sweep-g", type=int, default=20, help="weight-grid resolution")
    common.add_argument("--restarts", type=int, default=32)
    common.add_argument("--q-size", type=int, default=None)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, default=None, help="processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="aci", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sp = {name: sub.add_parser(name, parents=[common], help=h) for name, (_, h) in COMMANDS.items()}
    for name in ("info", "gk", "ww", "region", "slice", "wyner"):
        sp[name].add_argument("--dist", required=True, help=DIST_HELP)
    for name in ("region", "slice", "wyner"):
        if name != "region":
            sp[name].add_argument("--region", help="precomputed region JSON instead of a sweep")
    sp["region"].add_argument("--certify", action="store_true", help="certify support values (at most 4 cells)")
    sp["region"].add_argument("--certify-max", type=int, default=None)
    sp["slice"].add_argument("--kind", choices=("rd", "ci", "RD", "CI"), required=True)
    sp["slice"].add_argument("--level", type=float, required=True)
    sp["slice"].add_argument("--resolution", type=int, default=20)
    sp["wyner"].add_argument("--no-direct", action="store_true")
    sp["wyner"].add_argument("--direct-restarts", type=int, default=20)
    sp["bound"].add_argument("--setup", required=True, help=DIST_HELP)
    sp["bound"].add_argument("--target", required=True, help=DIST_HELP)
    sp["bound"].add_argument("--certified-only", action="store_true")
    sp["bound"].add_argument("--certify-max", type=int, default=8,
                             help="target directions to certify when it has at most 4 cells")
    sp["gaussian"].add_argument("--rho", type=float, default=0.95)
    sp["gaussian"].add_argument("--r-max", type=float, default=2.0)
    sp["gaussian"].add_argument("--r-step", type=float, default=0.05)
    sp["protocol"].add_argument("--spec", help=PROTOCOL_HELP)
    sp["protocol"].add_argument("--example")
    sp["protocol"].add_argument("--target", help=DIST_HELP)
    sp["suite"].add_argument("--instances", type=int, default=20)
    sp["suite"].add_argument("--suite-g", type=int, default=6)
    sp["suite"].add_argument("--suite-restarts", type=int, default=8)
    sp["suite"].add_argument("--slack", type=float, default=5e-3)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(args.seed, args.sweep_g, args.restarts, args.q_size, args.tol, args.output, args.format)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    func = COMMANDS[args.command][0]
    try:
        if cfg.format == "csv" and args.command not in CSV_COMMANDS:
            raise UsageError(f"--format csv is only available for {', '.join(sorted(CSV_COMMANDS))}")
        text = func(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aci: error: {exc}", file=sys.stderr)
        if exc.schema:
            print(exc.schema, file=sys.stderr)
        return 2
    except (ACIError, ValueError) as exc:
        print(f"aci: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
