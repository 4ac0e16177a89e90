"""Command-line entry points.

Verbs:
    profile  build and verify the reference wave, write it as JSON
    run      run one configured experiment, emit CSV/JSON/series files
    sweep    amplitude or strength sweeps with a shared config
    check    standalone property suites (rel-bounds, flux-identity,
             elliptic-ratio, weight-bounds)

Exit codes: 0 success/pass, 2 usage or validation problem, 3 criteria
failed, 4 run aborted.
"""

import argparse
import json
import os
import sys
from dataclasses import replace

from .checks import SUITES, run_checks
from .config import Config, load_config
from .errors import NsplabError
from .lab import emit, run_experiment, run_sweep
from .profile import solve_profile, verify_profile


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="nsplab",
        description="Numerical laboratory for ion shock-profile stability",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", help="YAML configuration document")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--form", choices=["primitive", "divergence"],
                       help="override the spatial form")
        p.add_argument("--seed", type=int, help="override the RNG seed")

    common(sub.add_parser("profile", help="build and verify the reference wave"))
    common(sub.add_parser("run", help="run one experiment"))

    p_sweep = sub.add_parser("sweep", help="run a scaled family of experiments")
    common(p_sweep)
    p_sweep.add_argument("--kind", choices=["amplitude", "strength"],
                         default="amplitude")
    p_sweep.add_argument("--factors", default="1,0.5,0.25",
                         help="comma-separated scale factors")

    p_check = sub.add_parser("check", help="run property suites")
    common(p_check)
    p_check.add_argument("--suite", action="append", choices=sorted(SUITES),
                         help="suite to run (repeatable; default all)")
    return parser


def _load(args):
    cfg = load_config(args.config) if args.config else Config().validate()
    if args.form:
        cfg = replace(cfg, form=args.form)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    return cfg.validate()


def _write_json(path, doc):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except NsplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out_dir = cfg.out_dir

    try:
        if args.verb == "profile":
            es = cfg.endstates()
            prof = solve_profile(es, cfg.profile_params())
            report = verify_profile(prof)
            os.makedirs(out_dir, exist_ok=True)
            prof.save(os.path.join(out_dir, "profile.json"))
            _write_json(os.path.join(out_dir, "profile_report.json"),
                        report.as_dict())
            print(f"sigma={es.sigma:.6f} delta_S={es.delta_S:.6f} "
                  f"nodes={prof.xi_nodes.size} "
                  f"monotone={report.monotonicity_ok} "
                  f"theta_fit={report.theta_fit:.4f}")
            print(f"wrote {out_dir}/profile.json")
            return 0

        if args.verb == "run":
            result = run_experiment(cfg)
            emit(result, out_dir)
            verdict = result.verdicts.get("verdict", "fail")
            for name, c in result.verdicts.get("criteria", {}).items():
                print(f"{'PASS' if c['pass'] else 'FAIL'} {name}: value={c['value']}")
            print(f"verdict: {verdict}  -> {out_dir}/summary.json")
            return {"pass": 0, "fail": 3, "failed": 4}[verdict]

        if args.verb == "sweep":
            factors = tuple(float(x) for x in args.factors.split(","))
            _, summary = run_sweep(cfg, kind=args.kind, factors=factors,
                                   out_dir=out_dir)
            print(json.dumps(summary, indent=2, sort_keys=True))
            ok = all(v == "pass" for v in summary["verdicts"].values())
            return 0 if ok else 3

        if args.verb == "check":
            results = run_checks(cfg, args.suite)
            os.makedirs(out_dir, exist_ok=True)
            all_ok = True
            for name, doc in results.items():
                _write_json(os.path.join(out_dir, f"check_{name}.json"), doc)
                print(f"{'PASS' if doc['pass'] else 'FAIL'} {name}")
                all_ok &= doc["pass"]
            return 0 if all_ok else 3
    except NsplabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 2


if __name__ == "__main__":
    sys.exit(main())
