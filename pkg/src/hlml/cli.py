"""Command line entry point ``hlml``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from ._numeric import to_json
from .core.certify import check_dyadic_conditions, hl4_constant
from .core.instance import Instance
from .core.maximal import empirical_hl_lower_bound
from .covering import GaugedFamily, greedy_vitali, verify_cover
from .errors import HLError
from .euclid import (Ball, ClosedSetSpec, Window, dist_to_closed, verify_5b_cover, vitali_5b,
                     whitney_decompose)
from .harness import (MassDistribution, aggregate_reports, mass_density_region, run_experiment)


def _load(path):
    return json.loads(Path(path).read_text())


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_run(args):
    res = run_experiment(_load(args.spec), args.out)
    _emit({"status": res.status, "c": to_json(res.c), "summary": res.summary, "search": res.search})
    return 1 if res.status == "fail" else 0


def cmd_cover(args):
    data = _load(args.family)
    lam = Fraction(args.lam)
    if "balls" in data:
        balls = [Ball(tuple(b["center"]), float(b["radius"]), b.get("metric", "euclidean"))
                 for b in data["balls"]]
        sel = vitali_5b(balls, lam)
        verdict = verify_5b_cover(balls, sel)
        _emit({"chosen": list(sel.chosen), "residual_suprema": [float(r) for r in sel.residual_suprema],
               "valid": verdict.passed, "reason": verdict.reason})
        return 0 if verdict.passed else 1
    sets = data["sets"]
    ids = tuple(s["id"] for s in sets)
    members = tuple(frozenset(s["members"]) for s in sets)
    gauge = tuple(Fraction(str(s.get("gauge", len(s["members"])))) for s in sets)
    dil = None
    if all("dilation" in s for s in sets):
        dil = tuple(frozenset(s["dilation"]) | m for s, m in zip(sets, members))
    fam = GaugedFamily(members, gauge, lam, dil, ids)
    sel = greedy_vitali(fam)
    verdict = verify_cover(sel, fam)
    _emit({"chosen": sel.chosen_ids(fam), "ignored": [ids[k] for k in sel.ignored],
           "residual_suprema": [to_json(r) for r in sel.residual_suprema],
           "valid": verdict.passed, "reason": verdict.reason})
    return 0 if verdict.passed else 1


def _coords(text):
    return tuple(Fraction(x) for x in text.split(","))


def cmd_whitney(args):
    F = ClosedSetSpec.from_dict(_load(args.closedset))
    window = Window(_coords(args.window[0]), _coords(args.window[1]))
    cubes = whitney_decompose(F, window, args.scales[0], args.scales[1])
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scale", "index", "side", "dist"])
            for q in cubes:
                w.writerow([q.scale, " ".join(map(str, q.index)), to_json(q.side), dist_to_closed(q, F)])
    _emit({"count": len(cubes), "cubes": [q.to_dict() for q in cubes]})
    return 0


def cmd_hlc(args):
    inst = Instance.from_dict(_load(args.instance))
    rep = empirical_hl_lower_bound(inst, args.trials, args.ascent, args.seed)
    out = {"lower_bound": to_json(rep.lower_bound), "strategy": rep.strategy,
           "norm_exact": rep.norm_exact, "hull_constant": None, "dyadic_certified": None}
    if inst.n_sets:
        out["hull_constant"] = to_json(hl4_constant(inst, Fraction(args.lam)))
    dy = check_dyadic_conditions(inst)
    out["dyadic_certified"] = to_json(dy.certified_c)
    _emit(out)
    return 0


def cmd_massdensity(args):
    dist = MassDistribution.from_dict(_load(args.particles), args.alpha, args.side)
    est = mass_density_region(dist, args.res)
    _emit(est.to_dict())
    return 0 if est.volume <= est.bound else 1


def cmd_report(args):
    rows = aggregate_reports(args.dir)
    for r in rows:
        print(f"{r['run']:30s} {r['geometry']:12s} {r['status']:13s} c={r['c']} lower={r['lower_bound']}")
    return 1 if any(r["status"] == "fail" for r in rows) else 0


def build_parser():
    p = argparse.ArgumentParser(prog="hlml", description="Maximal-inequality experiments on finite families.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="run an experiment spec")
    s.add_argument("spec")
    s.add_argument("--out", help="directory for result.json / CSV files")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("cover", help="greedy disjoint selection on a family")
    s.add_argument("family")
    s.add_argument("--lambda", dest="lam", default="2")
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("whitney", help="Whitney cubes of a closed set")
    s.add_argument("closedset")
    s.add_argument("--window", nargs=2, metavar=("LO", "HI"), required=True,
                   help="comma-separated corner coordinates, e.g. 0,0 1,1")
    s.add_argument("--scales", nargs=2, type=int, metavar=("MIN", "MAX"), required=True)
    s.add_argument("--csv", help="also write one row per cube (scale, index, side, distance)")
    s.set_defaults(func=cmd_whitney)

    s = sub.add_parser("hlc", help="lower bound and certificates for an instance")
    s.add_argument("instance")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--ascent", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lambda", dest="lam", default="2")
    s.set_defaults(func=cmd_hlc)

    s = sub.add_parser("massdensity", help="volume where a cube captures more than alpha*M")
    s.add_argument("particles")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--side", type=float, default=1.0)
    s.add_argument("--res", type=float, default=0.05)
    s.set_defaults(func=cmd_massdensity)

    s = sub.add_parser("report", help="aggregate result.json files under a directory")
    s.add_argument("dir")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HLError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"hlml: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
