"""Command-line entry point: train -> optimize -> simulate -> report.

Exit codes: 0 success, 2 input error, 3 infeasible deployment, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import defaults, deploy, ensemble, report, sim, synth

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def cmd_train(args):
    if args.synthetic:
        if args.synthetic == "gaussian":
            data = synth.gaussian_dataset(n_rows=args.rows, seed=args.seed,
                                          separation=args.separation)
        else:
            data = synth.traffic_feature_dataset(n_flows_per_class=args.rows // 2,
                                                 seed=args.seed)
    else:
        if not args.dataset:
            raise CliError("provide a dataset path or --synthetic")
        path = Path(args.dataset)
        if not path.exists():
            raise CliError(f"dataset not found: {path}")
        try:
            data = synth.load_dataset_csv(path)
        except ValueError as exc:
            raise CliError(f"invalid dataset: {exc}") from exc
    train, test = synth.train_test_split(data, test_fraction=0.3, seed=args.seed)
    sl = ensemble.build_decomposed_ensemble(
        train, n_learners=args.n, subsample_ratio=args.ratio,
        max_depth=args.depth, seed=args.seed,
    )
    ensemble.save_bundle(sl, args.out)
    rep = ensemble.evaluate(sl, test)
    print(f"wrote bundle with {sl.n} weak learners to {args.out}")
    for key, value in rep.as_dict().items():
        print(f"  {key}: {value}")
    return 0


def cmd_predict(args):
    try:
        sl = ensemble.load_bundle(args.bundle)
    except (OSError, ensemble.BundleError) as exc:
        raise CliError(f"cannot load bundle: {exc}") from exc
    try:
        data = synth.load_dataset_csv(args.data)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load dataset: {exc}") from exc
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "prediction"])
        for i, row in enumerate(data.features):
            w.writerow([i, ensemble.predict_majority(sl, row)])
    print(f"wrote {len(data)} predictions to {args.out}")
    return 0


def cmd_optimize(args):
    try:
        g = deploy.load_topology(args.topology)
        commodities = deploy.load_commodities(args.commodities)
    except (OSError, KeyError, ValueError) as exc:
        raise CliError(f"cannot load inputs: {exc}") from exc
    params = deploy.BrkgaParams(
        population=args.population, generations=args.generations,
        seed=args.seed, replicas_per_color=args.replicas,
    )
    if args.exact:
        plan = deploy.brute_force_placement(
            g, commodities, args.n, args.replicas, mode=args.mode)
    else:
        plan = deploy.brkga_solve(g, commodities, args.n, params, mode=args.mode)
    if not plan.feasible:
        uncovered = [f"{r.commodity.src_host}->{r.commodity.dst_host}"
                     for r in plan.routes if not r.feasible]
        raise CliError(
            f"no feasible deployment: uncovered commodities {uncovered}",
            code=EXIT_INFEASIBLE,
        )
    deploy.save_plan(plan, args.out)
    print(f"wrote plan to {args.out}: objective={plan.objective:.3f} "
          f"coverage={plan.coverage:.3f} stretch={plan.stretch_pct:.3f}%")
    return 0


def _parse_sweep(text):
    try:
        start, stop, step = (int(x) for x in text.split(":"))
    except ValueError:
        raise CliError(f"bad sweep spec {text!r}, expected start:stop:step")
    if step < 1 or stop < start:
        raise CliError(f"bad sweep spec {text!r}")
    return list(range(start, stop + 1, step))


def _load_manifest(path):
    path = Path(path)
    if not path.exists():
        raise CliError(f"manifest not found: {path}")
    with open(path) as fh:
        doc = json.load(fh)
    base = path.parent
    resolved = {}
    for key in ("topology", "wl_plan", "sl_plan", "bundle", "cost_model"):
        if key in doc:
            p = base / doc[key]
            if not p.exists():
                raise CliError(f"manifest references missing file: {p}")
            resolved[key] = p
    for key in ("benign_pairs", "malicious_pairs", "seed", "duration_s",
                "benign_rate", "attack_rate", "out_dir"):
        if key in doc:
            resolved[key] = doc[key]
    if "seed" not in resolved:
        raise CliError("manifest must pin an explicit seed")
    return resolved


def cmd_simulate(args):
    m = _load_manifest(args.manifest)
    g = deploy.load_topology(m["topology"])
    bundle = ensemble.load_bundle(m["bundle"])
    cost = sim.load_cost_model(m["cost_model"]) if "cost_model" in m else sim.CostModel()
    wl_plan = deploy.load_plan(m["wl_plan"])
    sl_plan = deploy.load_plan(m["sl_plan"])
    benign_pairs = [tuple(p) for p in m["benign_pairs"]]
    malicious_pairs = [tuple(p) for p in m["malicious_pairs"]]
    out_dir = Path(m.get("out_dir", "."))
    if args.out_dir:
        out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / "metrics.csv"

    rates = _parse_sweep(args.sweep_attack) if args.sweep_attack else [
        int(m.get("attack_rate", 100))
    ]
    try:
        rows = sim.compare_deployments(
            g, wl_plan, sl_plan, bundle, rates,
            benign_pairs, malicious_pairs,
            benign_rate=float(m.get("benign_rate", 100.0)),
            seed=int(m["seed"]),
            duration_s=float(m.get("duration_s", 300.0)),
            cost_model=cost,
            progress=(lambda rate, mode, rep: print(
                f"rate={rate} mode={mode} goodput={rep.throughput_bps / 1e6:.3f} Mbit/s "
                f"util={rep.hosting_mean_util:.3f} tti={rep.tti_mean_ms:.1f} ms",
                flush=True))
            if args.verbose else None,
        )
    except sim.SimError as exc:
        metrics_path.unlink(missing_ok=True)
        raise CliError(str(exc), code=EXIT_INFEASIBLE) from exc
    with open(metrics_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(sim.SWEEP_COLUMNS)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {metrics_path}")
    if args.figures:
        for fig in report.render_sweep_figures(metrics_path, out_dir):
            print(f"wrote {fig}")
    return 0


def cmd_report(args):
    try:
        figures = report.render_sweep_figures(args.metrics, args.out_dir)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot render figures: {exc}") from exc
    for fig in figures:
        print(f"wrote {fig}")
    return 0


def cmd_scaffold(args):
    """Write the reference topology, plans, cost model, and a manifest."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = defaults.reference_topology()
    deploy.save_topology(g, out / "topology.json")
    with open(out / "commodities.json", "w") as fh:
        json.dump([{"src": s, "dst": d} for s, d in
                   defaults.BENIGN_PAIRS + defaults.MALICIOUS_PAIRS], fh, indent=1)
    with open(out / "benign_commodities.json", "w") as fh:
        json.dump([{"src": s, "dst": d} for s, d in defaults.BENIGN_PAIRS], fh, indent=1)
    deploy.save_plan(defaults.default_wl_plan(g), out / "wl_plan.json")
    deploy.save_plan(defaults.default_sl_plan(g), out / "sl_plan.json")
    sim.save_cost_model(sim.CostModel(), out / "cost_model.json")
    manifest = {
        "topology": "topology.json",
        "wl_plan": "wl_plan.json",
        "sl_plan": "sl_plan.json",
        "bundle": "bundle.json",
        "cost_model": "cost_model.json",
        "benign_pairs": [list(p) for p in defaults.BENIGN_PAIRS],
        "malicious_pairs": [list(p) for p in defaults.MALICIOUS_PAIRS],
        "benign_rate": 100.0,
        "duration_s": 300.0,
        "seed": 1,
        "out_dir": "results",
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    print(f"experiment workspace written to {out} "
          f"(train a bundle into {out / 'bundle.json'} next)")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="inips",
                                description="distributed in-network IPS toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train and decompose a model bundle")
    t.add_argument("dataset", nargs="?", help="labeled dataset CSV")
    t.add_argument("--synthetic", choices=["gaussian", "traffic"],
                   help="generate training data instead of loading a file")
    t.add_argument("--separation", default="easy")
    t.add_argument("--rows", type=_positive_int, default=4000)
    t.add_argument("--n", type=_positive_int, default=3)
    t.add_argument("--depth", type=_positive_int, default=7)
    t.add_argument("--ratio", type=float, default=0.33)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("-o", "--out", required=True)
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="classify dataset rows with a bundle")
    pr.add_argument("--bundle", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("-o", "--out", required=True)
    pr.set_defaults(func=cmd_predict)

    o = sub.add_parser("optimize", help="compute a deployment plan")
    o.add_argument("topology")
    o.add_argument("commodities")
    o.add_argument("--n", type=_positive_int, default=3)
    o.add_argument("--replicas", type=_positive_int, default=1)
    o.add_argument("--mode", choices=[deploy.WL_MODE, deploy.SL_MODE],
                   default=deploy.WL_MODE)
    o.add_argument("--exact", action="store_true",
                   help="use exhaustive enumeration instead of the BRKGA")
    o.add_argument("--population", type=_positive_int, default=100)
    o.add_argument("--generations", type=_positive_int, default=200)
    o.add_argument("--seed", type=int, required=True)
    o.add_argument("-o", "--out", required=True)
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", help="run a scenario or attack-rate sweep")
    s.add_argument("manifest")
    s.add_argument("--sweep-attack", metavar="START:STOP:STEP")
    s.add_argument("--out-dir")
    s.add_argument("--figures", action="store_true",
                   help="render figures next to the metrics CSV")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="render figures from a metrics CSV")
    r.add_argument("metrics")
    r.add_argument("-o", "--out-dir")
    r.set_defaults(func=cmd_report)

    sc = sub.add_parser("scaffold", help="write the reference experiment files")
    sc.add_argument("out_dir")
    sc.set_defaults(func=cmd_scaffold)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except deploy.DeployError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ensemble.BundleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except sim.SimError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
