"""Command-line entry point for instance generation, studies, and reports."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, hamiltonians, instances, metrics


def _parse_n_range(text: str) -> list[int]:
    """Accept '4,6,8' comma lists and '4-10' inclusive ranges."""
    sizes: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "-" in token:
            lo, hi = token.split("-", 1)
            sizes.extend(range(int(lo), int(hi) + 1))
        else:
            sizes.append(int(token))
    if not sizes:
        raise argparse.ArgumentTypeError(f"no sizes in {text!r}")
    return sizes


def _parse_tf(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _add_study_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file with ExperimentConfig fields")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--n-range", type=_parse_n_range, default=None,
                        help="sizes, e.g. 4,6,8,10 or 4-10")
    parser.add_argument("--instances", type=int, default=None)
    parser.add_argument("--tf", type=_parse_tf, default=None,
                        help="annealing time(s), e.g. 1 or 1,2,5")
    parser.add_argument("--algorithms", type=str, default=None,
                        help=f"comma list from {','.join(hamiltonians.KINDS)}")
    parser.add_argument("--dt", type=float, default=None,
                        help="integrator step override")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--full", action="store_true",
                        help="paper-scale grid (500 instances, up to N=12)")
    parser.add_argument("--hard-seed", type=int, default=None,
                        help="designated hard-instance seed")
    parser.add_argument("--out", type=Path, required=True,
                        help="output directory")


def _build_config(study: str, args: argparse.Namespace) -> experiments.ExperimentConfig:
    payload: dict = {}
    if args.config is not None:
        payload.update(json.loads(Path(args.config).read_text()))
    payload["study"] = study
    payload["out_dir"] = str(args.out)
    overrides = {
        "master_seed": args.seed,
        "n_range": args.n_range,
        "instances": args.instances,
        "t_f": args.tf,
        "dt": args.dt,
        "workers": args.workers,
        "hard_seed": args.hard_seed,
    }
    if args.algorithms is not None:
        overrides["algorithms"] = [a.strip() for a in args.algorithms.split(",")]
    if args.full:
        overrides["full"] = True
    payload.update({k: v for k, v in overrides.items() if v is not None})
    return experiments.ExperimentConfig.from_dict(payload)


def _cmd_study(study: str, args: argparse.Namespace) -> int:
    cfg = _build_config(study, args)
    report = experiments.run_study(cfg)
    for path in report.files:
        print(f"wrote {path}")
    stats = report.summary.get("run_stats", {})
    print(f"computed {stats.get('computed', 0)} runs "
          f"({stats.get('resumed', 0)} resumed)")
    for fit in report.summary.get("fits", []):
        print(f"  {fit['algorithm']}/{fit['schedule']}: "
              f"alpha={fit['alpha']:.3f} beta={fit['beta']:.3f} "
              f"residual={fit['residual']:.3f}")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for idx in range(args.count):
        seed = experiments.derive_instance_seed(args.seed, args.n, idx)
        spec = instances.generate_instance(seed, args.n)
        problem = instances.qubo_to_ising(instances.to_qubo(spec))
        payload = {
            "portfolio": json.loads(instances.portfolio_to_json(spec)),
            "ising": json.loads(instances.ising_to_json(problem)),
        }
        path = out / f"instance_n{args.n}_{idx:04d}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    records = metrics.read_records_csv(args.records)
    groups: dict[tuple[str, str], list] = {}
    for rec in records:
        groups.setdefault((rec.algorithm, rec.schedule), []).append(rec)
    fits = []
    for (kind, schedule), recs in sorted(groups.items()):
        points, excluded = metrics.aggregate_mean_tts(recs)
        if len(points) < 3:
            print(f"{kind}/{schedule}: skipped ({len(points)} sizes)")
            continue
        fit = metrics.fit_scaling(points)
        entry = fit.as_dict(algorithm=kind, schedule=schedule)
        entry["excluded"] = excluded
        fits.append(entry)
        print(f"{kind}/{schedule}: alpha={fit.alpha:.4f} beta={fit.beta:.4f} "
              f"residual={fit.residual:.4f} excluded={excluded}")
    if args.out is not None:
        Path(args.out).write_text(json.dumps({"fits": fits}, indent=2,
                                             sort_keys=True) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    summary_path = Path(args.dir) / "summary.json"
    if not summary_path.exists():
        print(f"no summary.json under {args.dir}", file=sys.stderr)
        return 1
    summary = json.loads(summary_path.read_text())
    print(f"study: {summary.get('study')}")
    for fit in summary.get("fits", []):
        print(f"  {fit['algorithm']}/{fit['schedule']}: "
              f"alpha={fit['alpha']:.3f} beta={fit['beta']:.3f} "
              f"residual={fit['residual']:.3f}")
    if "enhancement_fraction_vs_standard" in summary:
        for kind, frac in summary["enhancement_fraction_vs_standard"].items():
            print(f"  {kind} beats standard on {frac:.0%} of instances")
    if "fraction_points_above_one" in summary:
        print(f"  R > 1 on {summary['fraction_points_above_one']:.0%} "
              f"of (algorithm, t_f) points")
    if "min_gap" in summary:
        print(f"  min gap {summary['min_gap']:.3e} "
              f"at s = {summary['min_gap_location']:.3f}")
    stats = summary.get("run_stats", {})
    if stats:
        print(f"  max norm drift {stats.get('max_norm_drift', 0.0):.2e}, "
              f"{len(stats.get('failures', []))} failures")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qaportfolio",
        description="Quantum-annealing portfolio-optimization benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write instance JSON files")
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--out", type=Path, required=True)

    for study, command in [("forward_scaling", "forward-scaling"),
                           ("forward_success", "forward-success"),
                           ("reverse_ratio", "reverse-ratio"),
                           ("reverse_scaling", "reverse-scaling"),
                           ("spectrum", "spectrum")]:
        p = sub.add_parser(command, help=f"run the {study} study")
        _add_study_args(p)
        p.set_defaults(study=study)

    fit = sub.add_parser("fit", help="fit scaling exponents from a records CSV")
    fit.add_argument("--records", type=Path, required=True)
    fit.add_argument("--out", type=Path, default=None)

    rep = sub.add_parser("report", help="print a study summary")
    rep.add_argument("--dir", type=Path, required=True)

    args = parser.parse_args(argv)
    if args.command == "generate":
        return _cmd_generate(args)
    if args.command == "fit":
        return _cmd_fit(args)
    if args.command == "report":
        return _cmd_report(args)
    return _cmd_study(args.study, args)


if __name__ == "__main__":
    sys.exit(main())
