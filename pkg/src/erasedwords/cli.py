"""Command-line harness.

Subcommands: density, simulate, boundary, filtration, plotdata. Exit codes:
0 all checks pass, 1 at least one check failed, 2 configuration or I/O
error. Identical configs and seeds produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .experiments import (
    battery_median_pvalues,
    bound_sweep,
    curve_trend,
    directing_measure_trend,
    modal_word_baseline,
    position_side_match_curve,
    relabel_identity_violations,
    resampling_fixed_point_values,
    seed_reconstruction_violations,
    seed_side_match_curve,
    two_proportion_pvalue,
)
from .innovations import bayes_letter_map, curve_anchor_data, simulate_dual_trajectory
from .kernels import subsequence_density
from .measures import word_measure
from .process import marginal_gap_diagnostics, simulate_trajectory
from .report import CheckResult, RunReport
from .transport import measure_curve
from .words import Word


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed_override:
            seeds = [int(s) for s in args.seed_override.split(",")]
            if len(set(seeds)) != len(seeds):
                raise ConfigError("override seeds must be distinct")
            config.seeds = seeds
        if args.out:
            config.out_dir = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.handler(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erasedwords",
        description="simulation and exact computation for erased-word dynamics",
    )
    sub = parser.add_subparsers(required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment config path")
        p.add_argument("--seed-override", default="", help="comma-separated seeds")
        p.add_argument("--out", default="", help="output directory override")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p = sub.add_parser("density", help="subsequence densities over a corpus")
    common(p)
    p.add_argument("--corpus", required=True, help="one word per line")
    p.add_argument("--pattern", required=True, help="pattern letters, space-separated")
    p.set_defaults(handler=cmd_density)

    p = sub.add_parser("simulate", help="simulate trajectories and check identities")
    common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("boundary", help="bound sweep and convergence trends")
    common(p)
    p.set_defaults(handler=cmd_boundary)

    p = sub.add_parser("filtration", help="innovation identities and reconstruction")
    common(p)
    p.set_defaults(handler=cmd_filtration)

    p = sub.add_parser("plotdata", help="emit curve and anchor CSV bundles")
    common(p)
    p.set_defaults(handler=cmd_plotdata)
    return parser


def _parse_corpus(path, alphabet) -> list[tuple[int, Word]]:
    words = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read corpus {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            words.append((lineno, alphabet.word_from_tokens(tokens)))
        except KeyError as exc:
            raise ConfigError(f"corpus line {lineno}: {exc.args[0]}") from exc
    if not words:
        raise ConfigError(f"corpus {path} holds no words")
    return words


def cmd_density(config: ExperimentConfig, args) -> int:
    try:
        pattern = config.alphabet.word_from_tokens(args.pattern.split())
    except KeyError as exc:
        raise ConfigError(f"pattern: {exc.args[0]}") from exc
    corpus = _parse_corpus(args.corpus, config.alphabet)
    rows = []
    for lineno, word in corpus:
        if len(pattern) > len(word):
            raise ConfigError(
                f"corpus line {lineno}: word of length {len(word)} shorter "
                f"than the pattern ({len(pattern)})"
            )
        rows.append((lineno, len(word), subsequence_density(pattern, word)))
    lengths = [n for _, n, _ in rows]
    is_chain = all(a < b for a, b in zip(lengths, lengths[1:]))
    print(f"pattern: {args.pattern}")
    header = f"{'line':>4}  {'length':>6}  {'density':>10}"
    if is_chain:
        header += f"  {'step':>10}"
    print(header)
    prev = None
    for lineno, n, dens in rows:
        line = f"{lineno:>4}  {n:>6}  {dens:>10.6f}"
        if is_chain:
            step = 0.0 if prev is None else dens - prev
            line += f"  {step:>+10.6f}"
            prev = dens
        print(line)
    if config.out_dir and args.out:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "density.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["line", "length", "density"])
            writer.writerows(rows)
        print(f"wrote {path}")
    return 0


def cmd_simulate(config: ExperimentConfig, args) -> int:
    report = RunReport(command="simulate", config=config.raw)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    k = config.subsequence_length
    diag = marginal_gap_diagnostics(
        config.measure, k, config.checkpoints, config.seeds
    )
    for seed, tv_row in zip(config.seeds, diag["tv_by_seed"]):
        try:
            traj = simulate_trajectory(
                config.measure,
                config.horizon,
                seed=seed,
                checkpoints=config.checkpoints,
                validate=True,
            )
        except RuntimeError as exc:
            report.add(
                CheckResult(
                    name=f"trajectory-invariants-seed{seed}",
                    kind="exact",
                    value=1.0,
                    passed=False,
                    comparator="==",
                    threshold=0.0,
                    detail=str(exc),
                )
            )
            _finalize(report, out)
            return 1
        record = {
            "seed": seed,
            "horizon": config.horizon,
            "measure": config.measure.to_config(),
            "checkpoints": {
                str(n): " ".join(config.alphabet.tokens(traj.word_at(n)))
                for n in config.checkpoints
            },
            "diagnostics": {
                f"tv_to_sorted_draw_law_k{k}_n{n}": tv
                for n, tv in zip(diag["checkpoints"], tv_row)
            },
        }
        path = out / f"checkpoints_seed{seed}.json"
        path.write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
        report.artifacts.append(str(path))
    report.add(
        CheckResult(
            name="trajectory-invariants",
            kind="exact",
            value=0.0,
            passed=True,
            comparator="==",
            threshold=0.0,
            sample_size=len(config.seeds),
            seeds=config.seeds,
        )
    )
    csv_path = out / "marginal_gap.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "checkpoint", "tv_to_sorted_draw_law"])
        for seed, row in zip(diag["seeds"], diag["tv_by_seed"]):
            for n, tv in zip(diag["checkpoints"], row):
                writer.writerow([seed, n, f"{tv:.9f}"])
    report.artifacts.append(str(csv_path))
    final_tv = diag["tv_median"][-1]
    report.add(
        CheckResult(
            name=f"marginal-tv-median-n{config.checkpoints[-1]}-k{k}",
            kind="monte-carlo",
            value=final_tv,
            passed=final_tv < config.tolerance("marginal_tv"),
            comparator="<",
            threshold=config.tolerance("marginal_tv"),
            sample_size=len(config.seeds),
            seeds=config.seeds,
        )
    )
    return _finalize(report, out)


def cmd_boundary(config: ExperimentConfig, args) -> int:
    report = RunReport(command="boundary", config=config.raw)
    out = Path(config.out_dir)
    rows = bound_sweep(config.sweep_length, config.sweep_k, config.alphabet.size)
    violations = sum(not r.holds for r in rows)
    report.add(
        CheckResult(
            name=f"collision-bound-sweep-len{config.sweep_length}-k{config.sweep_k}",
            kind="exact",
            value=float(violations),
            passed=violations == 0,
            comparator="==",
            threshold=0.0,
            sample_size=len(rows),
        )
    )
    out.mkdir(parents=True, exist_ok=True)
    sweep_path = out / "bound_sweep.csv"
    with sweep_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["word", "k", "distance", "bound", "holds"])
        for r in rows:
            writer.writerow(
                [
                    "".join(config.alphabet.tokens(r.word)),
                    r.k,
                    f"{float(r.distance):.9f}",
                    f"{float(r.bound):.9f}",
                    int(r.holds),
                ]
            )
    report.artifacts.append(str(sweep_path))

    trend = directing_measure_trend(
        config.measure, config.checkpoints, config.seeds, jobs=args.jobs
    )
    med = trend["median"]
    report.add(
        CheckResult(
            name="word-measure-distance-decreases",
            kind="monte-carlo",
            value=med[-1],
            passed=med[-1] < med[0],
            comparator="<",
            threshold=med[0],
            sample_size=len(config.seeds),
            seeds=config.seeds,
            detail=f"medians per checkpoint: {med}",
        )
    )
    diag = marginal_gap_diagnostics(
        config.measure, config.subsequence_length, config.checkpoints, config.seeds
    )
    tv_med = diag["tv_median"]
    report.add(
        CheckResult(
            name="marginal-law-tv-final",
            kind="monte-carlo",
            value=tv_med[-1],
            passed=tv_med[-1] < config.tolerance("marginal_tv"),
            comparator="<",
            threshold=config.tolerance("marginal_tv"),
            sample_size=len(config.seeds),
            seeds=config.seeds,
            detail=f"medians per checkpoint: {tv_med}",
        )
    )
    ks = [1, 2, 4, 8, 16]
    values = resampling_fixed_point_values(config.measure, ks)
    decreasing = all(a > b for a, b in zip(values, values[1:]))
    report.add(
        CheckResult(
            name="resampling-fixed-point-trend",
            kind="exact",
            value=values[-1],
            passed=decreasing,
            comparator="<",
            threshold=values[0],
            detail=f"k={ks} values={[f'{v:.6f}' for v in values]}",
        )
    )
    return _finalize(report, out)


def cmd_filtration(config: ExperimentConfig, args) -> int:
    report = RunReport(command="filtration", config=config.raw)
    out = Path(config.out_dir)
    identity_horizon = min(config.horizon, 500)
    v1 = relabel_identity_violations(
        config.measure, identity_horizon, config.seeds, jobs=args.jobs
    )
    report.add(
        CheckResult(
            name=f"relabel-identity-n{identity_horizon}",
            kind="exact",
            value=float(v1),
            passed=v1 == 0,
            comparator="==",
            threshold=0.0,
            sample_size=len(config.seeds) * identity_horizon,
            seeds=config.seeds,
        )
    )
    v2 = seed_reconstruction_violations(
        config.measure, identity_horizon, config.seeds, jobs=args.jobs
    )
    report.add(
        CheckResult(
            name=f"seed-reconstruction-n{identity_horizon}",
            kind="exact",
            value=float(v2),
            passed=v2 == 0,
            comparator="==",
            threshold=0.0,
            sample_size=len(config.seeds) * identity_horizon,
            seeds=config.seeds,
        )
    )
    curve = seed_side_match_curve(
        config.measure,
        config.marked_anchors,
        config.reconstruction_horizons,
        config.seeds,
        jobs=args.jobs,
    )
    rates = curve["rates"]
    monotone = all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))
    report.add(
        CheckResult(
            name="seed-tail-match-rate-monotone",
            kind="monte-carlo",
            value=rates[-1],
            passed=monotone and rates[-1] >= config.tolerance("match_rate"),
            comparator=">=",
            threshold=config.tolerance("match_rate"),
            sample_size=len(config.seeds),
            seeds=config.seeds,
            detail=f"horizons={curve['horizons']} rates={rates}",
        )
    )
    pos_curve = position_side_match_curve(
        config.measure,
        config.marked_anchors,
        config.reconstruction_horizons,
        config.seeds,
        bayes_letter_map(config.measure),
        jobs=args.jobs,
    )
    if config.measure.kind == "threshold":
        rate = pos_curve["rates"][-1]
        report.add(
            CheckResult(
                name="eraser-tail-match-rate",
                kind="monte-carlo",
                value=rate,
                passed=rate >= config.tolerance("match_rate"),
                comparator=">=",
                threshold=config.tolerance("match_rate"),
                sample_size=len(config.seeds),
                seeds=config.seeds,
                detail=f"horizons={pos_curve['horizons']} rates={pos_curve['rates']}",
            )
        )
    else:
        hits = int(round(pos_curve["rates"][-1] * len(config.seeds)))
        baseline = modal_word_baseline(
            config.measure, config.marked_anchors, [s + 10_000 for s in config.seeds]
        )
        base_hits = sum(baseline["matches"])
        pvalue = two_proportion_pvalue(
            hits, len(config.seeds), base_hits, len(config.seeds)
        )
        report.add(
            CheckResult(
                name="eraser-tail-vs-baseline",
                kind="monte-carlo",
                value=pvalue,
                passed=pvalue > config.tolerance("alpha"),
                comparator=">",
                threshold=config.tolerance("alpha"),
                sample_size=len(config.seeds),
                seeds=config.seeds,
                detail=(
                    f"reconstruction {hits}/{len(config.seeds)}, "
                    f"baseline {base_hits}/{len(config.seeds)}"
                ),
            )
        )
    battery_seeds = config.seeds[: min(len(config.seeds), 20)]
    medians = battery_median_pvalues(
        config.measure, reps=20_000, seeds=battery_seeds, jobs=args.jobs
    )
    worst = min(medians.values())
    alpha = config.tolerance("alpha")
    report.add(
        CheckResult(
            name="distributional-contracts",
            kind="monte-carlo",
            value=worst,
            passed=worst > alpha,
            comparator=">",
            threshold=alpha,
            sample_size=len(battery_seeds),
            seeds=list(battery_seeds),
            detail="median p-values: " + str(medians),
        )
    )
    return _finalize(report, out)


def cmd_plotdata(config: ExperimentConfig, args) -> int:
    if config.alphabet.size != 2:
        print("plotdata requires a binary alphabet", file=sys.stderr)
        return 2
    report = RunReport(command="plotdata", config=config.raw)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    target = measure_curve(config.measure, config.curve_grid)
    path = out / "measure_curve.csv"
    _write_points(path, target)
    report.artifacts.append(str(path))

    path = out / "measure_atoms.csv"
    _write_atoms(path, config.measure.discretize(config.curve_grid))
    report.artifacts.append(str(path))

    seed = config.seeds[0]
    dual = simulate_dual_trajectory(
        config.measure, config.horizon, seed=seed, validate=False
    )
    data = curve_anchor_data(dual, config.marked_anchors, config.checkpoints)
    for rec in data["records"]:
        n = rec["n"]
        path = out / f"word_curve_seed{seed}_n{n}.csv"
        _write_points(path, rec["curve"])
        report.artifacts.append(str(path))
        path = out / f"word_measure_seed{seed}_n{n}.csv"
        _write_atoms(path, word_measure(dual.base.word_at(n)))
        report.artifacts.append(str(path))
        path = out / f"anchors_seed{seed}_n{n}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "u_anchor", "v_anchor"])
            for i, (ua, va) in enumerate(
                zip(rec["u_anchors"], rec["v_anchors"]), start=1
            ):
                writer.writerow([i, f"{ua:.9f}", f"{va:.9f}"])
        report.artifacts.append(str(path))

    trend = curve_trend(
        config.measure,
        config.checkpoints,
        config.seeds,
        grid=config.curve_grid,
        jobs=args.jobs,
    )
    med = trend["median"]
    decreasing = all(a > b for a, b in zip(med, med[1:]))
    report.add(
        CheckResult(
            name="curve-hausdorff-decreasing",
            kind="monte-carlo",
            value=med[-1],
            passed=decreasing,
            comparator="<",
            threshold=med[0],
            sample_size=len(config.seeds),
            seeds=config.seeds,
            detail=f"medians per checkpoint: {med}",
        )
    )
    return _finalize(report, out)


def _write_points(path, points) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in np.asarray(points):
            writer.writerow([f"{x:.9f}", f"{y:.9f}"])


def _write_atoms(path, measure) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["letter", "position", "mass"])
        for letter, position, mass in measure.to_rows():
            writer.writerow([letter, f"{position:.9f}", f"{mass:.9f}"])


def _finalize(report: RunReport, out: Path) -> int:
    json_path, text_path = report.write(out)
    report.artifacts.extend([json_path, text_path])
    print(report.text_summary())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
