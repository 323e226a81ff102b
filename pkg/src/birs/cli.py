"""Command-line surface: simulate, fit-null, score, detect, evaluate.

Exit codes: 0 success, 1 usage error, 2 data error.  All randomness
flows from ``--seed``; rerunning any command with identical inputs and
flags produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import io as bio
from .dbirs import (
    DbirsConfig,
    run_bonferroni_on_scores,
    run_dbirs,
    run_dbirs_on_scores,
    run_fixed_threshold_on_scores,
)
from .errors import BirsError
from .evaluate import aggregate_replicates
from .null_model import Family, NullModel, fit_null
from .sbirs import SbirsConfig, run_sbirs
from .scores import compute_scoreset
from .simulate import SimConfig, TruthSet, gen_genotypes, gen_phenotype, plant_truth

FAMILY_NAMES = {"gaussian": Family.GAUSSIAN_IDENTITY, "binomial": Family.BINOMIAL_LOGIT}
MODES = ("sbirs", "dbirs", "bonferroni-baseline", "fixed-threshold-baseline")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="birs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic genotypes and phenotypes")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--ld-rho", type=float, default=0.5)
    sim.add_argument("--maf-low", type=float, default=0.001)
    sim.add_argument("--maf-high", type=float, default=0.5)
    sim.add_argument("--windows", type=int, default=4)
    sim.add_argument("--window-bp", type=int, default=5_000)
    sim.add_argument("--causal-fraction", type=float, default=0.1)
    sim.add_argument("--effect-c", type=float, default=0.15)
    sim.add_argument("--trait", choices=("continuous", "dichotomous"), default="continuous")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--null", action="store_true", help="no causal windows (global null)")
    sim.add_argument("--out-prefix", required=True)
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit-null", help="fit the covariate-only null model")
    fit.add_argument("--pheno", required=True)
    fit.add_argument("--family", choices=sorted(FAMILY_NAMES), required=True)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit_null)

    score = sub.add_parser("score", help="compute marginal scores and bootstrap pseudo-scores")
    score.add_argument("--geno", required=True)
    score.add_argument("--null-model", required=True)
    score.add_argument("--n-boot", type=int, default=1_000)
    score.add_argument("--seed", type=int, default=0)
    score.add_argument("--out", required=True)
    score.set_defaults(func=_cmd_score)

    det = sub.add_parser("detect", help="detect signal regions")
    det.add_argument("--geno")
    det.add_argument("--pheno")
    det.add_argument("--family", choices=sorted(FAMILY_NAMES))
    det.add_argument("--sumstats", help="run from a sumstats file instead of raw data")
    det.add_argument("--mode", choices=MODES, default="dbirs")
    det.add_argument("--alpha", type=float, default=0.05)
    det.add_argument("--truncation-s", type=int, default=3)
    det.add_argument("--block-size", type=int, default=2_048)
    det.add_argument("--n-boot", type=int, default=1_000)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--workers", type=int, default=1)
    det.add_argument("--out", required=True)
    det.set_defaults(func=_cmd_detect)

    ev = sub.add_parser("evaluate", help="score detections against planted truth")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--detected", nargs="+", required=True,
                    help="region files and/or directories of region files")
    ev.add_argument("--positions-from", required=True,
                    help="genotype matrix or sumstats file supplying variant positions")
    ev.add_argument("--h-kb", default="25,50,75")
    ev.add_argument("--baseline", action="append", default=[],
                    metavar="NAME=PATH", help="extra method outputs for side-by-side tables")
    ev.add_argument("--out-prefix", required=True)
    ev.set_defaults(func=_cmd_evaluate)

    return parser


def _cmd_simulate(args) -> int:
    config = SimConfig(
        n=args.n,
        p=args.p,
        ld_rho=args.ld_rho,
        maf_range=(args.maf_low, args.maf_high),
        n_causal_windows=args.windows,
        window_bp=args.window_bp,
        causal_fraction=args.causal_fraction,
        effect_c=args.effect_c,
        trait=args.trait,
        seed=args.seed,
    )
    g = gen_genotypes(config)
    truth = TruthSet.null(config.p) if args.null else plant_truth(g, config)
    y, covariates = gen_phenotype(g, truth, config)
    meta = config.to_dict()
    meta["null"] = bool(args.null)
    bio.write_matrix(
        f"{args.out_prefix}.geno.tsv",
        g.dosages,
        column_ids=[f"v{j}" for j in range(config.p)],
        positions=g.positions,
        maf=g.maf,
        config=meta,
    )
    bio.write_matrix(
        f"{args.out_prefix}.pheno.tsv",
        np.column_stack([y, covariates]),
        column_ids=["y", "intercept", "x1", "x2"],
        config=meta,
    )
    records = bio.region_records(
        truth.causal_windows,
        [0.0] * len(truth.causal_windows),
        [0.0] * len(truth.causal_windows),
        g.positions,
    )
    bio.write_regions(f"{args.out_prefix}.truth.tsv", records, config=meta)
    return 0


def _cmd_fit_null(args) -> int:
    pheno = bio.read_matrix(args.pheno)
    y = pheno.values[:, 0]
    covariates = pheno.values[:, 1:]
    model = fit_null(y, covariates, FAMILY_NAMES[args.family])
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)
        fh.write("\n")
    return 0


def _load_model(path: str) -> NullModel:
    with open(path, "r", encoding="utf-8") as fh:
        return NullModel.from_dict(json.load(fh))


def _cmd_score(args) -> int:
    g = bio.read_matrix(args.geno).to_genotypes()
    model = _load_model(args.null_model)
    scores = compute_scoreset(g, model, args.n_boot, args.seed)
    meta = {
        "family": model.family.value,
        "n_boot": args.n_boot,
        "seed": args.seed,
        "n": model.n,
        "p": g.n_variants,
    }
    bio.write_sumstats(
        args.out, scores, g.positions, g.maf, bio.model_hash(model), config=meta
    )
    return 0


def _cmd_detect(args) -> int:
    parser_error = None
    if args.sumstats:
        if args.geno or args.pheno or args.family:
            parser_error = "--sumstats excludes --geno/--pheno/--family"
    elif not (args.geno and args.pheno and args.family):
        parser_error = "detect needs either --sumstats or all of --geno/--pheno/--family"
    if parser_error:
        print(f"birs detect: error: {parser_error}", file=sys.stderr)
        return 1

    g = model = None
    if args.sumstats:
        scores, positions, _, _ = bio.read_sumstats(args.sumstats)
        seed, n_boot = scores.seed, scores.n_boot
    else:
        g = bio.read_matrix(args.geno).to_genotypes()
        pheno = bio.read_matrix(args.pheno)
        model = fit_null(pheno.values[:, 0], pheno.values[:, 1:], FAMILY_NAMES[args.family])
        positions = g.positions
        seed, n_boot = args.seed, args.n_boot
        scores = None

    dconfig = DbirsConfig(
        alpha=args.alpha,
        truncation_s=args.truncation_s,
        block_size=args.block_size,
        n_boot=n_boot,
        seed=seed,
    )
    if args.mode == "dbirs" and scores is None:
        result = run_dbirs(g, model, dconfig, workers=args.workers)
    else:
        if scores is None:
            scores = compute_scoreset(g, model, n_boot, seed)
        if args.mode == "sbirs":
            result = run_sbirs(
                scores,
                scores.domain,
                SbirsConfig(alpha=args.alpha, truncation_s=args.truncation_s),
            )
        elif args.mode == "dbirs":
            result = run_dbirs_on_scores(scores, dconfig, workers=args.workers)
        elif args.mode == "bonferroni-baseline":
            result = run_bonferroni_on_scores(scores, dconfig, workers=args.workers)
        else:
            result = run_fixed_threshold_on_scores(scores, dconfig, workers=args.workers)

    # Workers are a scheduling knob, not part of the resolved run config:
    # the output must be identical for any worker count.
    meta = {
        "mode": args.mode,
        "alpha": args.alpha,
        "truncation_s": args.truncation_s,
        "block_size": args.block_size,
        "n_boot": n_boot,
        "seed": seed,
        "global_stat": result.global_stat,
        "global_threshold": result.global_threshold,
        "rounds": result.rounds,
    }
    if result.c_min is not None:
        meta["c_min"] = result.c_min
    records = bio.region_records(
        result.regions, result.region_stats, result.region_thresholds, positions
    )
    bio.write_regions(args.out, records, config=meta)
    return 0


def _positions_from_file(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if first == bio.SUMSTATS_MAGIC:
        _, positions, _, _ = bio.read_sumstats(path)
        return positions
    mat = bio.read_matrix(path)
    if mat.positions is None:
        raise BirsError(f"{path} carries no variant positions")
    return mat.positions


def _collect_region_files(entries: list[str]) -> list[str]:
    files: list[str] = []
    for entry in entries:
        if os.path.isdir(entry):
            files.extend(
                os.path.join(entry, name)
                for name in sorted(os.listdir(entry))
                if name.endswith(".tsv")
            )
        else:
            files.append(entry)
    if not files:
        raise BirsError("no detection files found")
    return files


def _evaluate_runs(
    truth: TruthSet, files: list[str], positions: np.ndarray, h_kb: tuple[int, ...]
):
    detections = []
    for path in files:
        records, _ = bio.read_regions(path)
        detections.append([rec.region for rec in records])
    truths = [truth] * len(detections)
    return aggregate_replicates(detections, truths, positions, h_kb)


def _cmd_evaluate(args) -> int:
    truth_records, _ = bio.read_regions(args.truth)
    positions = _positions_from_file(args.positions_from)
    p = positions.shape[0]
    windows = [rec.region for rec in truth_records]
    truth = TruthSet(
        causal_windows=windows,
        causal_indices=np.empty(0, dtype=np.int64),
        beta=np.zeros(p),
    )
    h_kb = tuple(int(tok) for tok in args.h_kb.split(","))

    reports = {"dbirs": _evaluate_runs(truth, _collect_region_files(args.detected), positions, h_kb)}
    for spec_arg in args.baseline:
        name, _, path = spec_arg.partition("=")
        if not path:
            print(f"birs evaluate: error: --baseline expects NAME=PATH, got {spec_arg}",
                  file=sys.stderr)
            return 1
        reports[name] = _evaluate_runs(truth, _collect_region_files([path]), positions, h_kb)

    payload = {name: rep.to_dict() for name, rep in reports.items()}
    with open(f"{args.out_prefix}.metrics.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(f"{args.out_prefix}.metrics.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["method", "n_replicates", "fwer", "dr", "tpr"]
        header += [f"fdr{h}" for h in h_kb]
        header += ["sd_dr", "sd_tpr"] + [f"sd_fdr{h}" for h in h_kb]
        writer.writerow(header)
        for name, rep in reports.items():
            row = [name, rep.n_replicates, rep.fwer, rep.dr, rep.tpr]
            row += [rep.fdr_h[h] for h in h_kb]
            row += [rep.sd_dr, rep.sd_tpr] + [rep.sd_fdr_h[h] for h in h_kb]
            writer.writerow(row)

    main_report = reports["dbirs"]
    with open(f"{args.out_prefix}.selection.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "position", "selection_prob"])
        for j in range(p):
            writer.writerow([j, int(positions[j]), main_report.selection_prob[j]])
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help and friends
        code = exc.code
        return int(code) if isinstance(code, int) else 0
    try:
        return args.func(args)
    except (BirsError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"birs {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
