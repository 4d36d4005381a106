"""Command line harness: run a scenario's verification suite or dump samples.

Exit codes: 0 all enabled checks pass, 2 at least one inconclusive, 1 any
failure (including sampling failures, which are recorded against the failing
check), 64 invalid config.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .gaussian import sample_std_normal
from .rng import RngStream
from .scenario import ConfigError, build_split, load_scenario
from .split import sample_bad, sample_good
from .verify import CHECK_IDS, VerificationReport, run_checks

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 1, 2, 64

_DUMP_STREAMS = {"mu": 101, "good": 102, "bad": 103, "dilated": 104}


def version_string() -> str:
    tag = f"gaussplit-{__version__}"
    try:
        sha = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if sha.returncode == 0 and sha.stdout.strip():
            return f"{tag}+g{sha.stdout.strip()}"
    except Exception:
        pass
    return tag


def _scaled_budgets(s: Scenario, samples_scale: float | None) -> dict:
    budgets = dict(s.budgets)
    if samples_scale is not None:
        from .verify import DEFAULT_BUDGETS

        merged = dict(DEFAULT_BUDGETS)
        merged.update(budgets)
        budgets = {k: max(1, int(round(v * samples_scale))) for k, v in merged.items()}
    return budgets


def run_scenario(
    config_path: str,
    output_path: str,
    seed: int | None = None,
    samples_scale: float | None = None,
    checks: list[str] | None = None,
    quiet: bool = False,
) -> int:
    """Build the scenario's split, run the verification suite, write the report."""
    try:
        s = load_scenario(config_path)
        if seed is not None:
            s = dataclasses.replace(s, seed=seed)
        enabled = checks if checks is not None else (list(s.checks) if s.checks else None)
        if enabled is not None:
            unknown = set(enabled) - set(CHECK_IDS)
            if unknown:
                raise ConfigError("checks", f"unknown checks: {sorted(unknown)}")
        split, complement = build_split(s)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    budgets = _scaled_budgets(s, samples_scale)
    t0 = time.perf_counter()
    timings: dict[str, float] = {}
    report = VerificationReport()
    for check_id in enabled if enabled is not None else CHECK_IDS:
        tick = time.perf_counter()
        sub = run_checks(
            split,
            seed=s.seed,
            budgets=budgets,
            confidence=s.confidence,
            checks=[check_id],
            complement=complement,
        )
        rec = sub.records[0]
        timings[check_id] = time.perf_counter() - tick
        report.add(rec)
        if not quiet:
            print(f"{rec.status.upper():12s} {rec.check_id:20s} margin={rec.worst_margin:.6g} "
                  f"samples={rec.samples_used} ({timings[check_id]:.2f}s)")
    timings["total"] = time.perf_counter() - t0

    if report.any_fail():
        exit_code = EXIT_FAIL
    elif report.any_inconclusive():
        exit_code = EXIT_INCONCLUSIVE
    else:
        exit_code = EXIT_PASS
    payload = {
        "scenario": s.to_dict(),
        "version": version_string(),
        "results": report.to_jsonable(),
        "summary": {
            "status": {0: "pass", 1: "fail", 2: "inconclusive"}[exit_code],
            "exit_code": exit_code,
        },
        # wall clock; everything above is byte-identical across runs
        "timing_seconds": {k: round(v, 6) for k, v in timings.items()},
    }
    Path(output_path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if not quiet:
        print(f"report written to {output_path} (exit {exit_code})")
    return exit_code


def dump_samples(
    config_path: str,
    which: str,
    count: int,
    output_path: str,
    seed: int | None = None,
) -> int:
    try:
        if which not in _DUMP_STREAMS:
            raise ConfigError("which", f"must be one of {sorted(_DUMP_STREAMS)}")
        if count < 1:
            raise ConfigError("count", "must be >= 1")
        s = load_scenario(config_path)
        if seed is not None:
            s = dataclasses.replace(s, seed=seed)
        split, _ = build_split(s)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    rng = RngStream(s.seed, _DUMP_STREAMS[which])
    try:
        if which == "mu":
            Z = sample_std_normal(s.dim, count, rng)
        elif which == "dilated":
            Z = s.n * sample_std_normal(s.dim, count, rng)
        elif which == "good":
            Z = sample_good(split, count, rng)
        else:
            Z = sample_bad(split, count, rng)
    except Exception as e:
        print(f"sampling failure for '{which}': {e}", file=sys.stderr)
        return EXIT_FAIL
    w = np.atleast_1d(split.weight_bad(Z))

    from .scenario import _covariance_factor

    L = _covariance_factor(s)
    X = Z if L is None else Z @ L.T  # report in original coordinates

    header = ",".join([f"x{i + 1}" for i in range(s.dim)] + ["weight_bad"])
    lines = [header]
    for row, wi in zip(X, w):
        lines.append(",".join(f"{v:.17g}" for v in row) + f",{wi:.17g}")
    Path(output_path).write_text("\r\n".join(lines) + "\r\n")
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gaussplit", description=__doc__)
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario's verification suite")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--samples-scale", type=float, default=None,
                       help="multiply every check budget by this factor")
    p_run.add_argument("--checks", default=None, help="comma list of checks to enable")
    p_run.add_argument("--quiet", action="store_true")

    p_dump = sub.add_parser("dump-samples", help="export samples as CSV")
    p_dump.add_argument("--config", required=True)
    p_dump.add_argument("--which", required=True, choices=sorted(_DUMP_STREAMS))
    p_dump.add_argument("--count", type=int, required=True)
    p_dump.add_argument("--out", required=True)
    p_dump.add_argument("--seed", type=int, default=None)
    p_dump.add_argument("--quiet", action="store_true")

    args = parser.parse_args(argv)
    if args.command == "run":
        checks = args.checks.split(",") if args.checks else None
        return run_scenario(
            args.config,
            args.out,
            seed=args.seed,
            samples_scale=args.samples_scale,
            checks=checks,
            quiet=args.quiet,
        )
    return dump_samples(args.config, args.which, args.count, args.out, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
