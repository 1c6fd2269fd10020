"""Experiment command line: budget sweeps, optimality checks, oracles.

Subcommands:
  run        sweep budgets for one problem/algorithm, write CSV, fit a slope
  adversary  build the worst-case pairs and verify the claimed quantile gaps
  oracle     print ground-truth quantities for a builtin problem

Exit codes: 0 success, 2 configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .adversary import build_adversary_d1, build_adversary_d2, verify_separation
from .bounds import ProblemConstants, known_bound, unknown_bound
from .known import run_known
from .problems import (
    BUILTIN_PROBLEMS,
    TestProblem,
    brute_force_quantile,
    estimate_level_set_M,
    estimate_lipschitz,
    monte_carlo_quantile,
    reference_quantile,
)
from .unknown import run_unknown

CSV_HEADER = ["n", "estimate", "lower", "upper", "level", "evals", "true_q", "abs_error", "bound"]


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    problem: str = "paper_d1"
    algo: str = "known"
    alpha: Optional[float] = None
    budgets: Sequence[int] = (10, 50, 100, 500)
    lipschitz: Optional[float] = None
    level_set: Optional[float] = None
    out: Optional[str] = None
    seed: int = 0
    resolution: Optional[int] = None


def parse_budgets(text: str) -> list[int]:
    """Comma list ("10,100,1000") or range ("start:stop:step", inclusive)."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            budgets = list(range(start, stop + 1, step))
        else:
            budgets = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse budgets {text!r}") from None
    if not budgets or any(b < 1 for b in budgets):
        raise ConfigError(f"budgets must be positive integers, got {text!r}")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigError("budgets must be strictly increasing")
    return budgets


def load_config_file(path: str) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment."""
    out: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return out


def build_problem(cfg: ExperimentConfig) -> TestProblem:
    if cfg.problem not in BUILTIN_PROBLEMS:
        raise ConfigError(
            f"unknown problem {cfg.problem!r}; choose from {sorted(BUILTIN_PROBLEMS)}"
        )
    p = BUILTIN_PROBLEMS[cfg.problem]()
    if cfg.alpha is not None:
        if not 0.0 < cfg.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0,1), got {cfg.alpha}")
        if cfg.problem == "paper_d2":
            p = BUILTIN_PROBLEMS[cfg.problem](cfg.alpha)  # keeps the analytic quantile
        else:
            from dataclasses import replace

            p = replace(p, alpha=cfg.alpha, true_quantile=None)
    if cfg.lipschitz is not None:
        from dataclasses import replace

        if cfg.lipschitz <= 0:
            raise ConfigError(f"lipschitz must be positive, got {cfg.lipschitz}")
        p = replace(p, lipschitz=cfg.lipschitz)
    return p


def fit_slope(ns: Sequence[float], errors: Sequence[float], mode: str) -> tuple[float, float, float]:
    """Least-squares slope of ln(error) against N (semilog) or ln N (loglog).

    Rows with non-positive error are excluded; at least 3 usable rows are
    required.  Returns (slope, intercept, R^2).
    """
    if mode not in ("semilog", "loglog"):
        raise ValueError(f"mode must be semilog or loglog, got {mode!r}")
    xs, ys = [], []
    for n, err in zip(ns, errors):
        if err > 0:
            xs.append(float(n) if mode == "semilog" else math.log(n))
            ys.append(math.log(err))
    if len(xs) < 3:
        raise ValueError(f"need >= 3 rows with positive error, got {len(xs)}")
    x = np.array(xs)
    y = np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def run_experiment(cfg: ExperimentConfig, stream=sys.stdout) -> list[dict]:
    """One CSV row per budget; each budget runs from scratch."""
    p = build_problem(cfg)
    if cfg.algo not in ("known", "unknown", "monte_carlo"):
        raise ConfigError(f"unknown algorithm {cfg.algo!r}")
    true_q = reference_quantile(p, cfg.resolution)
    constants = None
    if cfg.level_set is not None:
        constants = ProblemConstants(p.dim, p.lipschitz, cfg.level_set, p.alpha)

    rows: list[dict] = []
    for n in cfg.budgets:
        lower = upper = level = evals = bound = None
        if cfg.algo == "known":
            run = run_known(p.f, p.lipschitz, p.measure, p.alpha, n)
            estimate = run.bracket.estimate
            lower, upper = run.bracket.lower, run.bracket.upper
            level, evals = run.bracket.level, run.bracket.evaluations
            if constants is not None and (p.dim == 1 or n > 1):
                bound = known_bound(constants, n)
        elif cfg.algo == "unknown":
            run = run_unknown(p.f, p.measure, p.alpha, n)
            estimate = run.estimate
            level, evals = run.level, run.evaluations
            if constants is not None and p.lipschitz >= 1.0:
                try:
                    bound = unknown_bound(constants, n)
                except ValueError:
                    bound = None  # budget below the start-up threshold
        else:
            estimate, _ = monte_carlo_quantile(p, max(n, 100), cfg.seed)
            evals = max(n, 100)
        rows.append(
            {
                "n": n,
                "estimate": estimate,
                "lower": lower,
                "upper": upper,
                "level": level,
                "evals": evals,
                "true_q": true_q,
                "abs_error": abs(estimate - true_q),
                "bound": bound,
            }
        )

    out_fh = open(cfg.out, "w", newline="") if cfg.out else stream
    try:
        writer = csv.writer(out_fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r["n"],
                    _fmt(r["estimate"]),
                    _fmt(r["lower"]),
                    _fmt(r["upper"]),
                    "" if r["level"] is None else r["level"],
                    "" if r["evals"] is None else r["evals"],
                    _fmt(r["true_q"]),
                    _fmt(r["abs_error"]),
                    _fmt(r["bound"]),
                ]
            )
    finally:
        if cfg.out:
            out_fh.close()

    mode = "semilog" if p.dim == 1 else "loglog"
    try:
        slope, intercept, r2 = fit_slope(
            [r["n"] for r in rows], [r["abs_error"] for r in rows], mode
        )
        summary = f"# slope ({mode}): {slope:.6f}  intercept: {intercept:.6f}  R2: {r2:.4f}"
        if p.dim == 1:
            summary += f"  rho_hat: {math.exp(slope):.6f}"
        print(summary, file=sys.stderr)
    except ValueError as exc:
        print(f"# slope fit skipped: {exc}", file=sys.stderr)
    return rows


def adversary_report(dim: int, n_values: Sequence[int], seed: int = 0, stream=sys.stdout) -> bool:
    """Pass/fail table of the optimality constructions; True if all pass."""
    rng = np.random.default_rng(seed)
    all_pass = True
    print("n,claimed_gap,measured_gap,agreement_residual,status", file=stream)
    for n in n_values:
        queries = rng.random((n, dim))
        adv = build_adversary_d2(queries) if dim == 2 else build_adversary_d1(queries)
        rep = verify_separation(adv)
        all_pass &= rep.passed
        print(
            f"{n},{rep.claimed_gap!r},{rep.measured_gap!r},"
            f"{rep.agreement_residual!r},{'pass' if rep.passed else 'FAIL'}",
            file=stream,
        )
    return all_pass


def oracle_report(cfg: ExperimentConfig, stream=sys.stdout) -> None:
    p = build_problem(cfg)
    q = reference_quantile(p, cfg.resolution)
    print(f"problem: {p.name}", file=stream)
    print(f"dimension: {p.dim}", file=stream)
    print(f"alpha: {p.alpha!r}", file=stream)
    print(f"declared_lipschitz: {p.lipschitz!r}", file=stream)
    print(f"estimated_lipschitz: {estimate_lipschitz(p)!r}", file=stream)
    if p.true_quantile is not None:
        print(f"analytic_quantile: {p.true_quantile!r}", file=stream)
    print(f"grid_oracle_quantile: {q!r}", file=stream)
    try:
        m = estimate_level_set_M(p, true_quantile=q, resolution=cfg.resolution)
        print(f"estimated_level_set_M: {m!r}", file=stream)
    except ValueError as exc:
        print(f"estimated_level_set_M: unavailable ({exc})", file=stream)


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipquant",
        description="Deterministic quantile bounds for Lipschitz functions on the unit cube.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="budget sweep, CSV output")
    run_p.add_argument("--config", help="key=value config file; flags override it")
    run_p.add_argument("--problem", help="paper_d1 | paper_d2 | linear_d1")
    run_p.add_argument("--algo", help="known | unknown | monte_carlo")
    run_p.add_argument("--alpha", type=float)
    run_p.add_argument("--budgets", help="comma list or start:stop:step")
    run_p.add_argument("--lipschitz", type=float, help="override the Lipschitz constant")
    run_p.add_argument("--level-set", type=float, dest="level_set",
                       help="level-set constant M, enables the bound column")
    run_p.add_argument("--out", help="CSV path (default stdout)")
    run_p.add_argument("--seed", type=int, help="Monte Carlo seed")
    run_p.add_argument("--resolution", type=int, help="grid oracle resolution")

    adv_p = sub.add_parser("adversary", help="verify the optimality constructions")
    adv_p.add_argument("--dim", type=int, choices=(1, 2), required=True)
    adv_p.add_argument("--n", default="", help="comma list of query counts")
    adv_p.add_argument("--seed", type=int, default=0)

    orc_p = sub.add_parser("oracle", help="print ground truth for a problem")
    orc_p.add_argument("--problem", default="paper_d1")
    orc_p.add_argument("--alpha", type=float)
    orc_p.add_argument("--resolution", type=int)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    merged: dict[str, str] = dict(file_values)
    for key in ("problem", "algo", "alpha", "budgets", "lipschitz", "level_set",
                "out", "seed", "resolution"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = str(value)
    known_keys = {"problem", "algo", "alpha", "budgets", "lipschitz", "level_set",
                  "out", "seed", "resolution"}
    for key in merged:
        if key not in known_keys:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        if "problem" in merged:
            cfg.problem = merged["problem"]
        if "algo" in merged:
            cfg.algo = merged["algo"]
        if "alpha" in merged:
            cfg.alpha = float(merged["alpha"])
        if "budgets" in merged:
            cfg.budgets = parse_budgets(merged["budgets"])
        if "lipschitz" in merged:
            cfg.lipschitz = float(merged["lipschitz"])
        if "level_set" in merged:
            cfg.level_set = float(merged["level_set"])
        if "out" in merged:
            cfg.out = merged["out"]
        if "seed" in merged:
            cfg.seed = int(merged["seed"])
        if "resolution" in merged:
            cfg.resolution = int(merged["resolution"])
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        if args.command == "run":
            run_experiment(_config_from_args(args))
            return 0
        if args.command == "adversary":
            n_values = [int(p) for p in args.n.split(",") if p.strip()]
            ok = adversary_report(args.dim, n_values, seed=args.seed)
            return 0 if ok else 3
        if args.command == "oracle":
            cfg = ExperimentConfig(problem=args.problem, alpha=args.alpha,
                                   resolution=args.resolution)
            oracle_report(cfg)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    return 2


if __name__ == "__main__":
    sys.exit(main())
