"""Command-line entry point.

Exit status: 0 success, 1 domain error (including a failed replication), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .dynamics import (DEFAULT_DT, DynamicsParams, GridSpec, analyze, build_system)
from .econ_model import GrowthParams
from .econometrics import fit_fixed_effects, fit_observations_glm
from .errors import DegenerateError, DomainError
from .game import (GameConfig, StagePayoffs, StrategyKind, collusion_index, critical_discount,
                   is_sustainable, simulate_repeated_game)
from .paneldata import REGRESSORS, generate_table, format_observations, read_observations
from .pipeline import replicate
from .portrait import CobbDouglasLevels, phase_portrait_export
from .presets import available, load_preset, with_overrides

SEED_ENV = "FORBEARANCE_SEED"


def fmt(v: float) -> str:
    """Six significant digits; integral values keep a trailing ``.0``."""
    if not math.isfinite(v):
        return str(v)
    s = f"{v:.6g}"
    if s == "-0":
        s = "0"
    if all(ch.isdigit() or ch == "-" for ch in s):
        s += ".0"
    return s


def fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return fmt(z.real)
    sign = "+" if z.imag > 0 else "-"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}i"


def write_json(obj, path: str) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


# --- argument types ----------------------------------------------------------

def _finite_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _discount(text: str) -> float:
    v = _finite_float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie in [0, 1), got {v}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _non_negative(text: str) -> float:
    v = _finite_float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return (_finite_float(parts[0]), _finite_float(parts[1]))


def _range(text: str) -> tuple[float, float]:
    lo, hi = _point(text)
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"range needs LO < HI, got {text!r}")
    return lo, hi


def _default_seed(parser: argparse.ArgumentParser) -> int | None:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        parser.error(f"{SEED_ENV}: {exc}")


# --- subcommands -------------------------------------------------------------

def cmd_game(args) -> int:
    payoffs = StagePayoffs(args.pi_c, args.pi_d, args.pi_p, args.pi_n, args.pi_m)
    horizon = args.horizon
    cfg = GameConfig(payoffs, args.delta, horizon, StrategyKind(args.strategy_i),
                     StrategyKind(args.strategy_j))
    try:
        delta_star = fmt(critical_discount(payoffs))
    except DegenerateError:
        delta_star = "undefined"
    verdict = "true" if is_sustainable(payoffs, args.delta) else "false"
    print(f"sustainable: {verdict}, delta*: {delta_star}")
    outcome = simulate_repeated_game(cfg)
    print(f"strategies: {cfg.strategy_i.value} vs {cfg.strategy_j.value}  "
          f"delta: {fmt(cfg.delta)}  horizon: {horizon}")
    print(f"{'t':>5}  {'action_i':<10}{'action_j':<10}{'payoff_i':>12}{'payoff_j':>12}")
    for t, (a_i, a_j) in enumerate(outcome.actions):
        p_i, p_j = outcome.per_period[t]
        print(f"{t:>5}  {a_i.value:<10}{a_j.value:<10}{fmt(p_i):>12}{fmt(p_j):>12}")
    print(f"discounted_i: {fmt(outcome.discounted_i)}  discounted_j: {fmt(outcome.discounted_j)}")
    report = {"payoffs": {"pi_coop": payoffs.pi_coop, "pi_defect": payoffs.pi_defect,
                          "pi_punish": payoffs.pi_punish, "pi_nash": payoffs.pi_nash,
                          "pi_monopoly": payoffs.pi_monopoly},
              "delta": cfg.delta, "horizon": horizon,
              "strategy_i": cfg.strategy_i.value, "strategy_j": cfg.strategy_j.value,
              "sustainable": verdict == "true",
              "delta_star": None if delta_star == "undefined" else critical_discount(payoffs)}
    if args.observed is not None:
        idx = collusion_index(args.observed, payoffs)
        print(f"collusion index: {fmt(idx)}")
        report["collusion_index"] = idx
    if args.out:
        report["outcome"] = outcome.to_json()
        write_json(report, args.out)
    return 0


def cmd_stability(args) -> int:
    params = DynamicsParams(args.a, args.b, GrowthParams(args.age, args.sigma, args.phi))
    system = build_system(params)
    report = analyze(system)
    e1, e2 = report.eigenvalues
    print(f"eigenvalues: {fmt_complex(e1)}, {fmt_complex(e2)}; class: {report.stability.value}")
    if report.equilibrium is None:
        print("equilibrium: none (singular system)")
    else:
        x, y = report.equilibrium
        print(f"equilibrium: ({fmt(x)}, {fmt(y)})")
    if args.svg or args.csv:
        if args.x_range and args.y_range:
            grid = GridSpec(args.x_range, args.y_range, args.nx, args.ny)
        else:
            base = GridSpec.around(report.equilibrium or (0.0, 0.0), args.nx, args.ny)
            grid = GridSpec(args.x_range or base.x_range, args.y_range or base.y_range,
                            args.nx, args.ny)
        levels = None
        if args.isoquant:
            levels = CobbDouglasLevels(args.tfp, args.alpha, tuple(args.isoquant))
        phase_portrait_export(system, grid, args.start or (), svg_path=args.svg,
                              csv_path=args.csv, t_end=args.t_end, dt=args.dt, levels=levels)
        for path in (args.svg, args.csv):
            if path:
                print(f"wrote {path}")
    if args.json:
        write_json(report.to_json(), args.json)
    return 0


def cmd_panel(args) -> int:
    preset = load_preset(args.preset)
    reg = preset.spec.regressors
    if args.phi_shock_sd is not None:
        reg = replace(reg, phi_shock_sd=args.phi_shock_sd)
    dgp = preset.spec.dgp
    if args.noise_sd is not None:
        dgp = replace(dgp, noise_sd=args.noise_sd)
    seed = args.seed if args.seed is not None else args.env_seed
    preset = with_overrides(preset, n_firms=args.firms, n_periods=args.periods, seed=seed,
                            fixed_effect_sd=args.fixed_effect_sd, regressors=reg, dgp=dgp,
                            reverse_phi=True if args.reverse_phi else None)
    text = format_observations(generate_table(preset.spec))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
        print(f"wrote {len(text.splitlines()) - 1} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_fit(args) -> int:
    rows = read_observations(args.csv)
    columns = tuple(args.columns)
    if args.estimator == "fe":
        result = fit_fixed_effects(rows, columns)
    else:
        result = fit_observations_glm(rows, columns)
    for name in result.dropped:
        print(f"dropped: {name} (no within-firm variation; removed by the within transform)")
    for note in result.notes:
        print(f"note: {note}")
    print(result.to_table())
    if args.out:
        write_json(result.to_json(), args.out)
    return 0


def cmd_replicate(args) -> int:
    preset = load_preset(args.preset)
    if args.reverse_phi:
        preset = with_overrides(preset, reverse_phi=True)
    start = args.start_seed if args.start_seed is not None else args.env_seed
    summary = replicate(preset, args.seeds, start, workers=args.workers)
    first = summary.outcomes[0].seed
    print(f"preset: {summary.preset}  estimator: {preset.estimator}  "
          f"seeds: {first}..{first + args.seeds - 1}")
    for name, exp in preset.pattern.items():
        sig = {True: "significant", False: "insignificant", None: "any"}[exp.significant]
        print(f"  expect {name}: sign {exp.sign}, {sig}")
    print(f"pass fraction: {fmt(summary.pass_fraction)}  threshold: {fmt(summary.threshold)}  "
          f"verdict: {'PASS' if summary.passed else 'FAIL'}")
    for name, n in summary.failure_counts().items():
        print(f"  {name}: failed in {n} seed(s)")
    if args.out:
        write_json({"preset": summary.preset, "estimator": preset.estimator,
                    "pass_fraction": summary.pass_fraction, "threshold": summary.threshold,
                    "passed": summary.passed,
                    "seeds": [{"seed": o.seed, "passed": o.report.passed,
                               "failures": o.report.failures()} for o in summary.outcomes]},
                   args.out)
    return 0 if summary.passed else 1


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="forbearance", formatter_class=fmt_cls,
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("game", formatter_class=fmt_cls,
                       help="repeated Bertrand game: critical discount and simulation")
    g.add_argument("--pi-c", type=_finite_float, required=True, help="cooperative payoff per period")
    g.add_argument("--pi-d", type=_finite_float, required=True, help="one-shot deviation payoff")
    g.add_argument("--pi-p", type=_finite_float, default=0.0, help="punishment payoff per period")
    g.add_argument("--pi-n", type=_finite_float, default=None,
                   help="static Nash payoff for the collusion index (default: --pi-p)")
    g.add_argument("--pi-m", type=_finite_float, default=None,
                   help="joint-monopoly payoff for the collusion index (default: --pi-c)")
    g.add_argument("--delta", type=_discount, required=True, help="discount factor in [0, 1)")
    g.add_argument("--horizon", type=_positive_int, default=30, help="periods to simulate")
    choices = [k.value for k in StrategyKind]
    g.add_argument("--strategy-i", choices=choices, default=StrategyKind.GRIM_TRIGGER.value)
    g.add_argument("--strategy-j", choices=choices, default=StrategyKind.GRIM_TRIGGER.value)
    g.add_argument("--observed", type=_finite_float, default=None,
                   help="observed payoff to express as a collusion index")
    g.add_argument("--out", default=None, help="write the JSON outcome here")
    g.set_defaults(func=cmd_game)

    s = sub.add_parser("stability", formatter_class=fmt_cls,
                       help="eigenvalues, stability class and phase portrait of the growth system")
    s.add_argument("--a", type=_finite_float, default=0.4, help="decay rate on endowment")
    s.add_argument("--b", type=_finite_float, default=0.2, help="coupling of growth into endowment")
    s.add_argument("--age", type=_non_negative, default=1.0, help="firm age A")
    s.add_argument("--sigma", type=_non_negative, default=1.2, help="export intensity")
    s.add_argument("--phi", type=_finite_float, default=0.4, help="information index in [0, 1]")
    s.add_argument("--svg", default=None, help="write the phase portrait SVG here")
    s.add_argument("--csv", default=None, help="write the raw vector-field grid CSV here")
    s.add_argument("--json", default=None, help="write the stability report JSON here")
    s.add_argument("--nx", type=_positive_int, default=20, help="grid columns")
    s.add_argument("--ny", type=_positive_int, default=20, help="grid rows")
    s.add_argument("--x-range", type=_range, default=None, metavar="LO,HI",
                   help="x window (default [0, 2x*])")
    s.add_argument("--y-range", type=_range, default=None, metavar="LO,HI",
                   help="y window (default [0, 2y*])")
    s.add_argument("--start", type=_point, action="append", metavar="X,Y",
                   help="trajectory start point; repeatable")
    s.add_argument("--t-end", type=_finite_float, default=20.0, help="trajectory length")
    s.add_argument("--dt", type=_finite_float, default=DEFAULT_DT, help="RK4 step")
    s.add_argument("--isoquant", type=_finite_float, action="append", metavar="LEVEL",
                   help="overlay a Cobb-Douglas output level set; repeatable")
    s.add_argument("--tfp", type=_finite_float, default=1.0, help="isoquant scale A")
    s.add_argument("--alpha", type=_finite_float, default=0.5, help="isoquant exponent on x")
    s.set_defaults(func=cmd_stability)

    p = sub.add_parser("panel", formatter_class=fmt_cls,
                       help="generate a synthetic observation CSV from a preset")
    p.add_argument("--preset", default="conglomerate", help=f"one of {available()} or a .toml path")
    p.add_argument("--firms", type=_positive_int, default=None, help="override firm count")
    p.add_argument("--periods", type=_positive_int, default=None, help="override period count")
    p.add_argument("--seed", type=_seed, default=None,
                   help=f"RNG seed (default: ${SEED_ENV}, else the preset's base seed)")
    p.add_argument("--noise-sd", type=_non_negative, default=None, help="override DGP noise sd")
    p.add_argument("--fixed-effect-sd", type=_non_negative, default=None,
                   help="override firm-effect sd")
    p.add_argument("--phi-shock-sd", type=_non_negative, default=None,
                   help="override within-firm phi shock sd (0 makes phi firm-constant)")
    p.add_argument("--reverse-phi", action="store_true",
                   help="write phi reverse-scored (higher = more asymmetry)")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_panel)

    f = sub.add_parser("fit", formatter_class=fmt_cls, help="fit GLM or fixed effects to a CSV")
    f.add_argument("csv", help="observation CSV")
    f.add_argument("--estimator", choices=("glm", "fe"), default="glm")
    f.add_argument("--columns", nargs="+", choices=REGRESSORS, default=list(REGRESSORS),
                   help="regressors")
    f.add_argument("--out", default=None, help="write the JSON result here")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("replicate", formatter_class=fmt_cls,
                       help="generate, fit and check the sign/significance pattern over seeds")
    r.add_argument("--preset", required=True, help=f"one of {available()} or a .toml path")
    r.add_argument("--seeds", type=_positive_int, default=100, help="number of seeds")
    r.add_argument("--start-seed", type=_seed, default=None,
                   help=f"first seed (default: ${SEED_ENV}, else the preset's base seed)")
    r.add_argument("--workers", type=_positive_int, default=1, help="concurrent replications")
    r.add_argument("--reverse-phi", action="store_true", help="reverse-score phi")
    r.add_argument("--out", default=None, help="write per-seed JSON results here")
    r.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.env_seed = _default_seed(parser)
    if args.command == "stability" and not (args.dt > 0 and args.t_end >= args.dt):
        parser.error("--dt must be > 0 and --t-end >= --dt")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
