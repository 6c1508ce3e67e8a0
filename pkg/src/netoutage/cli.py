"""Command-line interface.

Exit codes: 0 success, 2 unparsable arguments or configuration, 3 invalid
parameters, 4 runtime failure (estimation, numerics, I/O), 5 unsupported
model/MAC combination.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import harness
from .config import ConfigError, load_config
from .errors import NotSupportedError, ParameterError, UsageError
from .mac import check_conditions

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_UNSUPPORTED = 0, 2, 3, 4, 5


def _threads(n):
    if n == 0:
        return os.cpu_count() or 1
    return n


def _apply_flags(cfg, args):
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "reps", None) is not None:
        if args.reps < 1:
            raise ParameterError("--reps must be positive")
        cfg.reps = args.reps
    if getattr(args, "threads", None) is not None:
        if args.threads < 0:
            raise ParameterError("--threads must be >= 0")
        cfg.threads = args.threads
    if getattr(args, "out", None) is not None:
        cfg.directory = args.out
    return cfg


def _lattice_grid(cfg):
    d = 2 if cfg.scenario.scheme.name == "unreasonable-tdma" else cfg.scenario.d
    return np.array([float(m) ** -d for m in range(1, cfg.points + 1)])


def _grid(cfg, broad=False):
    """Explicit grid, else ``[eta_min, eta_max]``, else a scheme-dependent default."""
    if cfg.eta is not None:
        return cfg.eta
    if cfg.scenario.scheme.name in ("tdma", "unreasonable-tdma"):
        return _lattice_grid(cfg)
    if cfg.eta_min or cfg.eta_max:
        hi = cfg.eta_max or 0.1
        return harness.eta_grid(cfg.eta_min or hi / 10, hi, cfg.points)
    if broad:
        return harness.eta_grid(2e-3, 0.2, cfg.points)
    try:
        res = harness.analytic_for(cfg.scenario, cfg.link, cfg.pathloss)
    except NotSupportedError:
        res = None
    lo, hi = harness.default_fit_window(res)
    return harness.eta_grid(lo, hi, cfg.points)


def _sweep(cfg, etas):
    return harness.sweep(
        cfg.scenario, etas, cfg.link, cfg.pathloss, n=cfg.reps, seed=cfg.seed, estimator=cfg.estimator, workers=_threads(cfg.threads)
    )


def cmd_simulate(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    res = _sweep(cfg, _grid(cfg))
    path = res.write(Path(cfg.directory) / "sweep.csv")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_asymptotic(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    sc = cfg.scenario
    res = harness.analytic_for(sc, cfg.link, cfg.pathloss)
    out = Path(cfg.directory)
    harness.write_csv(out / "asymptotic.csv", asy.ASYMPTOTIC_HEADER, [res.row()])
    print(
        f"{res.scheme}: gamma={harness.fmt(res.gamma)} kappa={harness.fmt(res.kappa)} p0={harness.fmt(res.p0)} "
        f"eta_max={harness.fmt(res.eta_max)} provenance={res.provenance}"
    )
    if res.gamma > 0 and res.kappa > 0 and res.p0 == 1:
        etas = _grid(cfg) if cfg.eta is not None else np.geomspace(1.0, 1e-3, 31)
        lo, hi = asy.conjecture_envelope(res.gamma, res.kappa, etas)
        rows = [[e, 1 - res.gamma * e**res.kappa, a, b] for e, a, b in zip(etas, lo, hi)]
        header = ["eta", "first_order", "envelope_lower", "envelope_upper"]
        if sc.scheme.name == "tdma":
            header += ["tdma_lower", "tdma_exact", "tdma_upper"]
            rows = []
            for m in range(1, 11):
                b = asy.tdma_bounds(sc.d, m, cfg.link.theta / cfg.link.link_gain(cfg.pathloss), cfg.pathloss.alpha)
                x = res.gamma * b.eta**res.kappa
                rows.append([b.eta, 1 - x, max(0.0, 1 - x), 1 / (1 + x), b.lower, b.exact, b.upper])
        harness.write_csv(out / "envelope.csv", header, rows)
    print(f"wrote {out / 'asymptotic.csv'}")
    return EXIT_OK


def cmd_figure(args) -> int:
    threads = _threads(args.threads if args.threads is not None else 1)
    out = harness.reproduce_figure(
        args.id, args.out or "out", seed=args.seed if args.seed is not None else 1, n=args.reps or 100_000, workers=threads, points=args.points
    )
    for line in out.summary:
        print(line)
    print(f"wrote {len(out.files)} curves to {out.directory}")
    return EXIT_OK


def _report(cfg, etas):
    if len(etas) < 4:
        raise ParameterError("condition checks need at least 4 grid values")
    return check_conditions(cfg.scenario.family(), etas, seed=cfg.seed)


def cmd_classify(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    etas = _grid(cfg, broad=True)
    res = _sweep(cfg, etas)
    res.write(Path(cfg.directory) / "classify-sweep.csv")
    report = None if args.skip_conditions else _report(cfg, etas)
    alpha = cfg.pathloss.alpha
    label = harness.classify(res, report, alpha=alpha, d=cfg.scenario.d)
    print(label.line())
    for line in label.diagnostics:
        print(f"  {line}")
    return EXIT_OK


def cmd_conditions(args) -> int:
    cfg = _apply_flags(load_config(args.config), args)
    etas = _grid(cfg, broad=True)
    report = _report(cfg, etas)
    rows = zip(report.eta, report.box, report.box_se, report.near, report.near_se)
    path = harness.write_csv(Path(cfg.directory) / "conditions.csv", ["eta", "box_measure", "box_se", "near_count", "near_se"], rows)
    for line in report.lines():
        print(line)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="netoutage", description="Outage scaling of MAC schemes on spatial networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="run configuration file")
        sp.add_argument("--seed", type=int, help="override the base seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int, help="worker threads (0 = one per CPU)")
        sp.add_argument("--reps", type=int, help="typical links per grid point")

    sp = sub.add_parser("simulate", help="Monte Carlo sweep over eta")
    common(sp)
    sp.set_defaults(func=cmd_simulate)
    sp = sub.add_parser("asymptotic", help="analytic gamma, kappa and envelopes")
    common(sp)
    sp.set_defaults(func=cmd_asymptotic)
    sp = sub.add_parser("figure", help="write a figure dataset")
    sp.add_argument("id", help="one of " + ", ".join(harness.FIGURES))
    sp.add_argument("--points", type=int, default=8, help="grid points inside the fit window")
    common(sp, config=False)
    sp.set_defaults(func=cmd_figure)
    sp = sub.add_parser("classify", help="sweep and place the MAC in the taxonomy")
    common(sp)
    sp.add_argument("--skip-conditions", action="store_true", help="do not run the reasonableness checks")
    sp.set_defaults(func=cmd_classify)
    sp = sub.add_parser("conditions", help="check the reasonableness conditions")
    common(sp)
    sp.set_defaults(func=cmd_conditions)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    if args.command == "figure" and args.id not in harness.FIGURES:
        print(f"error: unknown figure id {args.id!r}; choose from {', '.join(harness.FIGURES)}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotSupportedError as exc:
        print(f"not implemented: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ParameterError, UsageError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, RuntimeError, OSError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
