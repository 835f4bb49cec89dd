"""Command-line entry point: ``orbitred simulate | verify | compare``.

Exit codes: 0 success, 1 failed verification check, 2 invalid usage or
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, OrbitRedError
from .io import to_csv, to_json
from .simulation import (
    FORMATS,
    STAGES,
    ConfigError,
    RunConfig,
    comparison_observables,
    run,
    summary,
    trajectory_rows,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit status 2 and no traceback."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _floats3(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}") from None


def _add_config_flags(p: argparse.ArgumentParser, suffix: str = "") -> None:
    """RunConfig fields as kebab-case flags; unset flags stay ``None``."""

    def add(name: str, **kw):
        flag = "--" + (name + suffix).replace("_", "-")
        p.add_argument(flag, dest=name + suffix, **kw)

    add("model")
    add("stage", choices=STAGES)
    add("inertia", type=_floats3, metavar="I1,I2,I3")
    add("rotor_inertia", type=_floats3, metavar="K1,K2,K3")
    add("y0", type=_floats3, metavar="Y1,Y2,Y3")
    add("nu0", type=_floats3, metavar="N1,N2,N3")
    add("theta0", type=_floats3, metavar="T1,T2,T3")
    add("attitude", type=_floats3, metavar="AX,AY,AZ")
    add("dt", type=float)
    add("steps", type=int)
    add("project_orbit", action=argparse.BooleanOptionalAction, default=None)
    add("config", metavar="PATH", help="JSON file with RunConfig fields")


CONFIG_FIELDS = (
    "model", "stage", "inertia", "rotor_inertia", "y0", "nu0", "theta0",
    "attitude", "dt", "steps", "project_orbit",
)


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path}: top level must be an object")
    return RunConfig.from_dict(data)


def build_config(ns: argparse.Namespace, suffix: str = "", extra: Sequence[str] = ()) -> RunConfig:
    """File values first, then any flag given on the command line."""
    cfg = load_config(getattr(ns, f"config{suffix}"))
    for name in tuple(CONFIG_FIELDS) + tuple(extra):
        value = getattr(ns, f"{name}{suffix}", None)
        if value is not None:
            setattr(cfg, name, value)
    return cfg.validate()


def parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orbitred", description="Orbit-reduced mechanics: simulate, verify, compare.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="integrate a model and write its trajectory")
    _add_config_flags(sim)
    sim.add_argument("--output", "-o", dest="output", help="output path (default: standard output)")
    sim.add_argument("--format", dest="format", choices=FORMATS)
    sim.add_argument("--quiet", action="store_true", help="suppress the drift summary")

    ver = sub.add_parser("verify", help="run invariant and oracle suites")
    ver.add_argument("suite", help="pairing, symplectic, stages, oracle or all")
    ver.add_argument("--seed", type=int, help="random seed (default: $ORBITRED_SEED or a fixed value)")

    cmp_ = sub.add_parser("compare", help="compare two runs on the shared (y, nu) observables")
    _add_config_flags(cmp_)
    _add_config_flags(cmp_, "_a")
    _add_config_flags(cmp_, "_b")
    cmp_.add_argument("--tol", type=float, default=1e-5)
    return p


def cmd_simulate(ns: argparse.Namespace) -> int:
    cfg = build_config(ns, extra=("output", "format"))
    m, traj = run(cfg)
    columns, rows = trajectory_rows(m, traj)
    text = to_csv(columns, rows) if cfg.format == "csv" else to_json(columns, rows, cfg.to_dict())
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ns.quiet:
        out = sys.stderr if not cfg.output else sys.stdout
        for key, value in summary(m, traj).items():
            print(f"{key}: {value:.3e}", file=out)
    return EXIT_OK


def cmd_verify(ns: argparse.Namespace) -> int:
    from .verify import SUITES, run_suite

    if ns.suite not in SUITES:
        print(f"orbitred: unknown suite {ns.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    results = run_suite(ns.suite, ns.seed, echo=lambda line: print(line, flush=True))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _side_config(ns: argparse.Namespace, side: str) -> RunConfig:
    """Shared flags apply to both sides; ``--x-a``/``--x-b`` override per side."""
    cfg = load_config(getattr(ns, f"config{side}") or ns.config)
    for suffix in ("", side):
        for name in CONFIG_FIELDS:
            value = getattr(ns, f"{name}{suffix}", None)
            if value is not None:
                setattr(cfg, name, value)
    return cfg.validate()


def cmd_compare(ns: argparse.Namespace) -> int:
    a = _side_config(ns, "_a")
    b = _side_config(ns, "_b")
    if a.model != b.model:
        raise ConfigError("model", f"runs use different models ({a.model} vs {b.model})")
    if a.dt != b.dt or a.steps != b.steps:
        raise ConfigError("horizon", f"dt/steps differ ({a.dt}x{a.steps} vs {b.dt}x{b.steps})")
    _, ta = run(a)
    _, tb = run(b)
    dev = float(np.max(np.abs(comparison_observables(ta) - comparison_observables(tb))))
    ok = dev < ns.tol
    print(f"{a.stage} vs {b.stage}: sup |(y, nu)| deviation = {dev:.3e} (tol {ns.tol:.1e}) {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    p = parser()
    try:
        ns = p.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        # Overflow is reported as a numerical failure, not as numpy warnings.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return COMMANDS[ns.command](ns)
    except ConfigError as exc:
        print(f"orbitred: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailureError as exc:
        print(f"orbitred: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"orbitred: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OrbitRedError as exc:
        print(f"orbitred: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
