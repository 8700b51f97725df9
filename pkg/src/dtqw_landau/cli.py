"""Command-line runner: ``dtqw-landau <command> [options]``.

Exit codes: 0 success, 1 invalid parameters, 2 numerical guard tripped
(tail, branch cut, memory, light-cone wrap), 3 a ``verify`` check failed.
"""
from __future__ import annotations

import argparse
import re
import shlex
import sys

import numpy as np

from . import experiments
from .experiments import DEFAULT_MAX_GRID_CELLS, MemoryGuardError, NonFiniteOutputError
from .propagator import BranchAmbiguityError
from .spectral import LandauLabel, TailError, ZeroFieldError
from .walk import WrapRiskError

EXIT_OK, EXIT_INVALID, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def parse_floats(text: str) -> list[float]:
    """``"0.1,0.2"`` or ``"start:stop:count"`` (inclusive linear range)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _labels(values, default):
    try:
        return [LandauLabel.parse(v) for v in (values or default)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _single(values, flag):
    if len(values) != 1:
        raise UsageError(f"{flag} takes a single value here")
    return values[0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtqw-landau",
        description="Landau levels and real-space dynamics of a 2D quantum walk in a magnetic field.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, b_default, eps_default, mass=True, out=True):
        p.add_argument("--b-field", default=b_default,
                       help="field value(s): comma list or start:stop:count (default %(default)s)")
        p.add_argument("--epsilon", default=eps_default,
                       help="step(s) epsilon (default %(default)s)")
        if mass:
            p.add_argument("--mass", type=float, default=1.0, help="mass m (default 1)")
        if out:
            p.add_argument("--out", help="write CSV here instead of stdout")

    p = sub.add_parser("energies", help="Landau energies against the field")
    common(p, b_default="0.05:5:100", eps_default="1")
    p.add_argument("--n-max", type=int, default=5)

    p = sub.add_parser("profiles", help="eigenstate densities, or their first-order change")
    common(p, b_default="1", eps_default="0.25")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--label", action="append", help="ground, +:n or -:n (repeatable)")
    p.add_argument("--order", type=int, choices=(0, 1), default=0)

    p = sub.add_parser("scaling", help="one-step distances against epsilon")
    common(p, b_default="1", eps_default="0.02,0.04,0.08,0.16,0.32")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--label", action="append")
    p.add_argument("--threads", type=int, default=1)

    for name, b_default, text in (("spread", "0,0.01,0.04,0.16", "p- and q-spreads over time"),
                                  ("density", "0", "density on the lattice after the last step")):
        p = sub.add_parser(name, help=text)
        common(p, b_default=b_default, eps_default="1")
        p.add_argument("--steps", type=int, default=500)
        p.add_argument("--width", type=float, default=0.0, help="Gaussian width w (0: delta state)")
        p.add_argument("--max-grid-cells", type=int, default=DEFAULT_MAX_GRID_CELLS)
        if name == "spread":
            p.add_argument("--threads", type=int, default=1)

    sub.add_parser("verify", help="run every invariant check at small scale")
    return parser


def _positive(values, flag):
    if any(not v > 0 for v in values):
        raise UsageError(f"{flag} values must be positive")
    return values


def run(args) -> experiments.ExperimentReport:
    b_values = parse_floats(args.b_field)
    epsilons = _positive(parse_floats(args.epsilon), "--epsilon")
    if args.mass < 0:
        raise UsageError("--mass must be >= 0")
    if args.command == "energies":
        return experiments.energies(b_values, args.mass, args.n_max)
    if args.command == "profiles":
        default = ["ground", "+:1", "+:4"] if args.order == 0 else ["ground", "+:1", "+:2", "+:3", "+:4"]
        return experiments.profiles(_labels(args.label, default), args.k, _single(b_values, "--b-field"),
                                    args.mass, _single(epsilons, "--epsilon"), args.order)
    if args.command == "scaling":
        if len(epsilons) < 3:
            raise UsageError("--epsilon needs at least 3 values to fit slopes")
        return experiments.scaling(_labels(args.label, ["ground", "+:1", "+:2", "+:3"]), epsilons,
                                   b_values, args.mass, args.k, max(1, args.threads))
    if args.steps < 0 or args.width < 0:
        raise UsageError("--steps and --width must be >= 0")
    eps = _single(epsilons, "--epsilon")
    if args.command == "spread":
        return experiments.spread(args.width, b_values, args.mass, args.steps, eps,
                                  args.max_grid_cells, max(1, args.threads))
    report, _ = experiments.density(args.width, _single(b_values, "--b-field"), args.mass,
                                    args.steps, eps, args.max_grid_cells)
    return report


def cmd_verify(out=None) -> int:
    from .verify import run_checks

    out = out or sys.stdout
    results = run_checks()
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_VERIFY if failed else EXIT_OK


_VALUE_FLAGS = ("--b-field", "--epsilon", "--k", "--mass")


def _attach_negative_values(argv):
    # argparse reads "--b-field -1,0,1" as two options; glue such values to their flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def _command_line(argv) -> str:
    # the destination file is not a parameter of the run, so it stays out of the header
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(shlex.quote(a))
    return " ".join(["dtqw-landau"] + kept)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; 2 is reserved for numerical guards here
        return EXIT_INVALID if exc.code == 2 else int(exc.code or 0)
    if args.command == "verify":
        return cmd_verify()
    try:
        report = run(args)
    except (UsageError, ZeroFieldError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TailError, BranchAmbiguityError, MemoryGuardError, WrapRiskError, NonFiniteOutputError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = report.to_csv(_command_line(argv))
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
