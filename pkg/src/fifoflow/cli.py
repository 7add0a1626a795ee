"""Command-line interface.

Subcommands: validate, simulate, embed, check, certify. Exit codes: 0 on
success / all-pass / certified, 1 on violations or failed audit conditions,
2 when certification is inconclusive, 3 on usage or I/O errors.

CSV outputs carry one row per integrator step with full round-trip decimal
precision (columns in sorted link-id order), so repeated runs with the same
flags are byte-identical on one platform.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np

from . import tomlout
from .numerics import integrate
from .scenario import ParseError, Scenario, ValidationError, load_scenario
from .verification import (
    certify_convergence,
    check_assumptions,
    check_decomposition,
    jacobian_sign_survey,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fifoflow",
        description="Simulate and verify traffic networks with partial-FIFO diverges.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("file", help="scenario file (.scenario TOML or .json)")

    p = sub.add_parser("validate", help="load a scenario and report findings")
    add_common(p)

    p = sub.add_parser("simulate", help="integrate the plain dynamics to CSV")
    add_common(p)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--x0", type=str, default=None,
                   help="comma-separated densities in sorted link order (default zeros)")
    p.add_argument("--out", type=str, default=None, help="CSV path (default stdout)")

    p = sub.add_parser("embed", help="integrate the doubled embedding system to CSV")
    add_common(p)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--x0", type=str, default=None, help="default zeros")
    p.add_argument("--y0", type=str, default=None, help="default jam densities")
    p.add_argument("--out", type=str, default=None, help="CSV path (default stdout)")
    p.add_argument("--emit-phase", type=str, default=None,
                   help="also write per-link (x, y) pairs in long form for plotting")

    p = sub.add_parser("check", help="audit the flow and decomposition conditions")
    add_common(p)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--out", type=str, default=None, help="report path (TOML)")

    p = sub.add_parser("certify", help="certify global convergence to an equilibrium")
    add_common(p)
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--residual-tol", type=float, default=None)
    p.add_argument("--gap-tol", type=float, default=None)
    p.add_argument("--out", type=str, default=None, help="report path (TOML)")

    return parser


def _load(path: str) -> Scenario:
    return load_scenario(path)


def _parse_vector(text: Optional[str], n: int, name: str) -> Optional[np.ndarray]:
    if text is None:
        return None
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{name}: {exc}") from exc
    if len(values) != n:
        raise argparse.ArgumentTypeError(
            f"{name}: expected {n} comma-separated values, got {len(values)}"
        )
    return np.array(values)


def _write_rows(fh: TextIO, header: list[str], times, blocks) -> None:
    fh.write(",".join(header) + "\n")
    for idx, t in enumerate(times):
        cells = [repr(float(t))]
        for block in blocks:
            cells.extend(repr(float(v)) for v in block[idx])
        fh.write(",".join(cells) + "\n")


def _open_out(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _cmd_validate(args) -> int:
    scen = _load(args.file)
    print(f"scenario {scen.name or args.file!r}: valid "
          f"({scen.n} links, model {scen.model.kind})")
    for w in scen.warnings:
        print(f"  {w}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scen = _load(args.file)
    t_final = scen.defaults.t_final if args.t_final is None else args.t_final
    dt = scen.defaults.dt if args.dt is None else args.dt
    x0 = _parse_vector(args.x0, scen.n, "--x0")
    if x0 is None:
        x0 = np.zeros(scen.n)
    traj = integrate(scen.field, x0, t_final, dt,
                     lower=np.zeros(scen.n), upper=scen.upper())
    fh, close = _open_out(args.out)
    try:
        header = ["t"] + [f"x_{l}" for l in scen.net.link_order]
        _write_rows(fh, header, traj.times, [traj.states])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _cmd_embed(args) -> int:
    scen = _load(args.file)
    t_final = scen.defaults.t_final if args.t_final is None else args.t_final
    dt = scen.defaults.dt if args.dt is None else args.dt
    n = scen.n
    upper = scen.upper()
    x0 = _parse_vector(args.x0, n, "--x0")
    y0 = _parse_vector(args.y0, n, "--y0")
    if x0 is None:
        x0 = np.zeros(n)
    if y0 is None:
        y0 = upper.copy()

    traj = integrate(
        scen.embedding_rates,
        np.concatenate([x0, y0]),
        t_final,
        dt,
        lower=np.zeros(2 * n),
        upper=np.concatenate([upper, upper]),
    )
    X, Y = traj.states[:, :n], traj.states[:, n:]
    fh, close = _open_out(args.out)
    try:
        header = (
            ["t"]
            + [f"x_{l}" for l in scen.net.link_order]
            + [f"y_{l}" for l in scen.net.link_order]
        )
        _write_rows(fh, header, traj.times, [X, Y])
    finally:
        if close:
            fh.close()

    if args.emit_phase:
        with open(args.emit_phase, "w", encoding="utf-8", newline="\n") as ph:
            ph.write("link,t,x,y\n")
            for j, l in enumerate(scen.net.link_order):
                for idx, t in enumerate(traj.times):
                    ph.write(
                        f"{l},{float(t)!r},{float(X[idx, j])!r},{float(Y[idx, j])!r}\n"
                    )
    return EXIT_OK


def _cmd_check(args) -> int:
    scen = _load(args.file)
    kwargs = dict(n_samples=args.samples, seed=args.seed, tolerance=args.tolerance)
    assumptions = check_assumptions(scen, **kwargs)
    decomp = check_decomposition(scen, **kwargs)
    survey = jacobian_sign_survey(scen, **kwargs)

    print(assumptions.as_table())
    print()
    print(decomp.as_table())
    print()
    print(survey.as_table())

    if args.out:
        mapping = {
            "scenario": scen.name,
            "passed": assumptions.passed and decomp.passed,
            "assumptions": assumptions.to_mapping(),
            "decomposition": decomp.to_mapping(),
            "jacobian_signs": survey.to_mapping(),
        }
        Path(args.out).write_text(tomlout.dumps(mapping), encoding="utf-8")

    return EXIT_OK if assumptions.passed and decomp.passed else EXIT_VIOLATIONS


def _cmd_certify(args) -> int:
    scen = _load(args.file)
    cert = certify_convergence(
        scen,
        t_horizon=args.t_final,
        dt=args.dt,
        residual_tol=args.residual_tol,
        gap_tol=args.gap_tol,
    )
    print(cert.as_table())
    if args.out:
        Path(args.out).write_text(tomlout.dumps(cert.to_mapping()), encoding="utf-8")
    return EXIT_OK if cert.certified else EXIT_INCONCLUSIVE


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "embed": _cmd_embed,
    "check": _cmd_check,
    "certify": _cmd_certify,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VIOLATIONS
    except ParseError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except argparse.ArgumentTypeError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
