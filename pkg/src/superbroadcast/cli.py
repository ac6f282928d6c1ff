"""Command line interface: CSV tables for scaling factors, thresholds,
simulations and two-site correlations.

Exit codes: 0 success, 2 usage error, 3 capacity error, 4 numerical
contract violation.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .correlations import concurrence_curve
from .errors import CapacityError, ContractError, DomainError
from .scaling import Covariance, scaling_factor, single_site_bloch
from .simulator import check_capacity, superbroadcast_universal
from .thresholds import critical_purity, max_output_copies

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_CONTRACT = 4
DEFAULT_R = "0.01:1.0:100"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


@dataclass
class OutputTable:
    header: list[str]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, *row) -> None:
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} fields, header has {len(self.header)}")
        self.rows.append(tuple(row))

    def to_csv(self) -> str:
        lines = [f"# superbroadcast {__version__}"]
        lines += [f"# {k}: {v}" for k, v in self.metadata.items()]
        lines.append(",".join(self.header))
        lines += [",".join(fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def parse_r_range(text: str) -> np.ndarray:
    """'min:max:steps' (inclusive linspace) or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:steps or a number, got {text!r}")
    if steps < 1 or (steps == 1 and lo != hi) or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return np.linspace(lo, hi, steps)


def parse_int_range(text: str) -> list[int]:
    """'a:b' inclusive, or a single integer."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or a:b, got {text!r}")
    if len(parts) == 1:
        return parts
    if len(parts) != 2 or parts[1] < parts[0]:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}")
    return list(range(parts[0], parts[1] + 1))


def _params(args, *names) -> str:
    return " ".join(f"{n}={getattr(args, n + '_text', None) or getattr(args, n)}" for n in names)


def cmd_scaling(args) -> OutputTable:
    table = OutputTable(["r", "p", "r_prime"])
    table.metadata = {"command": "scaling", "parameters": _params(args, "cov", "N", "M", "r")}
    r = np.sort(args.r)
    p = scaling_factor(args.N, args.M, r, args.cov)
    for ri, pi in zip(r, np.atleast_1d(p)):
        table.add(ri, pi, pi * ri)
    return table


def cmd_threshold(args) -> OutputTable:
    table = OutputTable(["N", "M", "r_star", "one_minus_r_star"])
    table.metadata = {"command": "threshold", "parameters": _params(args, "cov", "N", "mode", "cap")}
    for N in args.N:
        if args.mode == "N+1":
            M = N + 1
        else:
            M = max_output_copies(N, args.cov, search_cap=args.cap)
        r_star = None if M is None else critical_purity(N, M, args.cov)
        table.add(N, M, r_star, None if r_star is None else 1 - r_star)
    return table


def cmd_mstar(args) -> str:
    M = max_output_copies(args.N, args.cov, search_cap=args.cap)
    return ("none" if M is None else fmt(M)) + "\n"


def cmd_simulate(args) -> tuple[OutputTable, bool]:
    check_capacity(args.N, "N")
    check_capacity(args.M, "M")
    table = OutputTable(["r", "r_prime", "p_formula", "p_simulated", "abs_delta"])
    table.metadata = {"command": "simulate", "parameters": _params(args, "N", "M", "r", "tol")}
    ok = True
    for r in np.sort(args.r):
        state = superbroadcast_universal(args.N, args.M, float(r))
        r_prime = single_site_bloch(state, "z")
        p_formula = scaling_factor(args.N, args.M, float(r), Covariance.UNIVERSAL)
        p_sim = r_prime / r
        delta = abs(p_sim - p_formula)
        ok &= delta <= args.tol
        table.add(r, r_prime, p_formula, p_sim, delta)
    return table, ok


def cmd_correlations(args) -> OutputTable:
    check_capacity(args.N, "N")
    check_capacity(args.M, "M")
    table = OutputTable(["r", "beta", "alpha", "C"])
    table.metadata = {"command": "correlations", "parameters": _params(args, "N", "M", "r")}
    for pt in concurrence_curve(args.N, args.M, np.sort(args.r)):
        table.add(pt.r, pt.beta, pt.alpha, pt.concurrence)
    return table


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superbroadcast", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cov=True):
        if cov:
            p.add_argument("--cov", choices=[c.value for c in Covariance], default="universal",
                           help="covariance class (default %(default)s)")
        p.add_argument("--out", help="write CSV here instead of standard output")

    p = sub.add_parser("scaling", help="scaling factor p(r) over an r range")
    common(p)
    p.add_argument("-N", type=int, required=True, help="input copies")
    p.add_argument("-M", type=int, required=True, help="output copies")
    p.add_argument("--r", type=parse_r_range, default=DEFAULT_R, help="purity: value or min:max:steps (default %(default)s)")

    p = sub.add_parser("threshold", help="critical purity r* over a range of N")
    common(p)
    p.add_argument("-N", type=parse_int_range, required=True, help="N or a:b (inclusive)")
    p.add_argument("--mode", choices=["N+1", "Mstar"], default="N+1",
                   help="M = N+1, or M = M*(N) (default %(default)s)")
    p.add_argument("--cap", type=int, default=2000, help="largest finite M searched (default %(default)s)")

    p = sub.add_parser("mstar", help="maximal number of outputs M*(N)")
    common(p)
    p.add_argument("-N", type=int, required=True, help="input copies")
    p.add_argument("--cap", type=int, default=2000, help="largest finite M searched (default %(default)s)")

    p = sub.add_parser("simulate", help="simulate the realization scheme (universal)")
    common(p, cov=False)
    p.add_argument("-N", type=int, required=True, help="input copies")
    p.add_argument("-M", type=int, required=True, help="output copies")
    p.add_argument("--r", type=parse_r_range, required=True, help="purity: value or min:max:steps")
    p.add_argument("--tol", type=float, default=1e-9, help="oracle agreement tolerance")

    p = sub.add_parser("correlations", help="two-site (beta, alpha, C) along an r range")
    common(p, cov=False)
    p.add_argument("-N", type=int, required=True, help="input copies")
    p.add_argument("-M", type=int, required=True, help="output copies")
    p.add_argument("--r", type=parse_r_range, default=DEFAULT_R, help="purity: value or min:max:steps (default %(default)s)")
    return parser


def _raw_values(argv: Sequence[str]) -> dict[str, str]:
    """Raw text of range-valued flags, echoed verbatim in the metadata."""
    raw = {}
    for i, tok in enumerate(argv):
        for flag, key in (("--r", "r"), ("-N", "N")):
            if tok == flag and i + 1 < len(argv):
                raw[key] = argv[i + 1]
            elif tok.startswith(flag + "="):
                raw[key] = tok.split("=", 1)[1]
    return raw


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "r"):
        args.r_text = DEFAULT_R
    for key, text in _raw_values(argv).items():
        setattr(args, key + "_text", text)
    status = 0
    try:
        if args.command == "scaling":
            text = cmd_scaling(args).to_csv()
        elif args.command == "threshold":
            text = cmd_threshold(args).to_csv()
        elif args.command == "mstar":
            text = cmd_mstar(args)
        elif args.command == "simulate":
            table, ok = cmd_simulate(args)
            text = table.to_csv()
            if not ok:
                status = EXIT_CONTRACT
        else:
            text = cmd_correlations(args).to_csv()
    except DomainError as exc:
        parser.exit(EXIT_USAGE, f"superbroadcast: error: {exc}\n")
    except CapacityError as exc:
        parser.exit(EXIT_CAPACITY, f"superbroadcast: capacity error: {exc}\n")
    except ContractError as exc:
        parser.exit(EXIT_CONTRACT, f"superbroadcast: contract violation: {exc}\n")
    _emit(text, args.out)
    if status == EXIT_CONTRACT:
        sys.stderr.write(f"superbroadcast: simulated and closed-form p differ by more than {args.tol}\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
