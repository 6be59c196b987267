"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 failed self-check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import algebra, coherent, fock, vibron


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        x = 0.0
    return f"{x:.12g}"


def csv_text(table: vibron.Table) -> str:
    """Header plus one row per record; LF line endings, 12 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([format_value(x) for x in row])
    return buf.getvalue()


def emit_csv(table: vibron.Table, path) -> None:
    Path(path).write_text(csv_text(table), encoding="utf-8", newline="")


def _read_json(path: str, field: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"{field}: cannot read {path} ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{field}: malformed JSON in {path} ({exc.msg})") from None


def _occupancy_arg(text: str, field: str) -> list[int]:
    try:
        val = json.loads(text)
    except json.JSONDecodeError:
        raise UsageError(f"{field}: expected an integer array like [1,2], got {text!r}") from None
    if not isinstance(val, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in val):
        raise UsageError(f"{field}: expected an integer array like [1,2], got {text!r}")
    return val


def cmd_me_eval(args) -> None:
    frame = coherent.frame_from_json(_read_json(args.frame, "--frame"))
    op = algebra.from_json(_read_json(args.op, "--op"))
    bra = _occupancy_arg(args.bra, "--bra")
    ket = _occupancy_arg(args.ket, "--ket")
    val = coherent.matrix_element_poly(frame, bra, ket, op, method=args.method)
    print(f"{val.real:.15g} {val.imag:.15g}")


def cmd_me_count(args) -> None:
    print(coherent.count_contributing(args.species, args.body))
    if args.groups:
        print(len(coherent.collect_partitions(args.species, args.body)))


def random_term(rng: np.random.Generator, n: int, m_create: int, m_annihilate: int) -> algebra.NormalTerm:
    c = complex(rng.normal(), rng.normal())
    return algebra.NormalTerm(
        c,
        [int(x) for x in rng.integers(1, n + 1, size=m_create)],
        [int(x) for x in rng.integers(1, n + 1, size=m_annihilate)],
    )


def oracle_case(rng: np.random.Generator, n: int = 3, max_N: int = 6, max_m: int = 3):
    """One random (frame, bra, ket, term) instance for the coherent vs Fock check."""
    S = int(rng.integers(1, 4))
    frame = coherent.random_frame(rng, S, n)
    m = int(rng.integers(0, max_m + 1))
    m_create = int(rng.integers(max(0, m - 1), m + 1))
    N_ket = int(rng.integers(m, max_N + 1))
    N_bra = N_ket - m + m_create

    def split(N):
        cuts = np.sort(rng.integers(0, N + 1, size=S - 1))
        return [int(x) for x in np.diff(np.concatenate(([0], cuts, [N])))]

    return frame, split(N_bra), split(N_ket), random_term(rng, n, m_create, m)


def oracle_check(seed: int, cases: int, tol: float = 1e-10) -> tuple[int, float]:
    rng = np.random.default_rng(seed)
    agree, worst = 0, 0.0
    for _ in range(cases):
        frame, bra, ket, term = oracle_case(rng)
        poly = algebra.OperatorPoly.from_terms(frame.n, [term])
        dev = abs(coherent.matrix_element(frame, bra, ket, term) - fock.me_oracle(frame, bra, ket, poly))
        worst = max(worst, dev)
        agree += dev <= tol
    return agree, worst


def cmd_oracle_check(args) -> None:
    agree, worst = oracle_check(args.seed, args.cases, args.tol)
    if agree == args.cases:
        print(f"{agree}/{args.cases} agree (max dev < {args.tol:g})")
    else:
        print(f"{agree}/{args.cases} agree (max dev {worst:.3e} exceeds {args.tol:g})")
        raise CheckFailed("oracle mismatch")


def _write_or_print(table: vibron.Table, out: str | None, name: str) -> None:
    if out is None:
        sys.stdout.write(csv_text(table))
    else:
        Path(out).mkdir(parents=True, exist_ok=True)
        emit_csv(table, Path(out) / name)


def cmd_vibron_energies(args) -> None:
    vibron._check_guard(args.N)
    if args.dump_matrix:
        basis = fock.enumerate_basis(3, args.N)
        h = fock.matrix_of(vibron.build_operators().hamiltonian, basis)
        with open(args.dump_matrix, "w", encoding="utf-8", newline="\n") as fh:
            fock.dump_matrix(h, fh)
    table = vibron.energy_table(args.N)
    _write_or_print(table, args.out, "energies.csv")


def cmd_vibron_transitions(args) -> None:
    exact = vibron.exact_transition(args.N, args.vi, args.li, args.vf, args.lf, args.op)
    delta = args.vf - args.vi
    if delta in (0, -1):
        est = vibron.cs_transition(args.N, args.vi, delta, args.op, args.r) ** 2
        print(f"exact {format_value(exact)} coherent {format_value(est)}")
    else:
        print(f"exact {format_value(exact)}")


def cmd_vibron_minimize(args) -> None:
    print(f"{vibron.minimize_r(args.N):.6f}")


def cmd_vibron_compare(args) -> None:
    report = vibron.compare_report(args.N)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, table in report.items():
        emit_csv(table, out / f"{name}.csv")
        print(out / f"{name}.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cohstate", description="Coherent-state matrix elements and vibron-model checks.")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    me = groups.add_parser("me", help="coherent-state matrix elements")
    me_sub = me.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = me_sub.add_parser("eval", help="evaluate <bra|op|ket> between coherent states")
    p.add_argument("--frame", required=True, help="frame JSON file")
    p.add_argument("--bra", required=True, help='bra occupancy, e.g. "[1,2]"')
    p.add_argument("--ket", required=True, help='ket occupancy, e.g. "[2,1]"')
    p.add_argument("--op", required=True, help="operator JSON file")
    p.add_argument("--method", choices=["auto", "direct", "grouped"], default="auto")
    p.set_defaults(func=cmd_me_eval)
    p = me_sub.add_parser("count", help="number of contributing index pairs")
    p.add_argument("--species", type=int, required=True, help="number of coherent species S")
    p.add_argument("--body", type=int, required=True, help="body count m")
    p.add_argument("--groups", action="store_true", help="also print the partition-group count")
    p.set_defaults(func=cmd_me_count)

    oracle = groups.add_parser("oracle", help="brute-force cross-checks")
    oracle_sub = oracle.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = oracle_sub.add_parser("check", help="random coherent-engine vs Fock-space comparison")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_oracle_check)

    vib = groups.add_parser("vibron", help="two-dimensional vibron model")
    vib_sub = vib.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = vib_sub.add_parser("energies", help="exact and coherent energies per v")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out", help="directory for energies.csv (default: stdout)")
    p.add_argument("--dump-matrix", help="write H on the full N-boson basis as 'row col re im' lines")
    p.set_defaults(func=cmd_vibron_energies)
    p = vib_sub.add_parser("transitions", help="exact intensity and coherent estimate")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--op", choices=["D+", "D-", "Q+", "Q-"], required=True)
    p.add_argument("--vi", type=int, required=True)
    p.add_argument("--li", type=int, required=True)
    p.add_argument("--vf", type=int, required=True)
    p.add_argument("--lf", type=int, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.set_defaults(func=cmd_vibron_transitions)
    p = vib_sub.add_parser("minimize-r", help="variational r for the ground coherent state")
    p.add_argument("--N", type=int, required=True)
    p.set_defaults(func=cmd_vibron_minimize)
    p = vib_sub.add_parser("compare", help="write energies.csv, dipole.csv, quadrupole.csv")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_vibron_compare)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
