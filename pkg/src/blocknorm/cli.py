"""Command line interface.

Every command writes one JSON document to stdout; diagnostics go to stderr.

Exit codes: 0 success (or PSD / condition holds), 1 negative outcome
(compression not PSD, condition fails, nothing found), 2 bad input,
3 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import compression as comp
from . import counterexamples as cx
from .errors import (
    BlockNormError,
    InternalConsistencyError,
    NotFoundError,
)
from .fuzz import MODES, run_fuzz
from .io import MatrixFile, dumps, read_matrix_file
from .linalg import DEFAULT_TOL, is_psd
from .norms import CNORM, MAXC, condition_b, parse_norm

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").strip("[]").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _norm_for(text: str, max_block: int):
    """Parse a norm spec; Schatten/Ky Fan live on M_{max_block}."""
    head = text.strip().split(":", 1)[0].lower()
    if head in (CNORM, MAXC):
        return parse_norm(text)
    return parse_norm(text, max_block)


def _load(args):
    mf: MatrixFile = read_matrix_file(args.matrix_file)
    partition = args.partition if args.partition is not None else mf.partition
    if partition is None:
        raise comp.PartitionError("no partition given on the command line or in the file")
    return comp.PartitionedMatrix(mf.matrix(), tuple(partition))


def cmd_check(args):
    pm = _load(args)
    norm = _norm_for(args.norm, max(pm.sizes))
    if pm.m == 2:
        result = comp.compress_m2(pm, norm, args.tol)
    else:
        result = comp.compress(pm, norm, args.tol)
    report = {
        "command": "check",
        "partition": list(pm.sizes),
        "norm": str(norm),
        "values": result.values,
        "determinant": float(np.linalg.det(result.values)),
        "verdict": result.verdict,
    }
    return report, EXIT_OK if result.verdict.is_psd else EXIT_NEGATIVE


def trace_report(trace: comp.ReductionTrace) -> dict:
    return {
        "command": "reduce",
        "stages": [
            {"label": label, "partition": list(snap.sizes), "matrix": snap.a}
            for label, snap in trace.stages
        ],
        "u12": trace.u12,
        "u23": trace.u23,
        "x": trace.x,
        "d": trace.d,
        "q_triples": [q for q in trace.q_triples],
        "q_blocks_diagonals": [
            [np.real(np.diag(trace.q_blocks[i, j])) for j in range(3)] for i in range(3)
        ],
        "trace_matrix": trace.trace_matrix,
        "input_trace_norms": trace.input_trace_norms,
        "trace_matrix_verdict": is_psd(trace.trace_matrix),
        "checks": trace.checks,
    }


def cmd_reduce(args):
    pm = _load(args)
    trace = comp.reduce_theorem1(pm, args.tol)
    return trace_report(trace), EXIT_OK


def cmd_certify(args):
    norm = _norm_for(args.norm, args.ambient)
    cert = condition_b(norm, args.k)
    return {"command": "certify", "norm": str(norm), "certificate": cert}, (
        EXIT_OK if cert.holds else EXIT_NEGATIVE
    )


def _report_dict(report: cx.CounterexampleReport) -> dict:
    return {
        "command": "counterexample",
        "kind": report.kind,
        "partition": list(report.pm.sizes),
        "matrix": report.pm.a,
        "pm_verdict": is_psd(report.pm.a, DEFAULT_TOL),
        "norm": str(report.norm),
        "compression": report.compression.values,
        "compression_verdict": report.compression.verdict,
        "witness": report.witness,
        "construction_params": report.construction_params,
    }


def cmd_counterexample(args):
    kind = args.kind
    if kind == "schatten":
        report = cx.schatten_example(args.p, args.tol)
    elif kind == "thm2":
        if args.sizes is None or len(args.sizes) != 3:
            raise comp.PartitionError("--sizes n1,n2,n is required for kind thm2")
        n1, n2, n = args.sizes
        norm = _norm_for(args.norm, args.ambient or n)
        report = cx.thm2_necessity(norm, n1, n2, n, args.tol)
    elif kind in ("thompson", "m4"):
        b = cx.thompson_search(args.trials, args.seed, args.tol)
        if kind == "thompson":
            payload = {
                "command": "counterexample",
                "kind": "thompson",
                "b": b.real,
                "b_verdict": is_psd(b, args.tol),
                "abs_entries_verdict": is_psd(comp.abs_entries(b), args.tol),
                "construction_params": {"seed": args.seed, "trials": args.trials},
            }
            return payload, EXIT_OK
        norm = _norm_for(args.norm, args.block_dim)
        report = cx.m4_block_lift(b, args.block_dim, norm, args.tol)
        report.construction_params.update(seed=args.seed, trials=args.trials)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(kind)
    return _report_dict(report), EXIT_OK


def cmd_fuzz(args):
    norm = None
    if args.mode in ("thm2", "m2"):
        if args.norm is None:
            raise comp.ParameterError(f"--norm is required for mode {args.mode}")
        max_block = max(args.sizes) if args.sizes else 4
        norm = _norm_for(args.norm, max_block)
    report = run_fuzz(args.mode, args.trials, args.seed, args.sizes, norm, args.tol)
    out = {"command": "fuzz", **{k: v for k, v in vars(report).items()}}
    return out, EXIT_OK if report.failures == 0 else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blocknorm",
        description="Norm compressions of partitioned PSD matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tol(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative tolerance (default 1e-8)")

    p = sub.add_parser("check", help="compute (||A_ij||) and test it for positivity")
    p.add_argument("matrix_file", help="JSON matrix file")
    p.add_argument("--partition", type=_int_list, default=None, help="block sizes, e.g. 1,2,3")
    p.add_argument("--norm", default="trace", help="trace, op, schatten:p=P, kyfan:r=R, c:[..], maxc:[..];[..]")
    add_tol(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="run the three-block trace-norm reduction")
    p.add_argument("matrix_file", help="JSON matrix file")
    p.add_argument("--partition", type=_int_list, default=None, help="three block sizes")
    add_tol(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("certify", help="test ||E_11 + ... + E_kk|| = k ||E_11||")
    p.add_argument("--norm", required=True)
    p.add_argument("--ambient", type=int, required=True, help="dimension n of M_n")
    p.add_argument("--k", type=int, required=True, help="number of diagonal units, 1 <= k <= n")
    add_tol(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("counterexample", help="build a certified counterexample")
    p.add_argument("--kind", choices=("schatten", "thm2", "thompson", "m4"), required=True)
    p.add_argument(
        "--p",
        type=lambda s: float("inf") if s.lower() == "inf" else float(s),
        default=2.0,
        help="Schatten exponent for --kind schatten, p > 1 or inf",
    )
    p.add_argument("--norm", default="schatten:p=2", help="norm for --kind thm2 and m4")
    p.add_argument("--ambient", type=int, default=None, help="ambient dimension for --norm")
    p.add_argument("--sizes", type=_int_list, default=None, help="n1,n2,n for --kind thm2")
    p.add_argument("--block-dim", type=int, default=1, help="block size for --kind m4")
    p.add_argument("--trials", type=int, default=1_000_000, help="search budget for thompson and m4")
    p.add_argument("--seed", type=int, default=cx.DEFAULT_THOMPSON_SEED, help="search seed")
    add_tol(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("fuzz", help="check a positivity theorem on random inputs")
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--sizes", type=_int_list, default=None, help="fixed block sizes (random 1..4 if omitted)")
    p.add_argument("--norm", default=None, help="norm for modes thm2 and m2")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="master seed; trial i uses (seed, i)")
    add_tol(p)
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except InternalConsistencyError as exc:
        report, code = {"error": str(exc), "stage": exc.stage}, EXIT_INTERNAL
    except NotFoundError as exc:
        report, code = {"error": str(exc)}, EXIT_NEGATIVE
    except (BlockNormError, ValueError) as exc:
        report, code = {"error": str(exc)}, EXIT_INPUT
    if "error" in report:
        print(f"blocknorm {args.command}: {report['error']}", file=sys.stderr)
    sys.stdout.write(dumps(report) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
