"""Command-line front end: ``synth``, ``reconstruct``, ``verify``, ``stirling``.

Exit codes: 0 ok, 1 verification failed, 2 parse, 3 coverage, 4 multiplicity
bound, 5 clustering, 6 solve.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Sequence

from . import indexsets as ix
from .coeffs import end_to_end, resynthesis_error
from .errors import ParseError, PronyError
from .ideal import DEFAULT_TOL, IdealData
from .indexsets import IndexSet
from .poly import poly_from_json, poly_to_json
from .signal import (
    TableSource,
    annihilation_residual,
    load_model,
    model_from_json,
    model_to_json,
    samples_from_csv,
    samples_to_csv,
    synth_sample,
)
from .stirling import stirling1, stirling2, stirling_table
from .zeros import DEFAULT_CLUSTER_TOL, DEFAULT_SEED

SEED_ENV = "EXPPOLY_SEED"
VERIFY_TOL = 1e-8
EXIT_VERIFY_FAILED = 1

_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_grid(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``box:lo..hi[,lo..hi]...`` to ``(lo, hi)`` tuples."""
    if not text.startswith("box:"):
        raise ParseError(f"grid must look like box:lo..hi[,lo..hi], got {text!r}")
    lo, hi = [], []
    for part in text[4:].split(","):
        m = _RANGE.match(part)
        if not m:
            raise ParseError(f"bad grid range {part!r}")
        a, b = int(m.group(1)), int(m.group(2))
        if a > b:
            raise ParseError(f"empty grid range {part!r}")
        lo.append(a)
        hi.append(b)
    return tuple(lo), tuple(hi)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return v
    return conv


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_synth(args) -> int:
    model = load_model(args.model)
    lo, hi = parse_grid(args.grid)
    if len(lo) != model.dim:
        raise ParseError(f"grid has {len(lo)} ranges but the model has dimension {model.dim}")
    points = sorted(ix.box(hi, lo), key=ix.grlex_key)
    values = [synth_sample(model, p) for p in points]
    _emit(samples_to_csv(model.dim, points, values), args.out)
    return 0


def ideal_to_json(ideal: IdealData) -> dict:
    return {
        "mult_bound": ideal.mult_bound,
        "tol": ideal.tol,
        "normal_set": [list(a) for a in ideal.normal_set],
        "hilbert_trace": [list(t) for t in ideal.hilbert_trace],
        "kernel": [
            {"degree": n, "polys": [poly_to_json(q) for q in batch]} for n, batch in ideal.kernel_batches
        ],
    }


def kernel_from_json(obj: dict, dim: int) -> list:
    """Kernel polynomials from an ``ideal`` block (or a bare ``{"kernel": [...]}``)."""
    block = obj.get("ideal", obj)
    try:
        kernel = block["kernel"]
    except (KeyError, TypeError):
        raise ParseError("ideal file has no 'kernel' entry") from None
    out = []
    for entry in kernel:
        polys = entry["polys"] if isinstance(entry, dict) and "polys" in entry else [entry]
        out.extend(poly_from_json(p, dim) for p in polys)
    return out


def cmd_reconstruct(args) -> int:
    source = samples_from_csv(_read_text(args.samples))
    seed = args.seed if args.seed is not None else _default_seed()
    model, report, ideal = end_to_end(source, args.mult_bound, args.tol, args.cluster_tol, seed)
    doc = model_to_json(model)
    doc["ideal"] = ideal_to_json(ideal)
    doc["clusters"] = report.clusters
    doc["report"] = report.to_json()
    doc["report"].pop("clusters")
    doc["report"]["seed"] = seed
    _emit(_dumps(doc), args.out)
    return 0


def _annihilation_points(source: TableSource, q) -> IndexSet:
    """All grid points ``alpha`` such that ``alpha + supp q`` stays in the table."""
    deg = [max((a[j] for a in q.terms), default=0) for j in range(source.dim)]
    hi = [h - d for h, d in zip(source.hi, deg)]
    if any(h < l for h, l in zip(hi, source.lo)):
        return IndexSet(source.dim, [])
    return IndexSet(source.dim, ix.box(hi, source.lo))


def cmd_verify(args) -> int:
    if args.model is None and args.ideal is None:
        raise ParseError("verify needs --model and/or --ideal")
    source = samples_from_csv(_read_text(args.samples))
    ok = True
    lines = []
    if args.ideal is not None:
        kernel = kernel_from_json(_read_json(args.ideal), source.dim)
        if not kernel:
            lines.append("annihilation: PASS (empty kernel, nothing to check)")
        for k, q in enumerate(kernel):
            test = _annihilation_points(source, q)
            if len(test) == 0:
                lines.append(f"annihilation[{k}]: SKIP (degree {q.degree} exceeds the sample box)")
                continue
            res = annihilation_residual(source, q, test)
            passed = res <= args.tol
            ok &= passed
            lines.append(f"annihilation[{k}]: {res:.3e} {'PASS' if passed else 'FAIL'}")
    if args.model is not None:
        model = model_from_json(_read_json(args.model))
        if model.dim != source.dim:
            raise ParseError(f"model dimension {model.dim} does not match samples ({source.dim})")
        res = resynthesis_error(model, source, source.points())
        passed = res <= args.tol
        ok &= passed
        lines.append(f"resynthesis: {res:.3e} {'PASS' if passed else 'FAIL'}")
    lines.append("PASS" if ok else "FAIL")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if ok else EXIT_VERIFY_FAILED


def _parse_index(text: str) -> tuple[int, ...]:
    try:
        return ix.parse_multiindex(text)
    except ValueError:
        raise ParseError(f"malformed multi-index {text!r}") from None


def cmd_stirling(args) -> int:
    if args.table:
        if args.dim is None or args.max is None or args.max < 0:
            raise ParseError("--table needs --dim and a nonnegative --max")
        table = stirling_table(args.kind, args.dim, args.max)
        s = args.dim
        rows = [",".join([f"nu{j + 1}" for j in range(s)] + [f"kappa{j + 1}" for j in range(s)] + ["value"])]
        for nu, kappa, v in table.rows():
            rows.append(",".join(str(x) for x in (*nu, *kappa, v)))
        _emit("\n".join(rows) + "\n", args.out)
        return 0
    if args.nu is None or args.kappa is None:
        raise ParseError("stirling needs --nu and --kappa (or --table)")
    fn = stirling1 if args.kind == 1 else stirling2
    try:
        value = fn(_parse_index(args.nu), _parse_index(args.kappa))
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    _emit(f"{value}\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exppoly", description="Multivariate Prony reconstruction tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="sample a model on a box")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", required=True, help="box:lo..hi[,lo..hi]...")
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("reconstruct", help="recover a model from samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--mult-bound", type=_positive(int), required=True)
    p.add_argument("--tol", type=_positive(float), default=DEFAULT_TOL)
    p.add_argument("--cluster-tol", type=_positive(float), default=DEFAULT_CLUSTER_TOL)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="check an ideal and/or model against samples")
    p.add_argument("--samples", required=True)
    p.add_argument("--model")
    p.add_argument("--ideal")
    p.add_argument("--tol", type=_positive(float), default=VERIFY_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stirling", help="multivariate Stirling numbers")
    p.add_argument("--kind", type=int, choices=(1, 2), default=2)
    p.add_argument("--nu")
    p.add_argument("--kappa")
    p.add_argument("--table", action="store_true")
    p.add_argument("--dim", type=_positive(int))
    p.add_argument("--max", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stirling)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which already matches the parse code
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PronyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ParseError.exit_code


if __name__ == "__main__":
    sys.exit(main())
