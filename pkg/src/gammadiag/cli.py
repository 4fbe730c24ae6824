"""``gammadiag`` command line: diag, verify, scaling and transform.

Exit codes: 0 converged / ok, 1 verification gate failed, 2 stalled,
3 rotation budget exhausted, 64 usage error, 74 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict
from typing import Optional

import numpy as np

from gammadiag import _kernels
from gammadiag.diagonalizer import DiagonalizeConfig, DiagonalizeOutcome, Status, diagonalize
from gammadiag.models import ElementFormatError, ModelSpec, format_elements, parse_elements
from gammadiag.oracle import (
    MAX_DENSE_WIDTH,
    dense_to_gamma,
    diagonal_row_to_eigenvalues,
    eigen_hermitian,
    gamma_to_dense,
    rdm,
)
from gammadiag.plotting import Panel, Series, write_svg
from gammadiag.sparse import SparseGammaOperator

EXIT_OK = 0
EXIT_GATE = 1
EXIT_STALLED = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64
EXIT_IO = 74

MAX_VERIFY_WIDTH = 10
MAX_SCALING_N = 14

_STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.STALLED: EXIT_STALLED,
    Status.BUDGET_EXHAUSTED: EXIT_BUDGET,
}

HISTORY_HEADER = ("iter", "r_bin", "s_bin", "phi", "epsilon", "elements", "pruned_sq_norm_cum")
SCALING_HEADER = ("n", "rotations", "final_elements", "epsilon", "wall_ms")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which would read as "stalled"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- threshold parsing ------------------------------------------------------


def parse_decimal(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(f"--{name}: not a decimal number: {text!r}") from None
    if not math.isfinite(value) or value < 0:
        raise UsageError(f"--{name}: must be a finite non-negative number, got {text!r}")
    return value


def resolve_threshold(decimal: Optional[str], pow2: Optional[int], name: str, default: float) -> float:
    """Decimal ``--name`` or ``--name-pow2 k`` meaning ``2^-k``; never both."""
    if decimal is not None and pow2 is not None:
        raise UsageError(f"give either --{name} or --{name}-pow2, not both")
    if pow2 is not None:
        if pow2 < 0 or pow2 > 1000:
            raise UsageError(f"--{name}-pow2 must be in [0, 1000], got {pow2}")
        return 2.0**-pow2
    if decimal is not None:
        return parse_decimal(decimal, name)
    return default


def parse_pair(text: str) -> tuple[float, float, str]:
    """``STOP:CHI`` exponents, e.g. ``7:11`` for stop 2^-7 and chi 2^-11."""
    try:
        a, b = text.split(":")
        sa, sb = int(a), int(b)
    except ValueError:
        raise UsageError(f"--pair-pow2 expects STOP:CHI integers, got {text!r}") from None
    if not (0 < sa <= 1000 and 0 <= sb <= 1000):
        raise UsageError(f"--pair-pow2 exponents out of range: {text!r}")
    return 2.0**-sa, 2.0**-sb, f"dlt{sb}stp{sa}"


# -- argument plumbing ----------------------------------------------------------


def _model_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=("tfim", "random", "table1", "file"), default="tfim")
    g.add_argument("--n", type=int, help="TFIM site count")
    g.add_argument("--width", type=int, help="random model width")
    g.add_argument("--terms", type=int, help="random model term count")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--path", help="element-list file for --model file")
    g.add_argument("--periodic-xx", action="store_true", help="add the X_{n-1} X_0 bond")
    return p


def _run_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("diagonalization")
    g.add_argument("--stop-epsilon")
    g.add_argument("--stop-epsilon-pow2", type=int)
    g.add_argument("--delete-chi")
    g.add_argument("--delete-chi-pow2", type=int)
    g.add_argument("--max-rotations", type=int, default=DiagonalizeConfig.max_rotations)
    g.add_argument("--gain-tolerance", type=float, default=DiagonalizeConfig.gain_tolerance)
    g.add_argument("--retry-limit", type=int, default=DiagonalizeConfig.candidate_retry_limit)
    g.add_argument("--bucket-retry-limit", type=int, default=DiagonalizeConfig.bucket_retry_limit)
    mode = g.add_mutually_exclusive_group()
    mode.add_argument("--weighted-mode", dest="weighted", action="store_true", default=True)
    mode.add_argument("--unweighted-mode", dest="weighted", action="store_false")
    g.add_argument("--parity-toggle", action="store_true", help="plain s.r parity toggle rule")
    return p


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--determinism", action="store_true", help="record determinism mode in the manifest")
    p.add_argument("--backend", choices=("auto", "python", "cython"), default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gammadiag", description="Jacobi diagonalization in the gamma-matrix basis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    model, run, common = _model_flags(), _run_flags(), _common_flags()

    d = sub.add_parser("diag", parents=[model, run, common], help="diagonalize one operator")
    d.add_argument("--manifest", help="re-run from a manifest.json (model and config taken from it)")

    v = sub.add_parser("verify", parents=[model, run, common], help="diagonalize and compare spectra")
    v.add_argument("--rdm-gate", type=float, default=1e-3)

    s = sub.add_parser("scaling", parents=[run, common], help="TFIM sweep over n")
    s.add_argument("--n-min", type=int, default=3)
    s.add_argument("--n-max", type=int, default=10)
    s.add_argument("--fit-min", type=int, default=6, help="smallest n in the slope fit")
    s.add_argument("--pair-pow2", action="append", metavar="STOP:CHI", help="threshold exponents, repeatable")
    s.add_argument("--periodic-xx", action="store_true")

    t = sub.add_parser("transform", help="dense CSV <-> gamma element list")
    direction = t.add_mutually_exclusive_group(required=True)
    direction.add_argument("--to-gamma", action="store_true", help="dense CSV in, element list out")
    direction.add_argument("--to-dense", action="store_true", help="element list in, dense CSV out")
    t.add_argument("--input", required=True)
    t.add_argument("--output", help="default: stdout")
    t.add_argument("--drop-below", type=float, default=1e-14)
    return parser


def model_from_args(args) -> ModelSpec:
    if args.model == "tfim" and args.n is None:
        raise UsageError("--model tfim needs --n")
    if args.model == "random" and (args.width is None or args.terms is None):
        raise UsageError("--model random needs --width and --terms")
    if args.model == "file" and not args.path:
        raise UsageError("--model file needs --path")
    try:
        return ModelSpec(
            kind=args.model,
            n_sites=args.n if args.model == "tfim" else None,
            width=args.width if args.model == "random" else None,
            term_count=args.terms if args.model == "random" else None,
            seed=args.seed if args.model == "random" else None,
            path=os.path.abspath(args.path) if args.model == "file" else None,
            periodic_xx=bool(args.periodic_xx) if args.model == "tfim" else False,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def config_from_args(args, stop_default: float = 2.0**-7, chi_default: float = 2.0**-11) -> DiagonalizeConfig:
    stop = resolve_threshold(args.stop_epsilon, args.stop_epsilon_pow2, "stop-epsilon", stop_default)
    chi = resolve_threshold(args.delete_chi, args.delete_chi_pow2, "delete-chi", chi_default)
    try:
        return DiagonalizeConfig(
            stop_epsilon=stop,
            delete_chi=chi,
            max_rotations=args.max_rotations,
            gain_tolerance=args.gain_tolerance,
            candidate_retry_limit=args.retry_limit,
            weighted=args.weighted,
            parity_toggle=args.parity_toggle,
            bucket_retry_limit=args.bucket_retry_limit,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- output helpers -----------------------------------------------------------


def _bits(x: int, width: int) -> str:
    return format(x, f"0{width}b")


def history_csv(outcome: DiagonalizeOutcome, width: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HISTORY_HEADER)
    for st in outcome.history:
        w.writerow(
            (
                st.iteration,
                _bits(st.r, width),
                _bits(st.s, width),
                repr(st.phi),
                repr(st.epsilon_after),
                st.elements_after,
                repr(st.pruned_sq_norm_cum),
            )
        )
    return buf.getvalue()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_json(path: str, data) -> None:
    _write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def _prepare_out(args, command: str) -> str:
    out = args.out or os.path.join("runs", command)
    os.makedirs(out, exist_ok=True)
    return out


def _apply_backend(name: Optional[str]) -> None:
    if name is None:
        return
    try:
        _kernels.set_backend(name)
    except ImportError as exc:
        raise UsageError(str(exc)) from None


def _manifest(command: str, spec: Optional[ModelSpec], config: Optional[DiagonalizeConfig], args, **extra) -> dict:
    data = {
        "command": command,
        "model": spec.to_dict() if spec is not None else None,
        "config": asdict(config) if config is not None else None,
        "determinism": bool(getattr(args, "determinism", False)),
        "backend": _kernels.backend_name(),
        "status": "running",
        "artifacts": {},
    }
    data.update(extra)
    return data


def _outcome_json(outcome: DiagonalizeOutcome, op: SparseGammaOperator, wall: float) -> dict:
    return {
        "status": outcome.status.value,
        "rotations": outcome.rotations,
        "initial_epsilon": outcome.initial_epsilon,
        "final_epsilon": outcome.epsilon,
        "final_elements": len(op),
        "pruned_sq_norm_cum": outcome.history[-1].pruned_sq_norm_cum if outcome.history else 0.0,
        "wall_s": wall,
    }


# -- subcommands ----------------------------------------------------------------


def cmd_diagonalize(args) -> int:
    if args.manifest:
        try:
            with open(args.manifest, encoding="utf-8") as fh:
                saved = json.load(fh)
        except OSError as exc:
            print(f"cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_IO
        except json.JSONDecodeError as exc:
            raise UsageError(f"manifest is not valid JSON: {exc}") from None
        try:
            spec = ModelSpec(**saved["model"])
            config = DiagonalizeConfig(**saved["config"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"manifest is incomplete: {exc}") from None
        if args.backend is None and saved.get("backend"):
            _apply_backend(saved["backend"])
    else:
        spec = model_from_args(args)
        config = config_from_args(args)
    out = _prepare_out(args, "diag")
    paths = {
        "manifest": os.path.join(out, "manifest.json"),
        "history": os.path.join(out, "history.csv"),
        "outcome": os.path.join(out, "outcome.json"),
        "elements": os.path.join(out, "final_elements.txt"),
    }
    manifest = _manifest("diag", spec, config, args)
    manifest["artifacts"] = {k: os.path.basename(v) for k, v in paths.items() if k != "manifest"}
    _write_json(paths["manifest"], manifest)

    op = _build(spec)
    t0 = time.perf_counter()
    outcome = diagonalize(op, config)
    wall = time.perf_counter() - t0

    _write_text(paths["history"], history_csv(outcome, op.width))
    summary = _outcome_json(outcome, op, wall)
    _write_json(paths["outcome"], summary)
    _write_text(paths["elements"], format_elements(op))
    manifest.update(status=outcome.status.value, wall_clock_s=wall)
    _write_json(paths["manifest"], manifest)
    print(
        f"{outcome.status.value}: {outcome.rotations} rotations, epsilon {outcome.epsilon:.3e}, "
        f"{len(op)} elements -> {out}"
    )
    return _STATUS_EXIT[outcome.status]


def _build(spec: ModelSpec) -> SparseGammaOperator:
    try:
        return spec.build()
    except ElementFormatError as exc:
        raise UsageError(f"{spec.path}: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_verify(args) -> int:
    spec = model_from_args(args)
    config = config_from_args(args)
    op = _build(spec)
    if op.width > MAX_VERIFY_WIDTH:
        raise UsageError(f"verify is limited to width {MAX_VERIFY_WIDTH}, got {op.width}")
    out = _prepare_out(args, "verify")
    paths = {
        "manifest": os.path.join(out, "manifest.json"),
        "history": os.path.join(out, "history.csv"),
        "rdm_curve": os.path.join(out, "rdm_curve.csv"),
        "elements_curve": os.path.join(out, "elements_curve.csv"),
        "plot": os.path.join(out, "convergence.svg"),
        "outcome": os.path.join(out, "outcome.json"),
        "spectrum_reference": os.path.join(out, "spectrum_reference.txt"),
        "spectrum_final": os.path.join(out, "spectrum_final.txt"),
    }
    manifest = _manifest("verify", spec, config, args, rdm_gate=args.rdm_gate)
    manifest["artifacts"] = {k: os.path.basename(v) for k, v in paths.items() if k != "manifest"}
    _write_json(paths["manifest"], manifest)

    reference = eigen_hermitian(gamma_to_dense(op))
    curve = [(0, rdm(diagonal_row_to_eigenvalues(op).eigenvalues, reference), len(op))]

    def record(step, current):
        curve.append((step.iteration, rdm(diagonal_row_to_eigenvalues(current).eigenvalues, reference), len(current)))

    t0 = time.perf_counter()
    outcome = diagonalize(op, config, on_step=record)
    wall = time.perf_counter() - t0
    final = curve[-1][1]

    _write_text(paths["history"], history_csv(outcome, op.width))
    _write_text(paths["spectrum_reference"], "".join(f"{x!r}\n" for x in reference.tolist()))
    final_spectrum = diagonal_row_to_eigenvalues(op).eigenvalues
    _write_text(paths["spectrum_final"], "".join(f"{x!r}\n" for x in final_spectrum.tolist()))
    _write_text(paths["rdm_curve"], "iter,rdm\n" + "".join(f"{i},{v!r}\n" for i, v, _ in curve))
    _write_text(paths["elements_curve"], "iter,elements\n" + "".join(f"{i},{e}\n" for i, _, e in curve))
    iters = [c[0] for c in curve]
    write_svg(
        [
            Panel("relative eigenvalue error", "rotation", "rdm", log_y=True, series=[Series("rdm", iters, [c[1] for c in curve])]),
            Panel("stored elements", "rotation", "elements", series=[Series("elements", iters, [c[2] for c in curve])]),
        ],
        paths["plot"],
    )
    summary = _outcome_json(outcome, op, wall)
    summary.update(final_rdm=final, rdm_gate=args.rdm_gate, gate_passed=final <= args.rdm_gate)
    _write_json(paths["outcome"], summary)
    manifest.update(status=outcome.status.value, wall_clock_s=wall, final_rdm=final)
    _write_json(paths["manifest"], manifest)
    verdict = "PASS" if final <= args.rdm_gate else "FAIL"
    print(f"{verdict}: rdm {final:.3e} (gate {args.rdm_gate:.1e}), {outcome.status.value} after {outcome.rotations} rotations")
    if final <= args.rdm_gate:
        return EXIT_OK
    return _STATUS_EXIT[outcome.status] or EXIT_GATE


def loglog_slope(ns, ys) -> float:
    """Least-squares slope of ``log y`` against ``log n``; nan with fewer than two usable points."""
    pts = [(math.log(n), math.log(y)) for n, y in zip(ns, ys) if n > 0 and y > 0]
    if len(pts) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def cmd_scaling(args) -> int:
    if args.n_min > args.n_max:
        raise UsageError(f"empty n range [{args.n_min}, {args.n_max}]")
    if args.n_min < 2 or args.n_max > MAX_SCALING_N:
        raise UsageError(f"n must lie in [2, {MAX_SCALING_N}]")
    if any(v is not None for v in (args.stop_epsilon, args.stop_epsilon_pow2, args.delete_chi, args.delete_chi_pow2)):
        raise UsageError("scaling takes thresholds through --pair-pow2 STOP:CHI")
    pairs = [parse_pair(p) for p in (args.pair_pow2 or ["7:11"])]
    base = config_from_args(args)
    out = _prepare_out(args, "scaling")
    manifest = _manifest(
        "scaling",
        None,
        base,
        args,
        n_range=[args.n_min, args.n_max],
        pairs=[{"label": lbl, "stop_epsilon": st, "delete_chi": chi} for st, chi, lbl in pairs],
        periodic_xx=bool(args.periodic_xx),
    )
    _write_json(os.path.join(out, "manifest.json"), manifest)

    worst = EXIT_OK
    results = {}
    for stop, chi, label in pairs:
        config = DiagonalizeConfig(**{**asdict(base), "stop_epsilon": stop, "delete_chi": chi})
        rows = []
        for n in range(args.n_min, args.n_max + 1):
            op = ModelSpec("tfim", n_sites=n, periodic_xx=bool(args.periodic_xx)).build()
            t0 = time.perf_counter()
            outcome = diagonalize(op, config)
            wall_ms = 1000.0 * (time.perf_counter() - t0)
            rows.append((n, outcome.rotations, len(op), outcome.epsilon, wall_ms))
            worst = max(worst, _STATUS_EXIT[outcome.status])
            print(f"{label} n={n}: {outcome.status.value}, {outcome.rotations} rotations, {len(op)} elements")
        path = os.path.join(out, f"scaling_{label}.csv")
        _write_text(
            path,
            ",".join(SCALING_HEADER) + "\n" + "".join(f"{n},{k},{e},{eps!r},{ms:.3f}\n" for n, k, e, eps, ms in rows),
        )
        fit = [r for r in rows if r[0] >= args.fit_min] or rows
        results[label] = {
            "csv": os.path.basename(path),
            "stop_epsilon": stop,
            "delete_chi": chi,
            "fit_n_range": [fit[0][0], fit[-1][0]],
            "rotations_slope": loglog_slope([r[0] for r in fit], [r[1] for r in fit]),
            "elements_slope": loglog_slope([r[0] for r in fit], [r[2] for r in fit]),
            "rows": rows,
        }
    write_svg(
        [
            Panel(
                "rotations vs spins",
                "n",
                "rotations",
                log_x=True,
                log_y=True,
                series=[Series(l, [r[0] for r in v["rows"]], [r[1] for r in v["rows"]]) for l, v in results.items()],
            ),
            Panel(
                "stored elements vs spins",
                "n",
                "elements",
                log_x=True,
                log_y=True,
                series=[Series(l, [r[0] for r in v["rows"]], [r[2] for r in v["rows"]]) for l, v in results.items()],
            ),
        ],
        os.path.join(out, "scaling.svg"),
    )
    slopes = {l: {k: v for k, v in r.items() if k != "rows"} for l, r in results.items()}
    _write_json(os.path.join(out, "slopes.json"), slopes)
    for label, r in slopes.items():
        print(f"{label}: rotation slope {r['rotations_slope']:.3f}, element slope {r['elements_slope']:.3f}")
    manifest.update(status="done", worst_exit=worst)
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return worst


def read_dense_csv(text: str) -> np.ndarray:
    """Square matrix from CSV: ``dim`` real columns or ``2 dim`` interleaved re,im columns."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise UsageError("dense CSV is empty")
    try:
        values = [[float(c) for c in r] for r in rows]
    except ValueError as exc:
        raise UsageError(f"dense CSV: {exc}") from None
    dim = len(values)
    ncols = {len(r) for r in values}
    if len(ncols) != 1:
        raise UsageError("dense CSV rows have differing lengths")
    (ncol,) = ncols
    arr = np.array(values)
    if ncol == dim:
        m = arr.astype(np.complex128)
    elif ncol == 2 * dim:
        m = arr[:, 0::2] + 1j * arr[:, 1::2]
    else:
        raise UsageError(f"dense CSV: {dim} rows need {dim} or {2 * dim} columns, got {ncol}")
    if dim & (dim - 1):
        raise UsageError(f"dense CSV: dimension {dim} is not a power of two")
    if dim > 1 << MAX_DENSE_WIDTH:
        raise UsageError(f"dense CSV: dimension {dim} exceeds {1 << MAX_DENSE_WIDTH}")
    if dim == 1:
        raise UsageError("dense CSV: need at least a 2x2 matrix")
    return m


def write_dense_csv(m: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in m:
        w.writerow([x for z in row for x in (repr(float(z.real)), repr(float(z.imag)))])
    return buf.getvalue()


def cmd_transform(args) -> int:
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.to_gamma:
        m = read_dense_csv(text)
        try:
            op = dense_to_gamma(m, drop_below=args.drop_below)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = format_elements(op)
    else:
        try:
            op = parse_elements(text)
        except ElementFormatError as exc:
            raise UsageError(f"{args.input}: {exc}") from None
        if op.width > MAX_DENSE_WIDTH:
            raise UsageError(f"dense output limited to width {MAX_DENSE_WIDTH}")
        result = write_dense_csv(gamma_to_dense(op))
    if args.output:
        _write_text(args.output, result)
    else:
        sys.stdout.write(result)
    return EXIT_OK


_COMMANDS = {
    "diag": cmd_diagonalize,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "transform": cmd_transform,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _apply_backend(getattr(args, "backend", None))
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gammadiag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gammadiag: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
