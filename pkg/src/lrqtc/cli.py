"""Command line front end: ``lrqtc complete|synth|eval|spectrum``.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .arrays import QuaternionTensor, as_matrix
from .completion import (SolverConfig, apply_mask, generate_mask, low_rank_tensor,
                         lrc_qm, lrc_qt, relative_error)
from .linalg import DecompositionError, singular_values, write_spectrum_csv
from .media import (MediaError, from_quaternion, load_mask, load_media, save_mask,
                    save_media, to_quaternion)
from .metrics import assim, psnr, ssim
from .tensor import FormatError, save_qt1, unfold

log = logging.getLogger("lrqtc")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _encode_float(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return v


def _decode_float(v):
    if isinstance(v, str):
        return float(v)
    return v


@dataclass
class RunReport:
    """JSON run summary; ``metrics`` holds ``psnr`` plus ``ssim`` or ``assim``."""

    input: str
    shape: list
    order: int
    sr: float
    seed: Optional[int]
    mask_file: Optional[str]
    config: dict
    iterations: int
    converged: bool
    wall_time_s: float
    metrics: dict = field(default_factory=dict)
    delta_trace: list = field(default_factory=list)
    relative_error: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["metrics"] = {k: _encode_float(v) for k, v in self.metrics.items()}
        d["delta_trace"] = [_encode_float(v) for v in self.delta_trace]
        if self.relative_error is None:
            d.pop("relative_error")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        d["metrics"] = {k: _decode_float(v) for k, v in d.get("metrics", {}).items()}
        d["delta_trace"] = [_decode_float(v) for v in d.get("delta_trace", [])]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def _quality(recovered, reference, order: int) -> dict:
    out = {"psnr": psnr(recovered, reference)}
    key = {2: "ssim", 3: "assim"}.get(order)
    if key is None:
        return out
    fn = ssim if order == 2 else assim
    try:
        out[key] = fn(recovered, reference)
    except ValueError:
        # smaller than the SSIM window
        out[key] = None
    return out


def _as_pixels(T: QuaternionTensor):
    if T.order in (2, 3):
        return from_quaternion(T)
    return T


def _add_solver_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver")
    g.add_argument("--mode", choices=("matrix", "tensor"),
                   help="matrix (single nuclear norm) or tensor (one per mode); "
                        "default: matrix for images, tensor otherwise")
    g.add_argument("--alpha", type=float, nargs="+")
    g.add_argument("--beta0", type=float, nargs="+")
    g.add_argument("--beta-max", type=float, nargs="+")
    g.add_argument("--eta0", type=float, default=1.05)
    g.add_argument("--eps", type=float, default=1e-3)
    g.add_argument("--eta-trigger", type=float, default=0.01)
    g.add_argument("--trigger-mode", choices=("relative", "absolute"), default="relative")
    g.add_argument("--max-iter", type=int, default=500)
    g.add_argument("--threads", type=int, default=1)


def _solver_config(args, order: int, mode: str) -> SolverConfig:
    common = dict(eta0=args.eta0, epsilon=args.eps, eta_trigger=args.eta_trigger,
                  trigger_mode=args.trigger_mode, max_iter=args.max_iter)
    given = {k: tuple(v) for k, v in (("alpha", args.alpha), ("beta0", args.beta0),
                                      ("beta_max", args.beta_max)) if v is not None}
    try:
        if mode == "matrix":
            cfg = SolverConfig.matrix_defaults(**given, **common)
            if cfg.n_modes != 1:
                raise UsageError("matrix mode takes a single --alpha/--beta0/--beta-max value")
        else:
            cfg = SolverConfig.tensor_defaults(order, **given, **common)
            if cfg.n_modes != order:
                raise UsageError(f"tensor mode needs {order} values per --alpha/--beta0/--beta-max")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _pick_mode(args, order: int) -> str:
    mode = args.mode or ("matrix" if order == 2 else "tensor")
    if mode == "matrix" and order != 2:
        raise UsageError(f"matrix mode needs an image (order 2), input has order {order}")
    if order < 2:
        raise UsageError("inputs must have order >= 2")
    return mode


def _progress(tau, delta, beta):
    log.info("iter %d  delta %.6g  beta %s", tau, delta, " ".join(f"{b:.6g}" for b in beta))


def _run_solver(Y, mask, cfg, mode, threads):
    if threads < 1:
        raise UsageError("--threads must be at least 1")
    if mode == "matrix":
        return lrc_qm(as_matrix(Y), mask, cfg, callback=_progress)
    return lrc_qt(Y, mask, cfg, n_jobs=threads, callback=_progress)


def cmd_complete(args) -> int:
    if (args.sr is None) == (args.mask is None):
        raise UsageError("give exactly one of --sr or --mask")
    if args.sr is not None and not 0.0 < args.sr <= 1.0:
        raise UsageError(f"--sr must lie in (0, 1], got {args.sr}")
    media = load_media(args.input)
    truth = to_quaternion(media)
    mode = _pick_mode(args, truth.order)
    cfg = _solver_config(args, truth.order, mode)
    if args.mask is not None:
        try:
            mask = load_mask(args.mask, truth.shape)
        except MediaError as exc:
            raise UsageError(str(exc)) from exc
        seed = None
    else:
        mask = generate_mask(truth.shape, args.sr, args.seed)
        seed = args.seed
    if args.mask_out:
        save_mask(args.mask_out, mask)
    Y = apply_mask(truth.as_tensor(), mask)
    result, rep = _run_solver(Y, mask, cfg, mode, args.threads)
    if args.out:
        save_media(args.out, result)
    metrics = _quality(_as_pixels(result), _as_pixels(truth), truth.order)
    report = RunReport(
        input=str(args.input), shape=list(truth.shape), order=truth.order, sr=mask.sr,
        seed=seed, mask_file=str(args.mask) if args.mask else None, config=cfg.to_dict(),
        iterations=rep.iterations, converged=rep.converged, wall_time_s=rep.wall_time,
        metrics=metrics, delta_trace=list(rep.delta_history))
    _emit(report.to_json(), args.report)
    return EXIT_OK


def cmd_synth(args) -> int:
    shape, ranks = tuple(args.shape), tuple(args.ranks)
    if len(shape) != len(ranks):
        raise UsageError("--shape and --ranks need the same number of entries")
    if not 0.0 < args.sr <= 1.0:
        raise UsageError(f"--sr must lie in (0, 1], got {args.sr}")
    try:
        truth = low_rank_tensor(shape, ranks, np.random.default_rng(args.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mode = _pick_mode(args, len(shape))
    cfg = _solver_config(args, len(shape), mode)
    mask = generate_mask(shape, args.sr, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_qt1(out / "truth.qt1", truth)
    save_mask(out / "mask.qmsk", mask)
    result, rep = _run_solver(apply_mask(truth, mask), mask, cfg, mode, args.threads)
    save_qt1(out / "recovered.qt1", result.as_tensor())
    report = RunReport(
        input="synthetic", shape=list(shape), order=len(shape), sr=mask.sr, seed=args.seed,
        mask_file=str(out / "mask.qmsk"), config=cfg.to_dict(), iterations=rep.iterations,
        converged=rep.converged, wall_time_s=rep.wall_time, metrics={},
        delta_trace=list(rep.delta_history), relative_error=relative_error(result, truth))
    (out / "report.json").write_text(report.to_json())
    if args.report:
        _emit(report.to_json(), args.report)
    return EXIT_OK


def cmd_eval(args) -> int:
    rec = to_quaternion(load_media(args.recovered))
    ref = to_quaternion(load_media(args.reference))
    if rec.shape != ref.shape:
        raise UsageError(f"shape mismatch: {rec.shape} vs {ref.shape}")
    metrics = _quality(_as_pixels(rec), _as_pixels(ref), ref.order)
    _emit(json.dumps({k: _encode_float(v) for k, v in metrics.items()}, indent=2) + "\n",
          args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    T = to_quaternion(load_media(args.input))
    if not 1 <= args.mode <= T.order:
        raise UsageError(f"--mode must be in 1..{T.order}, got {args.mode}")
    s = singular_values(unfold(T, args.mode))
    if args.out:
        write_spectrum_csv(s, args.out)
    else:
        write_spectrum_csv(s, sys.stdout)
    return EXIT_OK


def _emit(text: str, path):
    if path and path != "-":
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrqtc", description="Low-rank quaternion completion of color images and videos.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every iteration")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="mask and recover an image, video or qt1 tensor")
    p.add_argument("--input", required=True)
    p.add_argument("--sr", type=float, help="sampling ratio of a random mask")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mask", help="QMSK1 mask file instead of --sr")
    p.add_argument("--mask-out", help="write the mask used")
    p.add_argument("--out", help="recovered media (.png/.bmp, frame directory or .qt1)")
    p.add_argument("--report", help="JSON report path (default: stdout)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("synth", help="recover a random low-rank tensor")
    p.add_argument("--shape", type=int, nargs="+", required=True)
    p.add_argument("--ranks", type=int, nargs="+", required=True)
    p.add_argument("--sr", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True,
                   help="receives truth.qt1, mask.qmsk, recovered.qt1, report.json")
    p.add_argument("--report", help="also write the report here ('-' for stdout)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="PSNR and SSIM/ASSIM of recovered vs reference media")
    p.add_argument("--recovered", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", help="metrics JSON path (default: stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectrum", help="singular values of a mode unfolding as CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", type=int, default=1, help="1-based unfolding mode")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lrqtc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DecompositionError as exc:
        print(f"lrqtc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, MediaError, FormatError) as exc:
        print(f"lrqtc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"lrqtc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
