"""State files, reports and the command line.

State file (version 1)::

    format: 1
    dims: [2,2,2]
    normalize: true
    symmetry: auto          # auto | none | full | partial:[1,2] (one-based modes)
    1 1 1 0.5 0.0           # one-based multi-index, real part, imaginary part

Blank lines and ``#`` comments are ignored; unlisted entries are zero.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formulation import formulate
from .moment_sdp import RelaxationTooLarge, build_relaxation, default_start_order, export_text
from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .quantum import entanglement_from_lambda, separability_check
from .tensor_core import ComplexTensor, SymmetryClass

log = logging.getLogger(__name__)

FORMAT_VERSION = "1"
EXIT_CERTIFIED, EXIT_ERROR, EXIT_UNCERTIFIED = 0, 1, 2


class StateFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class StateFile:
    """Parsed contents of a state file. ``amplitudes`` are exactly as written."""

    amplitudes: np.ndarray
    normalize: bool = True
    symmetry: str = "auto"

    @property
    def dims(self) -> tuple[int, ...]:
        return self.amplitudes.shape

    def symmetry_class(self) -> SymmetryClass | None:
        return parse_symmetry(self.symmetry, len(self.dims))

    def tensor(self) -> ComplexTensor:
        """The tensor to analyse (unit-normalized if the file asks for it)."""
        amp = self.amplitudes
        nrm = float(np.linalg.norm(amp))
        if nrm == 0.0:
            raise StateFileError("the state is zero and cannot be normalized")
        if self.normalize:
            amp = amp / nrm
        sym = self.symmetry_class()
        try:
            return ComplexTensor.auto(amp) if sym is None else ComplexTensor(amp, sym)
        except ValueError as exc:
            raise StateFileError(f"declared symmetry does not hold: {exc}") from None


def parse_symmetry(text: str, order: int) -> SymmetryClass | None:
    """``None`` means detect automatically."""
    text = text.strip().lower()
    if text == "auto":
        return None
    if text == "none":
        return SymmetryClass.none()
    if text == "full":
        return SymmetryClass.full(order)
    if text.startswith("partial:"):
        groups = re.findall(r"\[([^\]]*)\]", text[len("partial:"):])
        if not groups:
            raise StateFileError(f"bad partial symmetry {text!r}; expected e.g. partial:[1,2]")
        out = []
        for g in groups:
            try:
                modes = tuple(int(x) - 1 for x in g.split(","))
            except ValueError:
                raise StateFileError(f"bad mode list [{g}]") from None
            if any(not 0 <= k < order for k in modes):
                raise StateFileError(f"mode in [{g}] outside 1..{order}")
            out.append(modes)
        return SymmetryClass.partial(*out)
    raise StateFileError(f"unknown symmetry {text!r}")


def _parse_bool(text: str, line: int) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise StateFileError(f"expected true or false, got {text!r}", line)


def _parse_dims(text: str, line: int) -> tuple[int, ...]:
    m = re.fullmatch(r"\s*\[\s*([0-9,\s]*)\]\s*", text)
    if not m:
        raise StateFileError(f"dims must look like [2,2,2], got {text!r}", line)
    try:
        dims = tuple(int(x) for x in m.group(1).split(",") if x.strip())
    except ValueError:
        raise StateFileError(f"bad dims {text!r}", line) from None
    if not dims or any(d < 1 for d in dims):
        raise StateFileError("dims must be positive integers", line)
    return dims


def parse_state_text(text: str) -> StateFile:
    header: dict[str, tuple[str, int]] = {}
    entries: list[tuple[tuple[int, ...], complex, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, val = (s.strip() for s in line.split(":", 1))
            key = key.lower()
            if key not in ("format", "dims", "normalize", "symmetry"):
                raise StateFileError(f"unknown header {key!r}", lineno)
            if key in header:
                raise StateFileError(f"duplicate header {key!r}", lineno)
            if entries:
                raise StateFileError("headers must precede entries", lineno)
            header[key] = (val, lineno)
            continue
        parts = line.split()
        if len(parts) < 3:
            raise StateFileError(f"expected '<indices> <re> <im>', got {raw.strip()!r}", lineno)
        try:
            idx = tuple(int(p) for p in parts[:-2])
            val = complex(float(parts[-2]), float(parts[-1]))
        except ValueError:
            raise StateFileError(f"malformed entry {raw.strip()!r}", lineno) from None
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise StateFileError("amplitudes must be finite", lineno)
        entries.append((idx, val, lineno))

    if "format" not in header:
        raise StateFileError("missing 'format: 1' header")
    fmt, ln = header["format"]
    if fmt != FORMAT_VERSION:
        raise StateFileError(f"unsupported format {fmt!r}", ln)
    if "dims" not in header:
        raise StateFileError("missing 'dims' header")
    dims = _parse_dims(*header["dims"])
    normalize = _parse_bool(*header["normalize"]) if "normalize" in header else True
    symmetry = header["symmetry"][0] if "symmetry" in header else "auto"
    try:
        parse_symmetry(symmetry, len(dims))
    except StateFileError as exc:
        raise StateFileError(str(exc), header["symmetry"][1]) from None

    amp = np.zeros(dims, dtype=complex)
    seen: dict[tuple[int, ...], int] = {}
    for idx, val, lineno in entries:
        if len(idx) != len(dims):
            raise StateFileError(f"entry has {len(idx)} indices, dims has {len(dims)}", lineno)
        if any(not 1 <= i <= n for i, n in zip(idx, dims)):
            raise StateFileError(f"index {idx} out of range for dims {list(dims)}", lineno)
        if idx in seen:
            raise StateFileError(f"index {idx} already given on line {seen[idx]}", lineno)
        seen[idx] = lineno
        amp[tuple(i - 1 for i in idx)] = val
    if not np.any(amp):
        raise StateFileError("all amplitudes are zero")
    return StateFile(amp, normalize, symmetry)


def parse_state_file(path) -> StateFile:
    return parse_state_text(Path(path).read_text())


def emit_state_text(amplitudes, normalize: bool = False, symmetry: str = "auto") -> str:
    """Inverse of :func:`parse_state_text`; values are written with ``repr``
    so parsing reproduces them bit for bit."""
    amp = np.asarray(amplitudes, dtype=complex)
    lines = [f"format: {FORMAT_VERSION}", "dims: [" + ",".join(map(str, amp.shape)) + "]",
             f"normalize: {'true' if normalize else 'false'}", f"symmetry: {symmetry}"]
    # signed zeros are written too so the round trip is exact
    mask = (amp != 0) | np.signbit(amp.real) | np.signbit(amp.imag)
    for idx in zip(*np.nonzero(mask)):
        v = amp[idx]
        lines.append(" ".join(str(i + 1) for i in idx) + f" {float(v.real)!r} {float(v.imag)!r}")
    return "\n".join(lines) + "\n"


# -- reports -----------------------------------------------------------------

def _g12(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _c12(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0) else "+"
    return f"{_g12(z.real)}{sign}{_g12(abs(z.imag))}i"


def _round(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return x if not math.isfinite(x) else float(f"{x:.12g}")


def report_dict(rep: PipelineReport, tensor: ComplexTensor, normalized: bool) -> dict:
    res = rep.result
    out: dict = {"route": rep.route, "symmetry": tensor.symmetry.describe(), "dims": list(tensor.dims),
                 "normalized": normalized}
    if res is not None:
        g, e = entanglement_from_lambda(res.lam)
        out.update({
            "lambda": _round(res.lam),
            "G": _round(g),
            "E_G": _round(e),
            "residual": _round(res.residual),
            "upper_bound": _round(res.upper_bound),
            "lower_bound": _round(res.lower_bound),
            "bound_gap": _round(res.bound_gap),
            "order_used": res.order_used,
            "certificate": res.certificate["status"],
            "source": rep.source,
            "separable": bool(separability_check(res, tensor)) if normalized else None,
            "vectors": [[_c12(z) for z in v] for v in res.vectors.vectors],
        })
    else:
        out["certificate"] = "not-certified"
    out["orders"] = [{
        "order": o.order, "moment_size": o.moment_size, "face_size": o.face_size, "status": o.status,
        "method": o.method, "iterations": o.iterations, "rho": _round(o.rho),
        "rho_certificate_side": _round(o.rho_certificate), "bound": _round(o.bound),
        "rank": o.rank, "flat": o.flat, "extraction": o.extraction,
    } for o in rep.orders]
    if rep.oracle is not None:
        out["oracle_lambda"] = _round(rep.oracle.lam)
    out["time_seconds"] = {k: _round(v) for k, v in rep.timings.items()}
    return out


def format_report(d: dict) -> str:
    lines = []
    for key in ("route", "symmetry", "lambda", "G", "E_G", "residual", "upper_bound", "lower_bound",
                "bound_gap", "order_used", "certificate", "source", "separable"):
        if key in d:
            lines.append(f"{key}: {_g12(d[key]) if not isinstance(d[key], str) else d[key]}")
    for k, v in enumerate(d.get("vectors", []), start=1):
        lines.append(f"z{k}: (" + ", ".join(v) + ")")
    for o in d["orders"]:
        lines.append(f"rho[{o['order']}]: {_g12(o['rho'])} (bound {_g12(o['bound'])}, rank {_g12(o['rank'])}, "
                     f"flat {_g12(o['flat'])}, solver {o['status']})")
    for k, v in d["time_seconds"].items():
        lines.append(f"time_{k}: {_g12(v)}")
    lines.append("--- json ---")
    lines.append(json.dumps(d, indent=2, sort_keys=False))
    return "\n".join(lines) + "\n"


# -- command line -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jacsdp", description="Largest U-eigenvalue and geometric "
                                "measure of entanglement via Jacobian moment relaxations.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="compute and certify the largest U-eigenvalue of a state file")
    r.add_argument("--input", required=True, type=Path)
    r.add_argument("--order", type=int, help="start order of the hierarchy")
    r.add_argument("--max-order", type=int)
    r.add_argument("--mode", choices=["auto", "nonsym", "partial", "sym"], default="auto")
    r.add_argument("--tol", type=float, default=1e-5, help="certification gap (default 1e-5)")
    r.add_argument("--restarts", type=int, default=64)
    r.add_argument("--seed", type=int, default=0)
    g = r.add_mutually_exclusive_group()
    g.add_argument("--oracle-only", action="store_true")
    g.add_argument("--sdp-only", action="store_true")
    r.add_argument("--export-sdp", type=Path, help="write the start-order relaxation here")
    r.add_argument("--output", type=Path, help="also write the report here")
    r.add_argument("--gauge", choices=["auto", "none"], default="auto")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def run(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    sf = parse_state_file(args.input)
    tensor = sf.tensor()
    normalized = abs(tensor.norm() - 1.0) <= 1e-10
    cfg = PipelineConfig(route=args.mode, gauge=args.gauge == "auto", start_order=args.order,
                         max_order=args.max_order, tol=args.tol, restarts=args.restarts, seed=args.seed,
                         use_oracle=not args.sdp_only, use_sdp=not args.oracle_only)
    if args.export_sdp is not None:
        form = formulate(tensor, cfg.route, cfg.gauge)
        order = cfg.start_order if cfg.start_order is not None else default_start_order(form.f)
        rel = build_relaxation(form.f, form.constraints(), order, cfg.max_moment_size)
        args.export_sdp.write_text(export_text(rel))
    rep = run_pipeline(tensor, cfg)
    rep.timings["total"] = time.perf_counter() - t0
    text = format_report(report_dict(rep, tensor, normalized))
    sys.stdout.write(text)
    if args.output is not None:
        args.output.write_text(text)
    return EXIT_CERTIFIED if rep.certified and not args.oracle_only else EXIT_UNCERTIFIED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (StateFileError, RelaxationTooLarge, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
