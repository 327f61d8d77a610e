"""End-to-end computation of the largest U-eigenvalue.

Stages: formulate the real program, run the local-search oracle, then climb
the moment hierarchy from the start order. At each order the relaxation
value bounds the eigenvalue from above; atoms extracted from the moment
vector (or the fallback point) are polished into eigenpairs. The climb stops
once the eigenpair is certified, the moment matrix is flat, or the maximal
order is reached.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .extraction import (ExtractionError, Polished, certify, extract_atoms, flatness_rank, polish,
                         second_moment_directions, symmetric_representative)
from .formulation import Formulation, formulate
from .moment_sdp import MAX_MOMENT_MATRIX, MomentRelaxation, build_relaxation, default_start_order
from .oracle import OracleResult, hopm
from .poly import monomials_upto
from .sdp_solver import SolverConfig, SolverResult, solve
from .tensor_core import ComplexTensor, EigenpairResult, RankOneTuple, canonical_gauge, residual

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    route: str = "auto"  # auto | nonsym | partial | sym
    gauge: bool = True
    start_order: int | None = None  # default ceil(deg f / 2) + 1
    max_order: int | None = None  # default start_order + 2
    tol: float = 1e-5  # certification gap
    residual_tol: float = 1e-8
    restarts: int = 64
    seed: int = 0
    oracle_sweeps: int = 2000
    use_oracle: bool = True
    use_sdp: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)
    retry_other_direction: bool = True
    flat_tol: float = 1e-6
    max_moment_size: int = MAX_MOMENT_MATRIX
    polish_tol: float = 1e-10
    polish_sweeps: int = 500


@dataclass
class OrderRecord:
    order: int
    moment_size: int
    face_size: int
    status: str
    method: str  # "nt", "hkm" (interior point) or "admm"
    iterations: int
    rho: float  # moment-side optimal value
    rho_certificate: float  # value of the certificate side
    rel_gap: float
    bound: float  # upper bound on lambda implied by rho
    rank: int | None = None
    flat: bool | None = None
    extraction: str | None = None
    lam: float | None = None  # best polished value from this order's atoms
    seconds: float = 0.0


@dataclass
class PipelineReport:
    route: str
    result: EigenpairResult | None
    orders: list[OrderRecord]
    oracle: OracleResult | None
    timings: dict[str, float]
    source: str | None  # "sdp" or "oracle": where the reported eigenpair came from
    nvars: int = 0
    n_constraints: int = 0

    @property
    def certified(self) -> bool:
        return self.result is not None and self.result.certified


def solve_relaxation(rel: MomentRelaxation, cfg: PipelineConfig) -> tuple[SolverResult, str]:
    """Solve with the configured solver settings; if the result is unusable,
    retry once with the other interior-point direction."""
    pr = rel.to_cone_problem()
    first = solve(pr, cfg.solver)
    if first.status == "optimal" or first.usable or not cfg.retry_other_direction:
        return first, cfg.solver.direction
    other = "hkm" if cfg.solver.direction == "nt" else "nt"
    second = solve(pr, replace(cfg.solver, direction=other))
    if second.status == "optimal" or (second.usable and not first.usable):
        return second, other
    return first, cfg.solver.direction


def candidate_points(form: Formulation, rel: MomentRelaxation, y: np.ndarray, flat_tol: float):
    """Points in the reduced ring suggested by the moment vector, with the
    rank, flatness flag and the method that produced them."""
    M = rel.moment_matrix(y)
    prev = len(monomials_upto(rel.nvars, rel.order - 1))
    rank, flat = flatness_rank(M, prev, flat_tol)
    pts: list[np.ndarray] = []
    method = "fallback"
    if flat:
        try:
            pts = extract_atoms(M, rel.basis, rank, flat_tol)
            method = "rank-one" if rank == 1 else "multiplication"
        except ExtractionError as exc:
            log.info("order %d: atom extraction failed (%s); using the fallback point", rel.order, exc)
    if not pts:
        pts = [second_moment_directions(M, rel.basis, form.reduced_blocks())]
    return pts, rank, flat, method


def _polish_points(a: ComplexTensor, form: Formulation, pts, cfg: PipelineConfig) -> list[Polished]:
    out = []
    for u in pts:
        if not np.all(np.isfinite(u)) or any(np.linalg.norm(b) == 0 for b in form.block_vectors(u)):
            continue
        facs = form.factors(u)
        if facs is None:
            continue
        out.append(polish(a, facs, cfg.polish_tol, cfg.polish_sweeps))
    return out


def _present(a: ComplexTensor, route: str, p: Polished) -> tuple[float, RankOneTuple]:
    """Reported form of an eigenpair: one repeated vector for the symmetric
    route when possible, canonical phases otherwise."""
    if route == "sym":
        x = symmetric_representative(a, p.vectors)
        if x is not None:
            t = RankOneTuple((x,) * a.order)
            lam = float(np.real(np.vdot(a.entries, t.outer())))
            if residual(a, lam, t) <= max(10 * p.residual, 1e-12):
                return lam, t
    return p.lam, canonical_gauge(p.vectors)


def run_pipeline(a: ComplexTensor, cfg: PipelineConfig | None = None) -> PipelineReport:
    cfg = cfg or PipelineConfig()
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    form = formulate(a, cfg.route, cfg.gauge)
    timings["formulate"] = time.perf_counter() - t0
    cons = form.constraints()

    oracle = None
    cands: list[tuple[Polished, str, int]] = []
    if cfg.use_oracle:
        t0 = time.perf_counter()
        oracle = hopm(a, cfg.restarts, cfg.oracle_sweeps, cfg.seed)
        cands.append((polish(a, oracle.vectors, cfg.polish_tol, cfg.polish_sweeps), "oracle", 0))
        timings["oracle"] = time.perf_counter() - t0

    orders: list[OrderRecord] = []
    upper = math.nan
    flat_seen = False
    if cfg.use_sdp:
        n0 = cfg.start_order if cfg.start_order is not None else default_start_order(form.f)
        nmax = cfg.max_order if cfg.max_order is not None else n0 + 2
        if nmax < n0:
            raise ValueError(f"max order {nmax} is below the start order {n0}")
        t_sdp = time.perf_counter()
        for order in range(n0, nmax + 1):
            t0 = time.perf_counter()
            rel = build_relaxation(form.f, cons, order, cfg.max_moment_size)
            sol, direction = solve_relaxation(rel, cfg)
            rho = sol.value
            bound = math.sqrt(max(rho, 0.0)) if form.squared else rho
            rec = OrderRecord(order, rel.size, sol.lmi.shape[0] if sol.lmi is not None else rel.size,
                              sol.status, direction if sol.method == "ipm" else sol.method, sol.iterations,
                              rho, sol.upper_value, sol.rel_gap, bound)
            orders.append(rec)
            if not sol.usable:
                rec.seconds = time.perf_counter() - t0
                log.warning("order %d: solver ended with status %s; skipping", order, sol.status)
                continue
            upper = bound if math.isnan(upper) else min(upper, bound)
            pts, rec.rank, rec.flat, rec.extraction = candidate_points(form, rel, sol.y, cfg.flat_tol)
            polished = _polish_points(a, form, pts, cfg)
            if polished:
                best = max(polished, key=lambda p: p.lam)
                rec.lam = best.lam
                cands.append((best, "sdp", order))
            rec.seconds = time.perf_counter() - t0
            flat_seen = flat_seen or bool(rec.flat)
            top = max(cands, key=lambda c: c[0].lam)[0] if cands else None
            done = top is not None and upper - top.lam <= cfg.tol and top.residual <= cfg.residual_tol
            log.info("order %d: rho=%.12g bound=%.12g rank=%s flat=%s (%.1fs)", order, rho, bound,
                     rec.rank, rec.flat, rec.seconds)
            if done or rec.flat:
                break
        timings["sdp"] = time.perf_counter() - t_sdp

    t0 = time.perf_counter()
    result = None
    source = None
    if cands:
        # prefer the SDP-derived point unless the oracle is strictly better
        sdp = [c for c in cands if c[1] == "sdp"]
        best_sdp = max(sdp, key=lambda c: c[0].lam) if sdp else None
        best_any = max(cands, key=lambda c: c[0].lam)
        chosen = best_sdp if best_sdp is not None and best_sdp[0].lam >= best_any[0].lam - 1e-12 else best_any
        source = chosen[1]
        lam, vecs = _present(a, form.route, chosen[0])
        used = orders[-1].order if orders else 0
        extra = {
            "source": source,
            "route": form.route,
            "rank": orders[-1].rank if orders else None,
            "flat": orders[-1].flat if orders else None,
            "flat_seen": flat_seen,
            "extraction": orders[-1].extraction if orders else None,
        }
        lb = oracle.lam if oracle is not None else math.nan
        result = certify(a, lam, vecs, upper, lb, used, cfg.tol, cfg.residual_tol, extra)
    timings["certify"] = time.perf_counter() - t0
    return PipelineReport(form.route, result, orders, oracle, timings, source, form.nvars, len(cons))
