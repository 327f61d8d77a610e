"""From an optimal moment vector to certified eigenpairs.

Atoms are read off a flat moment matrix with the multiplication-matrix
method: factor ``M_N = V V^T``, bring ``V`` to column echelon form so that
``[u]_N = U w`` for a set ``w`` of basis monomials, and take the rows of ``U``
belonging to ``u_i w`` as the multiplication matrices ``N_i``. A random
combination of the (commuting) ``N_i`` has the atoms as joint eigenvectors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .formulation import recover_last_block  # noqa: F401  (re-exported)
from .tensor_core import ComplexTensor, EigenpairResult, RankOneTuple, contract_all_but, residual

log = logging.getLogger(__name__)

RANK_TOL = 1e-6
CERT_GAP = 1e-5
CERT_RESIDUAL = 1e-8


class ExtractionError(RuntimeError):
    pass


def numerical_rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s >= tol * s[0]))


def flatness_rank(M: np.ndarray, prev_size: int, tol: float = RANK_TOL) -> tuple[int, bool]:
    """Rank of ``M`` and whether it equals the rank of its leading
    ``prev_size x prev_size`` block (the order N-1 moment matrix)."""
    r = numerical_rank(M, tol)
    r_prev = numerical_rank(np.asarray(M)[:prev_size, :prev_size], tol)
    return r, r == r_prev


def column_echelon(V: np.ndarray, tol: float = 1e-6) -> tuple[np.ndarray, list[int]]:
    """Reduced column echelon form by Gauss-Jordan with partial pivoting.

    Returns ``U`` with the same column space as ``V`` and the pivot rows
    ``piv`` such that ``U[piv] = I``.
    """
    U = np.array(V, dtype=float)
    rows, cols = U.shape
    scale = np.abs(U).max() if U.size else 0.0
    piv: list[int] = []
    c = 0
    for i in range(rows):
        if c == cols:
            break
        j = c + int(np.argmax(np.abs(U[i, c:])))
        if abs(U[i, j]) <= tol * scale:
            U[i, c:] = 0.0
            continue
        U[:, [c, j]] = U[:, [j, c]]
        U[:, c] /= U[i, c]
        for k in range(cols):
            if k != c:
                U[:, k] -= U[i, k] * U[:, c]
        piv.append(i)
        c += 1
    return U[:, :c], piv


def extract_atoms(M: np.ndarray, basis: list[tuple[int, ...]], rank: int | None = None,
                  tol: float = RANK_TOL, commute_tol: float = 1e-4, seed: int = 0) -> list[np.ndarray]:
    """Points of the atomic measure behind a flat moment matrix.

    ``basis`` lists the monomials indexing ``M`` (graded order, constant first).
    Raises :class:`ExtractionError` when the multiplication matrices cannot be
    formed or fail to commute.
    """
    M = np.asarray(M, dtype=float)
    nvars = len(basis[0])
    r = numerical_rank(M, tol) if rank is None else rank
    if r == 0:
        raise ExtractionError("moment matrix is zero")
    first = [tuple(int(i == j) for j in range(nvars)) for i in range(nvars)]
    pos = {b: i for i, b in enumerate(basis)}
    if r == 1:
        return [M[[pos[e] for e in first], 0] / M[0, 0]]
    ev, Q = np.linalg.eigh(M)
    V = Q[:, -r:] * np.sqrt(np.clip(ev[-r:], 0.0, None))
    U, piv = column_echelon(V, tol)
    if len(piv) != r:
        raise ExtractionError(f"echelon form found {len(piv)} pivots, expected {r}")
    mats = []
    for e in first:
        try:
            rows = [pos[tuple(a + b for a, b in zip(basis[p], e))] for p in piv]
        except KeyError:
            raise ExtractionError("shifted pivot monomial lies outside the moment basis") from None
        mats.append(U[rows])
    big = max(1.0, max(np.abs(N).max() for N in mats))
    for i in range(nvars):
        for j in range(i + 1, nvars):
            if np.abs(mats[i] @ mats[j] - mats[j] @ mats[i]).max() > commute_tol * big ** 2:
                raise ExtractionError("multiplication matrices do not commute")
    w = np.random.default_rng(seed).random(nvars)
    w /= w.sum()
    T, Z = sla.schur(sum(wi * N for wi, N in zip(w, mats)), output="real")
    if np.abs(np.diag(T, -1)).max(initial=0.0) > 1e-8 * big:
        raise ExtractionError("combined multiplication matrix has complex eigenvalues")
    return [np.array([Z[:, j] @ N @ Z[:, j] for N in mats]) for j in range(r)]


def second_moment_directions(M: np.ndarray, basis: list[tuple[int, ...]],
                             blocks: list[list[int]]) -> np.ndarray:
    """Fallback point: per block, the leading eigenvector of the block's
    second-moment matrix ``E[u_B u_B^T]``; blocks are lists of ring variables."""
    nvars = len(basis[0])
    pos = {b: i for i, b in enumerate(basis)}
    first = [pos[tuple(int(i == j) for j in range(nvars))] for i in range(nvars)]
    u = np.zeros(nvars)
    for blk in blocks:
        idx = [first[v] for v in blk]
        S = M[np.ix_(idx, idx)]
        _, Q = np.linalg.eigh(S)
        u[blk] = Q[:, -1]
    return u


# -- polishing and certification --------------------------------------------

@dataclass
class Polished:
    lam: float
    vectors: RankOneTuple
    residual: float
    sweeps: int
    start_value: float


def polish(a: ComplexTensor, t, tol: float = 1e-10, max_sweeps: int = 500) -> Polished:
    """Alternating best-response updates until the eigen-residual is below
    ``tol``; the best iterate is kept if that never happens."""
    z = [np.array(v, dtype=complex) / np.linalg.norm(v) for v in (t.vectors if isinstance(t, RankOneTuple) else t)]
    m = len(z)
    start = float(np.real(contract_all_but(a, z, 0) @ z[0]))
    best = None
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        lam = 0.0
        for k in range(m):
            v = contract_all_but(a, z, k)
            nrm = float(np.linalg.norm(v))
            if nrm == 0.0:
                break
            z[k] = v.conj() / nrm
            lam = nrm
        res = residual(a, lam, z)
        if best is None or lam > best[0] + 1e-15 or (abs(lam - best[0]) <= 1e-15 and res < best[2]):
            best = (lam, [v.copy() for v in z], res)
        if res < tol:
            break
    lam, vecs, res = best
    return Polished(lam, RankOneTuple(tuple(vecs)), res, sweeps, start)


def symmetric_representative(a: ComplexTensor, t) -> np.ndarray | None:
    """One vector ``x`` with ``<A, x^m>`` real positive built from a tuple
    whose factors agree up to phase; None if they do not."""
    vecs = [np.asarray(v, dtype=complex) for v in (t.vectors if isinstance(t, RankOneTuple) else t)]
    x = vecs[0]
    for v in vecs[1:]:
        if abs(abs(np.vdot(x, v)) - 1.0) > 1e-6:
            return None
    m = len(vecs)
    val = complex(contract_all_but(a, [x] * m, 0) @ x)
    if abs(val) == 0.0:
        return None
    x = x * np.exp(-1j * np.angle(val) / m)
    # fix the residual m-th root of unity: arg of the first nonzero entry in [0, 2 pi / m)
    nz = np.flatnonzero(np.abs(x) > 1e-12)
    ang = np.angle(x[nz[0]]) % (2 * np.pi)
    k = int(np.floor(ang / (2 * np.pi / m) + 1e-12))
    return x * np.exp(-2j * np.pi * k / m)


def certify(a: ComplexTensor, lam: float, t, upper: float, oracle_lb: float = float("nan"),
            order: int = 0, tol: float = CERT_GAP, residual_tol: float = CERT_RESIDUAL,
            extra: dict | None = None) -> EigenpairResult:
    """Package an eigenpair with its bounds; certified iff the bound gap and
    the eigen-residual are both small.

    A bound more than ``tol`` below an attained eigenvalue can only come from
    an inaccurate relaxation value, so it does not certify either.
    """
    res = residual(a, lam, t)
    gap = upper - lam
    ok = bool(np.isfinite(gap) and abs(gap) <= tol and res <= residual_tol)
    cert = {
        "status": "certified-global" if ok else "not-certified",
        "bound_gap": gap,
        "oracle_agreement": lam - oracle_lb,
        "residual": res,
        "gap_tol": tol,
        "residual_tol": residual_tol,
    }
    if extra:
        cert.update(extra)
    vecs = t if isinstance(t, RankOneTuple) else RankOneTuple(tuple(t))
    return EigenpairResult(lam, vecs, res, upper, oracle_lb, order, ok, cert)
