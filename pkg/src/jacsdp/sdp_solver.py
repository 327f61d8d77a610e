"""Dense primal-dual interior-point solver for moment-form SDPs.

The problem handled is

    maximize    c @ y
    subject to  A_eq @ y = b_eq
                F0 + sum_k y_k F_k  is positive semidefinite.

Equalities are removed first: a pivoted QR of ``A_eq.T`` drops dependent rows
and gives ``y = y_p + Z w`` with ``Z`` an orthonormal null-space basis. What is
left is an SDP in standard dual form,

    (P)  min <C, X>   s.t.  <A_i, X> = b_i,  X psd
    (D)  max b @ w    s.t.  S = C - sum_i w_i A_i  psd,

solved by an infeasible-start path-following method (NT or HKM search
direction) with a Mehrotra predictor-corrector. The Schur complement
``M_ij = tr(A_i X A_j S^-1)`` is formed densely as a Gram matrix, so it is PSD by
construction.

Moment relaxations with equality constraints often have no strictly feasible
moment matrix, and interior-point iterates then stall well short of the
optimum. For those the solver falls back to an alternating-direction
augmented Lagrangian method on (D): each step is one solve with the fixed
matrix ``A A^T`` and one eigendecomposition, and its iterates converge without
needing an interior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeProblem:
    """``max c @ y`` s.t. ``A_eq y = b_eq`` and ``V^T (F0 + sum_k y_k F_k) V`` psd.

    ``face`` is the optional ``V`` (orthonormal columns) restricting the
    constraint to a face of the cone; without it ``V = I``.
    """

    c: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    lmi_coeffs: sp.csr_matrix  # (s*s, nvar); column k is vec(F_k)
    lmi_const: np.ndarray  # (s, s)
    face: np.ndarray | None = None  # (s, k)

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "b_eq", np.asarray(self.b_eq, dtype=float))
        object.__setattr__(self, "A_eq", sp.csr_matrix(self.A_eq, dtype=float))
        object.__setattr__(self, "lmi_coeffs", sp.csr_matrix(self.lmi_coeffs, dtype=float))
        object.__setattr__(self, "lmi_const", np.asarray(self.lmi_const, dtype=float))
        n = self.lmi_const.shape[0]
        if self.lmi_const.shape != (n, n):
            raise ValueError("lmi_const must be square")
        if self.lmi_coeffs.shape != (n * n, self.nvar):
            raise ValueError(f"lmi_coeffs has shape {self.lmi_coeffs.shape}, expected {(n * n, self.nvar)}")
        if self.A_eq.shape[1] != self.nvar or self.A_eq.shape[0] != self.b_eq.size:
            raise ValueError("equality system shape mismatch")
        if self.face is not None:
            V = np.asarray(self.face, dtype=float)
            if V.ndim != 2 or V.shape[0] != n:
                raise ValueError(f"face basis must have {n} rows")
            object.__setattr__(self, "face", V)

    @property
    def nvar(self) -> int:
        return self.c.size

    @property
    def size(self) -> int:
        """Order of the (reduced) psd constraint."""
        return self.lmi_const.shape[0] if self.face is None else self.face.shape[1]

    def lmi(self, y) -> np.ndarray:
        n = self.lmi_const.shape[0]
        M = self.lmi_const + (self.lmi_coeffs @ np.asarray(y, dtype=float)).reshape(n, n)
        return M if self.face is None else self.face.T @ M @ self.face


@dataclass(frozen=True)
class SolverConfig:
    gap_tol: float = 1e-9
    feas_tol: float = 1e-9
    max_iter: int = 200
    schur_reg: float = 1e-12
    rank_tol: float = 1e-11
    # moment-side infeasibility a non-optimal exit may have and still be used
    loose_tol: float = 1e-6
    direction: str = "nt"  # "nt" or "hkm"
    method: str = "auto"  # "ipm", "admm", or "auto" (ADMM when the IPM falls short)
    admm_max_iter: int = 20000
    # auto: skip the IPM when one Schur complement (p^2 n^2 flops) costs more
    ipm_max_work: float = 5e9
    # IPM gives up when its merit has not halved over this many iterations
    stall_window: int = 5


@dataclass
class SolverResult:
    status: str  # "optimal" | "max-iter" | "numerical" | "infeasible"
    value: float  # c @ y at the returned moment vector
    upper_value: float  # objective of the certificate side (min problem)
    y: np.ndarray
    X: np.ndarray  # dual certificate (Gram matrix)
    lmi: np.ndarray  # F0 + sum y_k F_k at the returned y
    iterations: int
    rel_gap: float
    primal_infeas: float
    dual_infeas: float
    history: list = field(default_factory=list, repr=False)
    method: str = "ipm"

    @property
    def usable(self) -> bool:
        """The moment vector is feasible, so ``value`` is attained by it.

        On degenerate relaxations the certificate side may stall far from the
        optimum while the moment side still converges; ``rel_gap`` tells how
        far apart the two sides ended up.
        """
        return self.status == "optimal" or (
            self.status in ("max-iter", "numerical") and self.dual_infeas <= SolverConfig.loose_tol)


def eliminate_equalities(A, b, tol: float = 1e-11):
    """Particular solution and orthonormal null-space basis of ``A y = b``.

    Returns ``(y_p, Z, rank, inconsistency)`` where the last entry is the
    relative residual of the full system at ``y_p``.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    nvar = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(nvar), np.eye(nvar), 0, 0.0
    Q, R, P = sla.qr(A.T, pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(d > tol * d[0]))
    if rank:
        t = sla.solve_triangular(R[:rank, :rank].T, b[P[:rank]], lower=True)
        y_p = Q[:, :rank] @ t
    else:
        y_p = np.zeros(nvar)
    Z = Q[:, rank:]
    incons = float(np.linalg.norm(A @ y_p - b) / (1.0 + np.linalg.norm(b)))
    return y_p, Z, rank, incons


def _max_step(L: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with L L^T + alpha D still PSD (inf if unbounded)."""
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    lam = np.linalg.eigvalsh(Li @ D @ Li.T)[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _sym(Y):
    return 0.5 * (Y + Y.T)


def solve(problem: ConeProblem, cfg: SolverConfig | None = None) -> SolverResult:
    cfg = cfg or SolverConfig()
    n = problem.size
    y_p, Z, rank, incons = eliminate_equalities(problem.A_eq, problem.b_eq, cfg.rank_tol)
    if incons > 1e-8:
        nan = float("nan")
        return SolverResult("infeasible", nan, nan, y_p, np.zeros((n, n)), problem.lmi(y_p), 0,
                            nan, incons, nan)
    p = Z.shape[1]
    C = _sym(problem.lmi(y_p))
    A = _reduced_coefficients(problem, Z)
    b = Z.T @ problem.c
    offset = float(problem.c @ y_p)
    log.debug("sdp: %d moments, %d independent equalities, %d free, block %d", problem.nvar, rank, p, n)

    if cfg.method not in ("auto", "ipm", "admm"):
        raise ValueError(f"unknown method {cfg.method!r}")
    info = None
    use_ipm = cfg.method == "ipm" or (cfg.method == "auto" and float(p) ** 2 * n ** 2 <= cfg.ipm_max_work)
    if use_ipm:
        X, w, S, info = _ipm(C, _smat(A, n), b, cfg)
    if info is None or (cfg.method == "auto" and info["status"] != "optimal"):
        alt = _admm(C, A, b, cfg)
        if info is None or alt[3]["status"] == "optimal" or alt[3]["rel_gap"] < info["rel_gap"]:
            X, w, S, info = alt
    y = y_p + Z @ w
    lmi = problem.lmi(y)
    return SolverResult(
        status=info["status"],
        value=float(problem.c @ y),
        upper_value=info["pobj"] + offset,
        y=y,
        X=X,
        lmi=lmi,
        iterations=info["iter"],
        rel_gap=info["rel_gap"],
        primal_infeas=info["pinf"],
        dual_infeas=info["dinf"],
        history=info["history"],
        method=info["method"],
    )


def _svec_index(n: int):
    iu, ju = np.triu_indices(n)
    scale = np.where(iu == ju, 1.0, math.sqrt(2.0))
    return iu, ju, scale


def _svec(M: np.ndarray) -> np.ndarray:
    """Upper triangle with off-diagonal entries scaled by sqrt(2), so that
    ``svec(X) @ svec(Y) = <X, Y>``; works on stacks along the leading axes."""
    iu, ju, scale = _svec_index(M.shape[-1])
    return M[..., iu, ju] * scale


def _smat(v: np.ndarray, n: int) -> np.ndarray:
    iu, ju, scale = _svec_index(n)
    out = np.zeros(v.shape[:-1] + (n, n))
    out[..., iu, ju] = v / scale
    out[..., ju, iu] = v / scale
    return out


def _reduced_coefficients(problem: ConeProblem, Z: np.ndarray, chunk: int = 128) -> np.ndarray:
    """``svec(-V^T F(z_i) V)`` for every column ``z_i`` of ``Z``, shape (p, k(k+1)/2).

    ``F`` is sparse (one nonzero per matrix entry for moment matrices), so the
    products with ``Z`` are cheap; the congruence with ``V`` is done densely in
    column chunks to bound memory.
    """
    s = problem.lmi_const.shape[0]
    V = problem.face
    k = problem.size
    p = Z.shape[1]
    out = np.empty((p, k * (k + 1) // 2))
    for lo in range(0, p, chunk):
        hi = min(lo + chunk, p)
        c = hi - lo
        Fz = np.ascontiguousarray(np.asarray(problem.lmi_coeffs @ Z[:, lo:hi]).T).reshape(c, s, s)
        Fz = 0.5 * (Fz + Fz.transpose(0, 2, 1))
        if V is not None:
            # V^T F V = (F V)^T V for symmetric F, as two flat GEMMs
            T = (Fz.reshape(c * s, s) @ V).reshape(c, s, k)
            T = np.ascontiguousarray(T.transpose(0, 2, 1)).reshape(c * k, s)
            Fz = (T @ V).reshape(c, k, k)
        out[lo:hi] = -_svec(Fz)
    return out


def _ipm(C, A, b, cfg: SolverConfig):
    n = C.shape[0]
    p = b.size
    Af = A.reshape(p, n * n)
    I = np.eye(n)

    def AX(Y):
        return Af @ Y.reshape(-1)

    def Aty(v):
        return (v @ Af).reshape(n, n)

    normA = np.linalg.norm(Af, axis=1) if p else np.zeros(0)
    # A A^T is fixed; used to keep every primal step on A(dX) = Rp exactly,
    # which the HKM formula alone loses to cancellation once S is near singular
    G = Af @ Af.T
    G[np.diag_indices_from(G)] += 1e-14 * max(1.0, float(np.max(np.diag(G), initial=1.0)))
    Gc = sla.cho_factor(G, lower=True)

    def restore(dX, target):
        v = sla.cho_solve(Gc, target - AX(dX))
        return dX + Aty(v)
    normb = np.linalg.norm(b)
    normC = np.linalg.norm(C)
    xi = max(10.0, math.sqrt(n), n * float(np.max((1 + np.abs(b)) / (1 + normA), initial=0.0)))
    eta = max(10.0, math.sqrt(n), float(np.max(normA, initial=0.0)), normC)
    X = xi * I
    S = eta * I
    w = np.zeros(p)

    history = []
    # best moment-side (max b.w) and certificate-side (min <C, X>) iterates
    best_d = best_p = None
    merit: list[float] = []
    status = "max-iter"
    it = 0
    for it in range(cfg.max_iter + 1):
        Rp = b - AX(X)
        Rd = C - S - Aty(w)
        pobj = float(np.vdot(C, X))
        dobj = float(b @ w)
        gap = float(np.vdot(X, S))
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        rel_gap = max(rel_gap, gap / (1.0 + abs(pobj) + abs(dobj)))
        pinf = float(np.linalg.norm(Rp) / (1.0 + normb))
        dinf = float(np.linalg.norm(Rd) / (1.0 + normC))
        history.append((pobj, dobj, rel_gap, pinf, dinf))
        merit.append(max(rel_gap, pinf, dinf))
        if dinf <= cfg.feas_tol and (best_d is None or dobj > best_d[0]):
            best_d = (dobj, w.copy(), S.copy(), dinf)
        if pinf <= cfg.feas_tol and (best_p is None or pobj < best_p[0]):
            best_p = (pobj, X.copy(), pinf)
        if rel_gap <= cfg.gap_tol and pinf <= cfg.feas_tol and dinf <= cfg.feas_tol:
            status = "optimal"
            break
        if it == cfg.max_iter:
            break
        k = cfg.stall_window
        if len(merit) > 2 * k and min(merit[-k:]) > 0.5 * min(merit[:-k]):
            status = "numerical"
            break
        try:
            Lx = np.linalg.cholesky(X)
            Ls = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            status = "numerical"
            break
        Lsi = sla.solve_triangular(Ls, I, lower=True)
        Sinv = Lsi.T @ Lsi
        mu = gap / n
        if cfg.direction == "nt":
            # W S W = X with W = G G^T; in the scaled space both X and S
            # become diag(d)
            U, d, Vt = np.linalg.svd(Ls.T @ Lx)
            Gs = Lx @ Vt.T / np.sqrt(d)
            Gi = np.linalg.inv(Gs)
            K = np.matmul(np.matmul(Gs.T, A), Gs).reshape(p, n * n)
        else:
            K = np.matmul(np.matmul(Lx.T, A), Lsi.T).reshape(p, n * n)
        # M = K K^T + reg I = R^T R; factoring K^T directly avoids squaring
        # the condition number of the Schur complement
        diagM = np.einsum("ij,ij->i", K, K)
        reg = cfg.schur_reg * max(1.0, float(np.max(diagM, initial=1.0)))
        R = sla.qr(np.vstack([K.T, math.sqrt(reg) * np.eye(p)]), mode="r", check_finite=False)[0][:p]
        if not np.all(np.isfinite(R)) or np.min(np.abs(np.diag(R)), initial=1.0) == 0.0:
            status = "numerical"
            break

        def schur_apply(x):
            return K @ (K.T @ x) + reg * x

        def schur_solve(rhs):
            x = sla.cho_solve((R, False), rhs, check_finite=False)
            # one step of iterative refinement
            return x + sla.cho_solve((R, False), rhs - schur_apply(x), check_finite=False)

        if cfg.direction == "nt":
            W = Gs @ Gs.T
            WRdW = W @ Rd @ W
            inv_sum = 2.0 / (d[:, None] + d[None, :])

            def direction(Rc):
                # scaled complementarity: sym(D Y) = Rc, Y = dX~ + dS~
                Y = Gs @ (Rc * inv_sum) @ Gs.T
                dw = schur_solve(Rp - AX(Y) + AX(WRdW))
                dS = _sym(Rd - Aty(dw))
                return dw, dS, _sym(Y - W @ dS @ W)

            def scaled(dX, dS):
                return Gi @ dX @ Gi.T, Gs.T @ dS @ Gs

            D2 = np.diag(d * d)
            dw, dS, dX = direction(-D2)
        else:
            XRdSi = X @ Rd @ Sinv
            dw = schur_solve(b + AX(XRdSi))
            dS = _sym(Rd - Aty(dw))
            dX = _sym(-X - X @ dS @ Sinv)
        ap = min(1.0, 0.95 * _max_step(Lx, dX))
        ad = min(1.0, 0.95 * _max_step(Ls, dS))
        new_gap = float(np.vdot(X + ap * dX, S + ad * dS))
        expon = max(1.0, 3.0 * min(ap, ad) ** 2)
        sigma = min(1.0, (max(new_gap, 0.0) / gap) ** expon)

        # corrector
        if cfg.direction == "nt":
            tX, tS = scaled(dX, dS)
            dw, dS, dX = direction(sigma * mu * np.eye(n) - D2 - _sym(tX @ tS))
            dX = restore(dX, Rp)
        else:
            corr = dX @ dS @ Sinv
            dw = schur_solve(b - AX(sigma * mu * Sinv) + AX(XRdSi) + AX(corr))
            dS = _sym(Rd - Aty(dw))
            dX = restore(_sym(sigma * mu * Sinv - X - corr - X @ dS @ Sinv), Rp)
        gamma = 0.9 + 0.09 * min(ap, ad)
        ap = min(1.0, gamma * _max_step(Lx, dX))
        ad = min(1.0, gamma * _max_step(Ls, dS))
        if ap < 1e-10 and ad < 1e-10:
            status = "numerical"
            break
        X = _sym(X + ap * dX)
        w = w + ad * dw
        S = _sym(S + ad * dS)

    if status != "optimal":
        # each side separately: the best feasible iterate seen so far
        if best_d is not None:
            dobj, w, S, dinf = best_d
        if best_p is not None:
            pobj, X, pinf = best_p
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return X, w, S, {"status": status, "iter": it, "pobj": pobj, "rel_gap": rel_gap,
                     "pinf": pinf, "dinf": dinf, "history": history, "method": "ipm"}


def _admm(C, A, b, cfg: SolverConfig):
    """Alternating-direction augmented Lagrangian on (D) with multiplier X.

    Steps: ``w`` from the normal equations with ``A A^T``; ``S`` and ``X`` from
    the positive and negative parts of ``C - A^T w - mu X``. The penalty ``mu``
    balances the two residuals but is kept in a bounded window, since on
    relaxations whose certificate side is not attained the residual ratio
    never settles. ``A`` holds the constraint matrices in svec form.
    """
    n = C.shape[0]
    p = b.size

    def AX(Y):
        return A @ _svec(Y)

    def Aty(v):
        return _smat(v @ A, n)

    G = A @ A.T
    G[np.diag_indices_from(G)] += 1e-14 * max(1.0, float(np.max(np.diag(G), initial=1.0)))
    Gc = sla.cho_factor(G, lower=True)
    normb = np.linalg.norm(b)
    normC = np.linalg.norm(C)
    mu, mu_lo, mu_hi = 1.0, 1e-3, 1e3
    X = np.zeros((n, n))
    S = np.zeros((n, n))
    w = np.zeros(p)
    history = []
    status = "max-iter"
    pobj = dobj = rel_gap = pinf = dinf = math.nan
    it = 0
    for it in range(1, cfg.admm_max_iter + 1):
        w = sla.cho_solve(Gc, AX(C - S) - mu * (AX(X) - b))
        V = _sym(C - Aty(w) - mu * X)
        e, Q = np.linalg.eigh(V)
        S = (Q * np.maximum(e, 0.0)) @ Q.T
        X = (Q * np.maximum(-e, 0.0)) @ Q.T / mu
        if it % 10 and it != cfg.admm_max_iter:
            continue
        pinf = float(np.linalg.norm(AX(X) - b) / (1.0 + normb))
        dinf = float(np.linalg.norm(Aty(w) + S - C) / (1.0 + normC))
        pobj = float(np.vdot(C, X))
        dobj = float(b @ w)
        rel_gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append((pobj, dobj, rel_gap, pinf, dinf))
        if rel_gap <= cfg.gap_tol and pinf <= cfg.feas_tol and dinf <= cfg.feas_tol:
            status = "optimal"
            break
        if it % 20 == 0:
            if pinf > 2.0 * dinf:
                mu = max(0.8 * mu, mu_lo)
            elif dinf > 2.0 * pinf:
                mu = min(mu / 0.8, mu_hi)
    return X, w, _sym(C - Aty(w)), {"status": status, "iter": it, "pobj": pobj, "rel_gap": rel_gap,
                                   "pinf": pinf, "dinf": dinf, "history": history, "method": "admm"}
