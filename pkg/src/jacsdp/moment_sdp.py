"""Order-N moment relaxations of equality-constrained polynomial programs.

For ``max f(u) s.t. q(u) = 0 (q in constraints)`` the order-N relaxation is

    rho_N = max sum_a f_a y_a
            s.t. L_q(y) = 0 for every constraint, y_0 = 1, M_N(y) psd,

with moments ``y_a`` indexed by exponents of degree <= 2N. Entries of a
localizing matrix depend only on ``beta + gamma``, so each equality constraint
contributes one row ``L(q * u^kappa) = 0`` per monomial ``kappa`` of degree
<= 2d, ``d = N - ceil(deg q / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .poly import Polynomial, monomials_upto
from .sdp_solver import ConeProblem, eliminate_equalities

MAX_MOMENT_MATRIX = 2000


class RelaxationTooLarge(ValueError):
    pass


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass
class MomentIndex:
    nvars: int
    degree: int  # 2N
    monomials: list[tuple[int, ...]] = field(init=False, repr=False)
    position: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self):
        self.monomials = monomials_upto(self.nvars, self.degree)
        self.position = {a: i for i, a in enumerate(self.monomials)}

    def __len__(self):
        return len(self.monomials)

    def dirac(self, u) -> np.ndarray:
        """Moments of the point mass at ``u``."""
        u = np.asarray(u, dtype=float)
        exps = np.array(self.monomials, dtype=int)
        return np.prod(u ** exps, axis=1)


@dataclass
class LocalizingSpec:
    q: Polynomial
    order: int
    index: MomentIndex = field(repr=False)

    @property
    def d(self) -> int:
        return self.order - math.ceil(self.q.degree / 2)

    @property
    def basis(self) -> list[tuple[int, ...]]:
        return monomials_upto(self.q.nvars, self.d)

    def matrix(self, y) -> np.ndarray:
        """``L_q(y)`` over the basis ``[u]_d``."""
        basis = self.basis
        pos = self.index.position
        L = np.zeros((len(basis), len(basis)))
        for i, b in enumerate(basis):
            for j in range(i, len(basis)):
                bg = _add(b, basis[j])
                L[i, j] = L[j, i] = sum(c * y[pos[_add(bg, a)]] for a, c in self.q.items())
        return L

    def coefficient_matrices(self) -> dict[tuple[int, ...], np.ndarray]:
        """Symmetric ``A_alpha`` with ``q(u) [u]_d [u]_d^T = sum A_alpha u^alpha``."""
        basis = self.basis
        out: dict[tuple[int, ...], np.ndarray] = {}
        for i, b in enumerate(basis):
            for j, g in enumerate(basis):
                bg = _add(b, g)
                for a, c in self.q.items():
                    key = _add(bg, a)
                    if key not in out:
                        out[key] = np.zeros((len(basis), len(basis)))
                    out[key][i, j] += c
        return out

    def rows(self) -> list[dict[int, float]]:
        """One linear form in ``y`` per distinct entry of ``L_q(y)``."""
        pos = self.index.position
        out = []
        for kappa in monomials_upto(self.q.nvars, 2 * self.d):
            row: dict[int, float] = {}
            for a, c in self.q.items():
                j = pos[_add(kappa, a)]
                row[j] = row.get(j, 0.0) + c
            out.append(row)
        return out


@dataclass
class MomentRelaxation:
    order: int
    f: Polynomial
    constraints: list[Polynomial]
    index: MomentIndex = field(repr=False)
    localizing: list[LocalizingSpec] = field(repr=False)
    objective: np.ndarray = field(repr=False)
    basis: list[tuple[int, ...]] = field(repr=False)
    moment_positions: np.ndarray = field(repr=False)  # (s, s) indices into y
    eq_rows: sp.csr_matrix = field(repr=False)
    eq_rhs: np.ndarray = field(repr=False)

    @property
    def nvars(self) -> int:
        return self.f.nvars

    @property
    def size(self) -> int:
        return len(self.basis)

    def moment_matrix(self, y, order: int | None = None) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        M = y[self.moment_positions]
        if order is None or order >= self.order:
            return M
        s = len(monomials_upto(self.nvars, order))
        return M[:s, :s]

    def linear_kernel(self, tol: float = 1e-12) -> np.ndarray:
        """Orthonormal basis of ``{p : M_N(y) p = 0 for every y with L_q(y) = 0}``.

        With ``Z`` an orthonormal null-space basis of the homogeneous equality
        rows, ``p`` qualifies iff ``sum_d p_d Z[pos(g + d)] = 0`` for every row
        index ``g``; the Gram matrix of that map is assembled from ``Z Z^T``.
        """
        hom = self.eq_rows[1:] if self.eq_rows.shape[0] > 1 else self.eq_rows[:0]
        _, Z, _, _ = eliminate_equalities(hom, np.zeros(hom.shape[0]))
        proj = Z @ Z.T
        P = self.moment_positions
        gram = np.zeros((self.size, self.size))
        for g in range(self.size):
            row = P[g]
            gram += proj[np.ix_(row, row)]
        ev, U = np.linalg.eigh(gram)
        return U[:, ev <= tol * max(ev[-1], 1e-300)]

    def face_basis(self) -> np.ndarray:
        """Orthonormal basis of the complement of :meth:`linear_kernel`."""
        K = self.linear_kernel()
        if K.shape[1] == 0:
            return np.eye(self.size)
        U, _, _ = np.linalg.svd(K, full_matrices=True)
        return U[:, K.shape[1]:]

    def to_cone_problem(self, reduce: bool = True) -> ConeProblem:
        """Cone problem in the moment vector ``y``.

        With ``reduce`` the psd constraint is restricted to the face
        ``V^T M_N(y) V``, ``V = face_basis()``; this is equivalent on the
        feasible set and removes directions in which no feasible moment
        matrix can be positive definite.
        """
        s = self.size
        ny = len(self.index)
        P = self.moment_positions
        F = sp.csr_matrix((np.ones(s * s), (np.arange(s * s), P.reshape(-1))), shape=(s * s, ny))
        V = None
        if reduce:
            V = self.face_basis()
            if V.shape[1] == s:
                V = None
        return ConeProblem(self.objective, self.eq_rows, self.eq_rhs, F, np.zeros((s, s)), V)


def build_relaxation(f: Polynomial, constraints: Sequence[Polynomial], order: int,
                     max_size: int = MAX_MOMENT_MATRIX) -> MomentRelaxation:
    n = f.nvars
    if any(q.nvars != n for q in constraints):
        raise ValueError("all polynomials must share the ring of the objective")
    need = max([f.degree] + [q.degree for q in constraints])
    if 2 * order < need:
        raise ValueError(f"order {order} too small: 2N must be >= {need}")
    s = math.comb(n + order, order)
    if s > max_size:
        raise RelaxationTooLarge(
            f"moment matrix would be {s}x{s} (C({n}+{order},{order})) with C({n}+{2 * order},{2 * order}) "
            f"= {math.comb(n + 2 * order, 2 * order)} moments; limit is {max_size}")
    index = MomentIndex(n, 2 * order)
    pos = index.position
    basis = index.monomials[:s]
    P = np.empty((s, s), dtype=np.int64)
    for i, b in enumerate(basis):
        for j in range(i, s):
            P[i, j] = P[j, i] = pos[_add(b, basis[j])]

    objective = np.zeros(len(index))
    for a, c in f.items():
        objective[pos[a]] += c

    loc = [LocalizingSpec(q, order, index) for q in constraints if not q.is_zero()]
    rows, cols, vals = [0], [0], [1.0]  # y_0 = 1
    rhs = [1.0]
    r = 1
    for spec in loc:
        for row in spec.rows():
            for j, c in row.items():
                rows.append(r)
                cols.append(j)
                vals.append(c)
            rhs.append(0.0)
            r += 1
    E = sp.csr_matrix((vals, (rows, cols)), shape=(r, len(index)))
    return MomentRelaxation(order, f, list(constraints), index, loc, objective, basis, P, E, np.array(rhs))


def objective_value(rel: MomentRelaxation, y) -> float:
    y = np.asarray(y, dtype=float)
    if y.shape != (len(rel.index),):
        raise ValueError(f"moment vector has shape {y.shape}, expected ({len(rel.index)},)")
    return float(rel.objective @ y)


def default_start_order(f: Polynomial) -> int:
    return math.ceil(f.degree / 2) + 1


# -- sparse text export ------------------------------------------------------

def export_text(rel: MomentRelaxation) -> str:
    """Sparse text form of the relaxation (one-based indices).

    Layout::

        format: 1
        kind: moment-sdp
        order: N
        nvars: <ring variables>
        moments: <number of y entries>
        equalities: <rows>
        psd_block: <s>
        obj <j> <value>               maximize sum value * y_j
        eq <row> <j> <value>          sum_j value * y_j = rhs_row
        rhs <row> <value>
        psd <i> <k> <j>               M[i, k] = M[k, i] = y_j  (i <= k)
        mono <j> <e_1> ... <e_n>      exponent of y_j
    """
    lines = ["format: 1", "kind: moment-sdp", f"order: {rel.order}", f"nvars: {rel.nvars}",
             f"moments: {len(rel.index)}", f"equalities: {rel.eq_rows.shape[0]}", f"psd_block: {rel.size}"]
    for j in np.flatnonzero(rel.objective):
        lines.append(f"obj {j + 1} {float(rel.objective[j])!r}")
    coo = rel.eq_rows.tocoo()
    for i, j, v in sorted(zip(coo.row, coo.col, coo.data)):
        lines.append(f"eq {i + 1} {j + 1} {float(v)!r}")
    for i, v in enumerate(rel.eq_rhs):
        if v:
            lines.append(f"rhs {i + 1} {float(v)!r}")
    s = rel.size
    for i in range(s):
        for k in range(i, s):
            lines.append(f"psd {i + 1} {k + 1} {rel.moment_positions[i, k] + 1}")
    for j, a in enumerate(rel.index.monomials):
        lines.append(f"mono {j + 1} " + " ".join(map(str, a)))
    return "\n".join(lines) + "\n"


def import_text(text: str) -> ConeProblem:
    """Rebuild the cone problem from :func:`export_text` output."""
    header: dict[str, str] = {}
    obj, eq, rhs, psd = [], [], {}, []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            k, v = line.split(":", 1)
            header[k.strip()] = v.strip()
            continue
        tag, *rest = line.split()
        try:
            if tag == "obj":
                obj.append((int(rest[0]) - 1, float(rest[1])))
            elif tag == "eq":
                eq.append((int(rest[0]) - 1, int(rest[1]) - 1, float(rest[2])))
            elif tag == "rhs":
                rhs[int(rest[0]) - 1] = float(rest[1])
            elif tag == "psd":
                psd.append((int(rest[0]) - 1, int(rest[1]) - 1, int(rest[2]) - 1))
            elif tag == "mono":
                pass
            else:
                raise ValueError(f"unknown record {tag!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if header.get("format") != "1":
        raise ValueError("unsupported or missing 'format: 1' header")
    ny = int(header["moments"])
    neq = int(header["equalities"])
    s = int(header["psd_block"])
    c = np.zeros(ny)
    for j, v in obj:
        c[j] += v
    E = sp.csr_matrix(([v for _, _, v in eq], ([i for i, _, _ in eq], [j for _, j, _ in eq])), shape=(neq, ny))
    b = np.zeros(neq)
    for i, v in rhs.items():
        b[i] = v
    P = np.full((s, s), -1, dtype=np.int64)
    for i, k, j in psd:
        P[i, k] = P[k, i] = j
    if (P < 0).any():
        raise ValueError("psd block is not fully specified")
    F = sp.csr_matrix((np.ones(s * s), (np.arange(s * s), P.reshape(-1))), shape=(s * s, ny))
    return ConeProblem(c, E, b, F, np.zeros((s, s)))
