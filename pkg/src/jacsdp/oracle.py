"""Local-search lower bounds for the largest U-eigenvalue.

``hopm`` runs the alternating power method

    z^(k) <- conj(<A, (x)_{i != k} z^(i)>) / || . ||

from complex Gaussian starts. Every block update maximizes a linear form over
the unit sphere, so ``Re <A, (x) z>`` never decreases along a run. Restarts
are advanced together as one batch, and each restart draws its start from its
own child seed, so results do not depend on the batch layout.

``grid_certify_small`` is a brute-force cross-check for tiny tensors: a grid
over the first m-1 factors (modulo phase) gives a lower bound after polishing
and, through a Lipschitz estimate, a crude upper bound.
"""

from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field

import numpy as np

from .tensor_core import ComplexTensor, RankOneTuple, residual

GRID_MAX_REAL_DIM = 8


@dataclass(frozen=True)
class HopmConfig:
    restarts: int = 64
    max_sweeps: int = 2000
    lam_tol: float = 1e-12  # stop once a sweep changes lambda by less
    residual_tol: float = 1e-10  # ... and the eigen-residual is this small
    seed: int = 0


@dataclass
class OracleResult:
    lam: float
    vectors: RankOneTuple
    residual: float
    values: np.ndarray = field(repr=False)  # best value reached by each restart
    sweeps: int = 0


def _einsum_spec(m: int, k: int) -> str:
    letters = string.ascii_lowercase[:m]
    ins = [letters] + ["Z" + letters[i] for i in range(m) if i != k]
    return ",".join(ins) + "->Z" + letters[k]


def batch_contract(ac: np.ndarray, zs: list[np.ndarray], k: int) -> np.ndarray:
    """``<A, (x)_{i != k} z^(i)>`` for a batch; ``ac`` is ``conj(A)``, ``zs[i]`` has shape (B, n_i)."""
    m = ac.ndim
    ops = [zs[i] for i in range(m) if i != k]
    return np.einsum(_einsum_spec(m, k), ac, *ops, optimize=True)


def _sweep(ac, zs, eps=1e-300):
    """One alternating sweep in place; returns lambda per batch entry and a
    mask of entries whose contraction vanished."""
    lam = None
    dead = np.zeros(zs[0].shape[0], dtype=bool)
    for k in range(ac.ndim):
        v = batch_contract(ac, zs, k)
        nrm = np.linalg.norm(v, axis=1)
        bad = nrm <= eps
        dead |= bad
        zs[k] = np.where(bad[:, None], zs[k], v.conj() / np.where(bad, 1.0, nrm)[:, None])
        lam = nrm
    return lam, dead


def _batch_residual(ac, zs, lam):
    out = np.zeros(zs[0].shape[0])
    for k in range(ac.ndim):
        v = batch_contract(ac, zs, k)
        out = np.maximum(out, np.linalg.norm(v - lam[:, None] * zs[k].conj(), axis=1))
    return out


def _gaussian_start(dims, rng):
    out = []
    for n in dims:
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        out.append(v / np.linalg.norm(v))
    return out


def run_batch(a, starts: list[np.ndarray], max_sweeps: int, lam_tol: float = 1e-12,
              residual_tol: float = 1e-10, reinit=None):
    """Alternating updates from a batch of starts until every entry has
    converged or the sweep cap is hit.

    ``starts[k]`` has shape (B, n_k). ``reinit(b)`` may supply a fresh start
    for entry ``b`` if its contraction vanishes. Returns
    ``(lam, factors, residuals, sweeps)``.
    """
    e = a.entries if isinstance(a, ComplexTensor) else np.asarray(a, dtype=complex)
    ac = e.conj()
    zs = [np.array(s, dtype=complex) for s in starts]
    B = zs[0].shape[0]
    lam = np.full(B, -np.inf)
    res = np.full(B, np.inf)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        new, dead = _sweep(ac, zs)
        if dead.any():
            for b in np.flatnonzero(dead):
                if reinit is None:
                    continue
                for k, v in enumerate(reinit(b)):
                    zs[k][b] = v
            new = np.where(dead, -np.inf, new)
        delta = np.abs(new - lam)
        lam = new
        if np.all(delta < lam_tol):
            res = _batch_residual(ac, zs, lam)
            if np.all(res <= residual_tol):
                break
    else:
        res = _batch_residual(ac, zs, lam)
    if not np.isfinite(res).all():
        res = _batch_residual(ac, zs, np.where(np.isfinite(lam), lam, 0.0))
    lam = np.where(np.isfinite(lam), lam, 0.0)
    return lam, zs, res, sweeps


def hopm(a: ComplexTensor, restarts: int = 64, sweeps: int = 2000, seed: int = 0,
         cfg: HopmConfig | None = None) -> OracleResult:
    """Best alternating-power-method eigenpair over ``restarts`` random starts."""
    if cfg is None:
        cfg = HopmConfig(restarts=restarts, max_sweeps=sweeps, seed=seed)
    if cfg.restarts < 1:
        raise ValueError("need at least one restart")
    dims = a.dims
    if a.norm() == 0.0:
        vecs = RankOneTuple(tuple(np.eye(n, dtype=complex)[0] for n in dims))
        return OracleResult(0.0, vecs, 0.0, np.zeros(cfg.restarts), 0)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)]
    inits = [_gaussian_start(dims, r) for r in rngs]
    starts = [np.array([init[k] for init in inits]) for k in range(len(dims))]
    lam, zs, res, used = run_batch(a, starts, cfg.max_sweeps, cfg.lam_tol, cfg.residual_tol,
                                   reinit=lambda b: _gaussian_start(dims, rngs[b]))
    best = int(np.argmax(lam))  # ties resolve to the lowest restart index
    vecs = RankOneTuple(tuple(z[best] for z in zs))
    return OracleResult(float(lam[best]), vecs, float(residual(a, float(lam[best]), vecs)), lam, used)


# -- brute-force grid --------------------------------------------------------

def _sphere_grid(n: int, resolution: int):
    """Unit vectors of C^n with real non-negative first entry, on a grid of
    hyperspherical angles; returns (points (P, n) complex, covering radius).

    The real coordinates are (x_1, x_2, y_2, ..., x_n, y_n) on S^(2n-2);
    every unit vector is a phase times one of them.
    """
    d = 2 * n - 1
    if d == 1:
        return np.ones((1, 1), dtype=complex), 0.0
    axes, steps = [], []
    for j in range(d - 1):
        if j == d - 2:
            g = np.linspace(0.0, 2 * math.pi, resolution, endpoint=False)
            steps.append(2 * math.pi / resolution)
        elif j == 0:
            g = np.linspace(0.0, math.pi / 2, resolution)
            steps.append(math.pi / 2 / (resolution - 1))
        else:
            g = np.linspace(0.0, math.pi, resolution)
            steps.append(math.pi / (resolution - 1))
        axes.append(g)
    ang = np.array(list(itertools.product(*axes)))  # (P, d-1)
    P = ang.shape[0]
    x = np.ones((P, d))
    s = np.ones(P)
    for j in range(d - 1):
        x[:, j] = s * np.cos(ang[:, j])
        s = s * np.sin(ang[:, j])
    x[:, d - 1] = s
    z = np.empty((P, n), dtype=complex)
    z[:, 0] = x[:, 0]
    z[:, 1:] = x[:, 1::2] + 1j * x[:, 2::2]
    # each angle moves the point with speed <= 1
    return z, 0.5 * sum(steps)


@dataclass
class GridBand:
    lower: float
    upper: float
    grid_best: float
    points: int
    vectors: RankOneTuple | None = None


def grid_certify_small(a: ComplexTensor, resolution: int = 9, polish_sweeps: int = 200) -> GridBand:
    """Grid search over the first m-1 factors with a Lipschitz band.

    With the last factor chosen optimally the objective is
    ``g = || <A, z^(1) (x) ... (x) z^(m-1)> ||``, which is Lipschitz with
    constant ``||A||_F`` in each factor. ``upper`` is the best grid value plus
    ``||A||_F`` times the sum of the m-1 per-factor covering radii.
    """
    dims = a.dims
    m = a.order
    real_dim = sum(2 * n for n in dims[:-1])
    if real_dim > GRID_MAX_REAL_DIM:
        raise ValueError(f"grid search limited to real dimension {GRID_MAX_REAL_DIM} "
                         f"over the first m-1 factors, got {real_dim}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    nrm = a.norm()
    if nrm == 0.0:
        return GridBand(0.0, 0.0, 0.0, 0, None)
    grids = [_sphere_grid(n, resolution) for n in dims[:-1]]
    pts = list(itertools.product(*[range(g[0].shape[0]) for g in grids]))
    idx = np.array(pts, dtype=int).reshape(len(pts), m - 1)
    zs = [grids[k][0][idx[:, k]] for k in range(m - 1)]
    ac = a.entries.conj()
    v = batch_contract(ac, zs + [np.zeros((len(pts), dims[-1]))], m - 1)
    vals = np.linalg.norm(v, axis=1)
    grid_best = float(vals.max())
    radius = sum(g[1] for g in grids)
    upper = grid_best + nrm * radius
    last = v.conj() / np.where(vals > 0, vals, 1.0)[:, None]
    starts = zs + [last]
    lam, fz, _, _ = run_batch(a, starts, polish_sweeps, lam_tol=1e-13, residual_tol=0.0)
    b = int(np.argmax(lam))
    lower = float(lam[b])
    return GridBand(lower, max(upper, lower), grid_best, len(pts), RankOneTuple(tuple(z[b] for z in fz)))
