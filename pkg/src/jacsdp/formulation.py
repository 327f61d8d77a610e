"""Real polynomial programs whose maximum is the largest U-eigenvalue.

Three routes share the machinery:

``nonsym``
    maximize ``|| <B, u^(1) (x) ... (x) u^(m-1)> ||^2`` over unit blocks; the
    last mode is recovered afterwards.
``partial``
    as ``nonsym`` but modes of a symmetry group share one block, e.g.
    ``|| <B, (u^(1))^2> ||^2`` for a tensor symmetric in its first two modes.
``sym``
    maximize ``Re <A, z^m>`` (not squared) over one unit block.

In the squared routes each block's first imaginary coordinate is pinned to
zero (gauge fixing) by deleting that variable from the ring. The Jacobian
constraints are built before the deletion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .jacobian import build_h_blocks
from .poly import Polynomial, multilinear_form, poly_sum, sphere_constraint
from .realify import RealTensor, complexify, realify
from .tensor_core import ComplexTensor, SymmetryClass

ROUTES = ("nonsym", "partial", "sym")


def _offsets(sizes):
    out, pos = [], 0
    for s in sizes:
        out.append(pos)
        pos += s
    return out, pos


def build_objective_squared(b: RealTensor, block_of_mode: dict[int, int], excluded: int) -> Polynomial:
    """``|| <B, blocks over all modes but ``excluded``> ||^2``.

    ``block_of_mode`` maps every non-excluded mode to a block id (0, 1, ...);
    modes sharing an id share one variable block. Blocks are laid out in id
    order, each with ``2 n`` variables (real parts first).
    """
    m = b.order
    free = [k for k in range(m) if k != excluded]
    if sorted(block_of_mode) != free:
        raise ValueError(f"block map must cover exactly the modes {free}")
    nblocks = max(block_of_mode.values()) + 1
    if sorted(set(block_of_mode.values())) != list(range(nblocks)):
        raise ValueError("block ids must be 0..K-1")
    size = {}
    for k, blk in block_of_mode.items():
        if size.setdefault(blk, b.dims[k]) != b.dims[k]:
            raise ValueError(f"modes identified into block {blk} have different dimensions")
    offs, nvars = _offsets([size[j] for j in range(nblocks)])
    ent = np.moveaxis(b.entries, excluded, -1)
    var_index = [list(range(offs[block_of_mode[k]], offs[block_of_mode[k]] + b.dims[k])) for k in free]
    comps = [multilinear_form(ent[..., j], var_index, nvars) for j in range(ent.shape[-1])]
    return poly_sum((p * p for p in comps), nvars)


def build_objective_symmetric(a: ComplexTensor) -> Polynomial:
    """``Re <A, (x + i y)^m>`` in the ``2n`` variables ``(x, y)``."""
    if a.symmetry.kind != "full" and a.order > 1:
        raise ValueError("symmetric objective needs a fully symmetric tensor")
    b = realify(a)
    nv = b.dims[0]
    return multilinear_form(b.entries, [list(range(nv))] * a.order, nv)


@dataclass
class Formulation:
    """A sphere-constrained polynomial program plus the bookkeeping needed to
    turn its real solutions back into tensor factors."""

    route: str
    tensor: ComplexTensor
    f: Polynomial  # objective in the reduced ring
    sphere: list[Polynomial]  # g_k in the reduced ring
    jacobian: dict[tuple[int, int], Polynomial]  # h_{k,r} in the reduced ring
    block_modes: list[tuple[int, ...]]  # tensor modes carried by each block
    block_vars: list[list[int]]  # full-ring variables of each block
    full_nvars: int
    removed: list[int]  # full-ring variables pinned to zero
    excluded: int | None  # mode recovered afterwards (squared routes)
    realified: RealTensor = field(repr=False, default=None)

    @property
    def nvars(self) -> int:
        return self.f.nvars

    @property
    def squared(self) -> bool:
        return self.route != "sym"

    def constraints(self, with_jacobian: bool = True) -> list[Polynomial]:
        out = list(self.sphere)
        if with_jacobian:
            out += [h for h in self.jacobian.values() if not h.is_zero()]
        return out

    def expand(self, u) -> np.ndarray:
        """Reduced-ring point to full-ring point (pinned variables set to 0)."""
        u = np.asarray(u, dtype=float)
        keep = [i for i in range(self.full_nvars) if i not in set(self.removed)]
        full = np.zeros(self.full_nvars)
        full[keep] = u
        return full

    def reduce(self, full) -> np.ndarray:
        keep = [i for i in range(self.full_nvars) if i not in set(self.removed)]
        return np.asarray(full, dtype=float)[keep]

    def reduced_blocks(self) -> list[list[int]]:
        """Reduced-ring variables of each block."""
        keep = [i for i in range(self.full_nvars) if i not in set(self.removed)]
        where = {v: j for j, v in enumerate(keep)}
        return [[where[v] for v in blk if v in where] for blk in self.block_vars]

    def block_vectors(self, u) -> list[np.ndarray]:
        """Real block vectors ``u^(k)`` of a reduced-ring point."""
        full = self.expand(u)
        return [full[v] for v in self.block_vars]

    def factors(self, u) -> list[np.ndarray] | None:
        """Complex factors for every tensor mode from a reduced-ring point.

        Squared routes recover the excluded mode from the contraction; returns
        None when that contraction vanishes.
        """
        blocks = [b / np.linalg.norm(b) for b in self.block_vectors(u)]
        m = self.tensor.order
        us: list[np.ndarray | None] = [None] * m
        for blk, modes in zip(blocks, self.block_modes):
            for k in modes:
                us[k] = blk
        if self.excluded is not None:
            last = recover_last_block(self.realified, us, self.excluded)
            if last is None:
                return None
            us[self.excluded] = last
        return [complexify(v) for v in us]


def recover_last_block(b: RealTensor, us, excluded: int, lam: float | None = None,
                       lam_min: float = 1e-8) -> np.ndarray | None:
    """``<B, u^(1) (x) ... > / lam`` along the excluded mode.

    With ``lam=None`` the contraction norm is used, which equals the maximal
    value at a maximizer.
    """
    v = b.contract(us, skip=excluded)
    nrm = float(np.linalg.norm(v)) if lam is None else float(lam)
    if nrm <= lam_min:
        return None
    return v / nrm


def _block_map(m: int, symmetry: SymmetryClass, route: str):
    """Choose the excluded mode and group the remaining modes into blocks."""
    groups = symmetry.groups if route == "partial" else ()
    grouped = {k for g in groups for k in g}
    ungrouped = [k for k in range(m) if k not in grouped]
    excluded = ungrouped[-1] if ungrouped else m - 1
    block_modes: list[tuple[int, ...]] = []
    assigned: set[int] = set()
    for k in range(m):
        if k == excluded or k in assigned:
            continue
        grp = next((g for g in groups if k in g), (k,))
        modes = tuple(j for j in grp if j != excluded)
        block_modes.append(modes)
        assigned |= set(modes)
    return excluded, block_modes


def choose_route(a: ComplexTensor) -> str:
    if a.symmetry.kind == "full" and a.order >= 2:
        return "sym"
    if a.symmetry.kind == "partial":
        return "partial"
    return "nonsym"


def formulate(a: ComplexTensor, route: str = "auto", gauge: bool = True) -> Formulation:
    if a.order < 2:
        raise ValueError("need a tensor of order >= 2")
    if route == "auto":
        route = choose_route(a)
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}")
    b = realify(a)
    m = a.order

    if route == "sym":
        if a.symmetry.kind != "full":
            raise ValueError("route 'sym' needs a fully symmetric tensor")
        f = build_objective_symmetric(a)
        nv = f.nvars
        blocks = [list(range(nv))]
        block_modes = [tuple(range(m))]
        excluded = None
        removed: list[int] = []
    else:
        if route == "partial" and a.symmetry.kind == "none":
            raise ValueError("route 'partial' needs a partially symmetric tensor")
        excluded, block_modes = _block_map(m, a.symmetry, route)
        block_of_mode = {k: j for j, modes in enumerate(block_modes) for k in modes}
        f = build_objective_squared(b, block_of_mode, excluded)
        offs, nv = _offsets([2 * a.dims[modes[0]] for modes in block_modes])
        blocks = [list(range(o, o + 2 * a.dims[modes[0]])) for o, modes in zip(offs, block_modes)]
        removed = [blk[len(blk) // 2] for blk in blocks] if gauge else []

    sphere = [sphere_constraint(blk, nv) for blk in blocks]
    jac = build_h_blocks(f, blocks)
    for i in sorted(removed, reverse=True):
        f = f.substitute_zero(i)
        sphere = [g.substitute_zero(i) for g in sphere]
        jac = {k: h.substitute_zero(i) for k, h in jac.items()}
    return Formulation(route, a, f, sphere, jac, block_modes, blocks, nv, removed, excluded, b)
