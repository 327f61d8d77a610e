"""Jacobian minor constraints for sphere-constrained polynomial programs.

For an objective ``f`` and a constraint ``g`` over variables ``u_1..u_s`` the
rank condition ``rank [grad f, grad g] <= 1`` is encoded by the 2s - 3
anti-diagonal sums

    h_r = sum_{i < j, i + j = r + 2} (f_i g_j - f_j g_i),   r = 1, ..., 2s - 3,

(one-based i, j). Adding ``h_r = 0`` leaves the maximum unchanged and makes the
moment hierarchy exact at finite order.
"""

from __future__ import annotations

from typing import Sequence

from .poly import Polynomial, poly_sum, sphere_constraint


def _h_polys(f: Polynomial, g: Polynomial, variables: Sequence[int]) -> list[Polynomial]:
    s = len(variables)
    fg = {v: f.partial(v) for v in variables}
    gg = {v: g.partial(v) for v in variables}
    out = []
    for r in range(1, 2 * s - 2):
        terms = []
        for i in range(1, s + 1):
            j = r + 2 - i
            if not i < j <= s:
                continue
            vi, vj = variables[i - 1], variables[j - 1]
            terms.append(fg[vi] * gg[vj] - fg[vj] * gg[vi])
        out.append(poly_sum(terms, f.nvars))
    return out


def build_h_single(f: Polynomial, g: Polynomial, nvars: int | None = None) -> list[Polynomial]:
    """The 2s - 3 minor sums of (f, g) over all ``s`` ring variables."""
    nvars = f.nvars if nvars is None else nvars
    if f.nvars != nvars or g.nvars != nvars:
        raise ValueError("f and g must live in the same ring")
    if nvars < 2:
        raise ValueError("need at least two variables to form a Jacobian minor")
    return _h_polys(f, g, list(range(nvars)))


def build_h_blocks(f: Polynomial, blocks: Sequence[Sequence[int]]) -> dict[tuple[int, int], Polynomial]:
    """Per-block minors ``h_{k,r}`` with block-local index pairs.

    ``blocks[k]`` lists the ring variables of block ``k``; its constraint is the
    unit sphere over those variables. Keys are ``(k, r)`` with one-based ``r``.
    """
    seen: set[int] = set()
    for blk in blocks:
        if seen & set(blk):
            raise ValueError("blocks overlap")
        seen |= set(blk)
        if len(blk) < 2:
            raise ValueError(f"block {list(blk)} has fewer than two variables")
    out = {}
    for k, blk in enumerate(blocks):
        g = sphere_constraint(blk, f.nvars)
        for r, h in enumerate(_h_polys(f, g, list(blk)), start=1):
            out[(k, r)] = h
    return out
