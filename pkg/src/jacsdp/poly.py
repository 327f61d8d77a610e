"""Sparse real multivariate polynomials.

Terms are stored as ``{exponent tuple: coefficient}``. Iteration and
serialization use graded-lexicographic order, which is also the order of the
monomial vector used by the moment relaxation (``1, u1, u2, ..., u1^2,
u1 u2, ...``).
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

import numpy as np

#: coefficients smaller than this after combination are dropped
DROP_TOL = 1e-14


def grlex_key(alpha: tuple[int, ...]):
    return (sum(alpha), tuple(-a for a in alpha))


def monomials_upto(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= ``degree`` in graded-lex order."""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            alpha = [0] * nvars
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return out


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` real variables."""

    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], float] | None = None,
                 drop_tol: float = DROP_TOL):
        self.nvars = int(nvars)
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.nvars:
                raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {self.nvars}")
            if min(alpha, default=0) < 0:
                raise ValueError(f"negative exponent in {alpha}")
            c = float(c)
            if abs(c) > drop_tol:
                clean[alpha] = c
        self._terms = dict(sorted(clean.items(), key=lambda t: grlex_key(t[0])))

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        alpha = [0] * nvars
        alpha[i] = 1
        return cls(nvars, {tuple(alpha): 1.0})

    # -- basic properties ---------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def coefficient(self, alpha) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({sum(a) for a in self._terms}) <= 1

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            raise TypeError(f"expected Polynomial, got {type(other).__name__}")
        if other.nvars != self.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _coerce(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.nvars, float(other))
        self._check(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, s: float) -> "Polynomial":
        return Polynomial(self.nvars, {a: s * c for a, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self.scale(float(other))
        self._check(other)
        out: dict[tuple[int, ...], float] = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, 0.0) + c * d
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.nvars, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, tuple(self._terms.items())))

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= atol for k in keys)

    # -- calculus and evaluation -------------------------------------------
    def partial(self, i: int) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.nvars} variables")
        out = {}
        for a, c in self._terms.items():
            if a[i] == 0:
                continue
            b = list(a)
            b[i] -= 1
            out[tuple(b)] = c * a[i]
        return Polynomial(self.nvars, out)

    def gradient(self) -> list["Polynomial"]:
        return [self.partial(i) for i in range(self.nvars)]

    def __call__(self, u) -> float:
        return self.evaluate(u)

    def evaluate(self, u) -> float:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.nvars:
            raise ValueError(f"point has {u.shape[-1]} coordinates, expected {self.nvars}")
        if not self._terms:
            return np.zeros(u.shape[:-1]) if u.ndim > 1 else 0.0
        exps = np.array(list(self._terms.keys()), dtype=int)
        coefs = np.array(list(self._terms.values()))
        mons = np.prod(u[..., None, :] ** exps, axis=-1)
        return mons @ coefs

    def substitute_zero(self, i: int) -> "Polynomial":
        """Set variable ``i`` to zero and drop it from the ring."""
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range")
        out = {a[:i] + a[i + 1:]: c for a, c in self._terms.items() if a[i] == 0}
        return Polynomial(self.nvars - 1, out)

    # -- text form ----------------------------------------------------------
    def to_text(self, fmt: str = ".12g") -> str:
        """One ``coef * u1^a u2^b`` line per term, graded-lex order."""
        lines = []
        for a, c in self._terms.items():
            factors = [f"u{i + 1}^{e}" for i, e in enumerate(a) if e]
            lines.append(f"{c:{fmt}} * " + (" ".join(factors) if factors else "1"))
        return "\n".join(lines)

    def __repr__(self):
        body = " + ".join(self.to_text().splitlines()) or "0"
        return f"Polynomial(nvars={self.nvars}: {body})"


def poly_sum(polys: Iterable[Polynomial], nvars: int) -> Polynomial:
    out: dict[tuple[int, ...], float] = {}
    for p in polys:
        for a, c in p.items():
            out[a] = out.get(a, 0.0) + c
    return Polynomial(nvars, out)


def sphere_constraint(block: Iterable[int], nvars: int) -> Polynomial:
    """``sum_{i in block} u_i^2 - 1`` (zero-based variable indices)."""
    terms = {(0,) * nvars: -1.0}
    for i in block:
        alpha = [0] * nvars
        alpha[i] = 2
        terms[tuple(alpha)] = terms.get(tuple(alpha), 0.0) + 1.0
    return Polynomial(nvars, terms)


def multilinear_form(coeffs: np.ndarray, var_index: list[list[int]], nvars: int) -> Polynomial:
    """``sum_j coeffs[j] * prod_k u[var_index[k][j_k]]``.

    ``var_index[k]`` maps positions along axis ``k`` of ``coeffs`` to ring
    variables; repeated variables across axes produce higher powers.
    """
    out: dict[tuple[int, ...], float] = {}
    for idx in itertools.product(*(range(s) for s in coeffs.shape)):
        c = coeffs[idx]
        if c == 0.0:
            continue
        alpha = [0] * nvars
        for k, j in enumerate(idx):
            alpha[var_index[k][j]] += 1
        key = tuple(alpha)
        out[key] = out.get(key, 0.0) + float(c)
    return Polynomial(nvars, out)
