"""Dense complex tensors, rank-one tuples and U-eigenpair residuals.

Conjugation convention: every inner product conjugates its FIRST argument,

    <A, B> = sum A*_{i1..im} B_{i1..im},

so ``<A, z1 (x) ... (x) zm>`` conjugates the tensor entries, not the vectors.
Mode indices are zero-based throughout the Python API.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SymmetryClass:
    """``kind`` is ``"none"``, ``"partial"`` or ``"full"``.

    ``groups`` holds disjoint tuples of (zero-based) modes that the tensor is
    invariant under permuting; it is empty for ``"none"``.
    """

    kind: str = "none"
    groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("none", "partial", "full"):
            raise ValueError(f"unknown symmetry kind {self.kind!r}")
        groups = tuple(tuple(sorted(int(i) for i in g)) for g in self.groups)
        seen: set[int] = set()
        for g in groups:
            if len(g) < 2:
                raise ValueError(f"symmetry group {g} has fewer than two modes")
            if seen & set(g):
                raise ValueError("symmetry groups must be disjoint")
            seen |= set(g)
        if self.kind == "none" and groups:
            raise ValueError("kind 'none' takes no groups")
        if self.kind == "partial" and not groups:
            raise ValueError("kind 'partial' needs at least one group")
        object.__setattr__(self, "groups", tuple(sorted(groups)))

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def full(cls, order: int):
        return cls("full", (tuple(range(order)),) if order >= 2 else ())

    @classmethod
    def partial(cls, *groups):
        return cls("partial", tuple(tuple(g) for g in groups))

    def describe(self) -> str:
        if self.kind == "partial":
            return "partial:" + ",".join("[" + ",".join(str(i + 1) for i in g) + "]" for g in self.groups)
        return self.kind


def _invariant_under(entries: np.ndarray, perm: Sequence[int], tol: float) -> bool:
    return np.max(np.abs(entries - np.transpose(entries, perm)), initial=0.0) <= tol


def _swap(m: int, i: int, j: int) -> list[int]:
    perm = list(range(m))
    perm[i], perm[j] = perm[j], perm[i]
    return perm


def detect_symmetry(entries: np.ndarray, tol: float = SYMMETRY_TOL) -> SymmetryClass:
    """Largest symmetry class the array satisfies.

    Groups are connected components of the graph of mode transpositions that
    leave the array invariant; transpositions along a connected graph generate
    the full permutation group of that component.
    """
    entries = np.asarray(entries)
    m = entries.ndim
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(m), 2):
        if entries.shape[i] == entries.shape[j] and _invariant_under(entries, _swap(m, i, j), tol):
            parent[find(j)] = find(i)
    comps: dict[int, list[int]] = {}
    for i in range(m):
        comps.setdefault(find(i), []).append(i)
    groups = tuple(tuple(g) for g in comps.values() if len(g) >= 2)
    if m >= 2 and len(groups) == 1 and len(groups[0]) == m:
        return SymmetryClass.full(m)
    if groups:
        return SymmetryClass("partial", groups)
    return SymmetryClass.none()


class ComplexTensor:
    """Immutable dense complex array with a declared (and verified) symmetry."""

    __slots__ = ("_entries", "symmetry")

    def __init__(self, entries, symmetry: SymmetryClass | None = None, tol: float = SYMMETRY_TOL):
        arr = np.array(entries, dtype=complex)
        if arr.ndim < 1:
            raise ValueError("a tensor needs at least one mode")
        if any(n < 1 for n in arr.shape):
            raise ValueError(f"dimensions must be positive, got {arr.shape}")
        arr.setflags(write=False)
        self._entries = arr
        if symmetry is None:
            symmetry = SymmetryClass.none()
        self._verify(symmetry, tol)
        self.symmetry = symmetry

    def _verify(self, sym: SymmetryClass, tol: float):
        m = self.order
        for g in sym.groups:
            if max(g) >= m:
                raise ValueError(f"symmetry group {g} refers to a mode >= order {m}")
            if len({self.dims[i] for i in g}) != 1:
                raise ValueError(f"modes {g} have unequal dimensions {self.dims}")
            for i, j in itertools.combinations(g, 2):
                if not _invariant_under(self._entries, _swap(m, i, j), tol):
                    raise ValueError(f"tensor is not symmetric in modes {i} and {j}")
        if sym.kind == "full" and m >= 2 and sym.groups != (tuple(range(m)),):
            raise ValueError("full symmetry must cover all modes")

    @classmethod
    def from_flat(cls, dims: Sequence[int], flat, symmetry: SymmetryClass | None = None):
        flat = np.asarray(flat, dtype=complex)
        if flat.size != int(np.prod(dims)):
            raise ValueError(f"{flat.size} entries do not fill dims {tuple(dims)}")
        return cls(flat.reshape(tuple(dims)), symmetry)

    @classmethod
    def auto(cls, entries, tol: float = SYMMETRY_TOL):
        """Build with the detected symmetry class."""
        entries = np.asarray(entries, dtype=complex)
        return cls(entries, detect_symmetry(entries, tol))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dims(self) -> tuple[int, ...]:
        return self._entries.shape

    @property
    def order(self) -> int:
        return self._entries.ndim

    @property
    def flat(self) -> np.ndarray:
        return self._entries.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.flat))

    def transpose(self, perm: Sequence[int]) -> "ComplexTensor":
        return ComplexTensor(np.transpose(self._entries, perm), detect_symmetry(np.transpose(self._entries, perm)))

    def __repr__(self):
        return f"ComplexTensor(dims={self.dims}, symmetry={self.symmetry.describe()})"


@dataclass(frozen=True)
class RankOneTuple:
    """Factors ``z^(1), ..., z^(m)`` of a rank-one tensor."""

    vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.vectors:
            a = np.array(v, dtype=complex).reshape(-1)
            a.setflags(write=False)
            vecs.append(a)
        object.__setattr__(self, "vectors", tuple(vecs))

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, k):
        return self.vectors[k]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vectors)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return all(abs(np.linalg.norm(v) - 1.0) <= tol for v in self.vectors)

    def normalized(self) -> "RankOneTuple":
        return RankOneTuple(tuple(v / np.linalg.norm(v) for v in self.vectors))

    def outer(self) -> np.ndarray:
        out = self.vectors[0]
        for v in self.vectors[1:]:
            out = np.multiply.outer(out, v)
        return out

    def scaled(self, phases: Sequence[complex]) -> "RankOneTuple":
        return RankOneTuple(tuple(p * v for p, v in zip(phases, self.vectors)))


@dataclass
class EigenpairResult:
    """Certified (or not) U-eigenpair together with its bounds."""

    lam: float
    vectors: RankOneTuple
    residual: float
    upper_bound: float = float("nan")
    lower_bound: float = float("nan")
    order_used: int = 0
    certified: bool = False
    certificate: dict = field(default_factory=dict)

    @property
    def bound_gap(self) -> float:
        return self.upper_bound - self.lam


def _entries(a) -> np.ndarray:
    return a.entries if isinstance(a, ComplexTensor) else np.asarray(a, dtype=complex)


def _vectors(t) -> tuple[np.ndarray, ...]:
    return t.vectors if isinstance(t, RankOneTuple) else tuple(np.asarray(v, dtype=complex) for v in t)


def inner_product(a, b) -> complex:
    """``sum conj(a) * b`` over all entries."""
    ea, eb = _entries(a), _entries(b)
    if ea.shape != eb.shape:
        raise ValueError(f"dimension mismatch: {ea.shape} vs {eb.shape}")
    return complex(np.vdot(ea.reshape(-1), eb.reshape(-1)))


def contract_all_but(a, t, k: int) -> np.ndarray:
    """``<A, (x)_{i != k} z^(i)>``: length-``n_k`` vector, entries of A conjugated."""
    e = _entries(a)
    vecs = _vectors(t)
    m = e.ndim
    if not 0 <= k < m:
        raise IndexError(f"mode {k} out of range for order {m}")
    if len(vecs) != m:
        raise ValueError(f"tuple has {len(vecs)} vectors, tensor has order {m}")
    out = e.conj()
    for i in reversed(range(m)):
        if i == k:
            continue
        if vecs[i].shape != (e.shape[i],):
            raise ValueError(f"vector {i} has shape {vecs[i].shape}, expected ({e.shape[i]},)")
        out = np.tensordot(out, vecs[i], axes=([i], [0]))
    return out


def full_contraction(a, t) -> complex:
    """``<A, z^(1) (x) ... (x) z^(m)>``."""
    return complex(contract_all_but(a, t, 0) @ _vectors(t)[0])


def residual(a, lam: float, t) -> float:
    """max_k || <A, (x)_{i!=k} z^(i)> - lam * conj(z^(k)) ||."""
    vecs = _vectors(t)
    return max(float(np.linalg.norm(contract_all_but(a, vecs, k) - lam * vecs[k].conj()))
               for k in range(len(vecs)))


def companion_eigenpair(lam: float, t, m: int | None = None) -> tuple[float, RankOneTuple]:
    """Map ``(lam, {z})`` to ``(-lam, {eta z})`` with ``eta = exp(i pi / m)``."""
    vecs = _vectors(t)
    m = len(vecs) if m is None else m
    eta = np.exp(1j * np.pi / m)
    return -lam, RankOneTuple(tuple(eta * v for v in vecs))


def canonical_gauge(t) -> RankOneTuple:
    """Rotate phases so the first nonzero entry of every factor except the last
    is real and non-negative; the last factor absorbs the compensating phase.

    The rank-one tensor (and hence any residual) is unchanged.
    """
    vecs = [np.array(v, dtype=complex) for v in _vectors(t)]
    total = 1.0 + 0j
    for k in range(len(vecs) - 1):
        v = vecs[k]
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size == 0:
            continue
        ph = v[nz[0]] / abs(v[nz[0]])
        vecs[k] = v / ph
        total *= ph
    vecs[-1] = vecs[-1] * total
    return RankOneTuple(tuple(vecs))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_tensor(dims: Sequence[int], rng: np.random.Generator, normalize: bool = True) -> np.ndarray:
    a = rng.normal(size=tuple(dims)) + 1j * rng.normal(size=tuple(dims))
    return a / np.linalg.norm(a) if normalize else a
