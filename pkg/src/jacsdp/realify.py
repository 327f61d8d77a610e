"""Real form of the complex multilinear objective.

For ``u^(k) = (x^(k), y^(k))`` the real tensor ``B`` satisfies

    <B, u^(1) (x) ... (x) u^(m)> = Re <A, (x^(1) + i y^(1)) (x) ... >.

Each mode is lifted through ``L = [I, iI]`` (so ``z = L u``); ``B`` is the real
part of ``conj(A)`` multiplied by ``L`` along every mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor_core import ComplexTensor, detect_symmetry


@dataclass(frozen=True)
class RealTensor:
    entries: np.ndarray
    block_dims: tuple[int, ...]  # the complex dimensions n_k; entries has shape 2 n_k per mode

    @property
    def dims(self) -> tuple[int, ...]:
        return self.entries.shape

    @property
    def order(self) -> int:
        return self.entries.ndim

    def contract(self, us, skip: int | None = None) -> np.ndarray:
        """Contract mode ``k`` with ``us[k]`` for every ``k != skip``."""
        out = self.entries
        for k in reversed(range(self.order)):
            if k == skip:
                continue
            out = np.tensordot(out, np.asarray(us[k], dtype=float), axes=([k], [0]))
        return out


def lift_matrix(n: int) -> np.ndarray:
    return np.hstack([np.eye(n), 1j * np.eye(n)])


def realify(a) -> RealTensor:
    e = a.entries if isinstance(a, ComplexTensor) else np.asarray(a, dtype=complex)
    out = e.conj()
    for k, n in enumerate(e.shape):
        # contract mode k with L (n x 2n); tensordot moves the new axis last,
        # so cycling through all modes restores the original order
        out = np.tensordot(out, lift_matrix(n), axes=([0], [0]))
    return RealTensor(np.ascontiguousarray(out.real), tuple(e.shape))


def complexify(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size % 2:
        raise ValueError(f"expected an even-length real vector, got shape {u.shape}")
    n = u.size // 2
    return u[:n] + 1j * u[n:]


def decomplexify(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    return np.concatenate([z.real, z.imag])


def realified_symmetry(b: RealTensor):
    return detect_symmetry(b.entries)
